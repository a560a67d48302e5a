import logging

from collections.abc import Sequence

from htn_core.domain import PlanningProblem, Task
from htn_core.planner import HtnPlan, plan
from mobilization_domain.costing import plan_cost
from mobilization_domain.domain import create_domain, goal_task
from mobilization_domain.heuristics import gamma_task
from mobilization_domain.model import (
    EnterpriseEnvironment,
    InfeasibleReason,
    InfeasibleTaskRecord,
    MobilizationTask,
    Plan,
    PolicyConfig,
    SearchStats,
)
from mobilization_domain.operators import step_for
from mobilization_domain.state import WorldState


logger = logging.getLogger(__name__)


class PlanningFailed(RuntimeError):
    """Raised in strict mode when some goal task has no decomposition."""

    def __init__(self, task_ids: Sequence[str], stats: SearchStats):
        self.task_ids = tuple(task_ids)
        self.stats = stats
        super().__init__(f'no feasible plan for {", ".join(self.task_ids) or "the goal tasks"}')


def build_problem(env: EnterpriseEnvironment, tasks: Sequence[MobilizationTask]) -> PlanningProblem:
    by_id: dict[str, MobilizationTask] = {}
    for task in tasks:
        if task.task_id in by_id:
            raise ValueError(f'duplicate task id {task.task_id}')
        task.check_against(env)
        by_id[task.task_id] = task

    def priority(goal: Task) -> float:
        return gamma_task(by_id[goal.arguments[0]])

    return PlanningProblem(
        initial_state=WorldState.initial(env),
        domain=create_domain(env, by_id),
        goal_tasks=tuple(goal_task(task) for task in tasks),
        priority=priority,
        strict=env.policy.strict_deadlines,
    )


def to_plan(result: HtnPlan, env: EnterpriseEnvironment, tasks: Sequence[MobilizationTask], stats: SearchStats) -> Plan:
    steps = tuple(step_for(action, index) for index, action in enumerate(result.actions, start=1))
    infeasible = tuple(
        InfeasibleTaskRecord(task_id=goal.task.arguments[0], reason=InfeasibleReason(goal.reason))
        for goal in result.infeasible
    )
    skipped = {record.task_id for record in infeasible}
    by_id = {task.task_id: task for task in tasks}
    order = tuple(goal.arguments[0] for goal in result.goal_order)
    costs = tuple(
        plan_cost([step for step in steps if step.task_id == task_id], env, by_id[task_id])
        for task_id in order
        if task_id not in skipped
    )
    return Plan(steps=steps, infeasible=infeasible, costs=costs, task_order=order, stats=stats)


def plan_mobilization(
    env: EnterpriseEnvironment,
    tasks: Sequence[MobilizationTask],
    policy: PolicyConfig | None = None,
) -> Plan:
    """Plan every task of the problem against `env`.

    Lenient mode reports infeasible tasks in the plan; strict mode raises
    `PlanningFailed` instead.
    """
    if policy is not None:
        env = env.with_policy(policy)
    outcome = plan(build_problem(env, tasks))
    stats = SearchStats(nodes_expanded=outcome.nodes_expanded, backtracks=outcome.backtracks)
    if not outcome.succeeded:
        raise PlanningFailed([goal.arguments[0] for goal in outcome.result.failed_goals], stats)
    result = to_plan(outcome.result, env, tasks, stats)
    for record in result.infeasible:
        logger.warning('Task %s is infeasible: %s', record.task_id, record.reason)
    return result
