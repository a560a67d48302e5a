"""How a mobilization task decomposes.

    accomplish(t) --engage--> !ResourceShortage(t, m, lack)* deliver(t, e)
    deliver(t, e) --dispatch--> [!start(...)]  !load !transport !unload !back  ...

`engage` has one instance per line engagement allowed by the policy and the
budgets; `dispatch` has one instance per vehicle pool that meets the deadline.
Line starts are interleaved lazily with the trips.
"""
import logging

from collections.abc import Mapping

from htn_core.domain import Domain, Method, MethodInstance, Task
from mobilization_domain.model import (
    EnterpriseEnvironment,
    InfeasibleReason,
    MobilizationTask,
)
from mobilization_domain.operators import (
    BACK,
    LOAD,
    SHORTAGE,
    START,
    TRANSPORT,
    UNLOAD,
    build_operators,
    task_demands,
)
from mobilization_domain.production import engagement_candidates, fits_budget
from mobilization_domain.state import WorldState
from mobilization_domain.transport import delivery_options, delivery_subtasks, meets_deadline
from shortage.ledger import check_and_virtualize


logger = logging.getLogger(__name__)

ACCOMPLISH = 'accomplish'
DELIVER = 'deliver'


def create_domain(env: EnterpriseEnvironment, tasks: Mapping[str, MobilizationTask]) -> Domain:
    def ground_engage(state: WorldState, goal: Task):
        task = tasks[goal.arguments[0]]
        records, _ = check_and_virtualize(task.task_id, task_demands(env, task), state.material_ledger)
        shortage_tasks = tuple(
            Task(SHORTAGE, (task.task_id, r.material_id, r.lack_amount)) for r in records
        )
        for engagement in engagement_candidates(task, state, env):
            if not fits_budget(engagement, state, env):
                continue
            yield MethodInstance(
                method='engage',
                ident=engagement.ident,
                score=engagement.score,
                subtasks=shortage_tasks + (Task(DELIVER, (task.task_id, engagement)),),
            )

    def ground_dispatch(state: WorldState, goal: Task):
        task_id, engagement = goal.arguments
        task = tasks[task_id]
        for option in delivery_options(task, engagement.schedule, state, env):
            if not meets_deadline(option.dispatch, task, env.policy.deadline_check):
                logger.debug('%s under %s misses the deadline', option.ident, engagement.ident)
                continue
            yield MethodInstance(
                method='dispatch',
                ident=option.ident,
                score=option.score,
                subtasks=delivery_subtasks(task_id, engagement.schedule, option.dispatch),
            )

    def diagnose(state: WorldState, goal: Task) -> str:
        return diagnose_task(tasks[goal.arguments[0]], state, env)

    return Domain(
        operators=build_operators(env, tasks),
        methods=(
            Method('engage', ACCOMPLISH, ground_engage, frozenset({SHORTAGE, DELIVER})),
            Method('dispatch', DELIVER, ground_dispatch, frozenset({START, LOAD, TRANSPORT, UNLOAD, BACK})),
        ),
        diagnose=diagnose,
    )


def diagnose_task(task: MobilizationTask, state: WorldState, env: EnterpriseEnvironment) -> InfeasibleReason:
    """Why `task` cannot be completed from `state`."""
    if not env.capable_lines(task.product_id) or not env.capable_vehicles(task.product_id):
        return InfeasibleReason.NO_CAPABILITY
    if not any(fits_budget(c, state, env) for c in engagement_candidates(task, state, env)):
        return InfeasibleReason.UTILITY_EXHAUSTED
    return InfeasibleReason.DEADLINE


def goal_task(task: MobilizationTask) -> Task:
    return Task(ACCOMPLISH, (task.task_id,))
