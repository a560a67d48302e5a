import logging

from collections.abc import Callable, Sequence
from dataclasses import dataclass, replace
from typing import Any

from htn_core.domain import (
    ContractViolation,
    Domain,
    DomainDefinitionError,
    GroundAction,
    MethodInstance,
    PlanningProblem,
    Task,
    TaskKind,
)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InfeasibleGoal:
    task: Task
    reason: str


@dataclass(frozen=True)
class HtnPlan:
    actions: tuple[GroundAction, ...]
    infeasible: tuple[InfeasibleGoal, ...]
    goal_order: tuple[Task, ...]
    final_state: Any


@dataclass(frozen=True)
class Failure:
    failed_goals: tuple[Task, ...]

    def __str__(self) -> str:
        return f'no decomposition for {", ".join(t.ident for t in self.failed_goals) or "the goals"}'


@dataclass(frozen=True)
class SearchOutcome:
    result: HtnPlan | Failure
    nodes_expanded: int
    backtracks: int

    @property
    def succeeded(self) -> bool:
        return isinstance(self.result, HtnPlan)


@dataclass(frozen=True)
class _Node:
    state: Any
    network: tuple[Task, ...]
    agenda: tuple[Task, ...]
    actions: tuple[GroundAction, ...] = ()
    infeasible: tuple[InfeasibleGoal, ...] = ()
    order: tuple[Task, ...] = ()
    goal: Task | None = None
    abandon: bool = False


def select_next_task(
    agenda: Sequence[Task], scorer: Callable[[Task], float]
) -> tuple[Task, tuple[Task, ...]]:
    """Pop the task of highest score (ties: smallest identifier).

    Returns the chosen task and the agenda without it.
    """
    position = min(range(len(agenda)), key=lambda i: (-scorer(agenda[i]), agenda[i].ident))
    return agenda[position], tuple(agenda[:position]) + tuple(agenda[position + 1:])


def expand_primitive(task: Task, state: Any, domain: Domain) -> list[GroundAction]:
    return domain.operator(task.name).ground(state, task.arguments)


def apply_action(state: Any, action: GroundAction) -> Any:
    """Apply `action` to a snapshot of `state`; `state` itself is untouched."""
    operator = action.operator
    if operator is None:
        raise ContractViolation(f'action {action.name} is not bound to an operator')
    if not operator.precondition(state, action.arguments):
        raise ContractViolation(f'{action.name} {action.arguments} is not applicable')
    successor = state.snapshot()
    successor = operator.negative_effects(successor, action.arguments)
    return operator.positive_effects(successor, action.arguments)


def expand_compound(task: Task, state: Any, domain: Domain) -> list[MethodInstance]:
    methods = domain.methods_for(task.name)
    if not methods:
        raise DomainDefinitionError(f'no method decomposes {task.name}')
    instances = [instance for method in methods for instance in method.ground(state, task)]
    return sorted(instances, key=lambda instance: (-instance.score, instance.ident))


def plan(problem: PlanningProblem) -> SearchOutcome:
    """Decompose the goal tasks by explicit-stack depth-first search."""
    domain = problem.domain
    stack = [_Node(state=problem.initial_state, network=(), agenda=tuple(problem.goal_tasks))]
    nodes_expanded = 0
    backtracks = 0
    failed: dict[str, Task] = {}
    logger.info('--- 🧭 Planning %d goal tasks (%s mode) ---', len(problem.goal_tasks), 'strict' if problem.strict else 'lenient')

    while stack:
        node = stack.pop()
        if node.abandon:
            reason = domain.diagnose(node.state, node.goal) if domain.diagnose else 'infeasible'
            logger.info('--- ❌ %s cannot be completed (%s), moving on ---', node.goal.ident, reason)
            node = replace(
                node,
                infeasible=node.infeasible + (InfeasibleGoal(node.goal, reason),),
                abandon=False,
                goal=None,
            )

        if not node.network:
            if not node.agenda:
                logger.info('--- ✅ Plan found: %d actions, %d nodes, %d backtracks ---', len(node.actions), nodes_expanded, backtracks)
                return SearchOutcome(
                    result=HtnPlan(
                        actions=node.actions,
                        infeasible=node.infeasible,
                        goal_order=node.order,
                        final_state=node.state,
                    ),
                    nodes_expanded=nodes_expanded,
                    backtracks=backtracks,
                )
            goal, remaining = select_next_task(node.agenda, problem.priority)
            logger.debug('selected goal %s', goal.ident)
            order = node.order + (goal,)
            if not problem.strict:
                stack.append(replace(node, agenda=remaining, order=order, goal=goal, abandon=True))
            stack.append(replace(node, network=(goal,), agenda=remaining, order=order, goal=goal))
            continue

        task, rest = node.network[0], node.network[1:]
        nodes_expanded += 1
        if domain.kind_of(task) is TaskKind.PRIMITIVE:
            children = [
                replace(node, state=apply_action(node.state, action), network=rest, actions=node.actions + (action,))
                for action in expand_primitive(task, node.state, domain)
            ]
        else:
            instances = expand_compound(task, node.state, domain)
            logger.debug('%s: %d alternatives %s', task.ident, len(instances), [i.ident for i in instances])
            children = [replace(node, network=instance.subtasks + rest) for instance in instances]

        if not children:
            backtracks += 1
            logger.debug('dead end at %s', task.ident)
            if node.goal is not None:
                failed.setdefault(node.goal.ident, node.goal)
            continue
        stack.extend(reversed(children))

    logger.info('--- ❌ Search space exhausted after %d nodes ---', nodes_expanded)
    return SearchOutcome(
        result=Failure(failed_goals=tuple(failed[k] for k in sorted(failed))),
        nodes_expanded=nodes_expanded,
        backtracks=backtracks,
    )
