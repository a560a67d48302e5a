import logging

from collections.abc import Sequence

from mobilization_domain.model import (
    ActionKind,
    EnterpriseEnvironment,
    MobilizationTask,
    PlanStep,
    TaskCost,
)
from timeline.production import ProductionSchedule


logger = logging.getLogger(__name__)


def plan_cost(
    steps: Sequence[PlanStep],
    env: EnterpriseEnvironment,
    task: MobilizationTask | None = None,
) -> TaskCost:
    """Cost of one task's plan segment: line hours at cost_rate plus trip costs.

    Operating hours come from the joint finish of the started lines. The
    amount and product are read from `task` when given, otherwise from the
    segment's Load steps.
    """
    task_ids = {step.task_id for step in steps} | ({task.task_id} if task else set())
    if len(task_ids) > 1:
        raise ValueError(f'plan segment mixes tasks: {", ".join(sorted(task_ids))}')
    task_id = task_ids.pop() if task_ids else ''

    loads = [step for step in steps if step.action is ActionKind.LOAD]
    starts = [step for step in steps if step.action is ActionKind.START]
    transport = sum(env.vehicles[step.vehicle_id].trip_cost for step in loads)

    amount = task.amount if task else sum(step.quantity for step in loads)
    product_id = task.product_id if task else next((step.product_id for step in loads), None)
    if not starts or amount <= 0 or product_id is None:
        return TaskCost(task_id=task_id, production=0.0, transport=transport)

    capabilities = {step.line_id: env.lines[step.line_id].capability_for(product_id) for step in starts}
    schedule = ProductionSchedule.joint_finish(
        [(step.line_id, step.timestamp, capabilities[step.line_id].rate) for step in starts], amount
    )
    production = sum(
        capabilities[segment.line_id].cost_rate * segment.duration for segment in schedule.segments
    )
    logger.debug('%s costs %.3f in production and %.3f in transport', task_id, production, transport)
    return TaskCost(task_id=task_id, production=production, transport=transport)
