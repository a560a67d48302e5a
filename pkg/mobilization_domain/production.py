import logging

from pydantic import BaseModel, ConfigDict

from mobilization_domain.heuristics import gamma_line, rank_lines
from mobilization_domain.model import (
    EnterpriseEnvironment,
    InfeasibleReason,
    InfeasibleTaskRecord,
    LinePolicy,
    MobilizationTask,
    PlanStep,
)
from mobilization_domain.operators import (
    SHORTAGE,
    START,
    build_operators,
    execute,
    step_for,
    task_demands,
)
from mobilization_domain.state import WorkerBooking, WorldState, peak_workers
from shortage.ledger import ShortageRecord, check_and_virtualize
from timeline.production import EPSILON, ProductionSchedule, ProductionSegment


logger = logging.getLogger(__name__)


class LineEngagement(BaseModel):
    """The lines opened for one task and the joint-finish schedule they run."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    product_id: str
    line_ids: tuple[str, ...]
    schedule: ProductionSchedule
    score: float

    @property
    def ident(self) -> str:
        return f'engage/{len(self.line_ids):02d}/{"+".join(self.line_ids)}'

    @property
    def finish(self) -> float:
        return self.schedule.finish

    def __str__(self) -> str:
        return self.ident


class ProductionOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    engagement: LineEngagement
    shortages: tuple[ShortageRecord, ...]
    steps: tuple[PlanStep, ...]
    state: WorldState


def engage(
    task: MobilizationTask, state: WorldState, env: EnterpriseEnvironment, line_ids: tuple[str, ...]
) -> LineEngagement:
    """Joint-finish schedule of `line_ids` for `task`, from their ready instants."""
    lines = [env.lines[line_id] for line_id in line_ids]
    engaged = [
        (
            line.line_id,
            state.line_ready_at(line.line_id, task.product_id, env.policy.changeover_hours),
            line.capability_for(task.product_id).rate,
        )
        for line in lines
    ]
    return LineEngagement(
        task_id=task.task_id,
        product_id=task.product_id,
        line_ids=line_ids,
        schedule=ProductionSchedule.joint_finish(engaged, task.amount),
        score=min(gamma_line(line, task.product_id) for line in lines),
    )


def engagement_candidates(
    task: MobilizationTask, state: WorldState, env: EnterpriseEnvironment
) -> list[LineEngagement]:
    """Every engagement the line policy allows, best first; budgets unchecked."""
    ranked = tuple(line.line_id for line in rank_lines(env, task.product_id))
    if not ranked:
        return []
    if env.policy.line_policy is LinePolicy.ALL_CAPABLE:
        prefixes = [ranked]
    else:
        prefixes = [ranked[:size] for size in range(1, len(ranked) + 1)]
    candidates = [engage(task, state, env, prefix) for prefix in prefixes]
    return sorted(candidates, key=lambda c: (-c.score, c.ident))


def fits_budget(engagement: LineEngagement, state: WorldState, env: EnterpriseEnvironment) -> bool:
    """Whether the utilities left and the worker pool can carry `engagement`."""
    needed: dict[str, float] = {}
    bookings = list(state.worker_bookings)
    for segment in engagement.schedule.segments:
        capability = env.lines[segment.line_id].capability_for(engagement.product_id)
        for utility, draw in capability.utility_draw.items():
            needed[utility] = needed.get(utility, 0.0) + draw * segment.duration
        bookings.append(
            WorkerBooking(
                line_id=segment.line_id,
                task_id=engagement.task_id,
                start=segment.start,
                end=segment.end,
                workers=capability.worker_draw,
            )
        )
    for utility, quantity in needed.items():
        if quantity > state.utility_remaining.get(utility, 0.0) + EPSILON * max(1.0, quantity):
            logger.debug('%s exceeds the %s budget (%.3f needed)', engagement.ident, utility, quantity)
            return False
    if peak_workers(bookings) > env.worker_total + EPSILON:
        logger.debug('%s exceeds the worker pool', engagement.ident)
        return False
    return True


def start_order(segments: tuple[ProductionSegment, ...]) -> list[ProductionSegment]:
    """Lines in the order their Start steps are generated."""
    return sorted(segments, key=lambda s: (s.start, -s.rate, s.line_id))


def plan_production(
    task: MobilizationTask,
    state: WorldState,
    env: EnterpriseEnvironment,
    engagement: LineEngagement | None = None,
) -> ProductionOutcome | InfeasibleTaskRecord:
    """Open lines for `task`, settle its materials and start production.

    Without an explicit `engagement` the best candidate that fits the
    utility and worker budgets is used.
    """
    if not env.capable_lines(task.product_id):
        return InfeasibleTaskRecord(task_id=task.task_id, reason=InfeasibleReason.NO_CAPABILITY)
    if engagement is None:
        engagement = next(
            (c for c in engagement_candidates(task, state, env) if fits_budget(c, state, env)), None
        )
    elif not fits_budget(engagement, state, env):
        engagement = None
    if engagement is None:
        return InfeasibleTaskRecord(task_id=task.task_id, reason=InfeasibleReason.UTILITY_EXHAUSTED)

    operators = {op.name: op for op in build_operators(env, {task.task_id: task})}
    records, _ = check_and_virtualize(task.task_id, task_demands(env, task), state.material_ledger)
    shortages = tuple(records)
    actions = []
    for record in shortages:
        state, action = execute(
            operators, state, SHORTAGE, (task.task_id, record.material_id, record.lack_amount)
        )
        actions.append(action)
    for segment in start_order(engagement.schedule.segments):
        state, action = execute(
            operators,
            state,
            START,
            (segment.line_id, task.task_id, segment.start, segment.end, segment.rate),
        )
        actions.append(action)
    logger.info('--- 🏭 %s engages %s until %.3f ---', task.task_id, ', '.join(engagement.line_ids), engagement.finish)
    return ProductionOutcome(
        engagement=engagement,
        shortages=shortages,
        steps=tuple(step_for(action, index) for index, action in enumerate(actions, start=1)),
        state=state,
    )
