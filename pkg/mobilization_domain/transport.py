import logging

from collections.abc import Sequence

from pydantic import BaseModel, ConfigDict

from htn_core.domain import Task
from mobilization_domain.heuristics import gamma_vehicle, rank_vehicles
from mobilization_domain.model import (
    DeadlineCheck,
    EnterpriseEnvironment,
    InfeasibleReason,
    InfeasibleTaskRecord,
    MobilizationTask,
    PlanStep,
)
from mobilization_domain.operators import (
    BACK,
    LOAD,
    START,
    TRANSPORT,
    UNLOAD,
    build_operators,
    execute,
    step_for,
)
from mobilization_domain.production import start_order
from mobilization_domain.state import WorldState
from timeline.production import EPSILON, ProductionSchedule, ProductionSegment
from timeline.trips import Dispatch, TripSchedule, simulate_dispatch


logger = logging.getLogger(__name__)


class DeliveryOption(BaseModel):
    """A vehicle pool and the dispatch it produces for one task."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    vehicle_ids: tuple[str, ...]
    dispatch: Dispatch
    score: float

    @property
    def ident(self) -> str:
        return f'dispatch/{len(self.vehicle_ids):02d}/{"+".join(self.vehicle_ids)}'


class TransportOutcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    option: DeliveryOption
    steps: tuple[PlanStep, ...]
    state: WorldState


def deadline_instant(dispatch: Dispatch, check: DeadlineCheck) -> float:
    if check is DeadlineCheck.ARRIVAL:
        return dispatch.last_arrival
    return dispatch.last_unload_complete


def meets_deadline(dispatch: Dispatch, task: MobilizationTask, check: DeadlineCheck) -> bool:
    return deadline_instant(dispatch, check) <= task.deadline + EPSILON


def delivery_option(
    task: MobilizationTask,
    schedule: ProductionSchedule,
    state: WorldState,
    env: EnterpriseEnvironment,
    vehicle_ids: Sequence[str],
) -> DeliveryOption:
    pool = [env.vehicles[vehicle_id] for vehicle_id in vehicle_ids]
    dispatch = simulate_dispatch(
        pool,
        schedule,
        task.amount,
        env.distance_to(task.destination),
        env.products[task.product_id],
        free_at=state.vehicle_free_at,
        task_id=task.task_id,
    )
    return DeliveryOption(
        task_id=task.task_id,
        vehicle_ids=tuple(vehicle_ids),
        dispatch=dispatch,
        score=gamma_vehicle(pool[-1]),
    )


def delivery_options(
    task: MobilizationTask,
    schedule: ProductionSchedule,
    state: WorldState,
    env: EnterpriseEnvironment,
) -> list[DeliveryOption]:
    """One option per γ-prefix of the capable vehicles, smallest pool first."""
    ranked = [vehicle.vehicle_id for vehicle in rank_vehicles(env, task.product_id)]
    options = [
        delivery_option(task, schedule, state, env, ranked[:size])
        for size in range(1, len(ranked) + 1)
    ]
    return sorted(options, key=lambda o: (-o.score, o.ident))


def interleave_starts(
    schedule: ProductionSchedule, trips: Sequence[TripSchedule]
) -> list[ProductionSegment | TripSchedule]:
    """Place each line start right before the first trip that needs its output.

    A trip needs a new line when the lines already started cannot produce
    its claimed cumulative quantity by its load instant. Lines no trip needs
    are started after the last trip.
    """
    pending = start_order(schedule.segments)
    started: list[ProductionSegment] = []
    sequence: list[ProductionSegment | TripSchedule] = []
    for trip in trips:
        claim = trip.claim_cumulative
        while pending and (
            ProductionSchedule(segments=tuple(started)).cumulative(trip.load_start)
            < claim - EPSILON * max(1.0, claim)
        ):
            segment = pending.pop(0)
            started.append(segment)
            sequence.append(segment)
        sequence.append(trip)
    sequence.extend(pending)
    return sequence


def start_task(segment: ProductionSegment, task_id: str) -> Task:
    return Task(START, (segment.line_id, task_id, segment.start, segment.end, segment.rate))


def trip_tasks(trip: TripSchedule) -> tuple[Task, ...]:
    head = (trip.vehicle_id, trip.task_id, trip.product_id)
    return (
        Task(LOAD, head + (trip.quantity, trip.load_start)),
        Task(TRANSPORT, head + (trip.quantity, trip.transport_start)),
        Task(UNLOAD, head + (trip.quantity, trip.unload_start)),
        Task(BACK, head + (trip.back_start,)),
    )


def delivery_subtasks(task_id: str, schedule: ProductionSchedule, dispatch: Dispatch) -> tuple[Task, ...]:
    subtasks: list[Task] = []
    for item in interleave_starts(schedule, dispatch.trips):
        if isinstance(item, ProductionSegment):
            subtasks.append(start_task(item, task_id))
        else:
            subtasks.extend(trip_tasks(item))
    return tuple(subtasks)


def plan_transport(
    task: MobilizationTask,
    state: WorldState,
    env: EnterpriseEnvironment,
    pool: Sequence[str] | None = None,
) -> TransportOutcome | InfeasibleTaskRecord:
    """Ship `task` from its installed production stream.

    Vehicle pools grow by γ order until one meets the deadline; an explicit
    `pool` is simulated on its own.
    """
    schedule = state.stream(task.task_id)
    if not schedule.segments:
        raise ValueError(f'{task.task_id} has no production to ship')
    if pool is not None:
        options = [delivery_option(task, schedule, state, env, pool)]
    else:
        options = delivery_options(task, schedule, state, env)
    if not options:
        return InfeasibleTaskRecord(task_id=task.task_id, reason=InfeasibleReason.NO_CAPABILITY)

    check = env.policy.deadline_check
    chosen = None
    for option in options:
        if meets_deadline(option.dispatch, task, check):
            chosen = option
            break
        logger.debug(
            '%s misses the deadline of %s (%.3f > %s)',
            option.ident, task.task_id, deadline_instant(option.dispatch, check), task.deadline,
        )
    if chosen is None:
        return InfeasibleTaskRecord(task_id=task.task_id, reason=InfeasibleReason.DEADLINE)

    operators = {op.name: op for op in build_operators(env, {task.task_id: task})}
    actions = []
    for trip in chosen.dispatch.trips:
        for subtask in trip_tasks(trip):
            state, action = execute(operators, state, subtask.name, subtask.arguments)
            actions.append(action)
    logger.info('--- 🚚 %s ships with %s in %d trips ---', task.task_id, ', '.join(chosen.dispatch.vehicles_used), len(chosen.dispatch.trips))
    return TransportOutcome(
        option=chosen,
        steps=tuple(step_for(action, index) for index, action in enumerate(actions, start=1)),
        state=state,
    )
