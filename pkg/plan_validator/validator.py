import logging

from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import StrEnum

from pydantic import BaseModel, ConfigDict, model_validator

from mobilization_domain.model import (
    ActionKind,
    DeadlineCheck,
    EnterpriseEnvironment,
    MobilizationTask,
    Plan,
    PlanStep,
    PolicyConfig,
)
from shortage.ledger import DemandSet, MaterialLedger, check_and_virtualize


logger = logging.getLogger(__name__)

# rendered numbers carry one decimal
TOLERANCE = 0.05
# a positive quantity never renders below 0.1
QUANTITY_SLACK = 0.1
EPSILON = 1e-6


class UnresolvedIdentifierError(ValueError):
    """Raised when a plan names tasks, lines, vehicles, products or materials the inputs lack."""

    def __init__(self, identifiers: Sequence[str]):
        self.identifiers = tuple(identifiers)
        super().__init__(f'unresolved identifiers: {", ".join(self.identifiers)}')


class Rule(StrEnum):
    TRIP_CHAIN = 'trip-chain'
    TRIP_TIMING = 'trip-timing'
    CAPACITY = 'capacity'
    NEGATIVE_INVENTORY = 'negative-inventory'
    VEHICLE_OVERLAP = 'vehicle-overlap'
    LINE_CAPABILITY = 'line-capability'
    LINE_OVERLAP = 'line-overlap'
    PRODUCTION_MISSING = 'production-missing'
    MATERIAL_LEDGER = 'material-ledger'
    UTILITY_BUDGET = 'utility-budget'
    WORKER_CONCURRENCY = 'worker-concurrency'
    DEADLINE = 'deadline'
    DELIVERED_TOTAL = 'delivered-total'
    UNRESOLVED_ID = 'unresolved-id'


class Verdict(StrEnum):
    PASS = 'pass'
    FAIL = 'fail'


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    step: int | None
    rule: Rule
    message: str


class TaskSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    amount: float
    delivered: float
    deadline: float
    last_arrival: float | None = None
    reported_infeasible: bool = False

    @property
    def margin(self) -> float | None:
        return None if self.last_arrival is None else self.deadline - self.last_arrival


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    violations: tuple[Violation, ...] = ()
    tasks: tuple[TaskSummary, ...] = ()

    @model_validator(mode='after')
    def _verdict_matches(self) -> 'ValidationReport':
        if (self.verdict is Verdict.PASS) != (not self.violations):
            raise ValueError(f'verdict {self.verdict} with {len(self.violations)} violations')
        return self

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    @property
    def rules(self) -> set[Rule]:
        return {violation.rule for violation in self.violations}


@dataclass
class _Trip:
    """A round trip as read from the plan, with the window of its true load instant."""

    vehicle_id: str
    task_id: str
    product_id: str
    quantity: float
    steps: dict[ActionKind, PlanStep] = field(default_factory=dict)
    offsets: dict[ActionKind, float] = field(default_factory=dict)
    turnaround: float = 0.0
    earliest: float = 0.0
    latest: float = 0.0

    @property
    def load_index(self) -> int:
        return self.steps[ActionKind.LOAD].index


@dataclass
class _Run:
    """One line running for one task, as re-derived from the Start steps."""

    line_id: str
    task_id: str
    product_id: str
    step: PlanStep
    start: float
    rate: float
    end: float = 0.0


def _joint_finish(runs: Sequence[_Run], amount: float) -> float:
    ordered = sorted(runs, key=lambda run: run.start)
    produced = rate = 0.0
    instant = ordered[0].start
    for run in ordered:
        if rate > 0 and produced + rate * (run.start - instant) >= amount:
            break
        produced += rate * (run.start - instant)
        instant = run.start
        rate += run.rate
    return instant + (amount - produced) / rate


def _produced(runs: Sequence[_Run], instant: float) -> float:
    return sum(run.rate * min(max(instant - run.start, 0.0), run.end - run.start) for run in runs)


class _Validation:
    def __init__(self, plan: Plan, env: EnterpriseEnvironment, tasks: dict[str, MobilizationTask]):
        self.plan = plan
        self.env = env
        self.tasks = tasks
        self.violations: list[Violation] = []
        self.trips: list[_Trip] = []
        self.runs: dict[str, list[_Run]] = {}

    def flag(self, step: PlanStep | int | None, rule: Rule, message: str) -> None:
        index = step.index if isinstance(step, PlanStep) else step
        logger.debug('violation at %s: %s %s', index, rule, message)
        self.violations.append(Violation(step=index, rule=rule, message=message))

    # -- round trips ------------------------------------------------------

    def read_trips(self) -> None:
        stages = (ActionKind.LOAD, ActionKind.TRANSPORT, ActionKind.UNLOAD, ActionKind.BACK)
        open_trips: dict[str, _Trip] = {}
        for step in self.plan.steps:
            if step.action not in stages:
                continue
            trip = open_trips.get(step.vehicle_id)
            if step.action is ActionKind.LOAD:
                if trip is not None:
                    self.flag(step, Rule.TRIP_CHAIN, f'{step.vehicle_id} loads again before its last trip came back')
                open_trips[step.vehicle_id] = _Trip(
                    vehicle_id=step.vehicle_id,
                    task_id=step.task_id,
                    product_id=step.product_id,
                    quantity=step.quantity,
                    steps={ActionKind.LOAD: step},
                )
                continue
            expected = stages[len(trip.steps)] if trip is not None else ActionKind.LOAD
            if trip is None or step.action is not expected:
                self.flag(step, Rule.TRIP_CHAIN, f'{step.vehicle_id} cannot {step.action} here, {expected} expected')
                continue
            if (step.task_id, step.product_id) != (trip.task_id, trip.product_id):
                self.flag(step, Rule.TRIP_CHAIN, f'{step.action} of {step.vehicle_id} switches task or product mid-trip')
            if step.action is not ActionKind.BACK and abs(step.quantity - trip.quantity) > EPSILON:
                self.flag(step, Rule.TRIP_CHAIN, f'{step.action} of {step.vehicle_id} moves {step.quantity}, loaded {trip.quantity}')
            trip.steps[step.action] = step
            if step.action is ActionKind.BACK:
                self.trips.append(open_trips.pop(step.vehicle_id))
        for trip in open_trips.values():
            self.flag(trip.steps[ActionKind.LOAD], Rule.TRIP_CHAIN, f'trip of {trip.vehicle_id} never comes back')
        self.trips.sort(key=lambda trip: trip.load_index)

    def time_trips(self) -> None:
        for trip in self.trips:
            vehicle = self.env.vehicles[trip.vehicle_id]
            product = self.env.products[trip.product_id]
            travel = self.env.distance_to(self.tasks[trip.task_id].destination) / vehicle.speed
            loading = trip.quantity / product.load_rate
            unloading = trip.quantity / product.unload_rate
            trip.offsets = {
                ActionKind.LOAD: 0.0,
                ActionKind.TRANSPORT: loading,
                ActionKind.UNLOAD: loading + travel,
                ActionKind.BACK: loading + travel + unloading,
            }
            trip.turnaround = loading + 2 * travel + unloading
            slack = TOLERANCE + QUANTITY_SLACK * (1 / product.load_rate + 1 / product.unload_rate)
            anchors = [trip.steps[kind].timestamp - offset for kind, offset in trip.offsets.items()]
            trip.earliest = max(anchors) - slack
            trip.latest = min(anchors) + slack
            if trip.earliest > trip.latest + EPSILON:
                self.flag(
                    trip.steps[ActionKind.LOAD],
                    Rule.TRIP_TIMING,
                    f'timestamps of the {trip.vehicle_id} trip disagree with its durations by {trip.earliest - trip.latest:.2f} h',
                )
                rendered = trip.steps[ActionKind.LOAD].timestamp
                trip.earliest, trip.latest = rendered - TOLERANCE, rendered + TOLERANCE

    def check_capacity(self) -> None:
        for trip in self.trips:
            load = trip.steps[ActionKind.LOAD]
            task = self.tasks[trip.task_id]
            if trip.product_id != task.product_id:
                self.flag(load, Rule.TRIP_CHAIN, f'{task.task_id} ships {task.product_id}, not {trip.product_id}')
            capacity = self.env.vehicles[trip.vehicle_id].capacity_for(trip.product_id)
            if trip.quantity > capacity + EPSILON:
                self.flag(load, Rule.CAPACITY, f'{trip.vehicle_id} carries at most {capacity} of {trip.product_id}, loads {trip.quantity}')

    def check_vehicle_overlap(self) -> None:
        by_vehicle: dict[str, list[_Trip]] = {}
        for trip in self.trips:
            by_vehicle.setdefault(trip.vehicle_id, []).append(trip)
        for vehicle_id, trips in by_vehicle.items():
            for before, after in zip(trips, trips[1:]):
                back_at = before.earliest + before.turnaround
                if after.latest + EPSILON < back_at:
                    self.flag(
                        after.steps[ActionKind.LOAD],
                        Rule.VEHICLE_OVERLAP,
                        f'{vehicle_id} loads by {after.latest:.2f} but is back at {back_at:.2f} at the earliest',
                    )

    # -- production -------------------------------------------------------

    def read_runs(self) -> None:
        for step in self.plan.steps:
            if step.action is not ActionKind.START:
                continue
            task = self.tasks[step.task_id]
            line = self.env.lines[step.line_id]
            if not line.can_produce(task.product_id):
                self.flag(step, Rule.LINE_CAPABILITY, f'{step.line_id} cannot produce {task.product_id}')
                continue
            runs = self.runs.setdefault(task.task_id, [])
            if any(run.line_id == step.line_id for run in runs):
                self.flag(step, Rule.LINE_OVERLAP, f'{step.line_id} is started twice for {task.task_id}')
                continue
            runs.append(
                _Run(
                    line_id=step.line_id,
                    task_id=task.task_id,
                    product_id=task.product_id,
                    step=step,
                    start=step.timestamp,
                    rate=line.capability_for(task.product_id).rate,
                )
            )
        for task_id, runs in self.runs.items():
            finish = _joint_finish(runs, self.tasks[task_id].amount)
            for run in runs:
                run.end = max(finish, run.start)

    def check_inventory(self) -> None:
        claimed: dict[str, float] = {}
        loads: dict[str, int] = {}
        for trip in self.trips:
            runs = self.runs.get(trip.task_id)
            load = trip.steps[ActionKind.LOAD]
            if not runs:
                self.flag(load, Rule.PRODUCTION_MISSING, f'{trip.task_id} ships without any production')
                continue
            claimed[trip.task_id] = claimed.get(trip.task_id, 0.0) + trip.quantity
            loads[trip.task_id] = loads.get(trip.task_id, 0) + 1
            available = _produced(runs, trip.latest + TOLERANCE)
            if available < claimed[trip.task_id] - QUANTITY_SLACK * loads[trip.task_id] - EPSILON:
                self.flag(
                    load,
                    Rule.NEGATIVE_INVENTORY,
                    f'{trip.task_id} has {available:.1f} made by {trip.latest:.2f}, {claimed[trip.task_id]:.1f} claimed',
                )

    def check_line_overlap(self) -> None:
        by_line: dict[str, list[_Run]] = {}
        for runs in self.runs.values():
            for run in runs:
                by_line.setdefault(run.line_id, []).append(run)
        changeover = self.env.policy.changeover_hours
        for line_id, runs in by_line.items():
            ordered = sorted(runs, key=lambda run: (run.start, run.step.index))
            for before, after in zip(ordered, ordered[1:]):
                ready = before.end + (changeover if before.product_id != after.product_id else 0.0)
                # the re-derived end and the next start are each off by up to one rounding
                if after.start < ready - 2 * TOLERANCE - EPSILON:
                    self.flag(after.step, Rule.LINE_OVERLAP, f'{line_id} starts at {after.start} but is busy until {ready:.2f}')

    # -- resources --------------------------------------------------------

    def settle_shortages(self, start: PlanStep, recorded: list[PlanStep], ledger: MaterialLedger) -> MaterialLedger:
        """Compare the shortages reported for a task with what the ledger lacks at its first Start."""
        task = self.tasks[start.task_id]
        demands = DemandSet.for_task(self.env.products[task.product_id].bom, task.amount)
        expected, ledger = check_and_virtualize(task.task_id, demands, ledger)
        lacking = {record.material_id: record.lack_amount for record in expected}
        reported: dict[str, PlanStep] = {}
        for step in recorded:
            if step.material_id in reported:
                self.flag(step, Rule.MATERIAL_LEDGER, f'{step.material_id} shortage of {task.task_id} is reported twice')
                continue
            reported[step.material_id] = step
            if step.material_id not in lacking:
                self.flag(step, Rule.MATERIAL_LEDGER, f'{task.task_id} does not lack {step.material_id}, {step.quantity} reported')
            elif abs(step.quantity - lacking[step.material_id]) > QUANTITY_SLACK + EPSILON:
                self.flag(
                    step,
                    Rule.MATERIAL_LEDGER,
                    f'{task.task_id} lacks {lacking[step.material_id]:.1f} of {step.material_id}, {step.quantity} reported',
                )
        for material_id, lack in lacking.items():
            if material_id not in reported:
                self.flag(start, Rule.MATERIAL_LEDGER, f'{task.task_id} lacks {lack:.1f} of {material_id}, none reported')
        return ledger

    def check_materials(self) -> None:
        ledger = MaterialLedger.opening(self.env.material_stock)
        pending: dict[str, list[PlanStep]] = {}
        settled: set[str] = set()
        for step in self.plan.steps:
            if step.action is ActionKind.SHORTAGE:
                if step.task_id in settled:
                    self.flag(step, Rule.MATERIAL_LEDGER, f'shortage of {step.task_id} reported after its production began')
                else:
                    pending.setdefault(step.task_id, []).append(step)
            elif step.action is ActionKind.START and step.task_id not in settled:
                settled.add(step.task_id)
                ledger = self.settle_shortages(step, pending.pop(step.task_id, []), ledger)
        for steps in pending.values():
            for step in steps:
                self.flag(step, Rule.MATERIAL_LEDGER, f'shortage of {step.task_id} reported for a task that never starts')

    def check_utilities(self) -> None:
        used: dict[str, float] = {}
        slack: dict[str, float] = {}
        flagged: set[str] = set()
        runs = sorted((run for runs in self.runs.values() for run in runs), key=lambda run: run.step.index)
        for run in runs:
            capability = self.env.lines[run.line_id].capability_for(run.product_id)
            for utility, draw in capability.utility_draw.items():
                used[utility] = used.get(utility, 0.0) + draw * (run.end - run.start)
                slack[utility] = slack.get(utility, EPSILON) + draw * 2 * TOLERANCE
                total = self.env.utility_totals.get(utility, 0.0)
                if utility not in flagged and used[utility] > total + slack[utility]:
                    flagged.add(utility)
                    self.flag(run.step, Rule.UTILITY_BUDGET, f'{utility} use reaches {used[utility]:.1f} of {total}')

        # each run is trimmed by one rounding at both ends, so it lies inside the true run;
        # instants closer than a microhour are simultaneous and releases go first
        events = []
        for run in runs:
            start, end = run.start + TOLERANCE, run.end - TOLERANCE
            if end <= start:
                continue
            workers = self.env.lines[run.line_id].capability_for(run.product_id).worker_draw
            events.append((round(start, 6), 1, workers, run))
            events.append((round(end, 6), 0, -workers, run))
        busy = 0.0
        for _, _, delta, run in sorted(events, key=lambda e: (e[0], e[1], e[3].step.index)):
            busy += delta
            if busy > self.env.worker_total + EPSILON:
                self.flag(run.step, Rule.WORKER_CONCURRENCY, f'{busy:.0f} workers busy, {self.env.worker_total} available')
                break

    # -- goals ------------------------------------------------------------

    def summarize(self) -> list[TaskSummary]:
        reported = {record.task_id for record in self.plan.infeasible}
        check = self.env.policy.deadline_check
        judged = ActionKind.UNLOAD if check is DeadlineCheck.ARRIVAL else ActionKind.BACK
        summaries = []
        for task_id, task in self.tasks.items():
            trips = [trip for trip in self.trips if trip.task_id == task_id]
            delivered = sum(trip.quantity for trip in trips)
            last_arrival = max((trip.steps[ActionKind.UNLOAD].timestamp for trip in trips), default=None)
            summaries.append(
                TaskSummary(
                    task_id=task_id,
                    amount=task.amount,
                    delivered=delivered,
                    deadline=task.deadline,
                    last_arrival=last_arrival,
                    reported_infeasible=task_id in reported,
                )
            )
            if task_id in reported:
                continue
            if abs(delivered - task.amount) > QUANTITY_SLACK * len(trips) + EPSILON:
                self.flag(None, Rule.DELIVERED_TOTAL, f'{task_id} delivers {delivered:.1f} of {task.amount}')
            for trip in trips:
                instant = trip.earliest + trip.offsets[judged]
                if instant > task.deadline + EPSILON:
                    self.flag(
                        trip.steps[judged],
                        Rule.DEADLINE,
                        f'{trip.vehicle_id} reaches {check} for {task_id} at {instant:.2f} at the earliest, deadline {task.deadline}',
                    )
        return summaries


def resolve_identifiers(plan: Plan, env: EnterpriseEnvironment, tasks: dict[str, MobilizationTask]) -> None:
    unknown: set[str] = set()
    catalogs = (
        ('task_id', tasks),
        ('line_id', env.lines),
        ('vehicle_id', env.vehicles),
        ('product_id', env.products),
        ('material_id', env.material_stock),
    )
    for step in plan.steps:
        for attribute, catalog in catalogs:
            value = getattr(step, attribute)
            if value is not None and value not in catalog:
                unknown.add(value)
    unknown.update(record.task_id for record in plan.infeasible if record.task_id not in tasks)
    destinations = env.routes.get(env.site, {})
    for task in tasks.values():
        if task.product_id not in env.products:
            unknown.add(task.product_id)
        if task.destination not in destinations:
            unknown.add(task.destination)
    if unknown:
        raise UnresolvedIdentifierError(sorted(unknown))


def validate(
    plan: Plan,
    env: EnterpriseEnvironment,
    tasks: Sequence[MobilizationTask],
    policy: PolicyConfig | None = None,
) -> ValidationReport:
    """Replay `plan` against the environment and collect every violated rule."""
    if policy is not None:
        env = env.with_policy(policy)
    by_id = {task.task_id: task for task in tasks}
    resolve_identifiers(plan, env, by_id)

    run = _Validation(plan, env, by_id)
    run.read_trips()
    run.time_trips()
    run.check_capacity()
    run.check_vehicle_overlap()
    run.read_runs()
    run.check_inventory()
    run.check_line_overlap()
    run.check_materials()
    run.check_utilities()
    summaries = run.summarize()

    violations = tuple(sorted(run.violations, key=lambda v: (v.step is None, v.step or 0, v.rule)))
    verdict = Verdict.FAIL if violations else Verdict.PASS
    logger.info('--- 🔎 Validation %s: %d violations over %d steps ---', verdict, len(violations), len(plan.steps))
    return ValidationReport(verdict=verdict, violations=violations, tasks=tuple(summaries))
