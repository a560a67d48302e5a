"""Operator library O: every executable action of a mobilization plan.

Argument layouts (all ground):
    !ResourceShortage  (task, material, lack)
    !start             (line, task, start, end, rate)
    !load / !transport / !unload   (vehicle, task, product, quantity, at)
    !back              (vehicle, task, product, at)
"""
import logging

from collections.abc import Mapping

from htn_core.domain import ContractViolation, GroundAction, Operator
from htn_core.planner import apply_action
from mobilization_domain.model import (
    ActionKind,
    EnterpriseEnvironment,
    MobilizationTask,
    PlanStep,
)
from mobilization_domain.state import WorkerBooking, WorldState, peak_workers
from shortage.ledger import DemandSet, ShortageRecord
from timeline.production import EPSILON, ProductionSegment


logger = logging.getLogger(__name__)

SHORTAGE = '!ResourceShortage'
START = '!start'
LOAD = '!load'
TRANSPORT = '!transport'
UNLOAD = '!unload'
BACK = '!back'

_KIND_BY_OPERATOR = {
    SHORTAGE: ActionKind.SHORTAGE,
    START: ActionKind.START,
    LOAD: ActionKind.LOAD,
    TRANSPORT: ActionKind.TRANSPORT,
    UNLOAD: ActionKind.UNLOAD,
    BACK: ActionKind.BACK,
}


def _tolerance(quantity: float) -> float:
    return EPSILON * max(1.0, abs(quantity))


def _unchanged(state: WorldState, arguments: tuple) -> WorldState:
    return state


def task_demands(env: EnterpriseEnvironment, task: MobilizationTask) -> DemandSet:
    return DemandSet.for_task(env.products[task.product_id].bom, task.amount)


def build_operators(
    env: EnterpriseEnvironment, tasks: Mapping[str, MobilizationTask]
) -> tuple[Operator, ...]:
    """Ground the operator library against one environment and task set."""
    changeover = env.policy.changeover_hours

    # -- shortage ---------------------------------------------------------

    def shortage_applicable(state: WorldState, arguments: tuple) -> bool:
        task_id, material_id, lack = arguments
        return task_id in tasks and material_id in env.material_stock and lack > 0

    def shortage_virtualize(state: WorldState, arguments: tuple) -> WorldState:
        task_id, material_id, lack = arguments
        record = ShortageRecord(task_id=task_id, material_id=material_id, lack_amount=lack)
        state.material_ledger = state.material_ledger.virtualize(record)
        return state

    # -- production -------------------------------------------------------

    def first_start(state: WorldState, task_id: str) -> bool:
        # the first line of a task settles its whole bill of materials
        return not state.stream(task_id).segments

    def start_booking(arguments: tuple) -> WorkerBooking:
        line_id, task_id, start, end, _ = arguments
        capability = env.lines[line_id].capability_for(tasks[task_id].product_id)
        return WorkerBooking(
            line_id=line_id, task_id=task_id, start=start, end=end, workers=capability.worker_draw
        )

    def start_applicable(state: WorldState, arguments: tuple) -> bool:
        line_id, task_id, start, end, rate = arguments
        if task_id not in tasks or line_id not in env.lines:
            return False
        product_id = tasks[task_id].product_id
        line = env.lines[line_id]
        if not line.can_produce(product_id) or end < start:
            return False
        capability = line.capability_for(product_id)
        if abs(capability.rate - rate) > _tolerance(rate):
            return False
        if start < state.line_ready_at(line_id, product_id, changeover) - EPSILON:
            return False
        hours = end - start
        for utility, draw in capability.utility_draw.items():
            if draw * hours > state.utility_remaining.get(utility, 0.0) + _tolerance(draw * hours):
                return False
        if first_start(state, task_id) and not state.material_ledger.covers(task_demands(env, tasks[task_id])):
            return False
        booked = state.worker_bookings + (start_booking(arguments),)
        return peak_workers(booked) <= env.worker_total + EPSILON

    def start_consume(state: WorldState, arguments: tuple) -> WorldState:
        line_id, task_id, start, end, _ = arguments
        capability = env.lines[line_id].capability_for(tasks[task_id].product_id)
        for utility, draw in capability.utility_draw.items():
            left = state.utility_remaining.get(utility, 0.0) - draw * (end - start)
            state.utility_remaining[utility] = max(0.0, left)
        if first_start(state, task_id):
            state.material_ledger = state.material_ledger.debit(task_id, task_demands(env, tasks[task_id]))
        state.worker_bookings = state.worker_bookings + (start_booking(arguments),)
        return state

    def start_produce(state: WorldState, arguments: tuple) -> WorldState:
        line_id, task_id, start, end, rate = arguments
        segment = ProductionSegment(line_id=line_id, start=start, end=end, rate=rate)
        state.inventory_streams[task_id] = state.stream(task_id).with_segment(segment)
        state.line_free_at[line_id] = end
        state.line_last_product[line_id] = tasks[task_id].product_id
        return state

    # -- round trip -------------------------------------------------------

    def vehicle_ready(state: WorldState, arguments: tuple) -> bool:
        vehicle_id, task_id, product_id = arguments[:3]
        return (
            vehicle_id in env.vehicles
            and task_id in tasks
            and tasks[task_id].product_id == product_id
            and state.vehicle_free_at.get(vehicle_id, 0.0) <= arguments[-1] + EPSILON
        )

    def travel_hours(arguments: tuple) -> float:
        vehicle_id, task_id = arguments[:2]
        return env.distance_to(tasks[task_id].destination) / env.vehicles[vehicle_id].speed

    def load_applicable(state: WorldState, arguments: tuple) -> bool:
        if not vehicle_ready(state, arguments):
            return False
        vehicle_id, task_id, product_id, quantity, at = arguments
        if quantity <= 0 or quantity > env.vehicles[vehicle_id].capacity_for(product_id) + EPSILON:
            return False
        claimed = state.loaded.get(task_id, 0.0) + quantity
        return state.stream(task_id).cumulative(at) >= claimed - _tolerance(claimed)

    def load_occupy(state: WorldState, arguments: tuple) -> WorldState:
        vehicle_id, _, product_id, quantity, at = arguments
        state.vehicle_free_at[vehicle_id] = at + quantity / env.products[product_id].load_rate
        return state

    def load_claim(state: WorldState, arguments: tuple) -> WorldState:
        _, task_id, _, quantity, _ = arguments
        state.loaded[task_id] = state.loaded.get(task_id, 0.0) + quantity
        return state

    def drive(state: WorldState, arguments: tuple) -> WorldState:
        state.vehicle_free_at[arguments[0]] = arguments[-1] + travel_hours(arguments)
        return state

    def unload_occupy(state: WorldState, arguments: tuple) -> WorldState:
        vehicle_id, _, product_id, quantity, at = arguments
        state.vehicle_free_at[vehicle_id] = at + quantity / env.products[product_id].unload_rate
        return state

    def unload_deliver(state: WorldState, arguments: tuple) -> WorldState:
        _, task_id, _, quantity, _ = arguments
        state.delivered[task_id] = state.delivered.get(task_id, 0.0) + quantity
        return state

    def carrying(state: WorldState, arguments: tuple) -> bool:
        return vehicle_ready(state, arguments) and arguments[3] > 0

    def starts_at(arguments: tuple) -> float:
        return arguments[-1]

    return (
        Operator(SHORTAGE, shortage_applicable, _unchanged, shortage_virtualize),
        Operator(START, start_applicable, start_consume, start_produce, lambda arguments: arguments[2]),
        Operator(LOAD, load_applicable, load_occupy, load_claim, starts_at),
        Operator(TRANSPORT, carrying, drive, _unchanged, starts_at),
        Operator(UNLOAD, carrying, unload_occupy, unload_deliver, starts_at),
        Operator(BACK, vehicle_ready, drive, _unchanged, starts_at),
    )


def step_for(action: GroundAction, index: int) -> PlanStep:
    """Turn a rendered (non-internal) action into a numbered plan step."""
    kind = _KIND_BY_OPERATOR[action.name]
    arguments = action.arguments
    if kind is ActionKind.SHORTAGE:
        task_id, material_id, lack = arguments
        return PlanStep(index=index, action=kind, task_id=task_id, material_id=material_id, quantity=lack)
    if kind is ActionKind.START:
        line_id, task_id, start = arguments[:3]
        return PlanStep(index=index, action=kind, task_id=task_id, line_id=line_id, timestamp=start)
    vehicle_id, task_id, product_id = arguments[:3]
    return PlanStep(
        index=index,
        action=kind,
        task_id=task_id,
        vehicle_id=vehicle_id,
        product_id=product_id,
        quantity=arguments[3] if kind is not ActionKind.BACK else None,
        timestamp=action.timestamp,
    )


def execute(
    operators: Mapping[str, Operator], state: WorldState, name: str, arguments: tuple
) -> tuple[WorldState, GroundAction]:
    """Ground `name` on `arguments` and apply it, outside of any search."""
    actions = operators[name].ground(state, arguments)
    if not actions:
        raise ContractViolation(f'{name} {arguments} is not applicable')
    return apply_action(state, actions[0]), actions[0]
