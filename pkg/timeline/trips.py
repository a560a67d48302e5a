import heapq
import logging

from collections.abc import Mapping, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mobilization_domain.model import Product, Vehicle
from timeline.production import EPSILON, ProductionSchedule, available_at


logger = logging.getLogger(__name__)


class CapacityError(ValueError):
    """Raised when a consignment does not fit the vehicle."""


class TripSchedule(BaseModel):
    """One round trip; every timestamp is the start instant of its action."""

    model_config = ConfigDict(frozen=True)

    vehicle_id: str
    task_id: str
    product_id: str
    quantity: float = Field(gt=0)
    claim_cumulative: float = Field(ge=0)
    load_start: float = Field(ge=0)
    transport_start: float
    unload_start: float
    back_start: float
    return_at: float

    @model_validator(mode='after')
    def _chronological(self) -> 'TripSchedule':
        chain = (
            self.load_start,
            self.transport_start,
            self.unload_start,
            self.back_start,
            self.return_at,
        )
        if any(later < earlier for earlier, later in zip(chain, chain[1:])):
            raise ValueError(f'trip of {self.vehicle_id} is not chronological: {chain}')
        return self


class Dispatch(BaseModel):
    model_config = ConfigDict(frozen=True)

    trips: tuple[TripSchedule, ...]
    last_arrival: float
    last_unload_complete: float

    @property
    def vehicles_used(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(trip.vehicle_id for trip in self.trips))


def schedule_trip(
    vehicle: Vehicle,
    product: Product,
    quantity: float,
    inventory_ready: float,
    vehicle_free: float,
    distance: float,
    *,
    task_id: str = '',
    claim_cumulative: float | None = None,
) -> TripSchedule:
    """Lay out load -> transport -> unload -> back for one consignment."""
    if quantity <= 0:
        raise ValueError(f'trip quantity must be positive, got {quantity}')
    capacity = vehicle.capacity_for(product.product_id)
    if quantity > capacity + EPSILON:
        raise CapacityError(
            f'{vehicle.vehicle_id} carries at most {capacity} of {product.product_id}, asked {quantity}'
        )
    travel = distance / vehicle.speed
    load_start = max(inventory_ready, vehicle_free)
    transport_start = load_start + quantity / product.load_rate
    unload_start = transport_start + travel
    back_start = unload_start + quantity / product.unload_rate
    return TripSchedule(
        vehicle_id=vehicle.vehicle_id,
        task_id=task_id,
        product_id=product.product_id,
        quantity=quantity,
        claim_cumulative=quantity if claim_cumulative is None else claim_cumulative,
        load_start=load_start,
        transport_start=transport_start,
        unload_start=unload_start,
        back_start=back_start,
        return_at=back_start + travel,
    )


def simulate_dispatch(
    pool: Sequence[Vehicle],
    schedule: ProductionSchedule,
    total: float,
    distance: float,
    product: Product,
    *,
    free_at: Mapping[str, float] | None = None,
    task_id: str = '',
) -> Dispatch:
    """Run the claim queue of a γ-ordered vehicle pool over a production pool.

    The idle vehicle with the earliest free instant claims next (ties go to
    the earlier pool position); it takes min(capacity, unclaimed remainder)
    and loads once both it and the claimed cumulative quantity are ready.
    A returning vehicle rejoins the queue at its return instant.
    """
    if total <= 0:
        raise ValueError(f'total must be positive, got {total}')
    free_at = free_at or {}
    queue = [
        (free_at.get(vehicle.vehicle_id, 0.0), rank, vehicle)
        for rank, vehicle in enumerate(pool)
        if vehicle.capacity_for(product.product_id) > 0
    ]
    if not queue:
        raise ValueError(f'no vehicle in the pool carries {product.product_id}')
    heapq.heapify(queue)
    claimed = 0.0
    trips: list[TripSchedule] = []
    while total - claimed > EPSILON * max(1.0, total):
        vehicle_free, rank, vehicle = heapq.heappop(queue)
        quantity = min(vehicle.capacity_for(product.product_id), total - claimed)
        claimed += quantity
        ready = available_at(schedule, min(claimed, schedule.total))
        trip = schedule_trip(
            vehicle,
            product,
            quantity,
            ready,
            vehicle_free,
            distance,
            task_id=task_id,
            claim_cumulative=claimed,
        )
        trips.append(trip)
        heapq.heappush(queue, (trip.return_at, rank, vehicle))
    logger.debug(
        'dispatch over %s: %d trips, last arrival %.4f',
        [v.vehicle_id for v in pool], len(trips), max(t.unload_start for t in trips),
    )
    return Dispatch(
        trips=tuple(trips),
        last_arrival=max(trip.unload_start for trip in trips),
        last_unload_complete=max(trip.back_start for trip in trips),
    )
