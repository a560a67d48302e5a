import hashlib
import logging

from collections.abc import Iterable

from pydantic import BaseModel, ConfigDict, Field, field_validator

from mobilization_domain.model import EnterpriseEnvironment
from shortage.ledger import MaterialLedger
from timeline.production import ProductionSchedule


logger = logging.getLogger(__name__)


class WorkerBooking(BaseModel):
    """Workers held by one line while it runs for one task."""

    model_config = ConfigDict(frozen=True)

    line_id: str
    task_id: str
    start: float
    end: float
    workers: float


def peak_workers(bookings: Iterable[WorkerBooking]) -> float:
    events = []
    for booking in bookings:
        events.append((booking.start, 1, booking.workers))
        events.append((booking.end, 0, -booking.workers))
    # releases sort before acquisitions at the same instant
    busy = peak = 0.0
    for _, _, delta in sorted(events):
        busy += delta
        peak = max(peak, busy)
    return peak


class WorldState(BaseModel):
    """The planning state s: everything operators read and write."""

    model_config = ConfigDict(validate_assignment=False)

    material_ledger: MaterialLedger
    utility_remaining: dict[str, float]
    line_free_at: dict[str, float]
    line_last_product: dict[str, str | None]
    vehicle_free_at: dict[str, float]
    inventory_streams: dict[str, ProductionSchedule] = Field(default_factory=dict)
    loaded: dict[str, float] = Field(default_factory=dict)
    delivered: dict[str, float] = Field(default_factory=dict)
    worker_bookings: tuple[WorkerBooking, ...] = ()

    @field_validator('utility_remaining', 'line_free_at', 'vehicle_free_at')
    @classmethod
    def _non_negative(cls, value: dict[str, float]) -> dict[str, float]:
        for key, quantity in value.items():
            if quantity < 0:
                raise ValueError(f'{key} is negative: {quantity}')
        return value

    @classmethod
    def initial(cls, env: EnterpriseEnvironment) -> 'WorldState':
        return cls(
            material_ledger=MaterialLedger.opening(env.material_stock),
            utility_remaining=dict(env.utility_totals),
            line_free_at={line_id: 0.0 for line_id in env.lines},
            line_last_product={line_id: None for line_id in env.lines},
            vehicle_free_at={vehicle_id: 0.0 for vehicle_id in env.vehicles},
        )

    def snapshot(self) -> 'WorldState':
        return self.model_copy(deep=True)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode('utf-8')).hexdigest()

    def stream(self, task_id: str) -> ProductionSchedule:
        return self.inventory_streams.get(task_id, ProductionSchedule())

    def line_ready_at(self, line_id: str, product_id: str, changeover_hours: float) -> float:
        """Earliest start of `line_id` on `product_id`, changeover included."""
        last = self.line_last_product.get(line_id)
        switch = changeover_hours if last is not None and last != product_id else 0.0
        return self.line_free_at.get(line_id, 0.0) + switch
