"""Static types of the mobilization domain: environment, goal tasks, plan."""
import logging

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from shortage.ledger import ShortageRecord


logger = logging.getLogger(__name__)


class CapabilityError(ValueError):
    """Raised when a line is asked about a product it cannot make."""


class LinePolicy(StrEnum):
    ALL_CAPABLE = 'all-capable'
    GAMMA_ESCALATION = 'gamma-escalation'


class DeadlineCheck(StrEnum):
    ARRIVAL = 'arrival'
    UNLOAD_COMPLETE = 'unload-complete'


class PolicyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    line_policy: LinePolicy = LinePolicy.ALL_CAPABLE
    changeover_hours: float = Field(default=0.5, ge=0)
    deadline_check: DeadlineCheck = DeadlineCheck.ARRIVAL
    strict_deadlines: bool = False


class Product(BaseModel):
    model_config = ConfigDict(frozen=True)

    product_id: str
    bom: dict[str, float] = Field(default_factory=dict)
    load_rate: float = Field(gt=0)
    unload_rate: float = Field(gt=0)

    @model_validator(mode='after')
    def _bom_non_negative(self) -> 'Product':
        for material_id, quantity in self.bom.items():
            if quantity < 0:
                raise ValueError(f'{self.product_id} needs a negative amount of {material_id}')
        return self


class LineCapability(BaseModel):
    """What one line does for one product, per hour of operation."""

    model_config = ConfigDict(frozen=True)

    rate: float = Field(gt=0)
    cost_rate: float = Field(gt=0)
    utility_draw: dict[str, float] = Field(default_factory=dict)
    worker_draw: float = Field(default=0, ge=0)


class ProductionLine(BaseModel):
    model_config = ConfigDict(frozen=True)

    line_id: str
    capability: dict[str, LineCapability] = Field(default_factory=dict)

    def can_produce(self, product_id: str) -> bool:
        return product_id in self.capability

    def capability_for(self, product_id: str) -> LineCapability:
        try:
            return self.capability[product_id]
        except KeyError:
            raise CapabilityError(f'line {self.line_id} cannot produce {product_id}') from None


class Vehicle(BaseModel):
    model_config = ConfigDict(frozen=True)

    vehicle_id: str
    speed: float = Field(gt=0)
    capacity: dict[str, float] = Field(default_factory=dict)
    trip_cost: float = Field(gt=0)

    @model_validator(mode='after')
    def _capacities_positive(self) -> 'Vehicle':
        for product_id, units in self.capacity.items():
            if units <= 0:
                raise ValueError(f'{self.vehicle_id} capacity for {product_id} must be positive')
        return self

    def capacity_for(self, product_id: str) -> float:
        return self.capacity.get(product_id, 0.0)


class EnterpriseEnvironment(BaseModel):
    """The enterprise model the planner reasons over (static, never mutated)."""

    model_config = ConfigDict(frozen=True)

    site: str
    utility_totals: dict[str, float] = Field(default_factory=dict)
    worker_total: float = Field(default=0, ge=0)
    material_stock: dict[str, float] = Field(default_factory=dict)
    products: dict[str, Product] = Field(default_factory=dict)
    lines: dict[str, ProductionLine] = Field(default_factory=dict)
    vehicles: dict[str, Vehicle] = Field(default_factory=dict)
    routes: dict[str, dict[str, float]] = Field(default_factory=dict)
    policy: PolicyConfig = Field(default_factory=PolicyConfig)

    @model_validator(mode='after')
    def _references_resolve(self) -> 'EnterpriseEnvironment':
        for name, quantity in {**self.utility_totals, **self.material_stock}.items():
            if quantity < 0:
                raise ValueError(f'total of {name} is negative: {quantity}')
        for product in self.products.values():
            for material_id in product.bom:
                if material_id not in self.material_stock:
                    raise ValueError(f'{product.product_id} uses unknown material {material_id}')
        for line in self.lines.values():
            for product_id, capability in line.capability.items():
                if product_id not in self.products:
                    raise ValueError(f'line {line.line_id} lists unknown product {product_id}')
                for utility in capability.utility_draw:
                    if utility not in self.utility_totals:
                        raise ValueError(f'line {line.line_id} draws unknown utility {utility}')
        for vehicle in self.vehicles.values():
            for product_id in vehicle.capacity:
                if product_id not in self.products:
                    raise ValueError(f'vehicle {vehicle.vehicle_id} lists unknown product {product_id}')
        for origin, destinations in self.routes.items():
            for destination, distance in destinations.items():
                if distance <= 0:
                    raise ValueError(f'route {origin}->{destination} must be positive')
        return self

    def distance_to(self, destination: str) -> float:
        try:
            return self.routes[self.site][destination]
        except KeyError:
            raise ValueError(f'no route from {self.site} to {destination}') from None

    def capable_lines(self, product_id: str) -> list[ProductionLine]:
        return [line for _, line in sorted(self.lines.items()) if line.can_produce(product_id)]

    def capable_vehicles(self, product_id: str) -> list[Vehicle]:
        return [v for _, v in sorted(self.vehicles.items()) if v.capacity_for(product_id) > 0]

    def with_stock(self, overrides: dict[str, float]) -> 'EnterpriseEnvironment':
        unknown = sorted(set(overrides) - set(self.material_stock))
        if unknown:
            raise ValueError(f'stock override names unknown materials: {", ".join(unknown)}')
        return self.model_copy(update={'material_stock': {**self.material_stock, **overrides}})

    def with_policy(self, policy: PolicyConfig) -> 'EnterpriseEnvironment':
        return self.model_copy(update={'policy': policy})


class MobilizationTask(BaseModel):
    """Deliver `amount` of a product to a destination by `deadline`."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    deadline: float = Field(gt=0)
    amount: float = Field(gt=0)
    product_id: str
    destination: str

    def check_against(self, env: EnterpriseEnvironment) -> None:
        if self.product_id not in env.products:
            raise ValueError(f'task {self.task_id} asks for unknown product {self.product_id}')
        env.distance_to(self.destination)


class ActionKind(StrEnum):
    START = 'start'
    LOAD = 'load'
    TRANSPORT = 'transport'
    UNLOAD = 'unload'
    BACK = 'back'
    SHORTAGE = 'ResourceShortage'


TRIP_ACTIONS = (ActionKind.LOAD, ActionKind.TRANSPORT, ActionKind.UNLOAD, ActionKind.BACK)


class PlanStep(BaseModel):
    """One numbered action of the plan."""

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=1)
    action: ActionKind
    task_id: str
    line_id: str | None = None
    vehicle_id: str | None = None
    product_id: str | None = None
    material_id: str | None = None
    quantity: float | None = Field(default=None, gt=0)
    timestamp: float | None = Field(default=None, ge=0)

    @model_validator(mode='after')
    def _fields_match_action(self) -> 'PlanStep':
        required = {
            ActionKind.START: ('line_id', 'timestamp'),
            ActionKind.LOAD: ('vehicle_id', 'product_id', 'quantity', 'timestamp'),
            ActionKind.TRANSPORT: ('vehicle_id', 'product_id', 'quantity', 'timestamp'),
            ActionKind.UNLOAD: ('vehicle_id', 'product_id', 'quantity', 'timestamp'),
            ActionKind.BACK: ('vehicle_id', 'product_id', 'timestamp'),
            ActionKind.SHORTAGE: ('material_id', 'quantity'),
        }[self.action]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f'{self.action} step {self.index} lacks {", ".join(missing)}')
        return self


class InfeasibleReason(StrEnum):
    DEADLINE = 'deadline'
    NO_CAPABILITY = 'no-capability'
    UTILITY_EXHAUSTED = 'utility-exhausted'


class InfeasibleTaskRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    reason: InfeasibleReason


class TaskCost(BaseModel):
    model_config = ConfigDict(frozen=True)

    task_id: str
    production: float = 0.0
    transport: float = 0.0

    @property
    def total(self) -> float:
        return self.production + self.transport


class SearchStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    nodes_expanded: int = 0
    backtracks: int = 0


class Plan(BaseModel):
    """The numbered actions plus the report of infeasible tasks, costs and search effort."""

    model_config = ConfigDict(frozen=True)

    steps: tuple[PlanStep, ...] = ()
    infeasible: tuple[InfeasibleTaskRecord, ...] = ()
    costs: tuple[TaskCost, ...] = ()
    task_order: tuple[str, ...] = ()
    stats: SearchStats | None = None

    @property
    def shortages(self) -> tuple[ShortageRecord, ...]:
        return tuple(
            ShortageRecord(task_id=s.task_id, material_id=s.material_id, lack_amount=s.quantity)
            for s in self.steps
            if s.action is ActionKind.SHORTAGE
        )

    @property
    def total_cost(self) -> float:
        return sum(cost.total for cost in self.costs)
