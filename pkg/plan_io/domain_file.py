import logging

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from mobilization_domain.model import (
    EnterpriseEnvironment,
    LineCapability,
    PolicyConfig,
    Product,
    ProductionLine,
    Vehicle,
)
from plan_io.documents import DocumentError, decode, load_json, validate_document


logger = logging.getLogger(__name__)


class DomainFileError(DocumentError):
    """Raised when a domain document is malformed or inconsistent."""


class ProductEntry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    bom: dict[str, float] = Field(default_factory=dict)
    load_rate: float = Field(gt=0)
    unload_rate: float = Field(gt=0)


class CapabilityEntry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    rate: float = Field(gt=0)
    cost_rate: float = Field(gt=0)
    utility_draw: dict[str, float] = Field(default_factory=dict)
    worker_draw: float = Field(default=0, ge=0)


class VehicleEntry(BaseModel):
    model_config = ConfigDict(extra='forbid')

    speed: float = Field(gt=0)
    trip_cost: float = Field(gt=0)
    capacity: dict[str, float] = Field(default_factory=dict)


class DomainFile(BaseModel):
    """Schema of the domain document (see docs/formats.md)."""

    model_config = ConfigDict(extra='forbid')

    site: str
    utilities: dict[str, float] = Field(default_factory=dict)
    workers: float = Field(default=0, ge=0)
    materials: dict[str, float] = Field(default_factory=dict)
    products: dict[str, ProductEntry] = Field(default_factory=dict)
    lines: dict[str, dict[str, CapabilityEntry]] = Field(default_factory=dict)
    vehicles: dict[str, VehicleEntry] = Field(default_factory=dict)
    routes: dict[str, dict[str, float]] = Field(default_factory=dict)
    policy: PolicyConfig = Field(default_factory=PolicyConfig)

    @model_validator(mode='after')
    def _site_has_routes(self) -> 'DomainFile':
        if self.site not in self.routes:
            raise ValueError(f'site {self.site} has no routes')
        return self

    def to_environment(self) -> EnterpriseEnvironment:
        return EnterpriseEnvironment(
            site=self.site,
            utility_totals=self.utilities,
            worker_total=self.workers,
            material_stock=self.materials,
            products={
                product_id: Product(product_id=product_id, **entry.model_dump())
                for product_id, entry in self.products.items()
            },
            lines={
                line_id: ProductionLine(
                    line_id=line_id,
                    capability={
                        product_id: LineCapability(**entry.model_dump())
                        for product_id, entry in capability.items()
                    },
                )
                for line_id, capability in self.lines.items()
            },
            vehicles={
                vehicle_id: Vehicle(vehicle_id=vehicle_id, **entry.model_dump())
                for vehicle_id, entry in self.vehicles.items()
            },
            routes=self.routes,
            policy=self.policy,
        )


def parse_domain(data: bytes | str, *, source: str = '<domain>') -> EnterpriseEnvironment:
    """Read a domain document into a validated environment."""
    text = decode(data, source, DomainFileError)
    document = validate_document(DomainFile, load_json(text, source, DomainFileError), text, source, DomainFileError)
    try:
        env = document.to_environment()
    except ValidationError as e:
        raise DomainFileError(e.errors()[0]['msg'], source=source) from e
    logger.info(
        '--- 📦 Loaded %s: %d lines, %d vehicles, %d materials ---',
        source, len(env.lines), len(env.vehicles), len(env.material_stock),
    )
    return env
