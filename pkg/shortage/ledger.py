import logging

from collections.abc import Mapping

from pydantic import BaseModel, ConfigDict, Field, field_validator


logger = logging.getLogger(__name__)

EPSILON = 1e-9


class ShortageRecord(BaseModel):
    """A material the stock lacks `lack_amount` of when a task needs it."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    material_id: str
    lack_amount: float = Field(gt=0)


class DemandSet(BaseModel):
    """Material demand of one task: bill of materials times task amount."""

    model_config = ConfigDict(frozen=True)

    demands: dict[str, float] = Field(default_factory=dict)

    @field_validator('demands')
    @classmethod
    def _non_negative(cls, value: dict[str, float]) -> dict[str, float]:
        for material_id, quantity in value.items():
            if quantity < 0:
                raise ValueError(f'demand for {material_id} is negative: {quantity}')
        return value

    @classmethod
    def for_task(cls, bom: Mapping[str, float], amount: float) -> 'DemandSet':
        return cls(demands={m: per_unit * amount for m, per_unit in sorted(bom.items())})


class LedgerEntry(BaseModel):
    """One ledger movement; a negative debit is a virtualized addition."""

    model_config = ConfigDict(frozen=True)

    task_id: str
    material_id: str
    debit: float


class MaterialLedger(BaseModel):
    """Stored material SM, as seen by the planner.

    `stock` already contains whatever was virtualized; `virtualized` keeps the
    running total of those assumed additions per material.
    """

    model_config = ConfigDict(frozen=True)

    initial: dict[str, float] = Field(default_factory=dict)
    stock: dict[str, float] = Field(default_factory=dict)
    virtualized: dict[str, float] = Field(default_factory=dict)
    history: tuple[LedgerEntry, ...] = ()

    @field_validator('initial', 'stock', 'virtualized')
    @classmethod
    def _non_negative(cls, value: dict[str, float]) -> dict[str, float]:
        for material_id, quantity in value.items():
            if quantity < 0:
                raise ValueError(f'ledger quantity for {material_id} is negative: {quantity}')
        return value

    @classmethod
    def opening(cls, stock: Mapping[str, float]) -> 'MaterialLedger':
        return cls(initial=dict(stock), stock=dict(stock))

    def on_hand(self, material_id: str) -> float:
        return self.stock.get(material_id, 0.0)

    def shortages_for(self, task_id: str, demands: DemandSet) -> list[ShortageRecord]:
        records = []
        for material_id, demand in sorted(demands.demands.items()):
            lack = demand - self.on_hand(material_id)
            if lack > EPSILON:
                records.append(
                    ShortageRecord(task_id=task_id, material_id=material_id, lack_amount=lack)
                )
        return records

    def virtualize(self, record: ShortageRecord) -> 'MaterialLedger':
        stock = dict(self.stock)
        virtualized = dict(self.virtualized)
        stock[record.material_id] = self.on_hand(record.material_id) + record.lack_amount
        virtualized[record.material_id] = (
            virtualized.get(record.material_id, 0.0) + record.lack_amount
        )
        entry = LedgerEntry(
            task_id=record.task_id, material_id=record.material_id, debit=-record.lack_amount
        )
        logger.debug('virtualized %s of %s for %s', record.lack_amount, record.material_id, record.task_id)
        return self.model_copy(
            update={'stock': stock, 'virtualized': virtualized, 'history': self.history + (entry,)}
        )

    def covers(self, demands: DemandSet) -> bool:
        return all(
            self.on_hand(m) >= quantity - EPSILON * max(1.0, quantity)
            for m, quantity in demands.demands.items()
        )

    def debit(self, task_id: str, demands: DemandSet) -> 'MaterialLedger':
        if not self.covers(demands):
            raise ValueError(f'ledger cannot cover the demand of {task_id}')
        stock = dict(self.stock)
        entries = []
        for material_id, quantity in sorted(demands.demands.items()):
            if quantity == 0:
                continue
            # round-off from virtualize-then-debit must not leave a negative stock
            stock[material_id] = max(0.0, self.on_hand(material_id) - quantity)
            entries.append(LedgerEntry(task_id=task_id, material_id=material_id, debit=quantity))
        return self.model_copy(update={'stock': stock, 'history': self.history + tuple(entries)})

    def replay(self) -> dict[str, float]:
        """Stock rebuilt from the opening balance and the history."""
        stock = dict(self.initial)
        for entry in self.history:
            stock[entry.material_id] = stock.get(entry.material_id, 0.0) - entry.debit
        return stock

    @property
    def total_virtualized(self) -> float:
        return sum(self.virtualized.values())


def check_and_virtualize(
    task_id: str, demands: DemandSet, ledger: MaterialLedger
) -> tuple[list[ShortageRecord], MaterialLedger]:
    """Report each material whose demand exceeds stock, assume the lack, debit all demands."""
    records = ledger.shortages_for(task_id, demands)
    for record in records:
        logger.info('--- ⚠️ Shortage for %s: %s lacks %s ---', task_id, record.material_id, record.lack_amount)
        ledger = ledger.virtualize(record)
    return records, ledger.debit(task_id, demands)
