import logging

from collections.abc import Sequence
from itertools import pairwise

from pydantic import BaseModel, ConfigDict, Field, model_validator


logger = logging.getLogger(__name__)

EPSILON = 1e-9


class InfeasibleQuantityError(ValueError):
    """Raised when a quantity is asked of a pool that never produces it."""


class ProductionSegment(BaseModel):
    """One line running at a constant rate over [start, end)."""

    model_config = ConfigDict(frozen=True)

    line_id: str
    start: float = Field(ge=0)
    end: float
    rate: float = Field(gt=0)

    @model_validator(mode='after')
    def _ordered(self) -> 'ProductionSegment':
        if self.end < self.start:
            raise ValueError(
                f'segment of {self.line_id} ends at {self.end} before it starts at {self.start}'
            )
        return self

    @property
    def duration(self) -> float:
        return self.end - self.start

    @property
    def output(self) -> float:
        return self.rate * self.duration

    def produced_by(self, instant: float) -> float:
        elapsed = min(max(instant - self.start, 0.0), self.duration)
        return self.rate * elapsed


class ProductionSchedule(BaseModel):
    """A piecewise-linear production pool feeding one task.

    The cumulative production function is the integral of the rates of the
    segments active at each instant; it is non-decreasing by construction.
    """

    model_config = ConfigDict(frozen=True)

    segments: tuple[ProductionSegment, ...] = ()

    @model_validator(mode='after')
    def _lines_do_not_overlap(self) -> 'ProductionSchedule':
        by_line: dict[str, list[ProductionSegment]] = {}
        for segment in self.segments:
            by_line.setdefault(segment.line_id, []).append(segment)
        for line_id, segments in by_line.items():
            ordered = sorted(segments, key=lambda s: s.start)
            for before, after in pairwise(ordered):
                if after.start < before.end - EPSILON:
                    raise ValueError(f'line {line_id} has overlapping segments')
        return self

    @property
    def total(self) -> float:
        return sum(segment.output for segment in self.segments)

    @property
    def finish(self) -> float:
        return max((segment.end for segment in self.segments), default=0.0)

    def cumulative(self, instant: float) -> float:
        return sum(segment.produced_by(instant) for segment in self.segments)

    def with_segment(self, segment: ProductionSegment) -> 'ProductionSchedule':
        return ProductionSchedule(segments=self.segments + (segment,))

    @classmethod
    def joint_finish(
        cls, engaged: Sequence[tuple[str, float, float]], amount: float
    ) -> 'ProductionSchedule':
        """Split `amount` over lines so that all of them stop together.

        `engaged` holds (line_id, start, rate) triples. The common finish t*
        solves sum(rate_i * max(0, t* - start_i)) = amount. Lines whose start
        is not before t* contribute nothing and get no segment.
        """
        if amount <= 0:
            raise ValueError(f'amount must be positive, got {amount}')
        if not engaged:
            raise ValueError('joint-finish needs at least one line')
        ordered = sorted(engaged, key=lambda item: (item[1], item[0]))
        cursor = ordered[0][1]
        produced = 0.0
        pooled_rate = 0.0
        finish = None
        for _, start, rate in ordered:
            if pooled_rate > 0 and produced + pooled_rate * (start - cursor) >= amount:
                finish = cursor + (amount - produced) / pooled_rate
                break
            produced += pooled_rate * (start - cursor)
            cursor = start
            pooled_rate += rate
        if finish is None:
            finish = cursor + (amount - produced) / pooled_rate
        segments = tuple(
            ProductionSegment(line_id=line_id, start=start, end=finish, rate=rate)
            for line_id, start, rate in ordered
            if start < finish
        )
        logger.debug('joint finish for %s units at %.6f over %s', amount, finish, [s.line_id for s in segments])
        return cls(segments=segments)


def available_at(schedule: ProductionSchedule, quantity: float) -> float:
    """Smallest instant at which cumulative production reaches `quantity`."""
    if quantity < 0:
        raise ValueError(f'quantity must be non-negative, got {quantity}')
    if quantity <= EPSILON:
        return 0.0
    total = schedule.total
    if quantity > total + EPSILON * max(1.0, total):
        raise InfeasibleQuantityError(
            f'pool produces {total} units in all, {quantity} were asked'
        )
    breakpoints = sorted({s.start for s in schedule.segments} | {s.end for s in schedule.segments})
    produced = 0.0
    for left, right in pairwise(breakpoints):
        rate = sum(
            s.rate for s in schedule.segments if s.start <= left and s.end >= right
        )
        if rate <= 0:
            continue
        gain = rate * (right - left)
        if produced + gain >= quantity:
            return left + (quantity - produced) / rate
        produced += gain
    return breakpoints[-1]
