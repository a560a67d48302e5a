import logging
import math

from collections.abc import Callable, Iterable
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Any, Generic, Protocol, Self, TypeVar


logger = logging.getLogger(__name__)


class DomainDefinitionError(ValueError):
    """Raised when the domain itself is inconsistent."""


class ContractViolation(RuntimeError):
    """Raised when an action is applied to a state it is not applicable in."""


class PlanningState(Protocol):
    def snapshot(self) -> Self: ...


S = TypeVar('S', bound=PlanningState)


class TaskKind(StrEnum):
    PRIMITIVE = 'primitive'
    COMPOUND = 'compound'


@dataclass(frozen=True)
class Task:
    name: str
    arguments: tuple[Any, ...] = ()

    @property
    def ident(self) -> str:
        if not self.arguments:
            return self.name
        return f'{self.name}({" ".join(str(a) for a in self.arguments)})'

    def __str__(self) -> str:
        return self.ident


@dataclass(frozen=True)
class GroundAction:
    """An operator instance bound to arguments; `timestamp` is its start."""

    name: str
    arguments: tuple[Any, ...]
    timestamp: float | None = None
    operator: 'Operator' = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Operator(Generic[S]):
    """A primitive task: s' = (s - effect-(a)) + effect+(a).

    Both effect functions receive a private snapshot and return it updated.
    """

    name: str
    precondition: Callable[[S, tuple], bool]
    negative_effects: Callable[[S, tuple], S]
    positive_effects: Callable[[S, tuple], S]
    duration_model: Callable[[tuple], float | None] = lambda arguments: None

    def ground(self, state: S, arguments: tuple) -> list[GroundAction]:
        if not self.precondition(state, arguments):
            return []
        return [GroundAction(self.name, arguments, self.duration_model(arguments), self)]


@dataclass(frozen=True)
class MethodInstance:
    method: str
    ident: str
    score: float
    subtasks: tuple[Task, ...]

    def __post_init__(self):
        if not self.subtasks:
            raise DomainDefinitionError(f'method instance {self.ident} has no subtasks')
        if not math.isfinite(self.score) or self.score < 0:
            raise DomainDefinitionError(f'method instance {self.ident} has score {self.score}')


@dataclass(frozen=True)
class Method(Generic[S]):
    """Decomposes `task_name`; `ground` yields the applicable instances.

    `vocabulary` lists every subtask name the method may emit, so that the
    domain can check them up front.
    """

    name: str
    task_name: str
    ground: Callable[[S, Task], Iterable[MethodInstance]]
    vocabulary: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Domain(Generic[S]):
    """Operators and methods, plus an optional diagnosis hook for infeasible goals."""

    operators: tuple[Operator, ...]
    methods: tuple[Method, ...]
    diagnose: Callable[[S, Task], str] | None = None

    def __post_init__(self):
        operator_names = [op.name for op in self.operators]
        method_names = [m.name for m in self.methods]
        for kind, names in (('operator', operator_names), ('method', method_names)):
            duplicates = sorted({n for n in names if names.count(n) > 1})
            if duplicates:
                raise DomainDefinitionError(f'duplicate {kind} names: {", ".join(duplicates)}')
        decomposable = {m.task_name for m in self.methods}
        for method in self.methods:
            if method.task_name in operator_names:
                raise DomainDefinitionError(f'method {method.name} decomposes primitive {method.task_name}')
            for name in method.vocabulary:
                if name.startswith('!') and name not in operator_names:
                    raise DomainDefinitionError(f'method {method.name} uses unknown operator {name}')
                if not name.startswith('!') and name not in decomposable:
                    raise DomainDefinitionError(f'method {method.name} uses {name}, which no method decomposes')

    def operator(self, name: str) -> Operator:
        for op in self.operators:
            if op.name == name:
                return op
        raise DomainDefinitionError(f'unknown operator {name}')

    def methods_for(self, task_name: str) -> list[Method]:
        return [m for m in self.methods if m.task_name == task_name]

    def kind_of(self, task: Task) -> TaskKind:
        if any(op.name == task.name for op in self.operators):
            return TaskKind.PRIMITIVE
        return TaskKind.COMPOUND


@dataclass(frozen=True)
class PlanningProblem(Generic[S]):
    """An initial state, a domain and the goal tasks to decompose."""

    initial_state: S
    domain: Domain
    goal_tasks: tuple[Task, ...]
    priority: Callable[[Task], float] = lambda task: 0.0
    strict: bool = False
