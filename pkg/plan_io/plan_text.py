"""The plan action grammar.

    [<n>] (!start <line> <time> <task>)
    [<n>] (!load|!transport|!unload <vehicle> <task> <product> <quantity> <time>)
    [<n>] (!back <vehicle> <task> <product> <time>)
    [<n>] (!ResourceShortage <task> <material> <lack>)
    ; (!infeasible <task> <reason>)

Numbers carry one decimal, rounded half to even. A positive quantity
never renders below 0.1.
"""
import logging
import re

from decimal import ROUND_HALF_EVEN, Decimal

from pydantic import ValidationError

from mobilization_domain.model import (
    ActionKind,
    InfeasibleReason,
    InfeasibleTaskRecord,
    Plan,
    PlanStep,
)


logger = logging.getLogger(__name__)

_STEP = re.compile(r'\[(\d+)\]\s*\(!(\S+)((?:\s+[^\s()]+)*)\s*\)')
_INFEASIBLE = re.compile(r';\s*\(!infeasible\s+(\S+)\s+(\S+)\s*\)')
_LINE_GLYPH = re.compile(r'[Il1](\d{3})')
_ARITY = {
    ActionKind.START: 3,
    ActionKind.LOAD: 5,
    ActionKind.TRANSPORT: 5,
    ActionKind.UNLOAD: 5,
    ActionKind.BACK: 4,
    ActionKind.SHORTAGE: 3,
}


class PlanSyntaxError(ValueError):
    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f'line {line_number}: {message}')


def format_number(value: float) -> str:
    return str(Decimal(repr(float(value))).quantize(Decimal('0.1'), rounding=ROUND_HALF_EVEN))


def format_quantity(value: float) -> str:
    """Like format_number, but a positive quantity never renders as 0.0."""
    text = format_number(value)
    return '0.1' if value > 0 and Decimal(text) == 0 else text


def canonical_line_id(token: str) -> str:
    """Fold the I001 / 1001 glyphs of a line id into l001."""
    match = _LINE_GLYPH.fullmatch(token)
    return f'l{match.group(1)}' if match else token


def render_step(step: PlanStep) -> str:
    if step.action is ActionKind.START:
        arguments = [step.line_id, format_number(step.timestamp), step.task_id]
    elif step.action is ActionKind.SHORTAGE:
        arguments = [step.task_id, step.material_id, format_quantity(step.quantity)]
    elif step.action is ActionKind.BACK:
        arguments = [step.vehicle_id, step.task_id, step.product_id, format_number(step.timestamp)]
    else:
        arguments = [
            step.vehicle_id,
            step.task_id,
            step.product_id,
            format_quantity(step.quantity),
            format_number(step.timestamp),
        ]
    return f'[{step.index}] (!{step.action} {" ".join(arguments)})'


def render_plan(plan: Plan) -> str:
    lines = [render_step(step) for step in plan.steps]
    lines.extend(f'; (!infeasible {record.task_id} {record.reason})' for record in plan.infeasible)
    return ''.join(f'{line}\n' for line in lines)


def _number(token: str, line_number: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise PlanSyntaxError(f'{token!r} is not a number', line_number) from None


def parse_step(text: str, line_number: int) -> PlanStep:
    match = _STEP.fullmatch(text)
    if match is None:
        raise PlanSyntaxError(f'cannot read {text!r}', line_number)
    index, keyword, rest = int(match.group(1)), match.group(2), match.group(3).split()
    try:
        action = ActionKind(keyword)
    except ValueError:
        raise PlanSyntaxError(f'unknown action !{keyword}', line_number) from None
    if len(rest) != _ARITY[action]:
        raise PlanSyntaxError(f'!{keyword} takes {_ARITY[action]} arguments, got {len(rest)}', line_number)

    if action is ActionKind.START:
        line_id, timestamp, task_id = rest
        fields = dict(line_id=canonical_line_id(line_id), timestamp=_number(timestamp, line_number), task_id=task_id)
    elif action is ActionKind.SHORTAGE:
        task_id, material_id, lack = rest
        fields = dict(task_id=task_id, material_id=material_id, quantity=_number(lack, line_number))
    elif action is ActionKind.BACK:
        vehicle_id, task_id, product_id, timestamp = rest
        fields = dict(
            vehicle_id=vehicle_id, task_id=task_id, product_id=product_id, timestamp=_number(timestamp, line_number)
        )
    else:
        vehicle_id, task_id, product_id, quantity, timestamp = rest
        fields = dict(
            vehicle_id=vehicle_id,
            task_id=task_id,
            product_id=product_id,
            quantity=_number(quantity, line_number),
            timestamp=_number(timestamp, line_number),
        )
    try:
        return PlanStep(index=index, action=action, **fields)
    except ValidationError as e:
        raise PlanSyntaxError(e.errors()[0]['msg'], line_number) from e


def parse_plan(text: str) -> Plan:
    steps: list[PlanStep] = []
    infeasible: list[InfeasibleTaskRecord] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(';'):
            record = _INFEASIBLE.fullmatch(line)
            if record:
                try:
                    reason = InfeasibleReason(record.group(2))
                except ValueError:
                    raise PlanSyntaxError(f'unknown infeasibility reason {record.group(2)}', line_number) from None
                infeasible.append(InfeasibleTaskRecord(task_id=record.group(1), reason=reason))
            continue
        step = parse_step(line, line_number)
        if steps and step.index <= steps[-1].index:
            raise PlanSyntaxError(f'step [{step.index}] follows [{steps[-1].index}]', line_number)
        steps.append(step)
    logger.debug('parsed %d steps and %d infeasible records', len(steps), len(infeasible))
    return Plan(steps=tuple(steps), infeasible=tuple(infeasible))
