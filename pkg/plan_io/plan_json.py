import json
import logging

from typing import Any

from pydantic import ValidationError

from mobilization_domain.model import Plan
from plan_io.plan_text import PlanSyntaxError


logger = logging.getLogger(__name__)


def plan_document(plan: Plan) -> dict[str, Any]:
    """The structured form of a plan, with its shortage and cost report."""
    return {
        'steps': [step.model_dump(mode='json', exclude_none=True) for step in plan.steps],
        'shortages': [record.model_dump(mode='json') for record in plan.shortages],
        'infeasible': [record.model_dump(mode='json') for record in plan.infeasible],
        'costs': [
            {**cost.model_dump(mode='json'), 'total': cost.total} for cost in plan.costs
        ],
        'total_cost': plan.total_cost,
        'task_order': list(plan.task_order),
        'stats': plan.stats.model_dump(mode='json') if plan.stats else None,
    }


def render_plan_json(plan: Plan) -> str:
    return json.dumps(plan_document(plan), indent=2, ensure_ascii=False) + '\n'


def parse_plan_json(text: str) -> Plan:
    """Read a plan written by `render_plan_json`; derived fields are ignored."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise PlanSyntaxError(e.msg, e.lineno) from e
    if not isinstance(document, dict):
        raise PlanSyntaxError('a plan document is a JSON object', 1)
    try:
        return Plan.model_validate(
            {
                key: document[key]
                for key in ('steps', 'infeasible', 'costs', 'task_order', 'stats')
                if document.get(key) is not None
            }
        )
    except ValidationError as e:
        error = e.errors()[0]
        raise PlanSyntaxError(f'{".".join(str(p) for p in error["loc"])}: {error["msg"]}', 1) from e
