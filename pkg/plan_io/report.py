import json
import logging

from collections.abc import Sequence

from mobilization_domain.heuristics import gamma_line, gamma_task, gamma_vehicle, rank_lines, rank_vehicles
from mobilization_domain.model import EnterpriseEnvironment, MobilizationTask, Plan
from plan_validator.validator import ValidationReport


logger = logging.getLogger(__name__)


def render_report_text(report: ValidationReport) -> str:
    lines = [f'verdict: {report.verdict}']
    for violation in report.violations:
        where = f'[{violation.step}]' if violation.step is not None else '[-]'
        lines.append(f'{where} {violation.rule}: {violation.message}')
    for summary in report.tasks:
        if summary.reported_infeasible:
            lines.append(f'{summary.task_id}: reported infeasible')
            continue
        arrival = '-' if summary.last_arrival is None else f'{summary.last_arrival:.1f}'
        margin = '-' if summary.margin is None else f'{summary.margin:+.1f}'
        lines.append(
            f'{summary.task_id}: delivered {summary.delivered:.1f}/{summary.amount:.1f}, '
            f'last arrival {arrival}, deadline {summary.deadline:.1f} (margin {margin})'
        )
    return ''.join(f'{line}\n' for line in lines)


def render_report_json(report: ValidationReport) -> str:
    document = report.model_dump(mode='json')
    for summary, task in zip(document['tasks'], report.tasks):
        summary['margin'] = task.margin
    return json.dumps(document, indent=2, ensure_ascii=False) + '\n'


def render_stats(plan: Plan) -> str:
    lines = []
    for cost in plan.costs:
        lines.append(
            f'{cost.task_id}: production {cost.production:.1f}, transport {cost.transport:.1f}, total {cost.total:.1f}'
        )
    lines.append(f'total cost: {plan.total_cost:.1f}')
    for record in plan.shortages:
        lines.append(f'shortage: {record.task_id} {record.material_id} {record.lack_amount:.1f}')
    for record in plan.infeasible:
        lines.append(f'infeasible: {record.task_id} ({record.reason})')
    if plan.stats is not None:
        lines.append(f'search: {plan.stats.nodes_expanded} nodes, {plan.stats.backtracks} backtracks')
    return ''.join(f'{line}\n' for line in lines)


def render_inspection(env: EnterpriseEnvironment, tasks: Sequence[MobilizationTask]) -> str:
    """γ tables for tasks, lines and vehicles, each in rank order."""
    lines = ['tasks (amount / deadline):']
    for task in sorted(tasks, key=lambda t: (-gamma_task(t), t.task_id)):
        lines.append(f'  {task.task_id}  {gamma_task(task):.2f}')
    lines.append('lines (rate / cost):')
    for product_id in sorted(env.products):
        for line in rank_lines(env, product_id):
            lines.append(f'  {line.line_id}@{product_id}  {gamma_line(line, product_id):.2f}')
    lines.append('vehicles (speed / trip cost):')
    for vehicle in sorted(env.vehicles.values(), key=lambda v: (-gamma_vehicle(v), v.vehicle_id)):
        lines.append(f'  {vehicle.vehicle_id}  {gamma_vehicle(vehicle):.2f}')
    return ''.join(f'{line}\n' for line in lines)
