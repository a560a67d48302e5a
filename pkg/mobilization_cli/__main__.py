import logging
import os
import sys

from pathlib import Path

import click
from dotenv import load_dotenv

from mobilization_domain.model import (
    DeadlineCheck,
    EnterpriseEnvironment,
    LinePolicy,
    MobilizationTask,
    PolicyConfig,
)
from mobilization_domain.planner import PlanningFailed, plan_mobilization
from plan_io.documents import DocumentError
from plan_io.domain_file import parse_domain
from plan_io.plan_json import parse_plan_json, render_plan_json
from plan_io.plan_text import PlanSyntaxError, parse_plan, render_plan
from plan_io.problem_file import ProblemFile, parse_problem
from plan_io.report import render_inspection, render_report_json, render_report_text, render_stats
from plan_validator.validator import (
    Rule,
    UnresolvedIdentifierError,
    ValidationReport,
    Verdict,
    Violation,
    validate,
)


logger = logging.getLogger(__name__)

load_dotenv()

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_INVALID = 3


def _read(path: str | None, what: str) -> bytes:
    if path is None:
        raise click.ClickException(f'--{what} is required')
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise click.ClickException(f'cannot read {what} file {path}: {e.strerror}') from e


def _parse_policy(ctx, param, value: str | None) -> LinePolicy | None:
    if value is None:
        return None
    key, _, setting = value.partition('=')
    if key != 'lines' or setting not in {p.value for p in LinePolicy}:
        raise click.BadParameter(f'expected lines=all-capable or lines=gamma-escalation, got {value}')
    return LinePolicy(setting)


def _load(
    domain: str | None,
    problem: str | None,
    line_policy: LinePolicy | None = None,
    changeover: float | None = None,
    deadline_check: str | None = None,
    strict_deadlines: bool = False,
) -> tuple[EnterpriseEnvironment, list[MobilizationTask]]:
    """Read the inputs and lay the command-line policy over the domain policy."""
    try:
        env = parse_domain(_read(domain, 'domain'), source=domain)
        tasks = ProblemFile()
        if problem is not None:
            tasks = parse_problem(_read(problem, 'problem'), source=problem)
        env = tasks.bind(env, source=problem or '<problem>')
    except DocumentError as e:
        raise click.ClickException(str(e)) from e

    overrides = {
        'line_policy': line_policy,
        'changeover_hours': changeover,
        'deadline_check': DeadlineCheck(deadline_check) if deadline_check else None,
        'strict_deadlines': True if strict_deadlines else None,
    }
    policy = PolicyConfig.model_validate(
        {**env.policy.model_dump(), **{k: v for k, v in overrides.items() if v is not None}}
    )
    logger.debug('policy in force: %s', policy)
    return env.with_policy(policy), list(tasks.tasks)


def policy_options(command):
    for option in reversed(
        (
            click.option('--domain', help='Domain document (JSON)'),
            click.option('--problem', help='Problem document (JSON)'),
            click.option('--policy', 'line_policy', callback=_parse_policy, help='lines=all-capable or lines=gamma-escalation'),
            click.option('--changeover', type=click.FloatRange(min=0), help='Changeover hours when a line switches product'),
            click.option('--deadline-check', type=click.Choice([c.value for c in DeadlineCheck]), help='Instant judged against the deadline'),
            click.option('--strict-deadlines', is_flag=True, help='Fail instead of reporting infeasible tasks'),
            click.option('--format', 'output_format', type=click.Choice(['text', 'json']), default='text', help='Output format'),
        )
    ):
        command = option(command)
    return command


@click.group()
@click.option(
    '--log-level',
    default=lambda: os.getenv('MOBPLAN_LOG_LEVEL', 'WARNING'),
    type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
    help='Logging level (default from MOBPLAN_LOG_LEVEL)',
)
def cli(log_level: str):
    """HTN planner for economic-mobilization production and delivery."""
    logging.basicConfig(format="[%(levelname)s]: %(message)s", level=log_level.upper())


@cli.command('plan')
@policy_options
@click.option('--stats', is_flag=True, help='Print costs, shortages and search statistics to standard error')
def plan_command(domain, problem, line_policy, changeover, deadline_check, strict_deadlines, output_format, stats):
    """Plan the tasks of PROBLEM against DOMAIN."""
    env, tasks = _load(domain, problem, line_policy, changeover, deadline_check, strict_deadlines)
    logger.info('--- 🚀 Planning %d tasks ---', len(tasks))
    try:
        plan = plan_mobilization(env, tasks)
    except PlanningFailed as e:
        click.echo(f'Error: {e}', err=True)
        sys.exit(EXIT_INFEASIBLE)
    except ValueError as e:
        raise click.ClickException(str(e)) from e
    click.echo(render_plan_json(plan) if output_format == 'json' else render_plan(plan), nl=False)
    if stats:
        click.echo(render_stats(plan), err=True, nl=False)


@cli.command('validate')
@policy_options
@click.option('--plan', 'plan_path', help='Plan to check (text, or JSON when the name ends in .json)')
def validate_command(domain, problem, line_policy, changeover, deadline_check, strict_deadlines, output_format, plan_path):
    """Check a plan against DOMAIN and PROBLEM."""
    env, tasks = _load(domain, problem, line_policy, changeover, deadline_check, strict_deadlines)
    try:
        text = _read(plan_path, 'plan').decode('utf-8')
        plan = parse_plan_json(text) if plan_path.endswith('.json') else parse_plan(text)
    except (UnicodeDecodeError, PlanSyntaxError) as e:
        raise click.ClickException(f'{plan_path}: {e}') from e

    try:
        report = validate(plan, env, tasks)
    except UnresolvedIdentifierError as e:
        report = ValidationReport(
            verdict=Verdict.FAIL,
            violations=(Violation(step=None, rule=Rule.UNRESOLVED_ID, message=str(e)),),
        )
    click.echo(render_report_json(report) if output_format == 'json' else render_report_text(report), nl=False)
    sys.exit(EXIT_OK if report.passed else EXIT_INVALID)


@cli.command('inspect')
@click.option('--domain', help='Domain document (JSON)')
@click.option('--problem', help='Problem document (JSON)')
def inspect_command(domain, problem):
    """Print the γ rankings of tasks, lines and vehicles."""
    env, tasks = _load(domain, problem)
    click.echo(render_inspection(env, tasks), nl=False)


if __name__ == "__main__":
    cli()
