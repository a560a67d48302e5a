import json

import pytest

from click.testing import CliRunner

from conftest import FIXTURES, edit_line, golden_text
from mobilization_cli.__main__ import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INVALID, EXIT_OK, cli


DOMAIN = str(FIXTURES / 'tables-1-7.json')
TASK1 = str(FIXTURES / 'task1.json')
TASK1_TIGHT = str(FIXTURES / 'task1-deadline-2.json')
TASK2_TASK3 = str(FIXTURES / 'task2-task3.json')


@pytest.fixture
def runner():
    return CliRunner()


def plan(runner, problem, *extra):
    return runner.invoke(cli, ['plan', '--domain', DOMAIN, '--problem', problem, *extra])


def check(runner, problem, plan_path, *extra):
    return runner.invoke(cli, ['validate', '--domain', DOMAIN, '--problem', problem, '--plan', str(plan_path), *extra])


@pytest.mark.parametrize('problem, golden', [(TASK1, 'task1.plan'), (TASK2_TASK3, 'task2-task3.plan')])
def test_plan_prints_the_golden_plan(runner, problem, golden):
    result = plan(runner, problem)
    assert result.exit_code == EXIT_OK, result.output
    assert result.stdout == golden_text(golden)


def test_plan_is_repeatable(runner):
    assert plan(runner, TASK2_TASK3).stdout == plan(runner, TASK2_TASK3).stdout


def test_gamma_escalation_policy(runner):
    result = plan(runner, TASK1, '--policy', 'lines=gamma-escalation')
    assert result.exit_code == EXIT_OK
    assert result.stdout == golden_text('task1.plan')


def test_bad_policy_value(runner):
    result = plan(runner, TASK1, '--policy', 'vehicles=all')
    assert result.exit_code != EXIT_OK
    assert 'expected lines=' in result.output


def test_tight_deadline_is_reported(runner):
    result = plan(runner, TASK1_TIGHT)
    assert result.exit_code == EXIT_OK
    assert result.stdout == '; (!infeasible t001 deadline)\n'


def test_tight_deadline_fails_when_strict(runner):
    result = plan(runner, TASK1_TIGHT, '--strict-deadlines')
    assert result.exit_code == EXIT_INFEASIBLE
    assert result.stdout == ''
    assert 'no feasible plan for t001' in result.stderr


def test_stats_go_to_stderr(runner):
    result = plan(runner, TASK1, '--stats')
    assert result.stdout == golden_text('task1.plan')
    assert 'total cost: 445.0' in result.stderr.splitlines()


def test_json_format(runner):
    result = plan(runner, TASK2_TASK3, '--format', 'json')
    document = json.loads(result.stdout)
    assert document['task_order'] == ['t002', 't003']
    assert len(document['steps']) == 25


def test_missing_input_file(runner, tmp_path):
    result = plan(runner, str(tmp_path / 'nowhere.json'))
    assert result.exit_code == EXIT_INPUT
    assert 'cannot read problem file' in result.output


def test_domain_is_required(runner):
    result = runner.invoke(cli, ['plan', '--problem', TASK1])
    assert result.exit_code == EXIT_INPUT
    assert '--domain is required' in result.output


def test_malformed_problem(runner, tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"tasks": [{"task_id": "t001"}]}', encoding='utf-8')
    result = plan(runner, str(broken))
    assert result.exit_code == EXIT_INPUT
    assert 'broken.json' in result.output


@pytest.mark.parametrize('problem, golden', [(TASK1, 'task1.plan'), (TASK2_TASK3, 'task2-task3.plan')])
def test_validate_golden_plans(runner, problem, golden):
    result = check(runner, problem, FIXTURES / 'golden' / golden)
    assert result.exit_code == EXIT_OK, result.output
    assert result.stdout.startswith('verdict: pass\n')


def test_validate_mutated_plan(runner, tmp_path):
    mutated = tmp_path / 'mutated.plan'
    mutated.write_text(edit_line(golden_text('task1.plan'), 11, '50.0', '80.0'), encoding='utf-8')
    result = check(runner, TASK1, mutated)
    assert result.exit_code == EXIT_INVALID
    assert '[11] capacity:' in result.stdout


def test_validate_against_the_wrong_problem(runner):
    result = check(runner, TASK1, FIXTURES / 'golden' / 'task2-task3.plan')
    assert result.exit_code == EXIT_INVALID
    assert 'unresolved-id' in result.stdout
    assert 't002' in result.stdout


def test_validate_json_report_and_plan(runner, tmp_path):
    plan_json = tmp_path / 'plan.json'
    plan_json.write_text(plan(runner, TASK1, '--format', 'json').stdout, encoding='utf-8')
    result = check(runner, TASK1, plan_json, '--format', 'json')
    assert result.exit_code == EXIT_OK
    assert json.loads(result.stdout)['verdict'] == 'pass'


@pytest.mark.parametrize(
    'problem, golden, option, rule',
    [
        (TASK2_TASK3, 'task2-task3.plan', ['--changeover', '1.0'], 'line-overlap'),
        (TASK1, 'task1.plan', ['--deadline-check', 'unload-complete'], 'deadline'),
    ],
)
def test_validate_under_a_stricter_policy(runner, problem, golden, option, rule):
    result = check(runner, problem, FIXTURES / 'golden' / golden, *option)
    assert result.exit_code == EXIT_INVALID
    assert f' {rule}: ' in result.stdout


def test_validate_unreadable_plan(runner, tmp_path):
    garbage = tmp_path / 'garbage.plan'
    garbage.write_text('[1] (!fly c001)\n', encoding='utf-8')
    result = check(runner, TASK1, garbage)
    assert result.exit_code == EXIT_INPUT
    assert 'unknown action !fly' in result.output


def test_inspect(runner):
    result = runner.invoke(cli, ['inspect', '--domain', DOMAIN, '--problem', TASK2_TASK3])
    assert result.exit_code == EXIT_OK
    lines = result.stdout.splitlines()
    assert lines.index('  t002  14.29') < lines.index('  t003  7.50')
    assert lines.index('  l001@p001  2.00') < lines.index('  l003@p001  0.75')
    vehicles = lines.index('vehicles (speed / trip cost):')
    assert lines[vehicles + 1] == '  c006  1.75'


def test_inspect_without_a_problem(runner):
    result = runner.invoke(cli, ['inspect', '--domain', DOMAIN])
    assert result.exit_code == EXIT_OK
    lines = result.stdout.splitlines()
    assert lines[:2] == ['tasks (amount / deadline):', 'lines (rate / cost):']
