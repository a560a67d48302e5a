import re

from pathlib import Path

import pytest

from mobilization_domain.model import EnterpriseEnvironment, MobilizationTask
from plan_io.domain_file import parse_domain
from plan_io.problem_file import parse_problem


FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'


def load_inputs(problem_name: str) -> tuple[EnterpriseEnvironment, list[MobilizationTask]]:
    env = parse_domain((FIXTURES / 'tables-1-7.json').read_bytes(), source='tables-1-7.json')
    problem = parse_problem((FIXTURES / problem_name).read_bytes(), source=problem_name)
    return problem.bind(env, source=problem_name), list(problem.tasks)


def golden_text(name: str) -> str:
    return (FIXTURES / 'golden' / name).read_text(encoding='utf-8')


def edit_line(text: str, number: int, old: str, new: str) -> str:
    """Replace `old` by `new` on the plan line starting with `[number]`."""
    lines = text.splitlines()
    for position, line in enumerate(lines):
        if line.startswith(f'[{number}] '):
            assert old in line, f'{old!r} not in {line!r}'
            lines[position] = line.replace(old, new, 1)
            return '\n'.join(lines) + '\n'
    raise AssertionError(f'no step [{number}]')


def drop_line(text: str, number: int) -> str:
    """Delete step `[number]` and renumber the steps after it."""
    kept = []
    for line in text.splitlines():
        match = re.match(r'\[(\d+)\] ', line)
        if match is None:
            kept.append(line)
            continue
        index = int(match.group(1))
        if index == number:
            continue
        if index > number:
            line = f'[{index - 1}] ' + line[match.end():]
        kept.append(line)
    return '\n'.join(kept) + '\n'


def insert_line(text: str, number: int, body: str) -> str:
    """Insert `[number] body` before step `[number]` and renumber the steps after it."""
    lines = []
    for line in text.splitlines():
        match = re.match(r'\[(\d+)\] ', line)
        if match is not None and int(match.group(1)) >= number:
            index = int(match.group(1))
            if index == number:
                lines.append(f'[{number}] {body}')
            line = f'[{index + 1}] ' + line[match.end():]
        lines.append(line)
    return '\n'.join(lines) + '\n'


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def env() -> EnterpriseEnvironment:
    env, _ = load_inputs('task1.json')
    return env


@pytest.fixture
def task1_inputs() -> tuple[EnterpriseEnvironment, list[MobilizationTask]]:
    return load_inputs('task1.json')


@pytest.fixture
def task2_task3_inputs() -> tuple[EnterpriseEnvironment, list[MobilizationTask]]:
    return load_inputs('task2-task3.json')


@pytest.fixture
def task1_golden() -> str:
    return golden_text('task1.plan')


@pytest.fixture
def task2_task3_golden() -> str:
    return golden_text('task2-task3.plan')
