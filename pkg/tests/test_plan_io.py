import json

import pytest
import yaml

from hypothesis import HealthCheck, given, settings, strategies as st

from conftest import FIXTURES, golden_text, load_inputs
from mobilization_domain.model import ActionKind, InfeasibleReason, Plan, PlanStep
from mobilization_domain.planner import plan_mobilization
from plan_io.domain_file import DomainFileError, parse_domain
from plan_io.plan_json import parse_plan_json, render_plan_json
from plan_io.plan_text import (
    PlanSyntaxError,
    canonical_line_id,
    format_number,
    format_quantity,
    parse_plan,
    parse_step,
    render_plan,
)
from plan_io.problem_file import ProblemFileError, parse_problem
from plan_io.report import render_report_json, render_report_text, render_stats
from plan_validator.validator import validate


def domain_data():
    return json.loads((FIXTURES / 'tables-1-7.json').read_text(encoding='utf-8'))


def dig(document, path):
    for key in path.split('.'):
        document = document[key]
    return document


# -- plan text ------------------------------------------------------------


@pytest.mark.parametrize('value, text', [(2, '2.0'), (0.25, '0.2'), (0.35, '0.4'), (9.0857, '9.1'), (0, '0.0')])
def test_format_number(value, text):
    assert format_number(value) == text


@pytest.mark.parametrize('value, text', [(0.02, '0.1'), (0.05, '0.1'), (0.06, '0.1'), (0.25, '0.2'), (60, '60.0')])
def test_positive_quantities_never_render_as_zero(value, text):
    assert format_quantity(value) == text


@pytest.mark.parametrize('token, expected', [('l001', 'l001'), ('I001', 'l001'), ('1001', 'l001'), ('c001', 'c001')])
def test_line_glyphs(token, expected):
    assert canonical_line_id(token) == expected


def test_glyph_plan_reads_like_the_canonical_one():
    glyphs = parse_plan(golden_text('task1-glyphs.plan'))
    canonical = parse_plan(golden_text('task1.plan'))
    assert [s.line_id for s in glyphs.steps] == [s.line_id for s in canonical.steps]


identifiers = st.builds(
    str.__add__,
    st.sampled_from('abcdefghijklmnopqrstuvwxyz'),
    st.text('abcdefghijklmnopqrstuvwxyz0123456789', max_size=5),
)
tenths = st.integers(min_value=1, max_value=10**6).map(lambda n: n / 10)
instants = st.integers(min_value=0, max_value=10**6).map(lambda n: n / 10)


@st.composite
def plan_steps(draw, index, quantities, moments):
    action = draw(st.sampled_from(list(ActionKind)))
    fields = dict(index=index, action=action, task_id=draw(identifiers))
    if action is ActionKind.START:
        fields.update(line_id=draw(identifiers), timestamp=draw(moments))
    elif action is ActionKind.SHORTAGE:
        fields.update(material_id=draw(identifiers), quantity=draw(quantities))
    else:
        fields.update(vehicle_id=draw(identifiers), product_id=draw(identifiers), timestamp=draw(moments))
        if action is not ActionKind.BACK:
            fields.update(quantity=draw(quantities))
    return PlanStep(**fields)


@st.composite
def plans(draw, quantities=tenths, moments=instants):
    size = draw(st.integers(min_value=0, max_value=12))
    return Plan(steps=tuple(draw(plan_steps(index, quantities, moments)) for index in range(1, size + 1)))


@settings(suppress_health_check=[HealthCheck.too_slow])
@given(plans())
def test_rendered_plans_read_back(plan):
    assert parse_plan(render_plan(plan)).steps == plan.steps


@settings(suppress_health_check=[HealthCheck.too_slow])
@given(plans(quantities=st.floats(min_value=0.001, max_value=1e5), moments=st.floats(min_value=0, max_value=1e5)))
def test_rendered_plans_read_back_to_one_decimal(plan):
    parsed = parse_plan(render_plan(plan))
    assert len(parsed.steps) == len(plan.steps)
    for original, read in zip(plan.steps, parsed.steps):
        assert read.model_dump(exclude={'quantity', 'timestamp'}) == original.model_dump(exclude={'quantity', 'timestamp'})
        if original.timestamp is not None:
            assert abs(read.timestamp - original.timestamp) <= 0.05 + 1e-9
        if original.quantity is not None:
            assert abs(read.quantity - original.quantity) <= 0.05 + 1e-9 or (
                original.quantity < 0.05 and read.quantity == 0.1
            )


def test_tiny_shortage_survives_the_text_round_trip(task1_inputs):
    env, tasks = task1_inputs
    env = env.with_stock({'m001': 399.98})
    text = render_plan(plan_mobilization(env, tasks))
    assert text.splitlines()[0] == '[1] (!ResourceShortage t001 m001 0.1)'
    assert validate(parse_plan(text), env, tasks).passed


def test_infeasible_lines_and_comments():
    plan = parse_plan('; a note\n[1] (!start l001 0.0 t001)\n\n; (!infeasible t002 no-capability)\n')
    assert len(plan.steps) == 1
    assert plan.infeasible[0].task_id == 't002'
    assert plan.infeasible[0].reason is InfeasibleReason.NO_CAPABILITY


@pytest.mark.parametrize(
    'text, message',
    [
        ('[1] (!fly c001 t001 p001 1.0 2.0)', 'unknown action'),
        ('[1] (!start l001 0.0)', 'takes 3 arguments'),
        ('[1] (!back c001 t001 p001 soon)', 'not a number'),
        ('[1] (!start l001 -1.0 t001)', 'greater than or equal'),
        ('[1] (!load c001 t001 p001 0.0 1.0)', 'greater than'),
        ('start l001 0.0 t001', 'cannot read'),
        ('; (!infeasible t001 lazy)', 'unknown infeasibility reason'),
    ],
)
def test_syntax_errors(text, message):
    with pytest.raises(PlanSyntaxError, match=message) as error:
        parse_plan(text)
    assert error.value.line_number == 1


def test_indices_must_increase():
    with pytest.raises(PlanSyntaxError) as error:
        parse_plan('[2] (!start l001 0.0 t001)\n[2] (!start l003 0.0 t001)\n')
    assert error.value.line_number == 2


def test_parse_step_keeps_the_index():
    step = parse_step('[7] (!ResourceShortage t003 m001 100.0)', 7)
    assert (step.index, step.action, step.material_id, step.quantity) == (7, ActionKind.SHORTAGE, 'm001', 100.0)


# -- plan JSON ------------------------------------------------------------


def test_json_plan_reads_back(task2_task3_inputs):
    plan = plan_mobilization(*task2_task3_inputs)
    text = render_plan_json(plan)
    document = json.loads(text)
    assert document['shortages'] == [{'task_id': 't003', 'material_id': 'm001', 'lack_amount': 100.0}]
    assert document['task_order'] == ['t002', 't003']
    assert 'line_id' not in document['steps'][2]

    again = parse_plan_json(text)
    assert again.steps == plan.steps
    assert again.costs == plan.costs
    assert again.stats == plan.stats


@pytest.mark.parametrize('text', ['[]', '{"steps": [{"index": 1, "action": "fly", "task_id": "t001"}]}', 'not json'])
def test_bad_json_plans(text):
    with pytest.raises(PlanSyntaxError):
        parse_plan_json(text)


# -- domain and problem documents -----------------------------------------


def test_domain_document(env):
    assert env.site == 'a1'
    assert env.distance_to('b2') == 120
    assert env.vehicles['c006'].trip_cost == 40
    assert env.lines['l001'].capability_for('p002').rate == 25


def test_domain_field_error_names_the_path():
    data = domain_data()
    del data['vehicles']['c001']['trip_cost']
    with pytest.raises(DomainFileError, match='trip_cost') as error:
        parse_domain(json.dumps(data, indent=2), source='broken.json')
    assert error.value.path == 'vehicles.c001.trip_cost'
    assert error.value.line is not None
    assert str(error.value).startswith('broken.json:')


def test_domain_unknown_field():
    data = domain_data()
    data['products']['p001']['colour'] = 'red'
    with pytest.raises(DomainFileError) as error:
        parse_domain(json.dumps(data))
    assert error.value.path == 'products.p001.colour'


def test_domain_bad_json_has_a_line():
    with pytest.raises(DomainFileError) as error:
        parse_domain(b'{\n  "site": "a1",\n  oops\n}\n', source='bad.json')
    assert error.value.line == 3


def test_domain_must_be_utf8():
    with pytest.raises(DomainFileError, match='not UTF-8'):
        parse_domain(b'\xff\xfe{}')


def test_domain_cross_references():
    data = domain_data()
    data['products']['p001']['bom']['m404'] = 1
    with pytest.raises(DomainFileError, match='unknown material m404'):
        parse_domain(json.dumps(data))


def test_site_needs_routes():
    with pytest.raises(DomainFileError, match='has no routes'):
        parse_domain('{"site": "a9", "routes": {"a1": {"b1": 100}}}')


def problem(*tasks, **extra):
    return json.dumps({'tasks': list(tasks), **extra})


def goal(task_id='t001', **overrides):
    return {'task_id': task_id, 'deadline': 9, 'amount': 200, 'product_id': 'p001', 'destination': 'b1', **overrides}


def test_problem_rejects_duplicate_ids():
    with pytest.raises(ProblemFileError, match='duplicate task id t001'):
        parse_problem(problem(goal(), goal()))


def test_problem_field_error():
    with pytest.raises(ProblemFileError) as error:
        parse_problem(problem(goal(deadline=0)))
    assert error.value.path == 'tasks.0.deadline'


@pytest.mark.parametrize(
    'document, message',
    [
        (problem(goal(), material_stock={'m404': 5}), 'm404'),
        (problem(goal(product_id='p009')), 'unknown product'),
        (problem(goal(destination='b9')), 'no route'),
    ],
)
def test_problem_must_fit_its_domain(env, document, message):
    with pytest.raises(ProblemFileError, match=message):
        parse_problem(document, source='p.json').bind(env, source='p.json')


def test_stock_override_only_touches_named_materials(task2_task3_inputs):
    env, _ = task2_task3_inputs
    assert env.material_stock['m001'] == 250
    assert env.material_stock['m006'] == 1000
    assert env.products['p001'].bom == {'m001': 2, 'm002': 3, 'm003': 5}


def test_fixture_numbers_trace_to_their_tables():
    provenance = yaml.safe_load((FIXTURES / 'provenance.yaml').read_text(encoding='utf-8'))
    root = FIXTURES.parent
    domain = json.loads((root / provenance['document']).read_text(encoding='utf-8'))
    for cell in provenance['cells']:
        assert dig(domain, cell['path']) == cell['value'], cell
    for cell in provenance['fixture_constants']:
        assert dig(domain, cell['path']) == cell['value'], cell

    override = provenance['stock_override']
    stock = json.loads((root / override['document']).read_text(encoding='utf-8'))
    for cell in override['cells']:
        assert dig(stock, cell['path']) == cell['value'], cell


# -- reports --------------------------------------------------------------


def test_report_renderings(task1_inputs, task1_golden):
    env, tasks = task1_inputs
    report = validate(parse_plan(task1_golden), env, tasks)
    text = render_report_text(report)
    assert text.splitlines() == [
        'verdict: pass',
        't001: delivered 200.0/200.0, last arrival 8.5, deadline 9.0 (margin +0.5)',
    ]
    document = json.loads(render_report_json(report))
    assert document['verdict'] == 'pass'
    assert document['violations'] == []
    assert document['tasks'][0]['margin'] == pytest.approx(0.5)


def test_failed_report_lists_violations():
    env, tasks = load_inputs('task1.json')
    report = validate(parse_plan(''), env, tasks)
    lines = render_report_text(report).splitlines()
    assert lines[0] == 'verdict: fail'
    assert lines[1].startswith('[-] delivered-total: t001 delivers 0.0 of 200')
    assert lines[2].endswith('last arrival -, deadline 9.0 (margin -)')


def test_stats(task1_inputs, task2_task3_inputs):
    lines = render_stats(plan_mobilization(*task1_inputs)).splitlines()
    assert lines[:2] == ['t001: production 200.0, transport 245.0, total 445.0', 'total cost: 445.0']
    assert lines[-1].startswith('search: ')

    lines = render_stats(plan_mobilization(*task2_task3_inputs)).splitlines()
    assert 'shortage: t003 m001 100.0' in lines
    assert lines[1].startswith('t003: production ')
