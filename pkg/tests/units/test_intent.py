from dataclasses import replace
from pathlib import Path

import pytest
import full_match

from conform.intent import (
    Classification, FactOrigin, extract_hs_intent, transform_wf, hard_intent_preserved, fingerprint, dump_report,
    report_as_dict, render_fact,
)
from conform.parser import parse_program
from conform.solver import Solver, Status, Verdict
from conform.nodes import Binary, Presence


CORPUS = Path(__file__).parent.parent / 'corpus'

ABS = 'method Abs(x: int) returns (r: int) ensures r >= 0 { if x < 0 { r := -x; } else { r := x; } }'


class RefusingSolver:
    def check_partition(self, partition):
        return Verdict(Status.INVALID, {})


def running_example():
    return parse_program((CORPUS / 'FindFirstOdd.mvl').read_text())


def test_verified_program_has_only_hard_intent():
    report = extract_hs_intent(parse_program(ABS), Solver())

    assert report.conforming
    assert report.soft == ()
    assert report.hard
    assert all(fact.classification is Classification.HARD for fact in report.hard)
    assert report.traces() == []


def test_running_example_splits_intent():
    report = extract_hs_intent(running_example(), Solver())
    hard_ids = {fact.fact_id for fact in report.hard}

    assert not report.conforming
    assert report.soft
    assert not hard_ids & {fact.fact_id for fact in report.soft}
    assert all(fact.classification is Classification.SOFT for fact in report.soft)
    assert all(fact.origin not in (FactOrigin.WF_CHECK, FactOrigin.TRUSTED) for fact in report.soft)
    assert [trace.target.line for trace in report.traces()] == [4, 5, 6]


def test_well_formedness_facts_are_hard_and_guarded():
    report = extract_hs_intent(running_example(), Solver())
    wf_facts = [fact for fact in report.facts() if fact.origin is FactOrigin.WF_CHECK]

    assert wf_facts
    for fact in wf_facts:
        assert fact.classification is Classification.HARD
        assert isinstance(fact.formula, Binary)
        assert isinstance(fact.formula.left, Presence)
        assert fact.formula.left.label == f'L{fact.line}'
        assert fact.obligation == fact.formula.right


def test_trusted_facts_stay_hard_on_failing_paths():
    program = parse_program('method M(x: int) returns (r: int) ensures {:trusted} r > x { r := x; }')
    report = extract_hs_intent(program, Solver())

    assert not report.conforming
    assert [render_fact(fact) for fact in report.hard if fact.origin is FactOrigin.TRUSTED] == ['r > x']
    assert [render_fact(fact) for fact in report.soft] == ['r == x']


def test_transform_wf_is_idempotent():
    report = extract_hs_intent(running_example(), Solver())
    fact = next(fact for fact in report.hard if fact.origin is FactOrigin.WF_CHECK)

    assert transform_wf(fact, report.program) is fact


def test_transform_wf_refuses_other_facts():
    report = extract_hs_intent(running_example(), Solver())
    fact = report.soft[0]

    with pytest.raises(ValueError, match=full_match(f'The fact "{fact.fact_id}" does not come from a well-formedness check.')):
        transform_wf(fact, report.program)


def test_transform_wf_without_the_statement():
    report = extract_hs_intent(running_example(), Solver())
    fact = next(fact for fact in report.hard if fact.origin is FactOrigin.WF_CHECK)
    bare = replace(fact, formula=fact.obligation, sid=99999)

    assert transform_wf(bare, report.program).formula.left == Presence('sid99999', f'L{fact.line}')


def test_fingerprints_ignore_layout():
    first = parse_program('method M(x: int) returns (r: int) { r := x + 1; }')
    second = parse_program('method M(x: int)\n  returns (r: int)\n{\n  r := x   +   1;\n}')
    third = parse_program('method M(x: int) returns (r: int) { r := x + 2; }')

    assert fingerprint(first.method('M').body.statements[0]) == fingerprint(second.method('M').body.statements[0])
    assert fingerprint(first.method('M').body.statements[0]) != fingerprint(third.method('M').body.statements[0])


def test_unchanged_program_preserves_hard_intent():
    program = running_example()
    report = extract_hs_intent(program, Solver())

    assert hard_intent_preserved(report, program, Solver()) == (True, [])


def test_broken_partitions_are_reported():
    program = parse_program(ABS)
    report = extract_hs_intent(program, Solver())

    preserved, broken = hard_intent_preserved(report, program, RefusingSolver())

    assert not preserved
    assert broken == [outcome.partition.partition_id for outcome in report.outcomes]


def test_failing_partitions_are_not_protected():
    program = parse_program('method M(x: int) returns (r: int) ensures r > x { r := x; }')
    report = extract_hs_intent(program, Solver())

    assert hard_intent_preserved(report, program, RefusingSolver()) == (True, [])


def test_dump_report():
    report = extract_hs_intent(parse_program(ABS), Solver())
    lines = dump_report(report).splitlines()

    assert lines[0] == 'partitions: 2 (conforming 2, nonconforming 0, unknown 0)'
    assert lines[1].endswith(': conforming')
    assert f'hard: {len(report.hard)}' in lines
    assert lines[-1] == 'soft: 0'


def test_report_as_dict():
    report = extract_hs_intent(running_example(), Solver())
    data = report_as_dict(report)

    assert data['conforming'] is False
    assert data['unknown'] == []
    assert len(data['hard']) == len(report.hard)
    assert {item['classification'] for item in data['soft']} == {'soft'}
    assert sum(1 for value in data['partitions'].values() if not value) == 3
