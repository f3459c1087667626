from itertools import count
from pathlib import Path

import pytest
import full_match
from emptylog import MemoryLogger

from conform.coevolution import (
    Budget, Candidate, CoEvolution, Mode, Pool, RunState, Status, co_evolve, automated_assurance,
)
from conform.conformance import conforms_prog_spec, conforms_prog_test, conforms_spec_test
from conform.enumerative import EnumerativeSynthesizer
from conform.parser import parse_program, parse_test
from conform.wire import Hunk, Patch


CORPUS = Path(__file__).parent.parent / 'corpus'

ABS = 'method Abs(x: int) returns (r: int) ensures r >= 0 { if x < 0 { r := -x; } else { r := x; } }'
ABS_BROKEN = 'method Abs(x: int) returns (r: int) ensures r >= 0 { if x < 0 { r := x; } else { r := x; } }'

FIX = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := -x;')
MARKED_FIX = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := -x; // pr {:trusted}')
OTHER_FIX = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := 0 - x;')


class ScriptedSynthesizer:
    name = 'scripted'

    def __init__(self, *hunks):
        self.hunks = hunks
        self.requests = []

    def propose(self, request):
        self.requests.append(request)
        return [Patch((hunk,), self.name, request.campaign) for hunk in self.hunks]


@pytest.mark.parametrize(
    ['arguments', 'message'],
    [
        ({'wall_clock_s': 0}, 'The time budget must be positive, got 0 seconds.'),
        ({'max_campaigns': -1}, 'The number of campaigns must not be negative, got -1.'),
        ({'k': 0}, 'At least one patch per campaign is needed, got k=0.'),
        ({'max_candidates': 0}, 'The candidate pool needs room for at least one candidate, got 0.'),
    ],
)
def test_wrong_budgets(arguments, message):
    with pytest.raises(ValueError, match=full_match(message)):
        Budget(**arguments)


def test_pool_takes_the_newest_batch_first():
    root, first, second, third = (Candidate(name, name) for name in ('c0', 'c1', 'c2', 'c3'))
    pool = Pool(root)

    assert pool.pop() == root
    pool.push([first, second])
    pool.push([])
    pool.push([third])

    assert [pool.pop(), pool.pop(), pool.pop(), pool.pop()] == [third, first, second, None]


def test_run_state_counts_campaigns_and_names():
    state = RunState(Budget(max_campaigns=1))

    assert [state.next_name(), state.next_name()] == ['c0', 'c1']
    assert state.take_campaign()
    assert not state.take_campaign()
    assert state.exhausted()


def test_conforming_input_needs_no_campaign():
    logger = MemoryLogger()
    synthesizer = ScriptedSynthesizer()

    result = co_evolve(ABS, synthesizer, logger=logger)

    assert result.status is Status.VERIFIED
    assert result.campaigns == 0
    assert [candidate.name for candidate in result.verified] == ['c0']
    assert synthesizer.requests == []
    assert logger.data.info[0].message == 'The candidate "c0" verifies.'


def test_one_patch_repairs():
    logger = MemoryLogger()

    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX), logger=logger)
    candidate = result.verified[0]

    assert result.status is Status.VERIFIED
    assert result.campaigns == 1
    assert candidate.name == 'c1'
    assert candidate.lineage == ('1.1',)
    assert candidate.campaign == 1
    assert '    r := -x; // pr {:trusted}' in candidate.source
    assert conforms_prog_spec(parse_program(candidate.source)).holds
    assert result.records[0].admitted == ('c1',)
    assert result.records[0].message == 'A postcondition might not hold on this path.'
    assert 'Campaign 1 repairs "Abs.postcondition.' in logger.data.info[0].message


def test_no_campaign_left():
    logger = MemoryLogger()

    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX), budget=Budget(max_campaigns=0), logger=logger)

    assert result.status is Status.BUDGET_EXHAUSTED
    assert result.verified == ()
    assert result.campaigns == 0
    assert logger.data.warning[0].message == 'No campaign is left for the candidate "c0".'


def test_time_runs_out():
    logger = MemoryLogger()
    state = RunState(Budget(wall_clock_s=50), clock=count(0, 100).__next__)

    result = CoEvolution(ScriptedSynthesizer(FIX), budget=Budget(wall_clock_s=50), logger=logger, state=state).run(ABS_BROKEN)

    assert result.status is Status.BUDGET_EXHAUSTED
    assert logger.data.warning[0].message == 'The time budget of 50 seconds is used up.'


def test_no_patches():
    logger = MemoryLogger()

    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(), logger=logger)

    assert result.status is Status.NO_PATCHES
    assert result.campaigns == 1
    assert result.records[0].proposed == 0
    assert len(logger.data.exception) == 1


def test_patch_that_misses_the_failure_is_rejected():
    source = ABS_BROKEN + '\nmethod Noop(x: int) returns (r: int) { r := 1; }'
    logger = MemoryLogger()

    result = co_evolve(source, ScriptedSynthesizer(Hunk('program.mvl', '  r := 1;', '  r := 2;')), logger=logger)

    assert result.status is Status.NO_PATCHES
    assert result.records[0].rejected == ('1.1: the failing obligation still fails',)
    assert logger.data.warning[-1].message == 'Patch 1.1 ("") was rejected: the failing obligation still fails.'


def test_duplicate_candidates_are_rejected():
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX, MARKED_FIX))

    assert result.records[0].admitted == ('c1',)
    assert result.records[0].rejected == ('1.2: the same candidate is already known',)


def test_pool_size_limits_admission():
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX, OTHER_FIX), budget=Budget(max_candidates=1), mode=Mode.ALL)

    assert result.records[0].admitted == ('c1',)
    assert result.records[0].rejected == ('1.2: the pool already holds 1 candidates',)
    assert [candidate.name for candidate in result.verified] == ['c1']


def test_pool_counts_waiting_candidates_only():
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX, OTHER_FIX), budget=Budget(max_candidates=2), mode=Mode.ALL)

    assert result.records[0].admitted == ('c1', 'c2')
    assert result.records[0].rejected == ()


def test_enumerative_repair_of_one_of_two_failing_postconditions():
    source = 'method M(x: int) returns (r: int) ensures r == 1 ensures r >= x { r := 0; }'

    result = co_evolve(source, EnumerativeSynthesizer(), budget=Budget(max_campaigns=3, k=5))

    assert result.records[0].admitted
    assert result.status is not Status.NO_PATCHES


def test_all_mode_collects_every_repair():
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX, OTHER_FIX), mode=Mode.ALL)

    assert result.status is Status.VERIFIED
    assert [candidate.name for candidate in result.verified] == ['c1', 'c2']
    assert result.campaigns == 1


def test_first_mode_stops_early():
    result = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX, OTHER_FIX))

    assert [candidate.name for candidate in result.verified] == ['c1']


def test_campaign_record_lines():
    record = co_evolve(ABS_BROKEN, ScriptedSynthesizer(FIX)).records[0]
    lines = record.lines(timings=True)

    assert lines[0] == 'campaign 1: candidate c0'
    assert lines[1].startswith('  trace Abs.postcondition.')
    assert '  patches: 1' in lines
    assert '    admitted c1' in lines
    assert lines[-1].startswith('  elapsed: ')
    assert not record.lines()[-1].startswith('  elapsed: ')
    assert record.explanation.startswith('partitions: 2 (conforming 1, nonconforming 1, unknown 0)')


def test_running_example_is_repaired_by_the_enumerative_synthesizer():
    source = (CORPUS / 'FindFirstOdd.mvl').read_text()

    result = co_evolve(source, EnumerativeSynthesizer())

    assert result.status is Status.VERIFIED
    assert result.campaigns <= 2
    program = parse_program(result.verified[0].source)
    assert conforms_prog_spec(program).holds
    assert '// pr {:trusted}' in result.verified[0].source


@pytest.mark.parametrize('path', sorted((CORPUS / 'seeded').glob('*.mvl')), ids=lambda path: path.stem)
def test_seeded_programs_end_in_a_known_state(path):
    result = co_evolve(path.read_text(), EnumerativeSynthesizer(), budget=Budget(max_campaigns=2, k=3))

    assert result.campaigns <= 2
    assert (result.status is Status.VERIFIED) == bool(result.verified)
    for candidate in result.verified:
        assert conforms_prog_spec(parse_program(candidate.source)).holds


def test_assurance_without_tests():
    result = automated_assurance(ABS_BROKEN, [], ScriptedSynthesizer(FIX))
    triple = result.triples[0]

    assert result.status is Status.VERIFIED
    assert triple.tests == ()
    assert [name for name, _ in triple.specs] == ['Abs']
    assert len(triple.spec('Abs').ensures) == 1


def test_assurance_aligns_with_a_test():
    source = (CORPUS / 'FindFirstOdd.mvl').read_text()
    test = parse_test((CORPUS / 'AllEven.mvl').read_text())

    result = automated_assurance(source, [test], EnumerativeSynthesizer())

    assert result.status is Status.VERIFIED
    triple = result.triples[0]
    program = parse_program(triple.candidate.source)
    assert conforms_prog_spec(program).holds
    assert conforms_prog_test(program, test).holds
    assert conforms_spec_test(program.method('FindFirstOdd'), test).holds


def test_assurance_without_campaigns():
    source = (CORPUS / 'FindFirstOdd.mvl').read_text()
    test = parse_test((CORPUS / 'AllEven.mvl').read_text())

    result = automated_assurance(source, [test], EnumerativeSynthesizer(), budget=Budget(max_campaigns=0))

    assert result.status is Status.BUDGET_EXHAUSTED
    assert result.triples == ()
