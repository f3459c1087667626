from pathlib import Path

import pytest
import full_match
from emptylog import MemoryLogger

from conform.enumerative import EnumerativeSynthesizer, SourceEditor, relocated_line, int_literal
from conform.errors import PluginFailure
from conform.intent import extract_hs_intent
from conform.parser import parse_program
from conform.patching import apply_patch
from conform.printer import print_program
from conform.solver import Solver
from conform.synthesis import SynthRequest, build_request
from conform.wire import Hunk
from conform.nodes import IntLit, Unary, literal


CORPUS = Path(__file__).parent.parent / 'corpus'

FIVE = '''method Five() returns (r: int)
  ensures r == 5
{
  r := 3;
}
'''


def first_request(source, **arguments):
    program = parse_program(print_program(parse_program(source)))
    report = extract_hs_intent(program, Solver())
    return build_request(report, report.failing()[0], **arguments)


def test_failing_clause_gets_guarded():
    logger = MemoryLogger()
    request = first_request((CORPUS / 'FindFirstOdd.mvl').read_text())

    patches = EnumerativeSynthesizer(logger=logger).propose(request)

    assert patches[0].description == 'guard the failing clause at line 3'
    assert patches[0].hunks == (Hunk('program.mvl', '  ensures arr[odd] % 2 != 0', '  ensures 0 <= odd < arr.Length ==> arr[odd] % 2 != 0'),)
    assert patches[0].synthesizer_id == 'enumerative'
    assert logger.data.info[0].message == 'The edit "guard the failing clause at line 3" removes the failing obligation.'
    assert 1 <= len(patches) <= request.k


def test_every_proposal_applies():
    request = first_request((CORPUS / 'FindFirstOdd.mvl').read_text())

    for patch in EnumerativeSynthesizer().propose(request):
        parse_program(apply_patch(request.source, patch))


def test_demanded_value():
    request = first_request(FIVE)

    patches = EnumerativeSynthesizer().propose(request)

    assert patches[0].description == 'set "r" to the value the postcondition demands'
    assert patches[0].hunks == (Hunk('program.mvl', '  r := 3;', '  r := 5;'),)


def test_proposals_are_deterministic():
    request = first_request(FIVE)

    assert EnumerativeSynthesizer(seed=3).propose(request) == EnumerativeSynthesizer(seed=3).propose(request)


def test_postconditions_sharing_a_line_are_told_apart_by_clause():
    request = first_request('method M(x: int) returns (r: int) ensures r == 1 ensures r >= x { r := 0; }')

    patches = EnumerativeSynthesizer().propose(request)

    assert patches
    assert all(apply_patch(request.source, patch, request.filename) != request.source for patch in patches)


def test_at_most_k_proposals():
    assert len(EnumerativeSynthesizer().propose(first_request(FIVE, k=1))) == 1


def test_request_without_a_program():
    request = SynthRequest('f', 's', 's', 't', 'e', 'a', 's', (), 'c', ())

    with pytest.raises(PluginFailure, match=full_match('the enumerative synthesizer needs the program behind the request')):
        EnumerativeSynthesizer().propose(request)


def test_editor_extends_hunks_until_unique():
    editor = SourceEditor('a\nx := 1;\nb\nx := 1;', 'f', set())

    assert editor.hunk(3, ['x := 2;']) == Hunk('f', 'b\nx := 1;', 'b\nx := 2;')
    assert editor.hunk(0, []) == Hunk('f', 'a', '')


def test_relocated_line():
    lines = ['a', 'b', 'c', 'd']
    hunks = [Hunk('f', 'b', 'b\nb2\nb3')]

    assert relocated_line(lines, hunks, 4) == 6
    assert relocated_line(lines, hunks, 1) == 1


def test_literals():
    assert int_literal(literal(-3)) == -3
    assert literal(-3) == Unary('-', IntLit(3))
    assert int_literal(IntLit(4)) == 4
