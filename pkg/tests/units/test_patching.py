import pytest
import full_match
from emptylog import MemoryLogger

from conform.errors import AmbiguousOriginal, OriginalNotFound, ReparseFailure
from conform.patching import HunkFilter, apply_patch, changed_lines, frozen_lines, strip_attributes
from conform.wire import Hunk, Patch


SOURCE = '''method Abs(x: int) returns (r: int)
  ensures r >= 0
{
  if x < 0 {
    r := x;
  } else {
    r := x;
  }
}
'''

ANNOTATED = SOURCE.replace('  ensures r >= 0', '  ensures {:trusted} r >= 0')

FIX = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := -x;')


def patch(*hunks):
    return Patch(tuple(hunks), 'test', 1)


def test_apply_marks_new_lines():
    result = apply_patch(SOURCE, patch(FIX))

    assert result == SOURCE.replace('  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := -x; // pr {:trusted}')
    assert result.endswith('}\n')


def test_apply_keeps_existing_markers():
    hunk = Hunk('program.mvl', '    r := x;\n  } else {', '    r := 0 - x; // pr {:trusted}\n  } else {')
    result = apply_patch(SOURCE, patch(hunk))

    assert result.count('// pr {:trusted}') == 1


def test_empty_patch_changes_nothing():
    assert apply_patch(SOURCE, patch()) == SOURCE


def test_ambiguous_original():
    hunk = Hunk('program.mvl', '    r := x;', '    r := -x;')

    with pytest.raises(AmbiguousOriginal, match=full_match('the original text of a hunk for "program.mvl" occurs 2 times')):
        apply_patch(SOURCE, patch(hunk))


def test_missing_original():
    hunk = Hunk('program.mvl', '    r := y;', '    r := -x;')

    with pytest.raises(OriginalNotFound, match=full_match('the original text of a hunk for "program.mvl" is not in the file')):
        apply_patch(SOURCE, patch(hunk))


def test_patched_file_must_parse():
    hunk = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := ;')

    with pytest.raises(ReparseFailure, match=full_match('the patched file does not parse: line 5, column 10: expected an expression but found ";"')):
        apply_patch(SOURCE, patch(hunk))


def test_strip_attributes_keeps_markers():
    assert strip_attributes('  ensures {:trusted} r >= 0') == '  ensures r >= 0'
    assert strip_attributes('  r := 1; // pr {:trusted}') == '  r := 1; // pr {:trusted}'


def test_frozen_lines():
    assert frozen_lines(ANNOTATED) == {1}
    assert frozen_lines(SOURCE) == set()


def test_changed_lines():
    assert changed_lines(SOURCE, apply_patch(SOURCE, patch(FIX))) == ['    r := -x; // pr {:trusted}']


def test_filter_keeps_a_good_hunk():
    logger = MemoryLogger()
    kept = HunkFilter(SOURCE, ANNOTATED, 'program.mvl', logger).filter(patch(FIX))

    assert kept == patch(FIX)
    assert len(logger.data) == 0


def test_filter_accepts_originals_copied_with_attributes():
    hunk = Hunk('program.mvl', '  ensures {:trusted} r >= 0\n{', '  ensures {:trusted} r >= 0\n  ensures r >= x || r >= -x\n{')
    kept = HunkFilter(SOURCE, ANNOTATED, 'program.mvl').filter(patch(hunk))

    assert kept is not None
    assert kept.hunks[0].original == '  ensures r >= 0\n{'


@pytest.mark.parametrize(
    ['hunks', 'message'],
    [
        (
            [Hunk('other.mvl', '    r := y;', '    r := -x;')],
            'Hunk 1 of a patch from "test" targets "other.mvl" instead of "program.mvl" and was dropped.',
        ),
        (
            [Hunk('program.mvl', '    r := y;', '    r := -x;')],
            'Hunk 1 of a patch from "test" was dropped: the original text of a hunk for "program.mvl" is not in the file.',
        ),
        (
            [Hunk('program.mvl', '  ensures r >= 0', '  ensures r > 0')],
            'Hunk 1 of a patch from "test" was dropped because it rewrites the frozen line 2.',
        ),
        (
            [Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    {:trusted} r := -x;')],
            'Hunk 1 of a patch from "test" was dropped because it adds a {:trusted} attribute.',
        ),
    ],
)
def test_filter_drops_bad_hunks(hunks, message):
    logger = MemoryLogger()

    assert HunkFilter(SOURCE, ANNOTATED, 'program.mvl', logger).filter(patch(*hunks)) is None
    assert logger.data.warning[0].message == message


def test_filter_drops_overlapping_hunks():
    logger = MemoryLogger()
    other = Hunk('program.mvl', '    r := x;\n  } else {', '    r := 0;\n  } else {')

    kept = HunkFilter(SOURCE, ANNOTATED, 'program.mvl', logger).filter(patch(FIX, other))

    assert kept == patch(FIX)
    assert logger.data.warning[0].message == 'Hunk 2 of a patch from "test" was dropped because it overlaps another hunk.'


def test_filter_drops_patches_that_do_not_parse():
    logger = MemoryLogger()
    broken = Hunk('program.mvl', '  if x < 0 {\n    r := x;', '  if x < 0 {\n    r := ;')

    assert HunkFilter(SOURCE, ANNOTATED, 'program.mvl', logger).filter(patch(broken)) is None
    assert logger.data.warning[0].message.startswith('A patch from "test" was dropped: the patched file does not parse:')
