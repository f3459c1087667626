import pytest
import full_match

from conform.errors import PluginFailure
from conform.wire import Hunk, Patch, parse_reply, parse_modifications, format_patch, format_reply


REPLY = '''The loop starts from the wrong value.

# modification 1
<file>program.mvl</file>
<original>
  odd := -1;
</original>
<patched>
  odd := 0; // pr {:trusted}
</patched>

# modification 2
<file>program.mvl</file>
<original>
  ensures arr[odd] % 2 != 0
</original>
<patched>
  ensures 0 <= odd < arr.Length ==> arr[odd] % 2 != 0 // pr {:trusted}
</patched>
'''


def test_single_patch_reply():
    patches = parse_reply(REPLY, 'llm', 2)

    assert patches == [
        Patch(
            (
                Hunk('program.mvl', '  odd := -1;', '  odd := 0; // pr {:trusted}'),
                Hunk('program.mvl', '  ensures arr[odd] % 2 != 0', '  ensures 0 <= odd < arr.Length ==> arr[odd] % 2 != 0 // pr {:trusted}'),
            ),
            'llm',
            2,
        ),
    ]


def test_several_patches():
    text = 'Two ideas.\n# patch 1\n' + REPLY + '\n# patch 2\n# modification 1\n<file>program.mvl</file>\n<original>\na\n</original>\n<patched>\nb\n</patched>\n'
    patches = parse_reply(text)

    assert [len(patch.hunks) for patch in patches] == [2, 1]
    assert patches[1].hunks[0] == Hunk('program.mvl', 'a', 'b')
    assert patches[1].synthesizer_id == 'unknown'


def test_reply_without_modifications():
    assert parse_reply('I cannot fix this program.') == []


def test_deletion_and_multiline_hunks():
    text = '# modification 1\n<file>p.mvl</file>\n<original>\n  x := 1;\n\n  y := 2;\n</original>\n<patched>\n</patched>\n'
    hunk = parse_modifications(text)[0]

    assert hunk.original_lines == ['  x := 1;', '', '  y := 2;']
    assert hunk.patched == ''
    assert hunk.patched_lines == []


@pytest.mark.parametrize(
    ['text', 'message'],
    [
        ('# modification 1\n<original>\na\n</original>\n<patched>\nb\n</patched>', 'modification 1 has no <file> section'),
        ('# modification 1\n<file>f</file>\n<original>\na\n</original>\n<patched>\nb\n</patched>\n# modification 2\n<file>f</file>\n<original>a</original>', 'modification 2 has no <patched> section'),
    ],
)
def test_missing_sections(text, message):
    with pytest.raises(PluginFailure, match=full_match(message)):
        parse_reply(text)


def test_formatted_patches_read_back():
    patches = parse_reply(REPLY, 'llm', 2)

    assert parse_reply(format_patch(patches[0]), 'llm', 2) == patches
    assert parse_reply(format_reply(patches + patches), 'llm', 2) == patches + patches


def test_description_does_not_change_identity():
    hunks = (Hunk('f', 'a', 'b'),)

    assert Patch(hunks, description='one') == Patch(hunks, description='two')
