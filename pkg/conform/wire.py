import re
from dataclasses import dataclass, field
from typing import List, Tuple

from conform.errors import PluginFailure


MODIFICATION = re.compile(r'^#\s*modification\s+\d+\s*$', re.MULTILINE)
PATCH = re.compile(r'^#\s*patch\s+\d+\s*$', re.MULTILINE)


@dataclass(frozen=True)
class Hunk:
    file: str
    original: str
    patched: str

    @property
    def original_lines(self) -> List[str]:
        return self.original.split('\n') if self.original else []

    @property
    def patched_lines(self) -> List[str]:
        return self.patched.split('\n') if self.patched else []


@dataclass(frozen=True)
class Patch:
    hunks: Tuple[Hunk, ...]
    synthesizer_id: str = 'unknown'
    campaign: int = 0
    description: str = field(default='', compare=False)


def tag_content(block: str, tag: str, number: int) -> str:
    match = re.search(rf'<{tag}>(.*?)</{tag}>', block, re.DOTALL)
    if match is None:
        raise PluginFailure(f'modification {number} has no <{tag}> section')
    content = match.group(1)
    if content.startswith('\n'):
        content = content[1:]
    if content.endswith('\n'):
        content = content[:-1]
    return content


def parse_modifications(text: str) -> List[Hunk]:
    """Reads `# modification N` blocks with their <file>, <original> and <patched> sections."""
    starts = [match.end() for match in MODIFICATION.finditer(text)]
    ends = [match.start() for match in MODIFICATION.finditer(text)][1:] + [len(text)]
    hunks = []
    for number, (start, end) in enumerate(zip(starts, ends), start=1):
        block = text[start:end]
        hunks.append(Hunk(tag_content(block, 'file', number).strip(), tag_content(block, 'original', number), tag_content(block, 'patched', number)))
    return hunks


def parse_reply(text: str, synthesizer_id: str = 'unknown', campaign: int = 0) -> List[Patch]:
    """A reply holds one patch, or several separated by `# patch N` lines."""
    sections = PATCH.split(text) if PATCH.search(text) else [text]
    patches = []
    for section in sections:
        if not MODIFICATION.search(section):
            continue
        patches.append(Patch(tuple(parse_modifications(section)), synthesizer_id, campaign))
    return patches


def format_patch(patch: Patch) -> str:
    blocks = []
    for number, hunk in enumerate(patch.hunks, start=1):
        blocks.append(
            f'# modification {number}\n'
            f'<file>{hunk.file}</file>\n'
            f'<original>\n{hunk.original}\n</original>\n'
            f'<patched>\n{hunk.patched}\n</patched>\n'
        )
    return '\n'.join(blocks)


def format_reply(patches: List[Patch]) -> str:
    return '\n'.join(f'# patch {number}\n{format_patch(patch)}' for number, patch in enumerate(patches, start=1))
