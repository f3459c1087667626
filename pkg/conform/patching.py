from dataclasses import replace
from typing import List, Optional, Set, Tuple

from emptylog import EmptyLogger, LoggerProtocol

from conform.errors import AmbiguousOriginal, LocatedError, OriginalNotFound, PatchError, ReparseFailure
from conform.lexer import PATCH_MARKER
from conform.parser import parse_program
from conform.printer import ATTRIBUTE
from conform.wire import Hunk, Patch


def strip_attributes(text: str) -> str:
    """Removes `{:trusted}` attributes but keeps the patch markers."""
    lines = []
    for line in text.split('\n'):
        code, marker, rest = line.partition(PATCH_MARKER)
        code = code.replace(f' {ATTRIBUTE}', '').replace(ATTRIBUTE, '')
        lines.append(code + marker + rest)
    return '\n'.join(lines)


def find_lines(lines: List[str], wanted: List[str]) -> List[int]:
    if not wanted:
        return []
    size = len(wanted)
    return [start for start in range(len(lines) - size + 1) if lines[start:start + size] == wanted]


def mark(line: str) -> str:
    if not line.strip() or line.rstrip().endswith(PATCH_MARKER):
        return line
    return f'{line.rstrip()} {PATCH_MARKER}'


def marked_replacement(hunk: Hunk) -> List[str]:
    kept = set(hunk.original_lines)
    return [line if line in kept else mark(line) for line in hunk.patched_lines]


def locate(lines: List[str], hunk: Hunk) -> int:
    matches = find_lines(lines, hunk.original_lines)
    if not matches:
        raise OriginalNotFound(f'the original text of a hunk for "{hunk.file}" is not in the file')
    if len(matches) > 1:
        raise AmbiguousOriginal(f'the original text of a hunk for "{hunk.file}" occurs {len(matches)} times')
    return matches[0]


def apply_patch(source: str, patch: Patch, source_name: str = '<input>') -> str:
    if not patch.hunks:
        return source
    trailing = source.endswith('\n')
    lines = source.split('\n')
    if trailing:
        lines = lines[:-1]
    for hunk in patch.hunks:
        start = locate(lines, hunk)
        lines[start:start + len(hunk.original_lines)] = marked_replacement(hunk)
    result = '\n'.join(lines) + ('\n' if trailing else '')
    try:
        parse_program(result, source_name)
    except LocatedError as error:
        raise ReparseFailure(f'the patched file does not parse: {error}') from error
    return result


def frozen_lines(annotated: str) -> Set[int]:
    """0-based numbers of the lines that carry `{:trusted}`, either as an attribute or as a patch marker."""
    return {number for number, line in enumerate(annotated.split('\n')) if ATTRIBUTE in line}


class HunkFilter:
    """Drops hunks a synthesizer should not have produced, logging why."""

    def __init__(self, source: str, annotated: str, filename: str, logger: LoggerProtocol = EmptyLogger()) -> None:
        self.source = source
        self.lines = source.split('\n')
        self.frozen = frozen_lines(annotated)
        self.filename = filename
        self.logger = logger

    def resolve(self, hunk: Hunk) -> Tuple[Hunk, int]:
        try:
            return hunk, locate(self.lines, hunk)
        except OriginalNotFound:
            stripped = replace(hunk, original=strip_attributes(hunk.original), patched=strip_attributes(hunk.patched))
            return stripped, locate(self.lines, stripped)

    def check(self, hunk: Hunk, start: int, taken: Set[int]) -> Optional[str]:
        span = range(start, start + len(hunk.original_lines))
        if any(number in taken for number in span):
            return 'it overlaps another hunk'
        kept = set(strip_attributes(line) for line in hunk.patched_lines)
        for number in span:
            if number in self.frozen and self.lines[number] not in kept:
                return f'it rewrites the frozen line {number + 1}'
        introduced = [line for line in hunk.patched_lines if ATTRIBUTE in line.replace(PATCH_MARKER, '') and line not in hunk.original_lines]
        if introduced:
            return 'it adds a {:trusted} attribute'
        return None

    def filter(self, patch: Patch) -> Optional[Patch]:
        kept: List[Hunk] = []
        taken: Set[int] = set()
        for number, hunk in enumerate(patch.hunks, start=1):
            if hunk.file != self.filename:
                self.logger.warning(f'Hunk {number} of a patch from "{patch.synthesizer_id}" targets "{hunk.file}" instead of "{self.filename}" and was dropped.')
                continue
            try:
                resolved, start = self.resolve(hunk)
            except PatchError as error:
                self.logger.warning(f'Hunk {number} of a patch from "{patch.synthesizer_id}" was dropped: {error}.')
                continue
            reason = self.check(resolved, start, taken)
            if reason is not None:
                self.logger.warning(f'Hunk {number} of a patch from "{patch.synthesizer_id}" was dropped because {reason}.')
                continue
            taken.update(range(start, start + len(resolved.original_lines)))
            kept.append(resolved)

        if not kept:
            return None
        result = replace(patch, hunks=tuple(kept))
        try:
            apply_patch(self.source, result, self.filename)
        except PatchError as error:
            self.logger.warning(f'A patch from "{patch.synthesizer_id}" was dropped: {error}.')
            return None
        return result


def changed_lines(before: str, after: str) -> List[str]:
    """Lines of `after` that do not occur in `before`."""
    previous = set(before.split('\n'))
    return [line for line in after.split('\n') if line not in previous]
