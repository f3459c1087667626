from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from emptylog import EmptyLogger, LoggerProtocol

from conform.errors import NoPatches
from conform.intent import WF_KINDS, IntentFact, IntentReport, PartitionOutcome, render_fact
from conform.passify import ObligationKind
from conform.patching import HunkFilter
from conform.printer import node_line, print_program
from conform.prioritize import top_class
from conform.prompts import SYSTEM_PROMPT, build_prompt
from conform.vcgen import FailingTrace, trace_of
from conform.wire import Patch
from conform.nodes import Program, Test

if TYPE_CHECKING:
    from conform.plugins import Synthesizer  # pragma: no cover


CONTEXT_HINTS = {
    ObligationKind.SIGNATURE_WF: 'Array accesses in requires and ensures clauses are checked like accesses in code. Guard them with the bounds they need.',
    ObligationKind.WF_CHECK: 'Every array access needs an index between 0 and the array length, every divisor must be non-zero.',
    ObligationKind.POSTCONDITION: 'A postcondition has to hold on every path that reaches the end of the method, including paths that leave a loop through break.',
    ObligationKind.INVARIANT_ENTRY: 'A loop invariant has to hold when the loop is first reached.',
    ObligationKind.INVARIANT_MAINTAIN: 'A loop invariant has to hold again after every iteration of the loop body.',
    ObligationKind.CALL_PRECONDITION: 'The requires clauses of a called method have to hold at the call.',
    ObligationKind.INTERMEDIATE_ASSERT: 'An assertion has to follow from the statements that run before it.',
}


@dataclass(frozen=True)
class RepairFocus:
    """What the builtin synthesizer needs besides the prompt text."""
    program: Program
    report: IntentReport
    outcome: PartitionOutcome
    trace: FailingTrace
    ordered: Tuple[IntentFact, ...] = ()
    tests: Tuple[Test, ...] = ()


@dataclass(frozen=True)
class SynthRequest:
    filename: str
    source: str
    annotated_program: str
    error_trace: str
    error: str
    failing_assertion: str
    failing_statement: str
    trace_assertions: Tuple[str, ...]
    context: str
    priority: Tuple[str, ...]
    k: int = 5
    campaign: int = 0
    focus: Optional[RepairFocus] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f'At least one patch has to be requested, got k={self.k}.')

    @property
    def prompt(self) -> str:
        return build_prompt(self)

    def as_dict(self) -> Dict[str, Any]:
        return {
            'filename': self.filename,
            'program': self.annotated_program,
            'error_trace': self.error_trace,
            'error': self.error,
            'failing_assertion': self.failing_assertion,
            'failing_statement': self.failing_statement,
            'trace_assertions': list(self.trace_assertions),
            'context': self.context,
            'priority': list(self.priority),
            'k': self.k,
            'campaign': self.campaign,
            'system': SYSTEM_PROMPT,
            'prompt': self.prompt,
        }


def annotated_sids(report: IntentReport) -> FrozenSet[int]:
    """Nodes whose every fact is hard and which no failing partition points at."""
    blocked: Set[int] = set()
    for outcome in report.outcomes:
        if not outcome.conforming:
            blocked.add(outcome.partition.target.sid)
    for fact in report.soft:
        blocked.add(fact.sid)

    return frozenset(fact.sid for fact in report.hard if fact.sid and fact.sid not in blocked)


def statement_text(program: Program, sid: int) -> str:
    try:
        return node_line(program.node(sid), 0).strip()
    except KeyError:
        return ''


def trace_lines(trace: FailingTrace) -> str:
    return '\n'.join(f'line {step.line}: {step.text}' for step in trace.steps)


def trace_assertions(trace: FailingTrace) -> Tuple[str, ...]:
    seen: Dict[str, None] = {}
    for step in trace.steps[:-1]:
        if step.text and step.text != 'true':
            seen.setdefault(f'line {step.line}: {step.text}', None)
    return tuple(seen)


def context_for(trace: FailingTrace, tests: Sequence[Test]) -> str:
    hints = [CONTEXT_HINTS[trace.kind]]
    if trace.kind in WF_KINDS:
        hints.append('A specification clause may need the bounds as an antecedent, for example `0 <= r < a.Length ==> a[r] ...`.')
    for test in tests:
        if test.name == trace.method:
            hints.append(f'The method "{test.name}" is a test of "{test.callee}". It is trusted, so repair "{test.callee}" instead.')
    return '\n'.join(hints)


def build_request(
    report: IntentReport,
    outcome: PartitionOutcome,
    k: int = 5,
    filename: str = 'program.mvl',
    ordered: Sequence[IntentFact] = (),
    campaign: int = 0,
    tests: Sequence[Test] = (),
) -> SynthRequest:
    program = report.program
    trace = trace_of(outcome.partition)
    source = print_program(program)
    annotated = print_program(program, annotated_sids(report))
    priority = tuple(f'line {fact.line}: {render_fact(fact)}' for fact in top_class(list(ordered)))

    return SynthRequest(
        filename=filename,
        source=source,
        annotated_program=annotated,
        error_trace=trace_lines(trace),
        error=trace.message.rstrip('.'),
        failing_assertion=trace.target.text,
        failing_statement=statement_text(program, trace.target.sid),
        trace_assertions=trace_assertions(trace),
        context=context_for(trace, tests),
        priority=priority,
        k=k,
        campaign=campaign,
        focus=RepairFocus(program, report, outcome, trace, tuple(ordered), tuple(tests)),
    )


def synthesize(request: SynthRequest, plugin: 'Synthesizer', logger: LoggerProtocol = EmptyLogger()) -> List[Patch]:
    proposed = plugin.propose(request)
    hunk_filter = HunkFilter(request.source, request.annotated_program, request.filename, logger)

    result: List[Patch] = []
    seen: Set[Tuple[Any, ...]] = set()
    for patch in proposed:
        kept = hunk_filter.filter(patch)
        if kept is None:
            continue
        if kept.hunks in seen:
            continue
        seen.add(kept.hunks)
        result.append(kept)
        if len(result) == request.k:
            break

    if not result:
        raise NoPatches(f'the synthesizer "{plugin.name}" produced no usable patch in campaign {request.campaign}')
    logger.info(f'The synthesizer "{plugin.name}" proposed {len(proposed)} patches, {len(result)} of them passed the filter.')
    return result
