import time
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, List, Optional, Sequence, Set, Tuple

from emptylog import EmptyLogger, LoggerProtocol

from conform.conformance import alignment_program, conforms_prog_spec, conforms_prog_test, with_spec
from conform.errors import ConformError
from conform.guard import Guard
from conform.intent import IntentReport, PartitionOutcome, dump_report, extract_hs_intent, hard_intent_preserved, render_fact, stable_key, verify
from conform.parser import parse_program
from conform.passify import MAX_PATHS
from conform.patching import apply_patch
from conform.plugins import Synthesizer
from conform.printer import print_program
from conform.prioritize import partition_sorts, prioritize, top_class
from conform.solver import Solver
from conform.synthesis import build_request, synthesize
from conform.vcgen import trace_of, vc_gen
from conform.wire import Patch
from conform.nodes import Program, Spec, Test


@dataclass(frozen=True)
class Budget:
    wall_clock_s: float = 1200.0
    max_campaigns: int = 5
    k: int = 5
    max_candidates: int = 32

    def __post_init__(self) -> None:
        if self.wall_clock_s <= 0:
            raise ValueError(f'The time budget must be positive, got {self.wall_clock_s} seconds.')
        if self.max_campaigns < 0:
            raise ValueError(f'The number of campaigns must not be negative, got {self.max_campaigns}.')
        if self.k < 1:
            raise ValueError(f'At least one patch per campaign is needed, got k={self.k}.')
        if self.max_candidates < 1:
            raise ValueError(f'The candidate pool needs room for at least one candidate, got {self.max_candidates}.')


class Mode(Enum):
    FIRST = 'first'
    ALL = 'all'


class Status(Enum):
    VERIFIED = 'verified'
    BUDGET_EXHAUSTED = 'budget_exhausted'
    NO_PATCHES = 'no_patches'


@dataclass(frozen=True)
class Candidate:
    name: str
    source: str
    lineage: Tuple[str, ...] = ()
    campaign: int = 0
    patches: Tuple[Patch, ...] = ()


@dataclass(frozen=True)
class CampaignRecord:
    campaign: int
    candidate: str
    partition_id: str
    message: str
    trace: Tuple[str, ...]
    priority: Tuple[str, ...]
    verdicts: Tuple[Tuple[str, str], ...]
    proposed: int
    admitted: Tuple[str, ...]
    rejected: Tuple[str, ...]
    explanation: str = ''
    elapsed: float = field(default=0.0, compare=False)

    def lines(self, timings: bool = False) -> List[str]:
        lines = [f'campaign {self.campaign}: candidate {self.candidate}', f'  trace {self.partition_id}: {self.message}']
        lines.extend(f'    {step}' for step in self.trace)
        lines.append('  priority:')
        lines.extend(f'    {fact}' for fact in self.priority)
        lines.append('  verdicts:')
        lines.extend(f'    {partition_id}: {status}' for partition_id, status in self.verdicts)
        lines.append(f'  patches: {self.proposed}')
        lines.extend(f'    admitted {name}' for name in self.admitted)
        lines.extend(f'    rejected {reason}' for reason in self.rejected)
        if timings:
            lines.append(f'  elapsed: {self.elapsed:.3f}s')
        return lines


class RunState:
    """Shared by nested runs so that campaigns, names and time are counted once."""

    def __init__(self, budget: Budget, clock: Callable[[], float] = time.monotonic) -> None:
        self.budget = budget
        self.clock = clock
        self.started = clock()
        self.campaigns = 0
        self.names = 0
        self.records: List[CampaignRecord] = []

    def take_campaign(self) -> bool:
        if self.campaigns >= self.budget.max_campaigns:
            return False
        self.campaigns += 1
        return True

    def out_of_time(self) -> bool:
        return self.clock() - self.started > self.budget.wall_clock_s

    def exhausted(self) -> bool:
        return self.campaigns >= self.budget.max_campaigns or self.out_of_time()

    def next_name(self) -> str:
        name = f'c{self.names}'
        self.names += 1
        return name


@dataclass(frozen=True)
class CoEvolutionResult:
    verified: Tuple[Candidate, ...]
    status: Status
    campaigns: int
    records: Tuple[CampaignRecord, ...]


class Pool:
    """Newest campaign first, first in first out inside a campaign."""

    def __init__(self, root: Candidate) -> None:
        self.batches: List[Deque[Candidate]] = [deque([root])]

    def push(self, batch: Sequence[Candidate]) -> None:
        if batch:
            self.batches.append(deque(batch))

    def pop(self) -> Optional[Candidate]:
        while self.batches:
            if self.batches[-1]:
                return self.batches[-1].popleft()
            self.batches.pop()
        return None

    def __len__(self) -> int:
        return sum(len(batch) for batch in self.batches)


class CoEvolution:
    def __init__(
        self,
        synthesizer: Synthesizer,
        solver: Optional[Solver] = None,
        budget: Budget = Budget(),
        mode: Mode = Mode.FIRST,
        seed: int = 0,
        filename: str = 'program.mvl',
        tests: Sequence[Test] = (),
        logger: LoggerProtocol = EmptyLogger(),
        state: Optional[RunState] = None,
        max_paths: int = MAX_PATHS,
    ) -> None:
        self.synthesizer = synthesizer
        self.solver = solver or Solver()
        self.budget = budget
        self.mode = mode
        self.seed = seed
        self.filename = filename
        self.tests = tuple(tests)
        self.logger = logger
        self.state = state or RunState(budget)
        self.max_paths = max_paths

    def run(self, source: str) -> CoEvolutionResult:
        root = Candidate(self.state.next_name(), print_program(parse_program(source, self.filename)))
        pool = Pool(root)
        seen: Set[str] = {root.source}
        verified: List[Candidate] = []
        records: List[CampaignRecord] = []
        stopped = False

        while True:
            candidate = pool.pop()
            if candidate is None:
                break
            if self.state.out_of_time():
                self.logger.warning(f'The time budget of {self.budget.wall_clock_s} seconds is used up.')
                stopped = True
                break

            report = Guard(logger=self.logger, doc=f'candidate "{candidate.name}"')(self.intent)(candidate)
            if report is None:
                continue
            if report.conforming:
                self.logger.info(f'The candidate "{candidate.name}" verifies.')
                verified.append(candidate)
                if self.mode is Mode.FIRST:
                    break
                continue

            if not self.state.take_campaign():
                if not stopped:
                    self.logger.warning(f'No campaign is left for the candidate "{candidate.name}".')
                stopped = True
                continue

            record, children = self.campaign(candidate, report, seen, self.budget.max_candidates - len(pool))
            records.append(record)
            self.state.records.append(record)
            pool.push(children)

        if verified:
            status = Status.VERIFIED
        elif stopped:
            status = Status.BUDGET_EXHAUSTED
        else:
            status = Status.NO_PATCHES
        return CoEvolutionResult(tuple(verified), status, self.state.campaigns, tuple(records))

    def intent(self, candidate: Candidate) -> IntentReport:
        return extract_hs_intent(parse_program(candidate.source, self.filename), self.solver, self.max_paths)

    def campaign(self, candidate: Candidate, report: IntentReport, seen: Set[str], room: int) -> Tuple[CampaignRecord, List[Candidate]]:
        started = self.state.clock()
        number = self.state.campaigns
        outcome = report.failing()[0]
        trace = trace_of(outcome.partition)
        self.logger.info(f'Campaign {number} repairs "{outcome.partition.partition_id}" of the candidate "{candidate.name}".')

        ordered = prioritize(report.soft, report.hard, self.solver, partition_sorts(report), self.seed)
        request = build_request(report, outcome, self.budget.k, self.filename, ordered, number, self.tests)
        patches = Guard(default=[], logger=self.logger, doc=f'campaign {number}')(synthesize)(request, self.synthesizer, self.logger)

        children: List[Candidate] = []
        rejected: List[str] = []
        for index, patch in enumerate(patches, start=1):
            full = len(children) >= room
            child, reason = (None, f'the pool already holds {self.budget.max_candidates} candidates') if full else self.admit(candidate, report, outcome, patch, f'{number}.{index}', seen)
            if child is None:
                self.logger.warning(f'Patch {number}.{index} ("{patch.description}") was rejected: {reason}.')
                rejected.append(f'{number}.{index}: {reason}')
                continue
            self.logger.info(f'The candidate "{child.name}" was admitted to the pool (campaign {number}).')
            children.append(child)

        record = CampaignRecord(
            campaign=number,
            candidate=candidate.name,
            partition_id=outcome.partition.partition_id,
            message=trace.message,
            trace=tuple(f'line {step.line}: {step.text}' for step in trace.steps),
            priority=tuple(f'line {fact.line}: {render_fact(fact)}' for fact in top_class(ordered)),
            verdicts=tuple((item.partition.partition_id, 'conforming' if item.conforming else item.verdict.status.value) for item in report.outcomes),
            proposed=len(patches),
            admitted=tuple(child.name for child in children),
            rejected=tuple(rejected),
            explanation=dump_report(report),
            elapsed=self.state.clock() - started,
        )
        return record, children

    def admit(self, parent: Candidate, report: IntentReport, outcome: PartitionOutcome, patch: Patch, patch_id: str, seen: Set[str]) -> Tuple[Optional[Candidate], str]:
        try:
            program = parse_program(apply_patch(parent.source, patch, self.filename), self.filename)
        except ConformError as error:
            return None, f'it does not apply ({error})'
        source = print_program(program)
        if source in seen:
            return None, 'the same candidate is already known'

        failing = stable_key(outcome.partition)
        try:
            outcomes = verify(vc_gen(program, self.max_paths), self.solver)
            if any(stable_key(item.partition) == failing and not item.conforming for item in outcomes):
                return None, 'the failing obligation still fails'
            preserved, broken = hard_intent_preserved(report, program, self.solver, self.max_paths)
        except ConformError as error:
            return None, f'it cannot be verified ({error})'
        if not preserved:
            return None, f'it breaks hard intent in {", ".join(broken)}'

        seen.add(source)
        child = Candidate(self.state.next_name(), source, parent.lineage + (patch_id,), self.state.campaigns, parent.patches + (patch,))
        return child, ''


def co_evolve(
    source: str,
    synthesizer: Synthesizer,
    solver: Optional[Solver] = None,
    budget: Budget = Budget(),
    mode: Mode = Mode.FIRST,
    seed: int = 0,
    filename: str = 'program.mvl',
    logger: LoggerProtocol = EmptyLogger(),
) -> CoEvolutionResult:
    return CoEvolution(synthesizer, solver, budget, mode, seed, filename, logger=logger).run(source)


@dataclass(frozen=True)
class Triple:
    candidate: Candidate
    specs: Tuple[Tuple[str, Spec], ...]
    tests: Tuple[Test, ...]

    def spec(self, method: str) -> Spec:
        return dict(self.specs)[method]


@dataclass(frozen=True)
class AssuranceResult:
    triples: Tuple[Triple, ...]
    status: Status
    campaigns: int
    records: Tuple[CampaignRecord, ...]


class Assurance:
    """Repairs the program against its specification, then folds in the tests through stub programs."""

    def __init__(
        self,
        synthesizer: Synthesizer,
        tests: Sequence[Test],
        solver: Optional[Solver] = None,
        budget: Budget = Budget(),
        mode: Mode = Mode.FIRST,
        seed: int = 0,
        filename: str = 'program.mvl',
        logger: LoggerProtocol = EmptyLogger(),
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        self.synthesizer = synthesizer
        self.tests = tuple(tests)
        self.solver = solver or Solver()
        self.budget = budget
        self.mode = mode
        self.seed = seed
        self.filename = filename
        self.logger = logger
        self.state = RunState(budget, clock)
        self.triples: List[Triple] = []
        self.seen: Set[str] = set()

    def loop(self, tests: Sequence[Test] = (), filename: Optional[str] = None) -> CoEvolution:
        return CoEvolution(
            self.synthesizer, self.solver, self.budget, self.mode, self.seed, filename or self.filename, tests,
            self.logger, self.state,
        )

    def run(self, source: str) -> AssuranceResult:
        result = self.assure(source, 0)
        if self.triples:
            status = Status.VERIFIED
        elif result is Status.BUDGET_EXHAUSTED or self.state.exhausted():
            status = Status.BUDGET_EXHAUSTED
        else:
            status = Status.NO_PATCHES
        return AssuranceResult(tuple(self.triples), status, self.state.campaigns, tuple(self.state.records))

    def assure(self, source: str, depth: int) -> Status:
        outcome = self.loop().run(source)
        for candidate in outcome.verified:
            if not self.tests:
                self.add(candidate, parse_program(candidate.source, self.filename))
            else:
                self.align(candidate, depth)
            if self.triples and self.mode is Mode.FIRST:
                break
        return outcome.status

    def align(self, candidate: Candidate, depth: int) -> None:
        program = parse_program(candidate.source, self.filename)
        stubs = print_program(alignment_program(program, self.tests))
        self.logger.info(f'Checking the specification of the candidate "{candidate.name}" against {len(self.tests)} tests.')
        outcome = self.loop(self.tests, 'alignment.mvl').run(stubs)

        for aligned in outcome.verified:
            stub_program = parse_program(aligned.source)
            repaired = program
            for name in dict.fromkeys(test.callee for test in self.tests):
                repaired = with_spec(repaired, name, Spec.of(stub_program.method(name)))

            if self.conforms(repaired):
                joined = Candidate(self.state.next_name(), print_program(repaired), candidate.lineage + aligned.lineage, aligned.campaign, candidate.patches + aligned.patches)
                self.add(joined, repaired)
            elif depth < self.budget.max_campaigns and not self.state.exhausted():
                self.logger.info(f'The specification aligned with the tests no longer fits the candidate "{candidate.name}", repairing again.')
                self.assure(print_program(repaired), depth + 1)
            if self.triples and self.mode is Mode.FIRST:
                return

    def conforms(self, program: Program) -> bool:
        if not conforms_prog_spec(program, self.solver).holds:
            return False
        return all(conforms_prog_test(program, test, self.solver).holds for test in self.tests)

    def add(self, candidate: Candidate, program: Program) -> None:
        if candidate.source in self.seen:
            return
        self.seen.add(candidate.source)
        names = dict.fromkeys(test.callee for test in self.tests) if self.tests else dict.fromkeys(method.name for method in program.methods)
        specs = tuple((name, Spec.of(program.method(name))) for name in names)
        self.triples.append(Triple(candidate, specs, self.tests))
        self.logger.info(f'The candidate "{candidate.name}" conforms to its specification and {len(self.tests)} tests.')


def automated_assurance(
    source: str,
    tests: Sequence[Test],
    synthesizer: Synthesizer,
    solver: Optional[Solver] = None,
    budget: Budget = Budget(),
    mode: Mode = Mode.FIRST,
    seed: int = 0,
    filename: str = 'program.mvl',
    logger: LoggerProtocol = EmptyLogger(),
) -> AssuranceResult:
    return Assurance(synthesizer, tests, solver, budget, mode, seed, filename, logger).run(source)
