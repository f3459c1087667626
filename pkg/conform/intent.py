import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from conform.formulas import conjuncts, key_of, strip_incarnations
from conform.passify import MAX_PATHS, ObligationKind, PassiveOp, PassiveStmt
from conform.printer import print_expr, simple_statement_text
from conform.solver import Solver, Verdict
from conform.vcgen import FailingTrace, VcPartition, trace_of, vc_gen
from conform.nodes import Expr, Binary, Presence, Clause, Node, If, While, For, Program


WF_KINDS = (ObligationKind.WF_CHECK, ObligationKind.SIGNATURE_WF)


class FactOrigin(Enum):
    PROGRAM_STMT = 'program_stmt'
    SPEC_CLAUSE = 'spec_clause'
    WF_CHECK = 'wf_check'
    TRUSTED = 'trusted'


class Classification(Enum):
    HARD = 'hard'
    SOFT = 'soft'


@dataclass(frozen=True, order=True)
class PriorityKey:
    h_conflicts: int
    s_conflicts: int
    strength_rank: int


@dataclass(frozen=True)
class IntentFact:
    fact_id: str
    formula: Expr
    origin: FactOrigin
    sid: int
    site: int
    line: int
    role: str
    classification: Classification = Classification.SOFT
    priority: Optional[PriorityKey] = field(default=None, compare=False)

    @property
    def source_formula(self) -> Expr:
        return strip_incarnations(self.formula)

    @property
    def obligation(self) -> Expr:
        """The formula without its presence guard."""
        if isinstance(self.formula, Binary) and self.formula.op == '==>' and isinstance(self.formula.left, Presence):
            return self.formula.right
        return self.formula


@dataclass(frozen=True)
class PartitionOutcome:
    partition: VcPartition
    verdict: Verdict

    @property
    def conforming(self) -> bool:
        return self.verdict.valid


def order_failing(outcomes: Sequence[PartitionOutcome]) -> List[PartitionOutcome]:
    """Nonconforming partitions, invalid ones first, shallow traces before deep ones."""
    failing = [outcome for outcome in outcomes if not outcome.conforming]
    order = {id(outcome): index for index, outcome in enumerate(failing)}
    return sorted(
        failing,
        key=lambda outcome: (
            outcome.verdict.unknown,
            trace_of(outcome.partition).depth,
            outcome.partition.target.line,
            order[id(outcome)],
        ),
    )


def verify(partitions: Iterable[VcPartition], solver: Solver) -> Tuple[PartitionOutcome, ...]:
    return tuple(PartitionOutcome(partition, solver.check_partition(partition)) for partition in partitions)


@dataclass(frozen=True)
class IntentReport:
    program: Program
    hard: Tuple[IntentFact, ...]
    soft: Tuple[IntentFact, ...]
    outcomes: Tuple[PartitionOutcome, ...]

    @property
    def partitions(self) -> Dict[str, bool]:
        return {outcome.partition.partition_id: outcome.conforming for outcome in self.outcomes}

    @property
    def conforming(self) -> bool:
        return all(outcome.conforming for outcome in self.outcomes)

    @property
    def unknown(self) -> Tuple[str, ...]:
        return tuple(outcome.partition.partition_id for outcome in self.outcomes if outcome.verdict.unknown)

    def failing(self) -> List[PartitionOutcome]:
        return order_failing(self.outcomes)

    def traces(self) -> List[FailingTrace]:
        return [trace_of(outcome.partition) for outcome in self.failing()]

    def facts(self) -> Tuple[IntentFact, ...]:
        return self.hard + self.soft


def node_text(node: Node) -> str:
    if isinstance(node, Clause):
        return f'{node.kind.value} {key_of(node.formula)}'
    if isinstance(node, If):
        return f'if {key_of(node.cond)}'
    if isinstance(node, While):
        return f'while {key_of(node.cond)}'
    if isinstance(node, For):
        return f'for {node.var} := {key_of(node.lo)} to {key_of(node.hi)}'
    return simple_statement_text(node)


def fingerprint(node: Node) -> str:
    return hashlib.sha1(node_text(node).encode('utf-8')).hexdigest()[:12]


def present_fingerprints(program: Program) -> FrozenSet[str]:
    return frozenset(fingerprint(node) for node in program.nodes())


def origin_of(statement: PassiveStmt) -> FactOrigin:
    if statement.kind in WF_KINDS:
        return FactOrigin.WF_CHECK
    if statement.trusted:
        return FactOrigin.TRUSTED
    if statement.role in ('requires', 'ensures', 'invariant', 'postcondition', 'invariant_entry', 'invariant_maintain'):
        return FactOrigin.SPEC_CLAUSE
    return FactOrigin.PROGRAM_STMT


def make_fact(formula: Expr, statement: PassiveStmt, partition: VcPartition) -> IntentFact:
    origin = origin_of(statement)
    identity = f'{origin.value}|{statement.sid}|{partition.target.sid}|{key_of(formula)}'
    fact_id = 'f' + hashlib.sha1(identity.encode('utf-8')).hexdigest()[:10]
    return IntentFact(fact_id, formula, origin, statement.sid, partition.target.sid, statement.line, statement.role)


def facts_of(partition: VcPartition) -> List[IntentFact]:
    result = []
    for statement in partition.hypotheses + (partition.target,):
        if statement.op is PassiveOp.SKIP:
            continue
        for part in conjuncts(statement.formula):
            result.append(make_fact(part, statement, partition))
    return result


def transform_wf(fact: IntentFact, program: Program) -> IntentFact:
    """Guards a well-formedness fact by the presence of the statement that needs it."""
    if fact.origin is not FactOrigin.WF_CHECK:
        raise ValueError(f'The fact "{fact.fact_id}" does not come from a well-formedness check.')
    if isinstance(fact.formula, Binary) and isinstance(fact.formula.left, Presence):
        return fact
    try:
        marker = fingerprint(program.node(fact.sid))
    except KeyError:
        marker = f'sid{fact.sid}'
    guard = Presence(marker, f'L{fact.line}')
    return replace(fact, formula=Binary('==>', guard, fact.formula))


def extract_hs_intent(program: Program, solver: Solver, max_paths: int = MAX_PATHS) -> IntentReport:
    outcomes = verify(vc_gen(program, max_paths), solver)

    hard: Dict[str, IntentFact] = {}
    soft: Dict[str, IntentFact] = {}
    for outcome in outcomes:
        for fact in facts_of(outcome.partition):
            if fact.origin is FactOrigin.WF_CHECK:
                hard.setdefault(fact.fact_id, replace(transform_wf(fact, program), classification=Classification.HARD))
            elif outcome.conforming or fact.origin is FactOrigin.TRUSTED:
                hard.setdefault(fact.fact_id, replace(fact, classification=Classification.HARD))
            else:
                soft.setdefault(fact.fact_id, fact)

    remaining = tuple(fact for fact_id, fact in soft.items() if fact_id not in hard)
    return IntentReport(program, tuple(hard.values()), remaining, outcomes)


def render_fact(fact: IntentFact) -> str:
    return print_expr(fact.source_formula)


def stable_key(partition: VcPartition) -> Tuple[str, ...]:
    path = tuple(print_expr(strip_incarnations(statement.formula)) for statement in partition.hypotheses)
    return (partition.method, partition.kind.value, print_expr(strip_incarnations(partition.target.formula))) + path


def hard_intent_preserved(before: IntentReport, after: Program, solver: Solver, max_paths: int = MAX_PATHS) -> Tuple[bool, List[str]]:
    """Every partition that conformed before the patch and still exists after it must still conform."""
    conforming: Set[Tuple[str, ...]] = set()
    failing: Set[Tuple[str, ...]] = set()
    for outcome in before.outcomes:
        (conforming if outcome.conforming else failing).add(stable_key(outcome.partition))
    protected = conforming - failing

    broken: List[str] = []
    for partition in vc_gen(after, max_paths):
        if stable_key(partition) in protected and not solver.check_partition(partition).valid:
            broken.append(partition.partition_id)
    return not broken, broken


def dump_report(report: IntentReport) -> str:
    total = len(report.outcomes)
    passed = sum(1 for outcome in report.outcomes if outcome.conforming)
    unknown = len(report.unknown)
    lines = [f'partitions: {total} (conforming {passed}, nonconforming {total - passed - unknown}, unknown {unknown})']
    for outcome in report.outcomes:
        status = 'conforming' if outcome.conforming else outcome.verdict.status.value
        lines.append(f'  {outcome.partition.partition_id}: {status}')
    for title, facts in (('hard', report.hard), ('soft', report.soft)):
        lines.append(f'{title}: {len(facts)}')
        for fact in facts:
            lines.append(f'  [{fact.fact_id} {fact.origin.value} line {fact.line}] {render_fact(fact)}')
    return '\n'.join(lines) + '\n'


def fact_as_dict(fact: IntentFact) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        'fact_id': fact.fact_id,
        'formula': render_fact(fact),
        'origin': fact.origin.value,
        'sid': fact.sid,
        'line': fact.line,
        'classification': fact.classification.value,
    }
    if fact.priority is not None:
        data['priority'] = [fact.priority.h_conflicts, fact.priority.s_conflicts, fact.priority.strength_rank]
    return data


def report_as_dict(report: IntentReport) -> Dict[str, Any]:
    return {
        'conforming': report.conforming,
        'partitions': report.partitions,
        'unknown': list(report.unknown),
        'hard': [fact_as_dict(fact) for fact in report.hard],
        'soft': [fact_as_dict(fact) for fact in report.soft],
    }
