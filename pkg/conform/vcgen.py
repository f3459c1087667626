from dataclasses import dataclass
from typing import Dict, List, Tuple, Iterable

from conform.formulas import conjunction, guarded, strip_incarnations, well_formedness
from conform.passify import ObligationKind, PassiveBlock, PassiveOp, PassiveStmt, Passifier, MAX_PATHS
from conform.printer import print_expr
from conform.nodes import Sort, Expr, Binary, TRUE, Method, Program, free_vars


@dataclass(frozen=True)
class VcPartition:
    partition_id: str
    method: str
    kind: ObligationKind
    path: Tuple[PassiveStmt, ...]
    target: PassiveStmt
    vc: Expr
    sorts: Tuple[Tuple[str, Sort], ...]

    @property
    def target_sid(self) -> int:
        return self.target.sid

    @property
    def target_formula(self) -> Expr:
        return self.target.formula

    @property
    def path_sids(self) -> Tuple[int, ...]:
        seen: Dict[int, None] = {}
        for statement in self.path:
            if statement.sid:
                seen.setdefault(statement.sid, None)
        return tuple(seen)

    @property
    def hypotheses(self) -> Tuple[PassiveStmt, ...]:
        return tuple(statement for statement in self.path if statement.op is not PassiveOp.SKIP)

    @property
    def variables(self) -> Dict[str, Sort]:
        return dict(self.sorts)


@dataclass(frozen=True)
class TraceStep:
    sid: int
    line: int
    role: str
    text: str


@dataclass(frozen=True)
class FailingTrace:
    partition_id: str
    method: str
    kind: ObligationKind
    steps: Tuple[TraceStep, ...]
    message: str

    @property
    def target(self) -> TraceStep:
        return self.steps[-1]

    @property
    def depth(self) -> int:
        return len(self.steps)


def implication_chain(hypotheses: Iterable[Expr], goal: Expr) -> Expr:
    result = goal
    for hypothesis in reversed(list(hypotheses)):
        result = Binary('==>', hypothesis, result)
    return result


class PartitionBuilder:
    def __init__(self, method: Method, sorts: Dict[str, Sort]) -> None:
        self.method = method
        self.sorts = sorts
        self.occurrences: Dict[Tuple[ObligationKind, int], int] = {}
        self.partitions: List[VcPartition] = []

    def add(self, path: List[PassiveStmt], target: PassiveStmt) -> None:
        assert target.kind is not None
        key = (target.kind, target.sid)
        occurrence = self.occurrences.get(key, 0)
        self.occurrences[key] = occurrence + 1

        hypotheses = [statement.formula for statement in path if statement.op is not PassiveOp.SKIP]
        vc = implication_chain(hypotheses, target.formula)
        sorts = tuple((name, self.sorts[name]) for name in free_vars(vc))
        partition_id = f'{self.method.name}.{target.kind.value}.{target.sid}.{occurrence}'
        self.partitions.append(VcPartition(partition_id, self.method.name, target.kind, tuple(path), target, vc, sorts))

    def signature(self) -> None:
        path: List[PassiveStmt] = []
        for clause in self.method.requires + self.method.ensures:
            for obligation in well_formedness(clause.formula):
                target = PassiveStmt(
                    PassiveOp.ASSERT, obligation.formula, clause.sid, 'wf', ObligationKind.SIGNATURE_WF,
                    f'{obligation.reason}.', clause.span.line, clause.trust.trusted,
                )
                self.add(list(path), target)
            path.append(PassiveStmt(PassiveOp.ASSUME, guarded(clause.formula), clause.sid, clause.kind.value, line=clause.span.line, trusted=clause.trust.trusted))

    def body(self, blocks: List[PassiveBlock]) -> None:
        if not blocks:
            return
        index = {block.id: block for block in blocks}
        self.walk(index, blocks[0].id, [])

    def walk(self, index: Dict[int, PassiveBlock], block_id: int, path: List[PassiveStmt]) -> None:
        path = list(path)
        block = index[block_id]
        for statement in block.statements:
            if statement.op is PassiveOp.ASSERT:
                self.add(path, statement)
            path.append(statement)
        for successor in block.successors:
            self.walk(index, successor, path)


def method_partitions(method: Method, program: Program, max_paths: int = MAX_PATHS) -> List[VcPartition]:
    passifier = Passifier(method, program, max_paths)
    blocks = passifier.passify()
    builder = PartitionBuilder(method, {**method.signature, **passifier.sorts})
    builder.signature()
    builder.body(blocks)
    return builder.partitions


def vc_gen(program: Program, max_paths: int = MAX_PATHS) -> List[VcPartition]:
    partitions: List[VcPartition] = []
    for method in program.methods:
        partitions.extend(method_partitions(method, program, max_paths))
    return partitions


def trace_of(partition: VcPartition) -> FailingTrace:
    steps: List[TraceStep] = []
    for statement in partition.path:
        if not statement.sid:
            continue
        if steps and steps[-1].sid == statement.sid and steps[-1].role == statement.role:
            continue
        steps.append(TraceStep(statement.sid, statement.line, statement.role, print_expr(strip_incarnations(statement.formula))))
    target = partition.target
    steps.append(TraceStep(target.sid, target.line, target.role, print_expr(strip_incarnations(target.formula))))
    return FailingTrace(partition.partition_id, partition.method, partition.kind, tuple(steps), target.message)


def wp(blocks: List[PassiveBlock], block_id: int = 0) -> Expr:
    index = {block.id: block for block in blocks}

    def of(current: int) -> Expr:
        block = index[current]
        result = conjunction(of(successor) for successor in block.successors)
        for statement in reversed(block.statements):
            if statement.op is PassiveOp.ASSUME:
                result = Binary('==>', statement.formula, result)
            elif statement.op is PassiveOp.ASSERT:
                result = Binary('&&', statement.formula, result)
        return result

    if block_id not in index:
        return TRUE
    return of(block_id)


def monolithic_vc(method: Method, program: Program) -> Expr:
    """Whole-method condition: the signature checks and the weakest precondition of the body in one formula."""
    passifier = Passifier(method, program)
    blocks = passifier.passify()
    builder = PartitionBuilder(method, {**method.signature, **passifier.sorts})
    builder.signature()
    signature = [partition.vc for partition in builder.partitions]
    return conjunction(signature + [wp(blocks)])


def method_sorts(method: Method, program: Program) -> Dict[str, Sort]:
    passifier = Passifier(method, program)
    passifier.passify()
    return {**method.signature, **passifier.sorts}
