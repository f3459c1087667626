import random
from dataclasses import replace
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from emptylog import EmptyLogger, LoggerProtocol

from conform.domain import BoundedDomain
from conform.errors import ConformError, EvaluationError, PluginFailure
from conform.evaluator import Value, evaluate
from conform.formulas import conjunction, key_of, rebuild, substitute, well_formedness
from conform.parser import parse_program
from conform.passify import ObligationKind
from conform.patching import apply_patch, find_lines, frozen_lines, locate
from conform.printer import clause_text, simple_statement_text
from conform.solver import Solver, SolverConfig
from conform.synthesis import RepairFocus, SynthRequest
from conform.vcgen import method_partitions
from conform.wire import Hunk, Patch
from conform.nodes import (
    Expr, IntLit, BoolLit, Var, Unary, Binary, Chain, Length, Index, Quantifier, Sort, Clause, ClauseKind, Stmt,
    VarDecl, Assign, Assert, While, For, Method, Program, Test, Node, children, free_vars, iter_block_nodes, walk,
    quantifier_range, literal,
)


Loop = Union[While, For]


def int_literal(expr: Optional[Expr]) -> Optional[int]:
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Unary) and expr.op == '-' and isinstance(expr.operand, IntLit):
        return -expr.operand.value
    return None


def replace_where(expr: Expr, matches: Callable[[Expr], bool], replacement: Expr) -> Expr:
    if matches(expr):
        return replacement
    parts = children(expr)
    if not parts:
        return expr
    return rebuild(expr, tuple(replace_where(part, matches, replacement) for part in parts))


def consequent(formula: Expr) -> Expr:
    while isinstance(formula, Binary) and formula.op == '==>':
        formula = formula.right
    return formula


def guard_by(antecedent: Expr, formula: Expr) -> Expr:
    return Binary('==>', antecedent, formula)


class SourceEditor:
    """Single-line edits of the canonical source, extended upwards until the original is unique."""

    def __init__(self, source: str, filename: str, frozen: Set[int]) -> None:
        self.lines = source.split('\n')
        self.filename = filename
        self.frozen = frozen

    def editable(self, node: Node) -> bool:
        index = node.span.line - 1
        return 0 <= index < len(self.lines) and index not in self.frozen and not node.trust.trusted

    def indent(self, index: int) -> str:
        line = self.lines[index]
        return line[:len(line) - len(line.lstrip())]

    def hunk(self, index: int, patched: List[str]) -> Hunk:
        start = index
        while start > 0 and len(find_lines(self.lines, self.lines[start:index + 1])) > 1:
            start -= 1
        original = self.lines[start:index + 1]
        return Hunk(self.filename, '\n'.join(original), '\n'.join(self.lines[start:index] + patched))

    def rewrite(self, node: Node, text: str) -> Optional[Hunk]:
        if not self.editable(node):
            return None
        index = node.span.line - 1
        return self.hunk(index, [self.indent(index) + text])

    def delete(self, node: Node) -> Optional[Hunk]:
        if not self.editable(node):
            return None
        return self.hunk(node.span.line - 1, [])

    def insert_after(self, index: int, text: str, depth: str) -> Hunk:
        return self.hunk(index, [self.lines[index], depth + text])


class Mutations:
    """Candidate edits for one failing trace, most specific first."""

    def __init__(self, focus: RepairFocus, editor: SourceEditor, domain: BoundedDomain, rng: random.Random) -> None:
        self.focus = focus
        self.program = focus.program
        self.editor = editor
        self.domain = domain
        self.rng = rng
        self.trace_sids = {step.sid for step in focus.trace.steps}
        try:
            self.failing: Optional[Node] = self.program.node(focus.trace.target.sid)
        except KeyError:
            self.failing = None

    def all(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        yield from self.weaken_failing()
        yield from self.weaken_soft_hosts()
        yield from self.oracle_implications()
        yield from self.value_substitution()
        yield from self.constant_scan()
        yield from self.invariant_guards()
        yield from self.deletions()

    def method_of(self, node: Node) -> Method:
        return self.program.owner(node.sid)

    def loop_of(self, clause: Clause) -> Optional[Loop]:
        for method in self.program.methods:
            if method.body is None:
                continue
            for node in iter_block_nodes(method.body):
                if isinstance(node, (While, For)) and clause in node.invariants:
                    return node
        return None

    def siblings(self, clause: Clause) -> Tuple[Clause, ...]:
        if clause.kind is ClauseKind.INVARIANT:
            loop = self.loop_of(clause)
            group = loop.invariants if loop is not None else ()
        else:
            method = self.method_of(clause)
            group = method.requires + method.ensures
        return tuple(other for other in group if other.sid != clause.sid)

    def antecedents(self, node: Union[Clause, Assert]) -> List[Expr]:
        found: Dict[str, Expr] = {}
        if isinstance(node, Clause):
            for sibling in self.siblings(node):
                if isinstance(sibling.formula, Binary) and sibling.formula.op == '==>':
                    found.setdefault(key_of(sibling.formula.left), sibling.formula.left)

        bounds = [obligation.formula for obligation in well_formedness(node.formula) if isinstance(obligation.formula, Chain)]
        unique = {key_of(bound): bound for bound in bounds}
        if len(unique) > 1:
            together = conjunction(unique.values())
            found.setdefault(key_of(together), together)
        for key, bound in unique.items():
            found.setdefault(key, bound)

        for quantifier in (item for item in walk(node.formula) if isinstance(item, Quantifier)):
            lifted = self.lifted_bound(quantifier)
            if lifted is not None:
                found.setdefault(key_of(lifted), lifted)

        current = node.formula.left if isinstance(node.formula, Binary) and node.formula.op == '==>' else None
        return [item for key, item in found.items() if current is None or key != key_of(current)]

    def lifted_bound(self, quantifier: Quantifier) -> Optional[Expr]:
        bounds = quantifier_range(quantifier)
        if bounds is None:
            return None
        low, high, inner = bounds
        arrays = [item.array for item in walk(inner) if isinstance(item, Index) and quantifier.var in free_vars(item.index)]
        if not arrays or high == Length(arrays[0]):
            return None
        upper = Binary('<=', high, Length(arrays[0]))
        if int_literal(low) == 0:
            return upper
        return Binary('&&', Binary('<=', IntLit(0), low), upper)

    def weaken(self, node: Node, reason: str) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        if not isinstance(node, (Clause, Assert)) or not self.editor.editable(node):
            return
        for antecedent in self.antecedents(node):
            weakened = replace(node, formula=guard_by(antecedent, node.formula))
            hunk = self.editor.rewrite(node, self.text(weakened))
            if hunk is not None:
                yield f'{reason} at line {node.span.line}', (hunk,)

    def weaken_failing(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        if self.failing is not None:
            yield from self.weaken(self.failing, 'guard the failing clause')

    def soft_hosts(self) -> List[Node]:
        hosts: Dict[int, Node] = {}
        for fact in self.focus.ordered:
            if self.failing is not None and fact.sid == self.failing.sid:
                continue
            try:
                hosts.setdefault(fact.sid, self.program.node(fact.sid))
            except KeyError:
                continue
        return list(hosts.values())

    def weaken_soft_hosts(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        for host in self.soft_hosts():
            yield from self.weaken(host, 'guard a prioritized clause')

    def test_under_repair(self) -> Optional[Test]:
        if self.focus.trace.kind is not ObligationKind.POSTCONDITION:
            return None
        for test in self.focus.tests:
            if test.name == self.focus.trace.method and self.program.has_method(test.callee):
                return test
        return None

    def oracle_implications(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        test = self.test_under_repair()
        if test is None or not isinstance(self.failing, Clause):
            return
        callee = self.program.method(test.callee)
        if not callee.returns:
            return

        renaming: Dict[str, Expr] = {test.result: Var(callee.returns[0].name)}
        env: Dict[str, Value] = {}
        for param, argument in zip(callee.params, test.args):
            if isinstance(argument, Var):
                renaming[argument.name] = Var(param.name)
                argument = test.value_of(argument.name)
            try:
                env[param.name] = evaluate(argument, {})
            except EvaluationError:
                return
        oracle = substitute(self.failing.formula, renaming)
        if any(name not in callee.signature for name in free_vars(oracle)):
            return

        clauses = callee.requires + callee.ensures
        if clauses:
            index = clauses[-1].span.line - 1
        else:
            index = callee.span.line - 1
        depth = self.editor.indent(index) if clauses else '  '

        for condition in self.widened_quantifiers(callee, env):
            text = f'ensures {self.format(guard_by(condition, oracle))}'
            yield f'oracle of "{test.name}" under a quantified condition', (self.editor.insert_after(index, text, depth),)
        yield f'oracle of "{test.name}"', (self.editor.insert_after(index, f'ensures {self.format(oracle)}', depth),)

    def widened_quantifiers(self, callee: Method, env: Dict[str, Value]) -> List[Expr]:
        found: Dict[str, Expr] = {}
        for clause in callee.ensures:
            for quantifier in (item for item in walk(clause.formula) if isinstance(item, Quantifier)):
                bounds = quantifier_range(quantifier)
                if bounds is None:
                    continue
                inner = bounds[2]
                arrays = [item.array for item in walk(inner) if isinstance(item, Index) and quantifier.var in free_vars(item.index)]
                if not arrays:
                    continue
                guard = Chain(('<=', '<'), (IntLit(0), Var(quantifier.var), Length(arrays[0])))
                connective = '==>' if quantifier.kind == 'forall' else '&&'
                widened = Quantifier(quantifier.kind, quantifier.var, Binary(connective, guard, inner))
                try:
                    holds = evaluate(widened, env)
                except EvaluationError:
                    continue
                if holds is True:
                    found.setdefault(key_of(widened), widened)
        return list(found.values())

    def demanded_value(self) -> Optional[Tuple[str, Expr]]:
        if not isinstance(self.failing, Clause) or self.focus.trace.kind is not ObligationKind.POSTCONDITION:
            return None
        method = self.method_of(self.failing)
        goal = consequent(self.failing.formula)
        if not isinstance(goal, Binary) or goal.op != '==':
            return None
        returns = {param.name for param in method.returns}
        params = {param.name for param in method.params}
        for side, other in ((goal.left, goal.right), (goal.right, goal.left)):
            if isinstance(side, Var) and side.name in returns and set(free_vars(other)) <= params:
                return side.name, other
        return None

    def value_substitution(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        demanded = self.demanded_value()
        if demanded is None or self.failing is None:
            return
        name, value = demanded
        method = self.method_of(self.failing)
        if method.body is None:
            return

        hunks: List[Hunk] = []
        replaced: Set[int] = set()
        for node in iter_block_nodes(method.body):
            if isinstance(node, Assign) and node.target == name or isinstance(node, VarDecl) and node.name == name:
                constant = int_literal(node.value)  # type: ignore[union-attr]
                if constant is None or node.value == value or node.sid not in self.trace_sids:  # type: ignore[union-attr]
                    continue
                hunk = self.editor.rewrite(node, simple_statement_text(replace(node, value=value)))
                if hunk is not None:
                    hunks.append(hunk)
                    replaced.add(constant)
        if not hunks:
            return

        def pinned(expr: Expr) -> bool:
            if not isinstance(expr, Binary) or expr.op != '==':
                return False
            for side, other in ((expr.left, expr.right), (expr.right, expr.left)):
                if side == Var(name) and int_literal(other) in replaced:
                    return True
            return False

        for node in iter_block_nodes(method.body):
            if isinstance(node, Clause) and node.kind is ClauseKind.INVARIANT:
                rewritten = replace_where(node.formula, pinned, Binary('==', Var(name), value))
                if rewritten != node.formula:
                    hunk = self.editor.rewrite(node, self.text(replace(node, formula=rewritten)))
                    if hunk is not None:
                        hunks.append(hunk)
        yield f'set "{name}" to the value the postcondition demands', tuple(hunks)

    def constant_scan(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        values = self.domain.ints()
        self.rng.shuffle(values)
        for sid in sorted(self.trace_sids):
            try:
                node = self.program.node(sid)
            except KeyError:
                continue
            if not isinstance(node, (Assign, VarDecl)):
                continue
            current = int_literal(node.value)
            if current is None:
                continue
            for candidate in values:
                if candidate == current:
                    continue
                hunk = self.editor.rewrite(node, simple_statement_text(replace(node, value=literal(candidate))))
                if hunk is not None:
                    yield f'replace the constant {current} with {candidate} at line {node.span.line}', (hunk,)

    def booleans(self, method: Method) -> List[str]:
        names: Dict[str, None] = {}
        if method.body is not None:
            for node in iter_block_nodes(method.body):
                if isinstance(node, VarDecl) and (node.sort is Sort.BOOL or isinstance(node.value, BoolLit)):
                    names.setdefault(node.name, None)
        return list(names)

    def invariant_guards(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        targets = [self.failing] if self.failing is not None else []
        for node in targets + self.soft_hosts():
            if not isinstance(node, Clause) or node.kind is not ClauseKind.INVARIANT:
                continue
            for name in self.booleans(self.method_of(node)):
                if name in free_vars(node.formula):
                    continue
                for guard in (Var(name), Unary('!', Var(name))):
                    hunk = self.editor.rewrite(node, self.text(replace(node, formula=guard_by(guard, node.formula))))
                    if hunk is not None:
                        yield f'guard the invariant at line {node.span.line} by "{name}"', (hunk,)

    def deletions(self) -> Iterator[Tuple[str, Tuple[Hunk, ...]]]:
        targets = [self.failing] if self.failing is not None else []
        for node in targets + self.soft_hosts():
            if isinstance(node, (Clause, Assert)):
                hunk = self.editor.delete(node)
                if hunk is not None:
                    yield f'delete line {node.span.line}', (hunk,)

    @staticmethod
    def format(formula: Expr) -> str:
        return clause_text(Clause(0, ClauseKind.ENSURES, formula))[len('ensures '):]

    @staticmethod
    def text(node: Union[Clause, Stmt]) -> str:
        if isinstance(node, Clause):
            return clause_text(node)
        return simple_statement_text(node)


def site_line(program: Program, sid: int) -> Optional[int]:
    """The line of the clause or statement an obligation comes from. A postcondition is reported at the body instead."""
    try:
        return program.node(sid).span.line
    except KeyError:
        return None


def relocated_line(lines: List[str], hunks: Sequence[Hunk], line: int) -> int:
    """Where a 1-based line of the original ends up once the hunks are applied."""
    shift = 0
    for hunk in hunks:
        start = locate(lines, hunk)
        end = start + len(hunk.original_lines)
        if line > end:
            shift += len(hunk.patched_lines) - len(hunk.original_lines)
    return line + shift


class EnumerativeSynthesizer:
    """Builtin synthesizer: enumerates small edits and keeps those that make the failing obligation go through."""

    name = 'enumerative'

    def __init__(self, seed: int = 0, domain: BoundedDomain = BoundedDomain(), solver: Optional[Solver] = None, logger: LoggerProtocol = EmptyLogger()) -> None:
        self.seed = seed
        self.domain = domain
        self.solver = solver if solver is not None else Solver(SolverConfig(domain=domain))
        self.logger = logger

    def propose(self, request: SynthRequest) -> List[Patch]:
        focus = request.focus
        if focus is None:
            raise PluginFailure('the enumerative synthesizer needs the program behind the request')

        editor = SourceEditor(request.source, request.filename, frozen_lines(request.annotated_program))
        mutations = Mutations(focus, editor, self.domain, random.Random(self.seed * 7919 + request.campaign))

        patches: List[Patch] = []
        seen: Set[Tuple[Hunk, ...]] = set()
        for description, hunks in mutations.all():
            if hunks in seen:
                continue
            seen.add(hunks)
            patch = Patch(hunks, self.name, request.campaign, description)
            if self.repairs(request.source, focus, patch):
                self.logger.info(f'The edit "{description}" removes the failing obligation.')
                patches.append(patch)
                if len(patches) == request.k:
                    break
        return patches

    def repairs(self, source: str, focus: RepairFocus, patch: Patch) -> bool:
        try:
            patched = parse_program(apply_patch(source, patch))
        except ConformError:
            return False
        trace = focus.trace
        site = site_line(focus.program, trace.target.sid)
        if site is None:
            return False
        line = relocated_line(source.split('\n'), patch.hunks, site)
        if not patched.has_method(trace.method):
            return False
        try:
            partitions = method_partitions(patched.method(trace.method), patched)
        except ConformError:
            return False
        for partition in partitions:
            if partition.kind is trace.kind and site_line(patched, partition.target_sid) == line:
                if not self.solver.check_partition(partition).valid:
                    return False
        return True
