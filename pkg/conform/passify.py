from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from conform.checker import infer_sort
from conform.errors import PathExplosion, UnsupportedConstruct
from conform.formulas import conjuncts, substitute, well_formedness, negate, mentions
from conform.printer import print_expr
from conform.nodes import (
    Sort, Expr, Var, Binary, Chain, IntLit, Call, TRUE, FALSE, Clause, Stmt, Block, VarDecl, Assign, Assert, Assume, If,
    While, For, Break, Method, Program, iter_block_nodes,
)


MAX_PATHS = 256

Loop = Union[While, For]
Env = Dict[str, Expr]


class ObligationKind(Enum):
    POSTCONDITION = 'postcondition'
    INTERMEDIATE_ASSERT = 'intermediate_assert'
    WF_CHECK = 'wf_check'
    INVARIANT_ENTRY = 'invariant_entry'
    INVARIANT_MAINTAIN = 'invariant_maintain'
    SIGNATURE_WF = 'signature_wf'
    CALL_PRECONDITION = 'call_precondition'


MESSAGES = {
    ObligationKind.POSTCONDITION: 'A postcondition might not hold on this path.',
    ObligationKind.INTERMEDIATE_ASSERT: 'assertion might not hold.',
    ObligationKind.INVARIANT_ENTRY: 'This loop invariant might not hold on entry.',
    ObligationKind.INVARIANT_MAINTAIN: 'This loop invariant might not be maintained by the loop.',
    ObligationKind.CALL_PRECONDITION: 'A precondition for this call might not hold.',
}


class PassiveOp(Enum):
    ASSUME = 'assume'
    ASSERT = 'assert'
    SKIP = 'skip'


@dataclass(frozen=True)
class PassiveStmt:
    op: PassiveOp
    formula: Expr
    sid: int = 0
    role: str = ''
    kind: Optional[ObligationKind] = None
    message: str = ''
    line: int = 0
    trusted: bool = False

    def text(self) -> str:
        if self.op is PassiveOp.SKIP:
            return 'skip'
        return f'{self.op.value} {print_expr(self.formula)}'


@dataclass(frozen=True)
class PassiveBlock:
    id: int
    statements: Tuple[PassiveStmt, ...]
    successors: Tuple[int, ...]


@dataclass(frozen=True)
class Run:
    statements: Tuple[Stmt, ...]


@dataclass(frozen=True)
class BackEdge:
    loop: Loop


@dataclass(frozen=True)
class Exit:
    pass


Work = Tuple[Union[Run, BackEdge, Exit], ...]


def modified_variables(body: Block) -> List[str]:
    names: Dict[str, None] = {}
    for node in iter_block_nodes(body):
        if isinstance(node, Assign):
            names.setdefault(node.target, None)
    return list(names)


class Passifier:
    """Unrolls one method body into a tree of passive blocks, one leaf per path.

    Code after a join is copied into every branch, so each block has a single
    predecessor and every root-to-leaf walk is one execution path."""

    def __init__(self, method: Method, program: Optional[Program] = None, max_paths: int = MAX_PATHS) -> None:
        self.method = method
        self.program = program
        self.max_paths = max_paths
        self.blocks: Dict[int, PassiveBlock] = {}
        self.sorts: Dict[str, Sort] = {}
        self.bounds: Dict[int, Tuple[Expr, Expr]] = {}
        self.next_id = 0
        self.paths = 0

    def passify(self) -> List[PassiveBlock]:
        if self.method.body is None:
            return []
        env = self.initial_env()
        start = [
            PassiveStmt(PassiveOp.ASSUME, substitute(clause.formula, env), clause.sid, 'requires', line=clause.span.line, trusted=clause.trust.trusted)
            for clause in self.method.requires
        ]
        self.emit((Run(self.method.body.statements), Exit()), env, start, ())
        return [self.blocks[index] for index in sorted(self.blocks)]

    def initial_env(self) -> Env:
        env: Env = {}
        for param in self.method.params:
            env[param.name] = Var(param.name)
            self.sorts[param.name] = param.sort
        for param in self.method.returns:
            env[param.name] = self.fresh(param.name, '0', param.sort)
        return env

    def fresh(self, name: str, tag: str, sort: Sort) -> Var:
        incarnation = f'{name}@{tag}'
        self.sorts[incarnation] = sort
        return Var(incarnation)

    def sort_in(self, name: str, env: Env) -> Sort:
        current = env[name]
        assert isinstance(current, Var)
        return self.sorts[current.name]

    def emit(self, work: Work, env: Env, current: List[PassiveStmt], breaks: Tuple[Work, ...]) -> int:
        block_id = self.next_id
        self.next_id += 1
        statements = list(current)
        env = dict(env)

        while work:
            item, work = work[0], work[1:]
            if isinstance(item, Exit):
                statements.extend(self.postconditions(env))
                return self.close(block_id, statements, ())
            if isinstance(item, BackEdge):
                statements.extend(self.back_edge(item.loop, env))
                return self.close(block_id, statements, ())
            if not item.statements:
                continue

            statement = item.statements[0]
            work = (Run(item.statements[1:]),) + work

            if isinstance(statement, Break):
                statements.append(PassiveStmt(PassiveOp.SKIP, TRUE, statement.sid, 'break', line=statement.span.line))
                work, breaks = breaks[-1], breaks[:-1]

            elif isinstance(statement, If):
                statements.extend(self.checks(statement.cond, statement, env))
                condition = substitute(statement.cond, env)
                then_work = (Run(statement.then.statements),) + work
                else_work = (Run(statement.orelse.statements if statement.orelse is not None else ()),) + work
                successors = (
                    self.emit(then_work, env, [self.assume(condition, statement, 'condition')], breaks),
                    self.emit(else_work, env, [self.assume(negate(condition), statement, 'condition')], breaks),
                )
                return self.close(block_id, statements, successors)

            elif isinstance(statement, (While, For)):
                statements.extend(self.loop_entry(statement, env))
                body_env = self.havoc(statement, env, 'h')
                exit_env = self.havoc(statement, env, 'x')
                body_work: Work = (Run(statement.body.statements), BackEdge(statement))
                successors = (
                    self.emit(body_work, body_env, self.loop_head(statement, body_env, True), breaks + (work,)),
                    self.emit(work, exit_env, self.loop_head(statement, exit_env, False), breaks),
                )
                return self.close(block_id, statements, successors)

            else:
                statements.extend(self.simple(statement, env))

        return self.close(block_id, statements, ())

    def close(self, block_id: int, statements: List[PassiveStmt], successors: Tuple[int, ...]) -> int:
        if not successors:
            self.paths += 1
            if self.paths > self.max_paths:
                raise PathExplosion(f'the method "{self.method.name}" has more than {self.max_paths} paths')
        if not statements:
            statements = [PassiveStmt(PassiveOp.SKIP, TRUE)]
        self.blocks[block_id] = PassiveBlock(block_id, tuple(statements), successors)
        return block_id

    def assume(self, formula: Expr, node: Union[Stmt, Clause], role: str) -> PassiveStmt:
        return PassiveStmt(PassiveOp.ASSUME, formula, node.sid, role, line=node.span.line, trusted=node.trust.trusted)

    def asserts(self, formula: Expr, node: Union[Stmt, Clause], kind: ObligationKind, line: int = 0) -> List[PassiveStmt]:
        return [
            PassiveStmt(PassiveOp.ASSERT, part, node.sid, kind.value, kind, MESSAGES[kind], line or node.span.line, node.trust.trusted)
            for part in conjuncts(formula)
        ]

    def checks(self, expr: Expr, node: Union[Stmt, Clause], env: Env) -> List[PassiveStmt]:
        return [
            PassiveStmt(
                PassiveOp.ASSERT, substitute(obligation.formula, env), node.sid, 'wf', ObligationKind.WF_CHECK,
                f'{obligation.reason}.', node.span.line, node.trust.trusted,
            )
            for obligation in well_formedness(expr)
        ]

    def simple(self, statement: Stmt, env: Env) -> List[PassiveStmt]:
        if isinstance(statement, VarDecl):
            if statement.value is None:
                assert statement.sort is not None
                env[statement.name] = self.fresh(statement.name, str(statement.sid), statement.sort)
                return []
            return self.assignment(statement, statement.name, statement.value, env, 'declare')
        if isinstance(statement, Assign):
            return self.assignment(statement, statement.target, statement.value, env, 'assign')
        if isinstance(statement, Assert):
            result = self.checks(statement.formula, statement, env)
            return result + self.asserts(substitute(statement.formula, env), statement, ObligationKind.INTERMEDIATE_ASSERT)
        if isinstance(statement, Assume):
            result = self.checks(statement.formula, statement, env)
            return result + [self.assume(substitute(statement.formula, env), statement, 'assume')]
        raise UnsupportedConstruct(f'cannot verify a {type(statement).__name__} statement', statement.span)

    def assignment(self, statement: Stmt, target: str, value: Expr, env: Env, role: str) -> List[PassiveStmt]:
        if isinstance(value, Call):
            return self.call(statement, target, value, env)
        result = self.checks(value, statement, env)
        renamed = substitute(value, env)
        sort = infer_sort(renamed, self.sorts)
        incarnation = self.fresh(target, str(statement.sid), sort)
        env[target] = incarnation
        return result + [self.assume(Binary('==', incarnation, renamed), statement, role)]

    def call(self, statement: Stmt, target: str, call: Call, env: Env) -> List[PassiveStmt]:
        if self.program is None or not self.program.has_method(call.name):
            raise UnsupportedConstruct(f'the method "{call.name}" is not available for a modular call', statement.span)
        callee = self.program.method(call.name)
        result: List[PassiveStmt] = []
        for argument in call.args:
            result.extend(self.checks(argument, statement, env))
        mapping: Env = {param.name: substitute(argument, env) for param, argument in zip(callee.params, call.args)}
        for clause in callee.requires:
            result.extend(self.asserts(substitute(clause.formula, mapping), statement, ObligationKind.CALL_PRECONDITION))

        returned = callee.returns[0]
        incarnation = self.fresh(target, str(statement.sid), returned.sort)
        env[target] = incarnation
        mapping[returned.name] = incarnation
        for clause in callee.ensures:
            result.append(self.assume(substitute(clause.formula, mapping), statement, 'call_ensures'))
        return result

    def loop_entry(self, loop: Loop, env: Env) -> List[PassiveStmt]:
        result: List[PassiveStmt] = []
        if isinstance(loop, For):
            result.extend(self.checks(loop.lo, loop, env))
            result.extend(self.checks(loop.hi, loop, env))
            lo, hi = substitute(loop.lo, env), substitute(loop.hi, env)
            self.bounds[loop.sid] = (lo, hi)
            result.append(PassiveStmt(
                PassiveOp.ASSERT, Binary('<=', lo, hi), loop.sid, 'wf', ObligationKind.WF_CHECK,
                'lower bound might exceed upper bound.', loop.span.line, loop.trust.trusted,
            ))
            start = self.fresh(loop.var, str(loop.sid), Sort.INT)
            result.append(self.assume(Binary('==', start, lo), loop, 'loop_start'))
            env[loop.var] = start
        elif loop.decreases is not None and not mentions(loop.decreases, modified_variables(loop.body)):
            raise UnsupportedConstruct('the "decreases" expression must mention a variable the loop modifies', loop.span)
        for invariant in loop.invariants:
            result.extend(self.asserts(substitute(invariant.formula, env), invariant, ObligationKind.INVARIANT_ENTRY))
        return result

    def havoc(self, loop: Loop, env: Env, tag: str) -> Env:
        havocked = dict(env)
        names = modified_variables(loop.body)
        if isinstance(loop, For):
            names.append(loop.var)
        for name in names:
            if name in env:
                havocked[name] = self.fresh(name, f'{tag}{loop.sid}', self.sort_in(name, env))
        return havocked

    def counter_range(self, loop: For, counter: Expr) -> Expr:
        """The bounds are evaluated once, on entry."""
        lo, hi = self.bounds[loop.sid]
        return Chain(('<=', '<='), (lo, counter, hi))

    def loop_head(self, loop: Loop, env: Env, into_body: bool) -> List[PassiveStmt]:
        result: List[PassiveStmt] = []
        if isinstance(loop, For):
            result.append(self.assume(self.counter_range(loop, env[loop.var]), loop, 'loop_range'))
        for invariant in loop.invariants:
            if into_body:
                result.extend(self.checks(invariant.formula, invariant, env))
            result.append(self.assume(substitute(invariant.formula, env), invariant, 'invariant'))
        if isinstance(loop, For):
            guard = Binary('<', env[loop.var], self.bounds[loop.sid][1])
        else:
            if into_body:
                result.extend(self.checks(loop.cond, loop, env))
            guard = substitute(loop.cond, env)
        result.append(self.assume(guard if into_body else negate(guard), loop, 'guard'))
        return result

    def back_edge(self, loop: Loop, env: Env) -> List[PassiveStmt]:
        result: List[PassiveStmt] = []
        if isinstance(loop, For):
            following = self.fresh(loop.var, f'n{loop.sid}', Sort.INT)
            result.append(self.assume(Binary('==', following, Binary('+', env[loop.var], IntLit(1))), loop, 'increment'))
            env[loop.var] = following
            result.extend(self.asserts(self.counter_range(loop, following), loop, ObligationKind.INVARIANT_MAINTAIN))
        for invariant in loop.invariants:
            result.extend(self.asserts(substitute(invariant.formula, env), invariant, ObligationKind.INVARIANT_MAINTAIN))
        result.append(PassiveStmt(PassiveOp.ASSUME, FALSE, loop.sid, 'back_edge', line=loop.span.line))
        return result

    def postconditions(self, env: Env) -> List[PassiveStmt]:
        body = self.method.body
        line = body.span.line if body is not None else self.method.span.line
        result: List[PassiveStmt] = []
        for clause in self.method.ensures:
            result.extend(self.asserts(substitute(clause.formula, env), clause, ObligationKind.POSTCONDITION, line))
        return result


def passify(method: Method, program: Optional[Program] = None, max_paths: int = MAX_PATHS) -> List[PassiveBlock]:
    return Passifier(method, program, max_paths).passify()


def dump_blocks(blocks: List[PassiveBlock]) -> str:
    lines = []
    for block in blocks:
        parts = [statement.text() for statement in block.statements]
        if block.successors:
            parts.append('goto ' + ' '.join(str(successor) for successor in block.successors))
        else:
            parts.append('return')
        lines.append(f'{block.id}: ' + '; '.join(parts))
    return '\n'.join(lines) + ('\n' if lines else '')
