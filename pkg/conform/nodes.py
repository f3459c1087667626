from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Optional, Iterator, Dict, Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int = 0

    @property
    def last_line(self) -> int:
        return max(self.line, self.end_line)


NO_SPAN = Span(0, 0)


class Sort(Enum):
    INT = 'int'
    BOOL = 'bool'
    ARRAY = 'array<int>'


class TrustOrigin(Enum):
    USER = 'user'
    PATCHED = 'patched'


@dataclass(frozen=True)
class TrustTag:
    trusted: bool = False
    origin: TrustOrigin = TrustOrigin.USER

    @property
    def patched(self) -> bool:
        return self.trusted and self.origin is TrustOrigin.PATCHED


UNTRUSTED = TrustTag()
USER_TRUSTED = TrustTag(True, TrustOrigin.USER)
PATCH_TRUSTED = TrustTag(True, TrustOrigin.PATCHED)


class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f'An integer literal is never negative, got {self.value}. Negate the positive literal instead.')


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class NullLit(Expr):
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Var(Expr):
    name: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Chain(Expr):
    """`a <= b < c`, kept whole so that it prints back the way it was written."""
    ops: Tuple[str, ...]
    operands: Tuple[Expr, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Length(Expr):
    array: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Index(Expr):
    array: Expr
    index: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class ArrayLit(Expr):
    elements: Tuple[Expr, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Quantifier(Expr):
    kind: str
    var: str
    body: Expr
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Call(Expr):
    name: str
    args: Tuple[Expr, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Presence(Expr):
    """True while the statement with this fingerprint is still in the program."""
    fingerprint: str
    label: str
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


TRUE = BoolLit(True)
FALSE = BoolLit(False)

COMPARISONS = ('==', '!=', '<', '<=', '>', '>=')
ARITHMETIC = ('+', '-', '*', '/', '%')
CONNECTIVES = ('&&', '||', '==>', '<==>')


def literal(value: int) -> Expr:
    return IntLit(value) if value >= 0 else Unary('-', IntLit(-value))


class ClauseKind(Enum):
    REQUIRES = 'requires'
    ENSURES = 'ensures'
    INVARIANT = 'invariant'


@dataclass(frozen=True)
class Clause:
    sid: int
    kind: ClauseKind
    formula: Expr
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


class Stmt:
    sid: int
    trust: TrustTag
    span: Span


@dataclass(frozen=True)
class Block:
    statements: Tuple[Stmt, ...]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class VarDecl(Stmt):
    sid: int
    name: str
    sort: Optional[Sort]
    value: Optional[Expr]
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Assign(Stmt):
    sid: int
    target: str
    value: Expr
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Assert(Stmt):
    sid: int
    formula: Expr
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Assume(Stmt):
    sid: int
    formula: Expr
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class If(Stmt):
    sid: int
    cond: Expr
    then: Block
    orelse: Optional[Block]
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class While(Stmt):
    sid: int
    cond: Expr
    invariants: Tuple[Clause, ...]
    decreases: Optional[Expr]
    body: Block
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class For(Stmt):
    sid: int
    var: str
    lo: Expr
    hi: Expr
    invariants: Tuple[Clause, ...]
    body: Block
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass(frozen=True)
class Break(Stmt):
    sid: int
    trust: TrustTag = UNTRUSTED
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


Node = Union[Clause, Stmt]


@dataclass(frozen=True)
class Param:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Method:
    name: str
    params: Tuple[Param, ...]
    returns: Tuple[Param, ...]
    requires: Tuple[Clause, ...]
    ensures: Tuple[Clause, ...]
    body: Optional[Block]
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def signature(self) -> Dict[str, Sort]:
        return {param.name: param.sort for param in self.params + self.returns}

    def nodes(self) -> Iterator[Node]:
        yield from self.requires
        yield from self.ensures
        if self.body is not None:
            yield from iter_block_nodes(self.body)


@dataclass(frozen=True)
class Program:
    methods: Tuple[Method, ...]
    source_name: str = '<input>'

    def method(self, name: str) -> Method:
        for method in self.methods:
            if method.name == name:
                return method
        raise KeyError(name)

    def has_method(self, name: str) -> bool:
        return any(method.name == name for method in self.methods)

    def nodes(self) -> Iterator[Node]:
        for method in self.methods:
            yield from method.nodes()

    def node(self, sid: int) -> Node:
        for node in self.nodes():
            if node.sid == sid:
                return node
        raise KeyError(sid)

    def owner(self, sid: int) -> Method:
        for method in self.methods:
            if any(node.sid == sid for node in method.nodes()):
                return method
        raise KeyError(sid)


def iter_block_nodes(block: Block) -> Iterator[Node]:
    for statement in block.statements:
        yield statement
        if isinstance(statement, If):
            yield from iter_block_nodes(statement.then)
            if statement.orelse is not None:
                yield from iter_block_nodes(statement.orelse)
        elif isinstance(statement, (While, For)):
            yield from statement.invariants
            yield from iter_block_nodes(statement.body)


def children(expr: Expr) -> Tuple[Expr, ...]:
    if isinstance(expr, Unary):
        return (expr.operand,)
    if isinstance(expr, Binary):
        return (expr.left, expr.right)
    if isinstance(expr, Chain):
        return expr.operands
    if isinstance(expr, Length):
        return (expr.array,)
    if isinstance(expr, Index):
        return (expr.array, expr.index)
    if isinstance(expr, (ArrayLit,)):
        return expr.elements
    if isinstance(expr, Call):
        return expr.args
    if isinstance(expr, Quantifier):
        return (expr.body,)
    return ()


def free_vars(expr: Expr) -> Tuple[str, ...]:
    found: Dict[str, None] = {}

    def walk(node: Expr, bound: Tuple[str, ...]) -> None:
        if isinstance(node, Var):
            if node.name not in bound:
                found.setdefault(node.name, None)
        elif isinstance(node, Quantifier):
            walk(node.body, bound + (node.var,))
        else:
            for child in children(node):
                walk(child, bound)

    walk(expr, ())
    return tuple(found)


def has_call(expr: Expr) -> bool:
    if isinstance(expr, Call):
        return True
    return any(has_call(child) for child in children(expr))


@dataclass(frozen=True)
class Spec:
    requires: Tuple[Clause, ...]
    ensures: Tuple[Clause, ...]

    @classmethod
    def of(cls, method: Method) -> 'Spec':
        return cls(method.requires, method.ensures)


@dataclass(frozen=True)
class Test:
    name: str
    inputs: Tuple[Tuple[str, Expr], ...]
    callee: str
    args: Tuple[Expr, ...]
    result: str
    oracle: Tuple[Expr, ...]
    source_name: str = '<test>'

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.inputs)

    def value_of(self, name: str) -> Expr:
        for input_name, value in self.inputs:
            if input_name == name:
                return value
        raise KeyError(name)


def walk(expr: Expr) -> Iterator[Expr]:
    yield expr
    for child in children(expr):
        yield from walk(child)


def quantifier_range(quantifier: Quantifier) -> Optional[Tuple[Expr, Expr, Expr]]:
    """Splits `forall i :: lo <= i < hi ==> body` (or `exists i :: lo <= i < hi && body`)
    into the inclusive lower bound, the exclusive upper bound and the body."""
    connective = '==>' if quantifier.kind == 'forall' else '&&'
    body = quantifier.body
    if not isinstance(body, Binary) or body.op != connective:
        return None
    guard, inner = body.left, body.right
    bound = Var(quantifier.var)

    if isinstance(guard, Chain) and len(guard.ops) == 2 and guard.operands[1] == bound:
        low_op, high_op = guard.ops
        low, high = guard.operands[0], guard.operands[2]
    elif isinstance(guard, Binary) and guard.op == '&&' and isinstance(guard.left, Binary) and isinstance(guard.right, Binary):
        if guard.left.right != bound or guard.right.left != bound:
            return None
        low_op, high_op = guard.left.op, guard.right.op
        low, high = guard.left.left, guard.right.right
    else:
        return None

    if low_op not in ('<=', '<') or high_op not in ('<=', '<'):
        return None
    if any(node == bound for node in walk(low)) or any(node == bound for node in walk(high)):
        return None
    if low_op == '<':
        low = Binary('+', low, IntLit(1))
    if high_op == '<=':
        high = Binary('+', high, IntLit(1))
    return low, high, inner
