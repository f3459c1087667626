import re
import shlex
import threading
from subprocess import PIPE, Popen
from typing import Dict, List, Mapping, Optional, Tuple, Union

from emptylog import EmptyLogger, LoggerProtocol

from conform.errors import BackendUnavailable, MalformedModel, SolverError, UnsupportedConstruct
from conform.evaluator import Value
from conform.nodes import (
    Sort, Expr, IntLit, BoolLit, NullLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call, Presence,
    free_vars,
)


LOGIC = 'ALL'
MAX_READ_ELEMENTS = 64

# source identifiers never contain '!'
ELEMENT_BINDER = '|k!eq|'

OPERATORS = {
    '&&': 'and', '||': 'or', '==>': '=>', '<==>': '=',
    '+': '+', '-': '-', '*': '*', '/': 'div', '%': 'mod',
    '==': '=', '<': '<', '<=': '<=', '>': '>', '>=': '>=',
}

TOKEN = re.compile(r'\(|\)|\|[^|]*\||[^\s()]+')

SExpr = Union[str, List['SExpr']]


def symbol(name: str) -> str:
    return f'|{name}|'


def length_symbol(name: str) -> str:
    return f'|{name}.len|'


class Translator:
    def __init__(self, sorts: Mapping[str, Sort]) -> None:
        self.sorts = sorts

    def is_array(self, expr: Expr) -> bool:
        return isinstance(expr, ArrayLit) or (isinstance(expr, Var) and self.sorts.get(expr.name) is Sort.ARRAY)

    def array(self, expr: Expr) -> Tuple[str, str]:
        if isinstance(expr, Var):
            return symbol(expr.name), length_symbol(expr.name)
        if isinstance(expr, ArrayLit):
            term = '((as const (Array Int Int)) 0)'
            for position, element in enumerate(expr.elements):
                term = f'(store {term} {position} {self.term(element)})'
            return term, str(len(expr.elements))
        raise UnsupportedConstruct('only variables and literals can be used as arrays')

    def array_equality(self, left: Expr, right: Expr) -> str:
        left_array, left_length = self.array(left)
        right_array, right_length = self.array(right)
        k = ELEMENT_BINDER
        elements = f'(forall (({k} Int)) (=> (and (<= 0 {k}) (< {k} {left_length})) (= (select {left_array} {k}) (select {right_array} {k}))))'
        return f'(and (= {left_length} {right_length}) {elements})'

    def term(self, expr: Expr) -> str:
        if isinstance(expr, IntLit):
            return str(expr.value)
        if isinstance(expr, BoolLit):
            return 'true' if expr.value else 'false'
        if isinstance(expr, Var):
            return symbol(expr.name)
        if isinstance(expr, Presence):
            return 'true'
        if isinstance(expr, Unary):
            return f'({"not" if expr.op == "!" else "-"} {self.term(expr.operand)})'
        if isinstance(expr, Binary):
            return self.binary(expr)
        if isinstance(expr, Chain):
            pairs = [
                f'({OPERATORS[op]} {self.term(left)} {self.term(right)})'
                for op, left, right in zip(expr.ops, expr.operands, expr.operands[1:])
            ]
            return f'(and {" ".join(pairs)})'
        if isinstance(expr, Length):
            return self.array(expr.array)[1]
        if isinstance(expr, Index):
            return f'(select {self.array(expr.array)[0]} {self.term(expr.index)})'
        if isinstance(expr, Quantifier):
            return f'({expr.kind} (({symbol(expr.var)} Int)) {self.term(expr.body)})'
        if isinstance(expr, Call):
            raise UnsupportedConstruct(f'the call of "{expr.name}" cannot be sent to a solver', expr.span)
        raise UnsupportedConstruct(f'cannot translate {type(expr).__name__}')

    def binary(self, expr: Binary) -> str:
        if expr.op in ('==', '!='):
            if isinstance(expr.left, NullLit) or isinstance(expr.right, NullLit):
                both = isinstance(expr.left, NullLit) and isinstance(expr.right, NullLit)
                return 'true' if both == (expr.op == '==') else 'false'
            if self.is_array(expr.left) or self.is_array(expr.right):
                equality = self.array_equality(expr.left, expr.right)
            else:
                equality = f'(= {self.term(expr.left)} {self.term(expr.right)})'
            return equality if expr.op == '==' else f'(not {equality})'
        return f'({OPERATORS[expr.op]} {self.term(expr.left)} {self.term(expr.right)})'


def declarations(sorts: Mapping[str, Sort], names: List[str]) -> List[str]:
    lines = []
    for name in names:
        sort = sorts.get(name, Sort.INT)
        if sort is Sort.ARRAY:
            lines.append(f'(declare-const {symbol(name)} (Array Int Int))')
            lines.append(f'(declare-const {length_symbol(name)} Int)')
            lines.append(f'(assert (>= {length_symbol(name)} 0))')
        else:
            lines.append(f'(declare-const {symbol(name)} {"Bool" if sort is Sort.BOOL else "Int"})')
    return lines


def script(vc: Expr, sorts: Mapping[str, Sort]) -> str:
    names = list(free_vars(vc))
    lines = [f'(set-logic {LOGIC})'] + declarations(sorts, names)
    lines.append(f'(assert (not {Translator(sorts).term(vc)}))')
    return '\n'.join(lines) + '\n'


def parse_sexpr(text: str) -> SExpr:
    tokens = TOKEN.findall(text)
    if not tokens:
        raise MalformedModel('the solver returned nothing')
    stack: List[List[SExpr]] = [[]]
    for token in tokens:
        if token == '(':
            stack.append([])
        elif token == ')':
            if len(stack) == 1:
                raise MalformedModel(f'unbalanced reply: {text!r}')
            finished = stack.pop()
            stack[-1].append(finished)
        else:
            stack[-1].append(token)
    if len(stack) != 1 or len(stack[0]) != 1:
        raise MalformedModel(f'cannot read the reply: {text!r}')
    return stack[0][0]


def atom_value(node: SExpr) -> Value:
    if node == 'true':
        return True
    if node == 'false':
        return False
    if isinstance(node, str):
        try:
            return int(node)
        except ValueError:
            raise MalformedModel(f'unexpected value "{node}" in the model') from None
    if len(node) == 2 and node[0] == '-':
        value = atom_value(node[1])
        if isinstance(value, int) and not isinstance(value, bool):
            return -value
    raise MalformedModel(f'unexpected value {node!r} in the model')


def read_values(reply: str) -> List[Value]:
    parsed = parse_sexpr(reply)
    if not isinstance(parsed, list) or not all(isinstance(pair, list) and len(pair) == 2 for pair in parsed):
        raise MalformedModel(f'cannot read the values in {reply!r}')
    return [atom_value(pair[1]) for pair in parsed]  # type: ignore[index]


class SmtSession:
    """One solver process driven over its standard streams."""

    def __init__(self, command: str, timeout_ms: int, logger: LoggerProtocol = EmptyLogger()) -> None:
        self.command = shlex.split(command)
        self.timeout_ms = timeout_ms
        self.logger = logger
        self.timed_out = False
        try:
            self.process = Popen(self.command, stdin=PIPE, stdout=PIPE, stderr=PIPE, text=True)
        except (OSError, ValueError) as error:
            raise BackendUnavailable(f'cannot start the solver "{command}": {error}') from error
        self.timer = threading.Timer(timeout_ms / 1000, self.expire)
        self.timer.start()

    def expire(self) -> None:
        self.timed_out = True
        self.process.kill()

    def write(self, text: str) -> None:
        try:
            self.process.stdin.write(text)  # type: ignore[union-attr]
            self.process.stdin.flush()  # type: ignore[union-attr]
        except (BrokenPipeError, OSError, ValueError):
            if not self.timed_out:
                raise BackendUnavailable(f'the solver "{self.command[0]}" stopped accepting input') from None

    def read_reply(self) -> Optional[str]:
        lines: List[str] = []
        depth = 0
        while True:
            line = self.process.stdout.readline()  # type: ignore[union-attr]
            if not line:
                return None
            lines.append(line)
            depth += line.count('(') - line.count(')')
            if depth <= 0 and ''.join(lines).strip():
                return ''.join(lines).strip()

    def close(self) -> None:
        self.timer.cancel()
        try:
            self.write('(exit)\n')
        except BackendUnavailable:
            pass
        if self.process.poll() is None:
            self.process.kill()
        self.process.wait()


def check_with_smt(vc: Expr, sorts: Mapping[str, Sort], command: str, timeout_ms: int, logger: LoggerProtocol = EmptyLogger()) -> Tuple[str, Optional[Dict[str, Value]]]:
    session = SmtSession(command, timeout_ms, logger)
    try:
        session.write(script(vc, sorts))
        session.write('(check-sat)\n')
        answer = session.read_reply()
        if answer is None:
            if session.timed_out:
                logger.warning(f'The solver "{session.command[0]}" ran out of time after {timeout_ms} ms.')
                return 'unknown', None
            raise BackendUnavailable(f'the solver "{session.command[0]}" exited without an answer')
        if answer == 'unsat':
            return 'unsat', None
        if answer == 'unknown':
            return 'unknown', None
        if answer != 'sat':
            raise SolverError(f'the solver answered "{answer}"')
        return 'sat', model(session, vc, sorts)
    finally:
        session.close()


def model(session: SmtSession, vc: Expr, sorts: Mapping[str, Sort]) -> Dict[str, Value]:
    names = list(free_vars(vc))
    if not names:
        return {}
    terms = [length_symbol(name) if sorts.get(name) is Sort.ARRAY else symbol(name) for name in names]
    session.write(f'(get-value ({" ".join(terms)}))\n')
    reply = session.read_reply()
    if reply is None:
        raise MalformedModel('the solver did not report the model')
    values = read_values(reply)
    if len(values) != len(names):
        raise MalformedModel(f'expected {len(names)} values but got {len(values)}')

    witness: Dict[str, Value] = {}
    for name, value in zip(names, values):
        if sorts.get(name) is not Sort.ARRAY:
            witness[name] = value
            continue
        length = min(int(value), MAX_READ_ELEMENTS)  # type: ignore[arg-type]
        if length == 0:
            witness[name] = ()
            continue
        selects = ' '.join(f'(select {symbol(name)} {position})' for position in range(length))
        session.write(f'(get-value ({selects}))\n')
        elements = session.read_reply()
        if elements is None:
            raise MalformedModel(f'the solver did not report the elements of "{name}"')
        witness[name] = tuple(read_values(elements))  # type: ignore[arg-type]
    return witness
