from typing import AbstractSet, Mapping, Optional, Tuple, Union

from conform.errors import DivisionByZero, EvaluationError, UnboundVariable
from conform.printer import print_expr
from conform.nodes import (
    Expr, IntLit, BoolLit, NullLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call, Presence,
    quantifier_range,
)


Value = Union[int, bool, Tuple[int, ...], None]
Env = Mapping[str, Value]


def euclidean_div(left: int, right: int) -> int:
    return (left - euclidean_mod(left, right)) // right


def euclidean_mod(left: int, right: int) -> int:
    return left % abs(right)


def compare(op: str, left: Value, right: Value) -> bool:
    if op == '==':
        return left == right
    if op == '!=':
        return left != right
    if op == '<':
        return left < right  # type: ignore[operator]
    if op == '<=':
        return left <= right  # type: ignore[operator]
    if op == '>':
        return left > right  # type: ignore[operator]
    return left >= right  # type: ignore[operator]


class Evaluator:
    """Total semantics over ints, booleans and int arrays.

    Reading outside of an array gives 0. Presence atoms are true unless a set
    of present fingerprints is given."""

    def __init__(self, env: Env, present: Optional[AbstractSet[str]] = None) -> None:
        self.env = dict(env)
        self.present = present

    def value(self, expr: Expr) -> Value:
        if isinstance(expr, (IntLit, BoolLit)):
            return expr.value
        if isinstance(expr, NullLit):
            return None
        if isinstance(expr, Var):
            if expr.name not in self.env:
                raise UnboundVariable(f'the variable "{expr.name}" has no value')
            return self.env[expr.name]
        if isinstance(expr, Presence):
            return self.present is None or expr.fingerprint in self.present
        if isinstance(expr, Unary):
            operand = self.value(expr.operand)
            return (not operand) if expr.op == '!' else -operand  # type: ignore[operator]
        if isinstance(expr, Binary):
            return self.binary(expr)
        if isinstance(expr, Chain):
            values = [self.value(operand) for operand in expr.operands]
            return all(compare(op, left, right) for op, left, right in zip(expr.ops, values, values[1:]))
        if isinstance(expr, Length):
            return len(self.array(expr.array))
        if isinstance(expr, Index):
            array = self.array(expr.array)
            index = self.value(expr.index)
            if isinstance(index, int) and 0 <= index < len(array):
                return array[index]
            return 0
        if isinstance(expr, ArrayLit):
            return tuple(self.value(element) for element in expr.elements)  # type: ignore[misc]
        if isinstance(expr, Quantifier):
            return self.quantifier(expr)
        if isinstance(expr, Call):
            raise EvaluationError(f'cannot evaluate the call "{print_expr(expr)}"')
        raise EvaluationError(f'cannot evaluate {type(expr).__name__}')

    def array(self, expr: Expr) -> Tuple[int, ...]:
        value = self.value(expr)
        if not isinstance(value, tuple):
            raise EvaluationError(f'"{print_expr(expr)}" is not an array')
        return value

    def binary(self, expr: Binary) -> Value:
        op = expr.op
        if op == '&&':
            return bool(self.value(expr.left)) and bool(self.value(expr.right))
        if op == '||':
            return bool(self.value(expr.left)) or bool(self.value(expr.right))
        if op == '==>':
            return (not self.value(expr.left)) or bool(self.value(expr.right))
        if op in ('==', '!=') and (isinstance(expr.left, NullLit) or isinstance(expr.right, NullLit)):
            both = isinstance(expr.left, NullLit) and isinstance(expr.right, NullLit)
            return both == (op == '==')

        left, right = self.value(expr.left), self.value(expr.right)
        if op == '<==>':
            return bool(left) == bool(right)
        if op == '+':
            return left + right  # type: ignore[operator]
        if op == '-':
            return left - right  # type: ignore[operator]
        if op == '*':
            return left * right  # type: ignore[operator]
        if op in ('/', '%'):
            if right == 0:
                raise DivisionByZero(f'division by zero in "{print_expr(expr)}"')
            if op == '/':
                return euclidean_div(left, right)  # type: ignore[arg-type]
            return euclidean_mod(left, right)  # type: ignore[arg-type]
        return compare(op, left, right)

    def quantifier(self, expr: Quantifier) -> bool:
        bounds = quantifier_range(expr)
        if bounds is None:
            raise EvaluationError(f'the quantifier over "{expr.var}" is unbounded')
        low, high, inner = bounds
        start, stop = self.value(low), self.value(high)
        saved = self.env.get(expr.var, None)
        had = expr.var in self.env
        try:
            for point in range(start, stop):  # type: ignore[arg-type]
                self.env[expr.var] = point
                holds = bool(self.value(inner))
                if expr.kind == 'forall' and not holds:
                    return False
                if expr.kind == 'exists' and holds:
                    return True
            return expr.kind == 'forall'
        finally:
            if had:
                self.env[expr.var] = saved
            else:
                self.env.pop(expr.var, None)


def evaluate(formula: Expr, env: Env, present: Optional[AbstractSet[str]] = None) -> bool:
    return bool(Evaluator(env, present).value(formula))


def value_of(expr: Expr, env: Env) -> Value:
    return Evaluator(env).value(expr)
