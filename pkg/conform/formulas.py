from dataclasses import dataclass, replace
from typing import Dict, List, Tuple, Iterable, Set

from conform.printer import print_expr
from conform.nodes import (
    Expr, IntLit, BoolLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call, Presence,
    TRUE, children, free_vars, walk, quantifier_range,
)


COMMUTATIVE = frozenset({'+', '*', '==', '!=', '&&', '||', '<==>'})


@dataclass(frozen=True)
class Obligation:
    formula: Expr
    reason: str
    site: Expr


def source_name(name: str) -> str:
    return name.split('@', 1)[0]


def conjunction(parts: Iterable[Expr]) -> Expr:
    items = [part for part in parts if part != TRUE]
    if not items:
        return TRUE
    result = items[-1]
    for part in reversed(items[:-1]):
        result = Binary('&&', part, result)
    return result


def implies(antecedents: Iterable[Expr], consequent: Expr) -> Expr:
    items = [item for item in antecedents if item != TRUE]
    if not items:
        return consequent
    return Binary('==>', conjunction(items), consequent)


def negate(expr: Expr) -> Expr:
    if isinstance(expr, BoolLit):
        return BoolLit(not expr.value)
    if isinstance(expr, Unary) and expr.op == '!':
        return expr.operand
    return Unary('!', expr)


def conjuncts(expr: Expr) -> List[Expr]:
    if isinstance(expr, Binary) and expr.op == '&&':
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]


def rebuild(expr: Expr, parts: Tuple[Expr, ...]) -> Expr:
    if isinstance(expr, Unary):
        return replace(expr, operand=parts[0])
    if isinstance(expr, Binary):
        return replace(expr, left=parts[0], right=parts[1])
    if isinstance(expr, Chain):
        return replace(expr, operands=parts)
    if isinstance(expr, Length):
        return replace(expr, array=parts[0])
    if isinstance(expr, Index):
        return replace(expr, array=parts[0], index=parts[1])
    if isinstance(expr, ArrayLit):
        return replace(expr, elements=parts)
    if isinstance(expr, Call):
        return replace(expr, args=parts)
    if isinstance(expr, Quantifier):
        return replace(expr, body=parts[0])
    return expr


def fresh_name(base: str, taken: Set[str]) -> str:
    index = 1
    while f'{base}{index}' in taken:
        index += 1
    return f'{base}{index}'


def substitute(expr: Expr, mapping: Dict[str, Expr]) -> Expr:
    if not mapping:
        return expr
    if isinstance(expr, Var):
        return mapping.get(expr.name, expr)
    if isinstance(expr, Quantifier):
        inner = {name: value for name, value in mapping.items() if name != expr.var}
        captured: Set[str] = set()
        for name in free_vars(expr.body):
            if name in inner:
                captured.update(free_vars(inner[name]))
        if expr.var in captured:
            taken = captured | set(free_vars(expr.body)) | set(inner)
            renamed = fresh_name(expr.var, taken)
            body = substitute(expr.body, {expr.var: Var(renamed)})
            return replace(expr, var=renamed, body=substitute(body, inner))
        return replace(expr, body=substitute(expr.body, inner))
    parts = children(expr)
    if not parts:
        return expr
    return rebuild(expr, tuple(substitute(part, mapping) for part in parts))


def strip_incarnations(expr: Expr) -> Expr:
    names = {name: Var(source_name(name)) for name in free_vars(expr) if '@' in name}
    return substitute(expr, names)


def resolve_presence(expr: Expr, present: Set[str]) -> Expr:
    if isinstance(expr, Presence):
        return BoolLit(expr.fingerprint in present)
    parts = children(expr)
    if not parts:
        return expr
    return rebuild(expr, tuple(resolve_presence(part, present) for part in parts))


def well_formedness(expr: Expr) -> List[Obligation]:
    """Bounds and division checks for `expr`, each guarded by the short-circuit context it sits in."""
    return obligations(expr, ())


def obligations(expr: Expr, guards: Tuple[Expr, ...]) -> List[Obligation]:
    if isinstance(expr, Index):
        result = obligations(expr.array, guards) + obligations(expr.index, guards)
        bounds = Chain(('<=', '<'), (IntLit(0), expr.index, Length(expr.array)))
        result.append(Obligation(implies(guards, bounds), 'index out of range', expr))
        return result

    if isinstance(expr, Binary):
        if expr.op in ('==>', '&&'):
            return obligations(expr.left, guards) + obligations(expr.right, guards + (expr.left,))
        if expr.op == '||':
            return obligations(expr.left, guards) + obligations(expr.right, guards + (negate(expr.left),))
        result = obligations(expr.left, guards) + obligations(expr.right, guards)
        if expr.op in ('/', '%') and not (isinstance(expr.right, IntLit) and expr.right.value != 0):
            result.append(Obligation(implies(guards, Binary('!=', expr.right, IntLit(0))), 'possible division by zero', expr))
        return result

    if isinstance(expr, Quantifier):
        bounds = quantifier_range(expr)
        assert bounds is not None
        low, high, inner = bounds
        body = expr.body
        assert isinstance(body, Binary)
        result = obligations(low, guards) + obligations(high, guards)
        for obligation in obligations(body.left, ()) + obligations(inner, ()):
            lifted = Quantifier('forall', expr.var, Binary('==>', body.left, obligation.formula))
            result.append(Obligation(implies(guards, lifted), obligation.reason, obligation.site))
        return result

    result = []
    for child in children(expr):
        result.extend(obligations(child, guards))
    return result


def defined(expr: Expr) -> Expr:
    return conjunction(obligation.formula for obligation in well_formedness(expr))


def guarded(expr: Expr) -> Expr:
    """`expr` assumed only where it is well defined."""
    condition = defined(expr)
    if condition == TRUE:
        return expr
    return Binary('==>', condition, expr)


def normalize(expr: Expr) -> Expr:
    return canonical(expr, {})


def canonical(expr: Expr, bound: Dict[str, str]) -> Expr:
    if isinstance(expr, Var):
        name = bound.get(expr.name, expr.name)
        return Var(name)
    if isinstance(expr, Quantifier):
        renamed = f'_{len(bound)}'
        return Quantifier(expr.kind, renamed, canonical(expr.body, {**bound, expr.var: renamed}))
    parts = tuple(canonical(part, bound) for part in children(expr))
    if isinstance(expr, Binary) and expr.op in COMMUTATIVE:
        left, right = sorted(parts, key=print_expr)
        return Binary(expr.op, left, right)
    if not parts:
        return expr
    return rebuild(expr, parts)


def key_of(expr: Expr) -> str:
    return print_expr(normalize(expr))


def mentions(expr: Expr, names: Iterable[str]) -> bool:
    wanted = set(names)
    return any(isinstance(node, Var) and node.name in wanted for node in walk(expr))

