from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from conform.domain import BoundedDomain
from conform.errors import EvaluationError
from conform.evaluator import Evaluator, Value
from conform.formulas import conjuncts, negate
from conform.nodes import Sort, Expr, Var, Binary, Unary, Length, Index, Quantifier, free_vars, children, COMPARISONS, ARITHMETIC


Witness = Dict[str, Value]


def flatten(vc: Expr) -> Tuple[List[Expr], Expr]:
    """`h1 ==> (h2 ==> goal)` as the list of hypothesis conjuncts and the goal."""
    hypotheses: List[Expr] = []
    while isinstance(vc, Binary) and vc.op == '==>':
        hypotheses.extend(conjuncts(vc.left))
        vc = vc.right
    return hypotheses, vc


def guess_sorts(expr: Expr, known: Optional[Mapping[str, Sort]] = None) -> Dict[str, Sort]:
    """Sorts for variables nobody declared, read off the positions they are used in."""
    result: Dict[str, Sort] = dict(known or {})

    def visit(node: Expr, bound: Tuple[str, ...], expected: Sort) -> None:
        if isinstance(node, Var):
            if node.name not in bound:
                result.setdefault(node.name, expected)
            return
        if isinstance(node, Quantifier):
            visit(node.body, bound + (node.var,), Sort.BOOL)
        elif isinstance(node, (Length, Index)):
            visit(node.array, bound, Sort.ARRAY)
            if isinstance(node, Index):
                visit(node.index, bound, Sort.INT)
        elif isinstance(node, Unary):
            visit(node.operand, bound, Sort.INT if node.op == '-' else Sort.BOOL)
        elif isinstance(node, Binary) and node.op not in COMPARISONS and node.op not in ARITHMETIC:
            visit(node.left, bound, Sort.BOOL)
            visit(node.right, bound, Sort.BOOL)
        else:
            for child in children(node):
                visit(child, bound, Sort.INT)

    visit(expr, (), Sort.BOOL)
    return result


def holds(constraint: Expr, env: Witness) -> bool:
    try:
        return bool(Evaluator(env).value(constraint))
    except EvaluationError:
        return False


class BoundedSearch:
    """Depth-first search for an assignment that makes every hypothesis true and the goal false.

    Variables are bound in the order they first appear. A constraint is checked as soon
    as its last variable is bound, and a hypothesis `v == e` fixes `v` instead of
    enumerating it."""

    def __init__(self, vc: Expr, sorts: Optional[Mapping[str, Sort]], domain: BoundedDomain) -> None:
        self.domain = domain
        hypotheses, goal = flatten(vc)
        self.order: List[str] = list(free_vars(vc))
        self.sorts = guess_sorts(vc, sorts)
        position = {name: index for index, name in enumerate(self.order)}

        self.ground: List[Expr] = []
        self.buckets: List[List[Expr]] = [[] for _ in self.order]
        for constraint in hypotheses + [negate(goal)]:
            names = free_vars(constraint)
            if not names:
                self.ground.append(constraint)
            else:
                self.buckets[max(position[name] for name in names)].append(constraint)

        self.definitions: Dict[int, Expr] = {}
        for hypothesis in hypotheses:
            if not isinstance(hypothesis, Binary) or hypothesis.op != '==':
                continue
            for side, other in ((hypothesis.left, hypothesis.right), (hypothesis.right, hypothesis.left)):
                if isinstance(side, Var) and side.name in position:
                    index = position[side.name]
                    if index not in self.definitions and all(position[name] < index for name in free_vars(other)):
                        self.definitions[index] = other
                        break

    def candidates(self, index: int, env: Witness) -> Iterable[Value]:
        definition = self.definitions.get(index)
        if definition is not None:
            try:
                return (Evaluator(env).value(definition),)
            except EvaluationError:
                return ()
        return self.domain.values(self.sorts[self.order[index]])  # type: ignore[return-value]

    def search(self) -> Optional[Witness]:
        if not all(holds(constraint, {}) for constraint in self.ground):
            return None
        env: Witness = {}
        return self.descend(0, env)

    def descend(self, index: int, env: Witness) -> Optional[Witness]:
        if index == len(self.order):
            return dict(env)
        name = self.order[index]
        for value in self.candidates(index, env):
            env[name] = value
            if all(holds(constraint, env) for constraint in self.buckets[index]):
                found = self.descend(index + 1, env)
                if found is not None:
                    return found
        env.pop(name, None)
        return None


def find_counterexample(vc: Expr, sorts: Optional[Mapping[str, Sort]], domain: BoundedDomain) -> Optional[Witness]:
    return BoundedSearch(vc, sorts, domain).search()
