import random
from dataclasses import replace
from typing import Dict, Iterable, List, Optional

from conform.formulas import conjunction, defined, key_of, negate
from conform.intent import IntentFact, IntentReport, PriorityKey
from conform.solver import Solver
from conform.nodes import Sort, Expr, Binary


def partition_sorts(report: IntentReport) -> Dict[str, Sort]:
    """Sorts of every incarnation the partitions of a report mention."""
    sorts: Dict[str, Sort] = {}
    for outcome in report.outcomes:
        for name, sort in outcome.partition.sorts:
            sorts.setdefault(name, sort)
    return sorts


class Prioritizer:
    """Orders soft facts: most conflicts with hard intent first, then with other soft facts, then the stronger one.

    Facts are compared as the passive form states them, one variable per incarnation. A soft fact that cannot hold at all conflicts with nothing and ranks last.
    """

    def __init__(self, solver: Solver, sorts: Optional[Dict[str, Sort]] = None, seed: int = 0) -> None:
        self.solver = solver
        self.sorts = sorts or {}
        self.seed = seed

    def meaning(self, fact: IntentFact) -> Expr:
        formula = fact.obligation
        return conjunction([defined(formula), formula])

    def satisfiable(self, formula: Expr) -> bool:
        return not self.solver.check(negate(formula), self.sorts).valid

    def conflict(self, left: Expr, right: Expr) -> bool:
        return self.solver.check(Binary('==>', left, negate(right)), self.sorts).valid

    def implies(self, left: Expr, right: Expr) -> bool:
        return self.solver.check(Binary('==>', left, right), self.sorts).valid

    def distinct(self, facts: Iterable[IntentFact]) -> List[Expr]:
        seen: Dict[str, Expr] = {}
        for fact in facts:
            meaning = self.meaning(fact)
            seen.setdefault(key_of(meaning), meaning)
        return [meaning for meaning in seen.values() if self.satisfiable(meaning)]

    def order(self, soft: Iterable[IntentFact], hard: Iterable[IntentFact]) -> List[IntentFact]:
        soft = sorted(soft, key=lambda fact: fact.fact_id)
        if not soft:
            return []
        hard_meanings = self.distinct(hard)
        meanings = {fact.fact_id: self.meaning(fact) for fact in soft}
        live = [fact for fact in soft if self.satisfiable(meanings[fact.fact_id])]
        alive = {fact.fact_id for fact in live}

        h_conflicts = {
            fact.fact_id: sum(1 for other in hard_meanings if self.conflict(meanings[fact.fact_id], other))
            for fact in live
        }
        s_conflicts = {
            fact.fact_id: sum(
                1 for other in live
                if other.fact_id != fact.fact_id and self.conflict(meanings[fact.fact_id], meanings[other.fact_id])
            )
            for fact in live
        }
        strength = {
            fact.fact_id: sum(1 for other in live if other.fact_id != fact.fact_id and self.stronger(meanings[other.fact_id], meanings[fact.fact_id]))
            for fact in live
        }

        rng = random.Random(self.seed)
        tie_break = {fact.fact_id: rng.random() for fact in soft}
        ranked = [
            replace(
                fact,
                priority=PriorityKey(h_conflicts[fact.fact_id], s_conflicts[fact.fact_id], strength[fact.fact_id])
                if fact.fact_id in alive else PriorityKey(0, 0, len(soft)),
            )
            for fact in soft
        ]
        return sorted(ranked, key=lambda fact: (-fact.priority.h_conflicts, -fact.priority.s_conflicts, fact.priority.strength_rank, tie_break[fact.fact_id]))  # type: ignore[union-attr]

    def stronger(self, left: Expr, right: Expr) -> bool:
        return self.implies(left, right) and not self.implies(right, left)


def prioritize(soft: Iterable[IntentFact], hard: Iterable[IntentFact], solver: Solver, sorts: Optional[Dict[str, Sort]] = None, seed: int = 0) -> List[IntentFact]:
    return Prioritizer(solver, sorts, seed).order(soft, hard)


def top_class(ordered: List[IntentFact]) -> List[IntentFact]:
    if not ordered:
        return []
    best = ordered[0].priority
    return [fact for fact in ordered if fact.priority == best]
