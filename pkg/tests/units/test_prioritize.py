from pathlib import Path

from conform.intent import FactOrigin, IntentFact, PriorityKey, extract_hs_intent, render_fact
from conform.parser import parse_program
from conform.prioritize import partition_sorts, prioritize, top_class
from conform.solver import Solver
from conform.nodes import Binary, IntLit, Sort, Var


CORPUS = Path(__file__).parent.parent / 'corpus'
SORTS = {'x': Sort.INT}


def fact(fact_id, text):
    program = parse_program(f'method M(x: int) requires {text}', check=False)
    return IntentFact(fact_id, program.method('M').requires[0].formula, FactOrigin.PROGRAM_STMT, 1, 1, 1, 'assign')


def test_conflicts_with_hard_intent_come_first():
    soft = [fact('f1', 'x > 0'), fact('f2', 'x < 0'), fact('f3', 'x > 1')]
    hard = [fact('h1', 'x >= 0')]

    ordered = prioritize(soft, hard, Solver(), SORTS)

    assert [item.fact_id for item in ordered] == ['f2', 'f3', 'f1']
    assert [item.priority for item in ordered] == [PriorityKey(1, 2, 0), PriorityKey(0, 1, 0), PriorityKey(0, 1, 1)]
    assert top_class(ordered) == ordered[:1]


def test_unsatisfiable_hard_facts_are_ignored():
    soft = [fact('f1', 'x > 0'), fact('f2', 'x < 0'), fact('f3', 'x > 1')]
    hard = [fact('h1', 'x >= 0'), fact('h2', 'x != x')]

    assert [item.priority.h_conflicts for item in prioritize(soft, hard, Solver(), SORTS)] == [1, 0, 0]


def test_ties_follow_the_seed():
    soft = [fact('f1', 'x == 1'), fact('f2', 'x == 1'), fact('f3', 'x >= 3')]

    first = prioritize(soft, [], Solver(), SORTS, seed=7)
    second = prioritize(list(reversed(soft)), [], Solver(), SORTS, seed=7)

    assert [item.fact_id for item in first] == [item.fact_id for item in second]
    assert first[0].fact_id == 'f3'
    assert top_class(first) == first[:1]


def test_nothing_to_order():
    assert prioritize([], [fact('h1', 'x >= 0')], Solver(), SORTS) == []
    assert top_class([]) == []


def test_partition_sorts_keep_incarnations():
    report = extract_hs_intent(parse_program((CORPUS / 'FindFirstOdd.mvl').read_text()), Solver())
    sorts = partition_sorts(report)

    assert sorts['arr'] is Sort.ARRAY
    assert any(name.startswith('odd@') for name in sorts)
    assert all(sort is Sort.INT for name, sort in sorts.items() if name.startswith('odd@'))


def test_incarnations_of_one_variable_stay_apart():
    increment = IntentFact('f0', Binary('==', Var('x@2'), Binary('+', Var('x@1'), IntLit(2))), FactOrigin.PROGRAM_STMT, 1, 1, 1, 'assign')
    soft = [increment, fact('f1', 'x < 0')]
    hard = [fact('h1', 'x >= 0')]

    ordered = prioritize(soft, hard, Solver(), {'x': Sort.INT, 'x@1': Sort.INT, 'x@2': Sort.INT})

    assert [item.fact_id for item in ordered] == ['f1', 'f0']
    assert ordered[1].priority == PriorityKey(0, 0, 0)


def test_soft_facts_that_cannot_hold_rank_last():
    soft = [fact('f1', 'x != x'), fact('f2', 'x < 0'), fact('f3', 'x > 1')]

    ordered = prioritize(soft, [fact('h1', 'x >= 0')], Solver(), SORTS)

    assert [item.fact_id for item in ordered] == ['f2', 'f3', 'f1']
    assert ordered[-1].priority == PriorityKey(0, 0, 3)


def test_loop_artifacts_do_not_outrank_the_broken_invariant():
    program = parse_program('''
method Count(n: int) returns (r: int)
  requires n >= 0
{
  r := 0;
  var i := 0;
  while i < n
    invariant r == i
  {
    r := r + 2;
    i := i + 1;
  }
}
''')
    report = extract_hs_intent(program, Solver())

    ordered = prioritize(report.soft, report.hard, Solver(), partition_sorts(report))

    assert ordered
    assert all(item.priority.h_conflicts == 0 for item in ordered)
    assert 'r == r + 2' not in [render_fact(item) for item in ordered if item.priority.s_conflicts]
