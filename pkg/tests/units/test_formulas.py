import pytest

from conform.formulas import conjunction, implies, negate, conjuncts, substitute, strip_incarnations, well_formedness, guarded, key_of, mentions
from conform.parser import parse_program
from conform.printer import print_expr
from conform.nodes import TRUE, FALSE, Var, IntLit, Binary


def expression(text):
    program = parse_program(f'method M(a: array<int>, x: int, y: int, i: int, b: bool) requires {text}', check=False)
    return program.method('M').requires[0].formula


def test_conjunction_skips_true():
    assert conjunction([]) == TRUE
    assert conjunction([TRUE, Var('b')]) == Var('b')
    assert print_expr(conjunction([Var('p'), Var('q'), Var('r')])) == 'p && (q && r)'
    assert conjuncts(expression('x > 0 && (y > 0 && b)')) == [expression('x > 0'), expression('y > 0'), Var('b')]


def test_implies_and_negate():
    assert implies([], Var('q')) == Var('q')
    assert print_expr(implies([Var('p'), Var('r')], Var('q'))) == 'p && r ==> q'
    assert negate(TRUE) == FALSE
    assert negate(negate(Var('p'))) == Var('p')


def test_substitution_avoids_capture():
    formula = expression('forall i :: 0 <= i < x ==> a[i] == y')
    result = substitute(formula, {'y': Var('i'), 'x': IntLit(3)})

    assert print_expr(result) == 'forall i1 :: 0 <= i1 < 3 ==> a[i1] == i'


def test_bound_variables_are_not_substituted():
    formula = expression('forall i :: 0 <= i < x ==> a[i] == 0')

    assert substitute(formula, {'i': IntLit(7)}) == formula


def test_strip_incarnations():
    assert print_expr(strip_incarnations(Binary('==', Var('odd@2'), Var('i@1')))) == 'odd == i'


@pytest.mark.parametrize(
    ['text', 'expected'],
    [
        ('a[x] % 2 != 0', ['0 <= x < a.Length']),
        ('x / y > 0', ['y != 0']),
        ('x % 2 == 0', []),
        ('b ==> a[x] == 0', ['b ==> 0 <= x < a.Length']),
        ('x < 0 || a[x] == 0', ['!(x < 0) ==> 0 <= x < a.Length']),
        ('forall i :: 0 <= i < x ==> a[i] == 0', ['forall i :: 0 <= i < x ==> 0 <= i < a.Length']),
        ('a[a[x]] == 0', ['0 <= x < a.Length', '0 <= a[x] < a.Length']),
    ],
)
def test_well_formedness(text, expected):
    assert [print_expr(obligation.formula) for obligation in well_formedness(expression(text))] == expected


def test_guarded():
    assert print_expr(guarded(expression('a[x] == 0'))) == '0 <= x < a.Length ==> a[x] == 0'
    assert guarded(expression('x == 0')) == expression('x == 0')


def test_keys_ignore_operand_order_and_bound_names():
    assert key_of(expression('x + y == 1')) == key_of(expression('1 == y + x'))
    assert key_of(expression('forall i :: 0 <= i < x ==> a[i] == 0')) == key_of(expression('forall k :: 0 <= k < x ==> a[k] == 0'))
    assert key_of(expression('x < y')) != key_of(expression('y < x'))


def test_mentions():
    assert mentions(expression('a[x] == 0'), ['x'])
    assert not mentions(expression('a[x] == 0'), ['y'])
