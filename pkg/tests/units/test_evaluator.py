import pytest
import full_match
from hypothesis import given, strategies as st

from conform.domain import BoundedDomain
from conform.errors import DivisionByZero, EvaluationError, UnboundVariable
from conform.evaluator import euclidean_div, euclidean_mod, evaluate, value_of
from conform.parser import parse_program
from conform.nodes import Sort


def expression(text):
    program = parse_program(f'method M(a: array<int>, x: int, y: int, b: bool) requires {text}', check=False)
    return program.method('M').requires[0].formula


@given(st.integers(min_value=-50, max_value=50), st.integers(min_value=-7, max_value=7).filter(lambda value: value != 0))
def test_euclidean_division(left, right):
    quotient, remainder = euclidean_div(left, right), euclidean_mod(left, right)

    assert left == quotient * right + remainder
    assert 0 <= remainder < abs(right)


@pytest.mark.parametrize(
    ['text', 'env', 'expected'],
    [
        ('x + y * 2 == 7', {'x': 1, 'y': 3}, True),
        ('-3 % 2 == 1', {}, True),
        ('-7 / 2 == -4', {}, True),
        ('a.Length == 3 && a[1] == 5', {'a': (4, 5, 6)}, True),
        ('a[7] == 0', {'a': (4, 5, 6)}, True),
        ('a[-1] == 0', {'a': (4, 5, 6)}, True),
        ('a != null', {'a': ()}, True),
        ('forall i :: 0 <= i < a.Length ==> a[i] % 2 == 0', {'a': (2, 4)}, True),
        ('forall i :: 0 <= i < a.Length ==> a[i] % 2 == 0', {'a': (2, 3)}, False),
        ('exists i :: 0 <= i < a.Length && a[i] == 3', {'a': (2, 3)}, True),
        ('0 <= x < y <= 4', {'x': 1, 'y': 4}, True),
        ('b <==> x > 0', {'b': False, 'x': 0}, True),
        ('b ==> x / 0 == 1', {'b': False, 'x': 0}, True),
    ],
)
def test_evaluate(text, env, expected):
    assert evaluate(expression(text), env) is expected


def test_values():
    assert value_of(expression('new int[]{1, -2}'), {}) == (1, -2)
    assert value_of(expression('-x'), {'x': 3}) == -3


def test_division_by_zero():
    with pytest.raises(DivisionByZero, match=full_match('division by zero in "x / y"')):
        evaluate(expression('x / y == 0'), {'x': 1, 'y': 0})


def test_unbound_variable():
    with pytest.raises(UnboundVariable, match=full_match('the variable "x" has no value')):
        evaluate(expression('x == 0'), {})


def test_unbounded_quantifier():
    with pytest.raises(EvaluationError, match=full_match('the quantifier over "i" is unbounded')):
        evaluate(expression('forall i :: a[i] == 0'), {'a': ()})


def test_domain_order():
    domain = BoundedDomain(-2, 3, 1)

    assert domain.ints() == [0, 1, -1, 2, -2, 3]
    assert list(domain.arrays()) == [(), (0,), (1,), (-1,), (2,), (-2,), (3,)]
    assert list(domain.values(Sort.BOOL)) == [False, True]
    assert domain.contains((3,))
    assert not domain.contains((4,))
    assert not domain.contains((0, 0))
    assert str(domain) == 'ints [-2, 3], arrays up to length 1'


@pytest.mark.parametrize(
    ['arguments', 'message'],
    [
        ((1, 0, 3), 'The lower bound 1 of the domain is above the upper bound 0.'),
        ((0, 1, -1), 'The maximum array length must not be negative.'),
    ],
)
def test_wrong_domains(arguments, message):
    with pytest.raises(ValueError, match=full_match(message)):
        BoundedDomain(*arguments)
