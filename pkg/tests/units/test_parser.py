from pathlib import Path

import pytest
import full_match

from conform.errors import MVLSyntaxError, MVLTypeError, ShapeError
from conform.lexer import Lexer, TokenType
from conform.parser import parse_program, parse_test, is_closed_literal
from conform.printer import print_program
from conform.nodes import (
    Sort, IntLit, Unary, Var, Binary, Chain, ArrayLit, ClauseKind, For, If, VarDecl, Assign, Break,
    USER_TRUSTED, PATCH_TRUSTED, UNTRUSTED,
)


CORPUS = Path(__file__).parent.parent / 'corpus'


def test_running_example_shape():
    program = parse_program((CORPUS / 'FindFirstOdd.mvl').read_text())
    method = program.method('FindFirstOdd')

    assert [param.name for param in method.params] == ['arr']
    assert method.params[0].sort is Sort.ARRAY
    assert [param.name for param in method.returns] == ['odd']
    assert [clause.kind for clause in method.requires + method.ensures] == [ClauseKind.REQUIRES, ClauseKind.ENSURES, ClauseKind.ENSURES]
    assert [clause.span.line for clause in method.ensures] == [4, 5]
    assert method.span.line == 1

    statements = method.body.statements
    assert isinstance(statements[0], VarDecl)
    assert isinstance(statements[1], Assign)
    assert isinstance(statements[2], For)
    assert len(statements[2].invariants) == 4
    branch = statements[2].body.statements[0]
    assert isinstance(branch, If)
    assert isinstance(branch.then.statements[-1], Break)


def test_statement_ids_are_unique():
    program = parse_program((CORPUS / 'FindFirstOdd.mvl').read_text())
    sids = [node.sid for node in program.nodes()]

    assert len(sids) == len(set(sids))
    assert 0 not in sids


def test_negative_literal_is_a_unary_minus():
    program = parse_program('method M() returns (r: int) { r := -1; }')
    assignment = program.method('M').body.statements[0]

    assert assignment.value == Unary('-', IntLit(1))


def test_chained_comparison_is_one_node():
    program = parse_program('method M(a: int, b: int) requires 0 <= a < b { }')
    formula = program.method('M').requires[0].formula

    assert isinstance(formula, Chain)
    assert formula.ops == ('<=', '<')


def test_implication_is_right_associative():
    program = parse_program('method M(a: bool, b: bool, c: bool) requires a ==> b ==> c { }')
    formula = program.method('M').requires[0].formula

    assert formula == Binary('==>', Var('a'), Binary('==>', Var('b'), Var('c')))


def test_method_without_body_is_a_stub():
    program = parse_program('method M(x: int) returns (r: int) ensures r == x')

    assert program.method('M').body is None


def test_trust_annotations():
    source = '\n'.join([
        'method M(x: int) returns (r: int)',
        '  ensures {:trusted} r == x',
        '  ensures r >= x // pr {:trusted}',
        '  ensures r <= x',
        '{',
        '  r := x;',
        '}',
    ])
    ensures = parse_program(source).method('M').ensures

    assert [clause.trust for clause in ensures] == [USER_TRUSTED, PATCH_TRUSTED, UNTRUSTED]


@pytest.mark.parametrize(
    ['source', 'message'],
    [
        ('method M( { }', 'line 1, column 11: expected an identifier but found "{"'),
        ('method M() { x := ; }', 'line 1, column 19: expected an expression but found ";"'),
        ('method M() { var x := 1 }', 'line 1, column 25: expected ";" but found "}"'),
        ('method M() { var x := 1; ', 'line 1, column 26: expected "}" but found end of input'),
        ('method M() { var x := 1$; }', 'line 1, column 24: unexpected character "$"'),
        ('method M() { {:fast} x := 1; }', 'line 1, column 14: unknown attribute "fast"'),
    ],
)
def test_syntax_errors(source, message):
    with pytest.raises(MVLSyntaxError, match=full_match(message)):
        parse_program(source)


@pytest.mark.parametrize(
    ['source', 'message'],
    [
        ('method M(x: int) { x := 1; }', '"x" cannot be assigned'),
        ('method M() { var x := 1; var x := 2; }', 'the name "x" is already declared'),
        ('method M() { var x := true + 1; }', 'expected int but the expression has type bool'),
        ('method M() { }\nmethod M() { }', 'the method "M" is declared twice'),
    ],
)
def test_type_errors(source, message):
    with pytest.raises(MVLTypeError) as info:
        parse_program(source)

    assert info.value.message == message


def test_lexer_records_marked_lines():
    lexer = Lexer('var x := 1; // pr {:trusted}\nvar y := 2; // other\n')
    tokens = lexer.tokenize()

    assert lexer.marked_lines == {1}
    assert tokens[-1].type is TokenType.EOF


@pytest.mark.parametrize('path', sorted(CORPUS.glob('**/*.mvl')), ids=lambda path: path.name)
def test_printing_is_stable(path):
    printed = print_program(parse_program(path.read_text(), check=False))

    assert print_program(parse_program(printed, check=False)) == printed


def test_parse_test_running_example():
    test = parse_test((CORPUS / 'AllEvenLength.mvl').read_text())

    assert test.name == 'AllEvenLength'
    assert test.inputs == (('x', ArrayLit((IntLit(2), IntLit(2), IntLit(4)))),)
    assert test.callee == 'FindFirstOdd'
    assert test.args == (Var('x'),)
    assert test.result == 's'
    assert len(test.oracle) == 1


@pytest.mark.parametrize(
    ['source', 'message'],
    [
        ('method T(a: int) { var s := M(a); }', 'a test is a parameterless method with a body'),
        ('method T() { var x := 1; }', 'exactly one call expected'),
        ('method T() { var x := 1; var y := x; var s := M(x); }', 'the input "y" must be a literal'),
        ('method T() { var s := M(1); assert t == 1; }', 'the oracle mentions the unknown name "t"'),
        ('method T() { }\nmethod U() { }', 'exactly one test method expected'),
    ],
)
def test_malformed_tests(source, message):
    with pytest.raises(ShapeError) as info:
        parse_test(source)

    assert info.value.message == message


@pytest.mark.parametrize(
    ['source', 'expected'],
    [
        ('1', True),
        ('-1', True),
        ('true', True),
        ('new int[]{1, -2}', True),
        ('x', False),
        ('1 + 1', False),
        ('new int[]{x}', False),
    ],
)
def test_closed_literals(source, expected):
    program = parse_program(f'method M(x: int) {{ var v := {source}; }}', check=False)

    assert is_closed_literal(program.method('M').body.statements[0].value) is expected
