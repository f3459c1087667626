from typing import List, Optional, Set, Tuple, Callable

from conform.lexer import Lexer, Token, TokenType
from conform.errors import MVLSyntaxError, ShapeError
from conform.checker import check_program
from conform.nodes import (
    Span, Sort, TrustTag, UNTRUSTED, USER_TRUSTED, PATCH_TRUSTED,
    Expr, IntLit, BoolLit, NullLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call,
    ClauseKind, Clause, Stmt, Block, VarDecl, Assign, Assert, Assume, If, While, For, Break,
    Param, Method, Program, Test, COMPARISONS, free_vars,
)


# Binary levels from loosest to tightest. Chains of comparisons are handled separately.
BINARY_LEVELS: Tuple[Tuple[str, ...], ...] = (
    ('<==>',),
    ('==>',),
    ('||',),
    ('&&',),
)
ADDITIVE = ('+', '-')
MULTIPLICATIVE = ('*', '/', '%')


class Parser:
    def __init__(self, source: str, source_name: str = '<input>') -> None:
        lexer = Lexer(source)
        self.tokens: List[Token] = lexer.tokenize()
        self.marked_lines: Set[int] = lexer.marked_lines
        self.source_name = source_name
        self.index = 0
        self.next_sid = 1

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    @property
    def previous(self) -> Token:
        return self.tokens[max(self.index - 1, 0)]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def at(self, *values: str) -> bool:
        return self.token.type in (TokenType.KEYWORD, TokenType.OPERATOR) and self.token.value in values

    def advance(self) -> Token:
        token = self.token
        if token.type is not TokenType.EOF:
            self.index += 1
        return token

    def accept(self, *values: str) -> Optional[Token]:
        if self.at(*values):
            return self.advance()
        return None

    def expect(self, value: str) -> Token:
        if not self.at(value):
            raise MVLSyntaxError(f'expected "{value}" but found {self.token.describe()}', self.token.span)
        return self.advance()

    def expect_identifier(self) -> Token:
        if self.token.type is not TokenType.IDENTIFIER:
            raise MVLSyntaxError(f'expected an identifier but found {self.token.describe()}', self.token.span)
        return self.advance()

    def take_sid(self) -> int:
        sid = self.next_sid
        self.next_sid += 1
        return sid

    def attribute(self) -> bool:
        if self.token.type is TokenType.ATTRIBUTE:
            self.advance()
            return True
        return False

    def trust_for(self, line: int, attributed: bool) -> TrustTag:
        if line in self.marked_lines:
            return PATCH_TRUSTED
        if attributed:
            return USER_TRUSTED
        return UNTRUSTED

    def span_from(self, start: Token) -> Span:
        return Span(start.line, start.column, self.previous.line)

    def program(self) -> Program:
        methods: List[Method] = []
        while self.token.type is not TokenType.EOF:
            methods.append(self.method())
        return Program(tuple(methods), self.source_name)

    def method(self) -> Method:
        start = self.expect('method')
        name = self.expect_identifier().value
        self.expect('(')
        params = self.params(')')
        self.expect(')')
        returns: Tuple[Param, ...] = ()
        if self.accept('returns'):
            self.expect('(')
            returns = self.params(')')
            self.expect(')')

        requires: List[Clause] = []
        ensures: List[Clause] = []
        while self.at('requires', 'ensures'):
            clause = self.clause()
            (requires if clause.kind is ClauseKind.REQUIRES else ensures).append(clause)

        body = self.block() if self.at('{') else None
        return Method(name, params, returns, tuple(requires), tuple(ensures), body, self.span_from(start))

    def params(self, closing: str) -> Tuple[Param, ...]:
        params: List[Param] = []
        if self.at(closing):
            return ()
        while True:
            name = self.expect_identifier().value
            self.expect(':')
            params.append(Param(name, self.sort()))
            if not self.accept(','):
                return tuple(params)

    def sort(self) -> Sort:
        if self.accept('int'):
            return Sort.INT
        if self.accept('bool'):
            return Sort.BOOL
        if self.accept('array'):
            self.expect('<')
            self.expect('int')
            self.expect('>')
            return Sort.ARRAY
        raise MVLSyntaxError(f'expected a type but found {self.token.describe()}', self.token.span)

    def clause(self) -> Clause:
        start = self.advance()
        sid = self.take_sid()
        attributed = self.attribute()
        formula = self.expression()
        self.accept(';')
        return Clause(sid, ClauseKind(start.value), formula, self.trust_for(start.line, attributed), self.span_from(start))

    def block(self) -> Block:
        start = self.expect('{')
        statements: List[Stmt] = []
        while not self.at('}'):
            if self.token.type is TokenType.EOF:
                raise MVLSyntaxError('expected "}" but found end of input', self.token.span)
            statements.append(self.statement())
        self.expect('}')
        return Block(tuple(statements), self.span_from(start))

    def statement(self) -> Stmt:
        start = self.token
        if self.at('var'):
            return self.var_decl()
        if self.at('assert', 'assume'):
            return self.assertion()
        if self.at('if'):
            return self.if_statement()
        if self.at('while'):
            return self.while_statement()
        if self.at('for'):
            return self.for_statement()
        if self.at('break'):
            self.advance()
            sid = self.take_sid()
            attributed = self.attribute()
            self.expect(';')
            return Break(sid, self.trust_for(start.line, attributed), self.span_from(start))
        if self.token.type is TokenType.ATTRIBUTE or self.token.type is TokenType.IDENTIFIER:
            return self.assignment()
        raise MVLSyntaxError(f'expected a statement but found {self.token.describe()}', self.token.span)

    def var_decl(self) -> VarDecl:
        start = self.expect('var')
        sid = self.take_sid()
        attributed = self.attribute()
        name = self.expect_identifier().value
        sort = None
        if self.accept(':'):
            sort = self.sort()
        value = None
        if self.accept(':='):
            value = self.expression()
        self.expect(';')
        return VarDecl(sid, name, sort, value, self.trust_for(start.line, attributed), self.span_from(start))

    def assignment(self) -> Assign:
        start = self.token
        sid = self.take_sid()
        attributed = self.attribute()
        target = self.expect_identifier().value
        self.expect(':=')
        value = self.expression()
        self.expect(';')
        return Assign(sid, target, value, self.trust_for(start.line, attributed), self.span_from(start))

    def assertion(self) -> Stmt:
        start = self.advance()
        sid = self.take_sid()
        attributed = self.attribute()
        formula = self.expression()
        self.expect(';')
        kind = Assert if start.value == 'assert' else Assume
        return kind(sid, formula, self.trust_for(start.line, attributed), self.span_from(start))

    def if_statement(self) -> If:
        start = self.expect('if')
        sid = self.take_sid()
        attributed = self.attribute()
        cond = self.expression()
        then = self.block()
        trust = self.trust_for(start.line, attributed)
        header = Span(start.line, start.column)
        orelse = None
        if self.accept('else'):
            if self.at('if'):
                nested = self.if_statement()
                orelse = Block((nested,), nested.span)
            else:
                orelse = self.block()
        return If(sid, cond, then, orelse, trust, Span(header.line, header.column, self.previous.line))

    def loop_clauses(self) -> Tuple[Tuple[Clause, ...], Optional[Expr]]:
        invariants: List[Clause] = []
        decreases = None
        while self.at('invariant', 'decreases'):
            if self.at('invariant'):
                invariants.append(self.clause())
            else:
                self.advance()
                decreases = self.expression()
                self.accept(';')
        return tuple(invariants), decreases

    def while_statement(self) -> While:
        start = self.expect('while')
        sid = self.take_sid()
        attributed = self.attribute()
        cond = self.expression()
        invariants, decreases = self.loop_clauses()
        body = self.block()
        return While(sid, cond, invariants, decreases, body, self.trust_for(start.line, attributed), self.span_from(start))

    def for_statement(self) -> For:
        start = self.expect('for')
        sid = self.take_sid()
        attributed = self.attribute()
        var = self.expect_identifier().value
        self.expect(':=')
        lo = self.expression()
        self.expect('to')
        hi = self.expression()
        invariants, decreases = self.loop_clauses()
        if decreases is not None:
            raise MVLSyntaxError('a for loop takes no decreases clause', start.span)
        body = self.block()
        return For(sid, var, lo, hi, invariants, body, self.trust_for(start.line, attributed), self.span_from(start))

    def expression(self) -> Expr:
        return self.binary_level(0)

    def binary_level(self, level: int) -> Expr:
        if level == len(BINARY_LEVELS):
            return self.comparison()
        operators = BINARY_LEVELS[level]
        start = self.token
        left = self.binary_level(level + 1)
        if operators == ('==>',):
            if self.accept('==>'):
                right = self.binary_level(level)
                return Binary('==>', left, right, self.span_from(start))
            return left
        while self.at(*operators):
            operator = self.advance().value
            right = self.binary_level(level + 1)
            left = Binary(operator, left, right, self.span_from(start))
        return left

    def comparison(self) -> Expr:
        start = self.token
        operands = [self.arithmetic(ADDITIVE)]
        ops: List[str] = []
        while self.at(*COMPARISONS):
            ops.append(self.advance().value)
            operands.append(self.arithmetic(ADDITIVE))
        if not ops:
            return operands[0]
        if len(ops) == 1:
            return Binary(ops[0], operands[0], operands[1], self.span_from(start))
        return Chain(tuple(ops), tuple(operands), self.span_from(start))

    def arithmetic(self, operators: Tuple[str, ...]) -> Expr:
        start = self.token
        operand: Callable[[], Expr] = (lambda: self.arithmetic(MULTIPLICATIVE)) if operators == ADDITIVE else self.unary
        left = operand()
        while self.at(*operators):
            operator = self.advance().value
            right = operand()
            left = Binary(operator, left, right, self.span_from(start))
        return left

    def unary(self) -> Expr:
        start = self.token
        if self.at('!', '-'):
            operator = self.advance().value
            operand = self.unary()
            return Unary(operator, operand, self.span_from(start))
        return self.postfix()

    def postfix(self) -> Expr:
        start = self.token
        expr = self.primary()
        while True:
            if self.accept('['):
                index = self.expression()
                self.expect(']')
                expr = Index(expr, index, self.span_from(start))
            elif self.at('.'):
                self.advance()
                member = self.expect_identifier()
                if member.value != 'Length':
                    raise MVLSyntaxError(f'unknown member "{member.value}"', member.span)
                expr = Length(expr, self.span_from(start))
            else:
                return expr

    def primary(self) -> Expr:
        token = self.token
        if token.type is TokenType.NUMBER:
            self.advance()
            return IntLit(int(token.value), token.span)
        if self.accept('true'):
            return BoolLit(True, token.span)
        if self.accept('false'):
            return BoolLit(False, token.span)
        if self.accept('null'):
            return NullLit(token.span)
        if self.accept('('):
            inner = self.expression()
            self.expect(')')
            return inner
        if self.accept('new'):
            self.expect('int')
            self.expect('[')
            self.expect(']')
            self.expect('{')
            elements: List[Expr] = []
            if not self.at('}'):
                elements.append(self.expression())
                while self.accept(','):
                    elements.append(self.expression())
            self.expect('}')
            return ArrayLit(tuple(elements), self.span_from(token))
        if self.at('forall', 'exists'):
            kind = self.advance().value
            var = self.expect_identifier().value
            if self.accept(':'):
                if self.sort() is not Sort.INT:
                    raise MVLSyntaxError('quantified variables range over int', token.span)
            self.expect('::')
            body = self.expression()
            return Quantifier(kind, var, body, self.span_from(token))
        if token.type is TokenType.IDENTIFIER:
            self.advance()
            if self.accept('('):
                args: List[Expr] = []
                if not self.at(')'):
                    args.append(self.expression())
                    while self.accept(','):
                        args.append(self.expression())
                self.expect(')')
                return Call(token.value, tuple(args), self.span_from(token))
            return Var(token.value, token.span)
        raise MVLSyntaxError(f'expected an expression but found {token.describe()}', token.span)


def parse_program(source: str, source_name: str = '<input>', check: bool = True) -> Program:
    program = Parser(source, source_name).program()
    if check:
        check_program(program)
    return program


def parse_test(source: str, source_name: str = '<test>') -> Test:
    program = Parser(source, source_name).program()
    if len(program.methods) != 1:
        raise ShapeError('exactly one test method expected')
    method = program.methods[0]
    if method.params or method.returns or method.requires or method.ensures or method.body is None:
        raise ShapeError('a test is a parameterless method with a body', method.span)

    inputs: List[Tuple[str, Expr]] = []
    calls: List[Tuple[str, Call]] = []
    oracle: List[Expr] = []
    for statement in method.body.statements:
        value = statement.value if isinstance(statement, (VarDecl, Assign)) else None
        if isinstance(value, Call):
            calls.append((statement.name if isinstance(statement, VarDecl) else statement.target, value))  # type: ignore[attr-defined]
        elif isinstance(statement, VarDecl) and value is not None and not calls:
            if not is_closed_literal(value):
                raise ShapeError(f'the input "{statement.name}" must be a literal', statement.span)
            inputs.append((statement.name, value))
        elif isinstance(statement, Assert) and calls:
            oracle.append(statement.formula)
        else:
            raise ShapeError('unexpected statement in a test', statement.span)

    if len(calls) != 1:
        raise ShapeError('exactly one call expected', method.span)
    result, call = calls[0]

    names = {name for name, _ in inputs} | {result}
    for argument in call.args:
        if not (is_closed_literal(argument) or (isinstance(argument, Var) and argument.name in names)):
            raise ShapeError('call arguments must be inputs or literals', argument.span)
    for formula in oracle:
        unknown = [name for name in free_vars(formula) if name not in names]
        if unknown:
            raise ShapeError(f'the oracle mentions the unknown name "{unknown[0]}"', formula.span)  # type: ignore[attr-defined]

    return Test(method.name, tuple(inputs), call.name, call.args, result, tuple(oracle), source_name)


def is_closed_literal(expr: Expr) -> bool:
    if isinstance(expr, (IntLit, BoolLit)):
        return True
    if isinstance(expr, Unary) and expr.op == '-':
        return isinstance(expr.operand, IntLit)
    if isinstance(expr, ArrayLit):
        return all(is_closed_literal(element) and not isinstance(element, (BoolLit, ArrayLit)) for element in expr.elements)
    return False
