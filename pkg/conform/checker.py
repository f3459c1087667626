from typing import Dict, List, Optional, Set, Tuple

from conform.errors import MVLTypeError
from conform.nodes import (
    Sort, Expr, IntLit, BoolLit, NullLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call,
    Presence, Clause, Stmt, Block, VarDecl, Assign, Assert, Assume, If, While, For, Break, Method, Program,
    COMPARISONS, ARITHMETIC, CONNECTIVES, quantifier_range,
)


class Scope:
    def __init__(self, names: Dict[str, Sort], readonly: Set[str]) -> None:
        self.frames: List[Dict[str, Sort]] = [dict(names)]
        self.readonly = set(readonly)

    def lookup(self, name: str) -> Optional[Sort]:
        for frame in reversed(self.frames):
            if name in frame:
                return frame[name]
        return None

    def declare(self, name: str, sort: Sort, span: object) -> None:
        if self.lookup(name) is not None:
            raise MVLTypeError(f'the name "{name}" is already declared', span)  # type: ignore[arg-type]
        self.frames[-1][name] = sort

    def push(self) -> None:
        self.frames.append({})

    def pop(self) -> None:
        self.frames.pop()


class Checker:
    def __init__(self, program: Program) -> None:
        self.program = program
        self.methods: Dict[str, Method] = {}
        for method in program.methods:
            if method.name in self.methods:
                raise MVLTypeError(f'the method "{method.name}" is declared twice', method.span)
            self.methods[method.name] = method

    def check(self) -> None:
        for method in self.program.methods:
            self.check_method(method)

    def check_method(self, method: Method) -> None:
        names = [param.name for param in method.params + method.returns]
        if len(set(names)) != len(names):
            raise MVLTypeError(f'the method "{method.name}" repeats a parameter name', method.span)

        inputs = Scope({param.name: param.sort for param in method.params}, set())
        for clause in method.requires:
            self.expect(clause.formula, Sort.BOOL, inputs)
        everything = Scope(method.signature, {param.name for param in method.params})
        for clause in method.ensures:
            self.expect(clause.formula, Sort.BOOL, everything)

        if method.body is not None:
            self.block(method.body, everything, loop_depth=0)

    def block(self, block: Block, scope: Scope, loop_depth: int) -> None:
        scope.push()
        for statement in block.statements:
            self.statement(statement, scope, loop_depth)
        scope.pop()

    def statement(self, statement: Stmt, scope: Scope, loop_depth: int) -> None:
        if isinstance(statement, VarDecl):
            sort = statement.sort
            if statement.value is not None:
                value_sort = self.value(statement.value, scope)
                if sort is not None and sort is not value_sort:
                    raise MVLTypeError(f'"{statement.name}" is declared as {sort.value} but gets {value_sort.value}', statement.span)
                sort = value_sort
            if sort is None:
                raise MVLTypeError(f'the type of "{statement.name}" is unknown', statement.span)
            scope.declare(statement.name, sort, statement.span)

        elif isinstance(statement, Assign):
            target = scope.lookup(statement.target)
            if target is None:
                raise MVLTypeError(f'the name "{statement.target}" is not declared', statement.span)
            if statement.target in scope.readonly:
                raise MVLTypeError(f'"{statement.target}" cannot be assigned', statement.span)
            value_sort = self.value(statement.value, scope)
            if value_sort is not target:
                raise MVLTypeError(f'"{statement.target}" has type {target.value} but gets {value_sort.value}', statement.span)

        elif isinstance(statement, (Assert, Assume)):
            self.expect(statement.formula, Sort.BOOL, scope)

        elif isinstance(statement, If):
            self.expect(statement.cond, Sort.BOOL, scope)
            self.block(statement.then, scope, loop_depth)
            if statement.orelse is not None:
                self.block(statement.orelse, scope, loop_depth)

        elif isinstance(statement, While):
            self.expect(statement.cond, Sort.BOOL, scope)
            self.clauses(statement.invariants, scope)
            if statement.decreases is not None:
                self.expect(statement.decreases, Sort.INT, scope)
            self.block(statement.body, scope, loop_depth + 1)

        elif isinstance(statement, For):
            self.expect(statement.lo, Sort.INT, scope)
            self.expect(statement.hi, Sort.INT, scope)
            scope.push()
            scope.declare(statement.var, Sort.INT, statement.span)
            scope.readonly.add(statement.var)
            self.clauses(statement.invariants, scope)
            self.block(statement.body, scope, loop_depth + 1)
            scope.readonly.discard(statement.var)
            scope.pop()

        elif isinstance(statement, Break):
            if loop_depth == 0:
                raise MVLTypeError('"break" outside of a loop', statement.span)

    def clauses(self, clauses: Tuple[Clause, ...], scope: Scope) -> None:
        for clause in clauses:
            self.expect(clause.formula, Sort.BOOL, scope)

    def value(self, expr: Expr, scope: Scope) -> Sort:
        if isinstance(expr, Call):
            callee = self.methods.get(expr.name)
            if callee is None:
                raise MVLTypeError(f'the method "{expr.name}" is not declared', expr.span)
            if len(callee.returns) != 1:
                raise MVLTypeError(f'the method "{expr.name}" must return exactly one value to be called', expr.span)
            if len(callee.params) != len(expr.args):
                raise MVLTypeError(f'the method "{expr.name}" takes {len(callee.params)} arguments', expr.span)
            for param, argument in zip(callee.params, expr.args):
                self.expect(argument, param.sort, scope)
            return callee.returns[0].sort
        return self.sort_of(expr, scope)

    def expect(self, expr: Expr, sort: Sort, scope: Scope) -> None:
        actual = self.sort_of(expr, scope)
        if actual != sort:
            raise MVLTypeError(f'expected {sort.value} but the expression has type {actual.value}', expr.span)  # type: ignore[attr-defined]

    def sort_of(self, expr: Expr, scope: Scope) -> Sort:
        if isinstance(expr, IntLit):
            return Sort.INT
        if isinstance(expr, BoolLit) or isinstance(expr, Presence):
            return Sort.BOOL
        if isinstance(expr, NullLit):
            raise MVLTypeError('"null" is only comparable with arrays', expr.span)
        if isinstance(expr, Var):
            sort = scope.lookup(expr.name)
            if sort is None:
                raise MVLTypeError(f'the name "{expr.name}" is not declared', expr.span)
            return sort
        if isinstance(expr, Unary):
            expected = Sort.INT if expr.op == '-' else Sort.BOOL
            self.expect(expr.operand, expected, scope)
            return expected
        if isinstance(expr, Binary):
            return self.binary(expr, scope)
        if isinstance(expr, Chain):
            ascending = all(op in ('<', '<=') for op in expr.ops)
            descending = all(op in ('>', '>=') for op in expr.ops)
            if not (ascending or descending):
                raise MVLTypeError('a chain of comparisons must go in one direction', expr.span)
            for operand in expr.operands:
                self.expect(operand, Sort.INT, scope)
            return Sort.BOOL
        if isinstance(expr, Length):
            self.expect(expr.array, Sort.ARRAY, scope)
            return Sort.INT
        if isinstance(expr, Index):
            self.expect(expr.array, Sort.ARRAY, scope)
            self.expect(expr.index, Sort.INT, scope)
            return Sort.INT
        if isinstance(expr, ArrayLit):
            for element in expr.elements:
                self.expect(element, Sort.INT, scope)
            return Sort.ARRAY
        if isinstance(expr, Quantifier):
            if quantifier_range(expr) is None:
                raise MVLTypeError(f'the quantifier over "{expr.var}" must be bounded as "lo <= {expr.var} < hi"', expr.span)
            scope.push()
            scope.declare(expr.var, Sort.INT, expr.span)
            self.expect(expr.body, Sort.BOOL, scope)
            scope.pop()
            return Sort.BOOL
        if isinstance(expr, Call):
            raise MVLTypeError('a method call may only appear on the right of an assignment', expr.span)
        raise MVLTypeError(f'unsupported expression {type(expr).__name__}')

    def binary(self, expr: Binary, scope: Scope) -> Sort:
        if expr.op in ARITHMETIC:
            self.expect(expr.left, Sort.INT, scope)
            self.expect(expr.right, Sort.INT, scope)
            return Sort.INT
        if expr.op in CONNECTIVES:
            self.expect(expr.left, Sort.BOOL, scope)
            self.expect(expr.right, Sort.BOOL, scope)
            return Sort.BOOL
        if expr.op in ('==', '!='):
            if isinstance(expr.left, NullLit) or isinstance(expr.right, NullLit):
                other = expr.right if isinstance(expr.left, NullLit) else expr.left
                self.expect(other, Sort.ARRAY, scope)
                return Sort.BOOL
            left = self.sort_of(expr.left, scope)
            self.expect(expr.right, left, scope)
            return Sort.BOOL
        if expr.op in COMPARISONS:
            self.expect(expr.left, Sort.INT, scope)
            self.expect(expr.right, Sort.INT, scope)
            return Sort.BOOL
        raise MVLTypeError(f'unknown operator "{expr.op}"', expr.span)


def check_program(program: Program) -> None:
    Checker(program).check()


def infer_sort(expr: Expr, names: Dict[str, Sort]) -> Sort:
    return Checker(Program(())).sort_of(expr, Scope(names, set()))
