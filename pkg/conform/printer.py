from typing import List, Optional, AbstractSet, Tuple

from conform.lexer import PATCH_MARKER
from conform.nodes import (
    Expr, IntLit, BoolLit, NullLit, Var, Unary, Binary, Chain, Length, Index, ArrayLit, Quantifier, Call, Presence,
    Clause, Stmt, Block, VarDecl, Assign, Assert, Assume, If, While, For, Break, Method, Program, Node, TrustTag,
    COMPARISONS,
)


INDENT = '  '
ATTRIBUTE = '{:trusted}'

PRECEDENCE = {
    '<==>': 1,
    '==>': 2,
    '||': 3,
    '&&': 4,
    '+': 6, '-': 6,
    '*': 7, '/': 7, '%': 7,
}
COMPARISON_LEVEL = 5
UNARY_LEVEL = 8
POSTFIX_LEVEL = 9
ATOM_LEVEL = 10


def print_expr(expr: Expr) -> str:
    return render(expr)[0]


def render(expr: Expr) -> Tuple[str, int]:
    if isinstance(expr, IntLit):
        return str(expr.value), ATOM_LEVEL
    if isinstance(expr, BoolLit):
        return ('true' if expr.value else 'false'), ATOM_LEVEL
    if isinstance(expr, NullLit):
        return 'null', ATOM_LEVEL
    if isinstance(expr, Var):
        return expr.name, ATOM_LEVEL
    if isinstance(expr, Presence):
        return f'presence({expr.label})', ATOM_LEVEL
    if isinstance(expr, Unary):
        return f'{expr.op}{operand(expr.operand, UNARY_LEVEL)}', UNARY_LEVEL
    if isinstance(expr, Binary):
        if expr.op in COMPARISONS:
            level = COMPARISON_LEVEL
            left, right = operand(expr.left, level + 1), operand(expr.right, level + 1)
        else:
            level = PRECEDENCE[expr.op]
            if expr.op == '==>':
                left, right = operand(expr.left, level + 1), operand(expr.right, level)
            else:
                left, right = operand(expr.left, level), operand(expr.right, level + 1)
        return f'{left} {expr.op} {right}', level
    if isinstance(expr, Chain):
        parts = [operand(expr.operands[0], COMPARISON_LEVEL + 1)]
        for op, item in zip(expr.ops, expr.operands[1:]):
            parts.append(f'{op} {operand(item, COMPARISON_LEVEL + 1)}')
        return ' '.join(parts), COMPARISON_LEVEL
    if isinstance(expr, Length):
        return f'{operand(expr.array, POSTFIX_LEVEL)}.Length', POSTFIX_LEVEL
    if isinstance(expr, Index):
        return f'{operand(expr.array, POSTFIX_LEVEL)}[{print_expr(expr.index)}]', POSTFIX_LEVEL
    if isinstance(expr, ArrayLit):
        return 'new int[]{' + ', '.join(print_expr(element) for element in expr.elements) + '}', ATOM_LEVEL
    if isinstance(expr, Call):
        return f'{expr.name}(' + ', '.join(print_expr(argument) for argument in expr.args) + ')', ATOM_LEVEL
    if isinstance(expr, Quantifier):
        # A quantifier body runs to the end of the expression, so it only goes bare at the top.
        return f'{expr.kind} {expr.var} :: {print_expr(expr.body)}', 0
    raise TypeError(f'cannot print {type(expr).__name__}')


def operand(expr: Expr, required: int) -> str:
    text, level = render(expr)
    if level < required:
        return f'({text})'
    return text


class Printer:
    def __init__(self, annotate: AbstractSet[int] = frozenset()) -> None:
        self.annotate = annotate
        self.lines: List[str] = []

    def attribute(self, node: Node) -> str:
        trust: TrustTag = node.trust
        if (trust.trusted and not trust.patched) or node.sid in self.annotate:
            return f' {ATTRIBUTE}'
        return ''

    def marker(self, node: Node) -> str:
        return f' {PATCH_MARKER}' if node.trust.patched else ''

    def emit(self, depth: int, text: str, node: Optional[Node] = None) -> None:
        suffix = self.marker(node) if node is not None else ''
        self.lines.append(f'{INDENT * depth}{text}{suffix}')

    def program(self, program: Program) -> str:
        for index, method in enumerate(program.methods):
            if index:
                self.lines.append('')
            self.method(method)
        if not self.lines:
            return ''
        return '\n'.join(self.lines) + '\n'

    def method(self, method: Method) -> None:
        params = ', '.join(f'{param.name}: {param.sort.value}' for param in method.params)
        header = f'method {method.name}({params})'
        if method.returns:
            returns = ', '.join(f'{param.name}: {param.sort.value}' for param in method.returns)
            header += f' returns ({returns})'
        self.emit(0, header)
        for clause in method.requires + method.ensures:
            self.clause(clause, 1)
        if method.body is not None:
            self.emit(0, '{')
            self.statements(method.body, 1)
            self.emit(0, '}')

    def clause(self, clause: Clause, depth: int) -> None:
        self.emit(depth, clause_text(clause, self.attribute(clause)), clause)

    def statements(self, block: Block, depth: int) -> None:
        for statement in block.statements:
            self.statement(statement, depth)

    def statement(self, statement: Stmt, depth: int) -> None:
        attribute = self.attribute(statement)
        if isinstance(statement, If):
            self.if_statement(statement, depth, attribute, '')
        elif isinstance(statement, While):
            self.emit(depth, f'while{attribute} {print_expr(statement.cond)}', statement)
            for invariant in statement.invariants:
                self.clause(invariant, depth + 1)
            if statement.decreases is not None:
                self.emit(depth + 1, f'decreases {print_expr(statement.decreases)}')
            self.emit(depth, '{')
            self.statements(statement.body, depth + 1)
            self.emit(depth, '}')
        elif isinstance(statement, For):
            self.emit(depth, f'for{attribute} {statement.var} := {print_expr(statement.lo)} to {print_expr(statement.hi)}', statement)
            for invariant in statement.invariants:
                self.clause(invariant, depth + 1)
            self.emit(depth, '{')
            self.statements(statement.body, depth + 1)
            self.emit(depth, '}')
        else:
            self.emit(depth, simple_statement_text(statement, attribute), statement)

    def if_statement(self, statement: If, depth: int, attribute: str, prefix: str) -> None:
        self.emit(depth, f'{prefix}if{attribute} {print_expr(statement.cond)} {{', statement)
        self.statements(statement.then, depth + 1)
        orelse = statement.orelse
        if orelse is None:
            self.emit(depth, '}')
        elif len(orelse.statements) == 1 and isinstance(orelse.statements[0], If):
            nested = orelse.statements[0]
            self.if_statement(nested, depth, self.attribute(nested), '} else ')
        else:
            self.emit(depth, '} else {')
            self.statements(orelse, depth + 1)
            self.emit(depth, '}')


def clause_text(clause: Clause, attribute: str = '') -> str:
    return f'{clause.kind.value}{attribute} {print_expr(clause.formula)}'


def simple_statement_text(statement: Stmt, attribute: str = '') -> str:
    if isinstance(statement, VarDecl):
        text = f'var{attribute} {statement.name}'
        if statement.sort is not None:
            text += f': {statement.sort.value}'
        if statement.value is not None:
            text += f' := {print_expr(statement.value)}'
        return text + ';'
    if isinstance(statement, Assign):
        lead = f'{attribute.strip()} ' if attribute else ''
        return f'{lead}{statement.target} := {print_expr(statement.value)};'
    if isinstance(statement, Assert):
        return f'assert{attribute} {print_expr(statement.formula)};'
    if isinstance(statement, Assume):
        return f'assume{attribute} {print_expr(statement.formula)};'
    if isinstance(statement, Break):
        return f'break{attribute};'
    raise TypeError(f'{type(statement).__name__} spans several lines')


def print_program(program: Program, annotate: AbstractSet[int] = frozenset()) -> str:
    return Printer(annotate).program(program)


def node_line(node: Node, depth: int, annotate: AbstractSet[int] = frozenset()) -> str:
    """The single line a clause or a simple statement occupies in canonical layout."""
    printer = Printer(annotate)
    if isinstance(node, Clause):
        printer.clause(node, depth)
    else:
        printer.statement(node, depth)
    return printer.lines[0]
