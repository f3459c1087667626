from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Set

from conform.nodes import Span
from conform.errors import MVLSyntaxError


PATCH_MARKER = '// pr {:trusted}'

KEYWORDS = frozenset({
    'method', 'returns', 'requires', 'ensures', 'invariant', 'decreases',
    'var', 'if', 'else', 'while', 'for', 'to', 'assert', 'assume', 'break',
    'forall', 'exists', 'true', 'false', 'null', 'new', 'int', 'bool', 'array',
})

# Longest first, the scan takes the first prefix that matches.
OPERATORS = (
    '<==>', '==>', ':=', '::', '==', '!=', '<=', '>=', '&&', '||',
    '<', '>', '+', '-', '*', '/', '%', '!', '(', ')', '{', '}', '[', ']', ',', ';', ':', '.',
)


class TokenType(Enum):
    KEYWORD = 'keyword'
    IDENTIFIER = 'identifier'
    NUMBER = 'number'
    OPERATOR = 'operator'
    ATTRIBUTE = 'attribute'
    EOF = 'eof'


@dataclass(frozen=True)
class Token:
    type: TokenType
    value: str
    line: int
    column: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.column)

    def describe(self) -> str:
        if self.type is TokenType.EOF:
            return 'end of input'
        return f'"{self.value}"'


class Lexer:
    def __init__(self, source: str) -> None:
        self.source = source
        self.position = 0
        self.line = 1
        self.column = 1
        self.tokens: List[Token] = []
        self.marked_lines: Set[int] = set()

    def current(self, offset: int = 0) -> Optional[str]:
        index = self.position + offset
        if index >= len(self.source):
            return None
        return self.source[index]

    def advance(self, count: int = 1) -> None:
        for _ in range(count):
            if self.position >= len(self.source):
                return
            if self.source[self.position] == '\n':
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.position += 1

    def startswith(self, text: str) -> bool:
        return self.source.startswith(text, self.position)

    def skip_line_comment(self) -> None:
        end = self.source.find('\n', self.position)
        if end == -1:
            end = len(self.source)
        comment = self.source[self.position:end].strip()
        if comment == PATCH_MARKER:
            self.marked_lines.add(self.line)
        self.advance(end - self.position)

    def skip_block_comment(self) -> None:
        span = Span(self.line, self.column)
        end = self.source.find('*/', self.position + 2)
        if end == -1:
            raise MVLSyntaxError('unterminated comment', span)
        self.advance(end + 2 - self.position)

    def read_attribute(self) -> None:
        line, column = self.line, self.column
        end = self.source.find('}', self.position)
        if end == -1:
            raise MVLSyntaxError('unterminated attribute', Span(line, column))
        name = self.source[self.position + 2:end].strip()
        if name != 'trusted':
            raise MVLSyntaxError(f'unknown attribute "{name}"', Span(line, column))
        self.advance(end + 1 - self.position)
        self.tokens.append(Token(TokenType.ATTRIBUTE, name, line, column))

    def read_word(self) -> None:
        line, column = self.line, self.column
        start = self.position
        while (char := self.current()) is not None and (char.isalnum() or char == '_'):
            self.advance()
        word = self.source[start:self.position]
        kind = TokenType.KEYWORD if word in KEYWORDS else TokenType.IDENTIFIER
        self.tokens.append(Token(kind, word, line, column))

    def read_number(self) -> None:
        line, column = self.line, self.column
        start = self.position
        while (char := self.current()) is not None and char.isdigit():
            self.advance()
        if (char := self.current()) is not None and (char.isalpha() or char == '_'):
            raise MVLSyntaxError('malformed number', Span(line, column))
        self.tokens.append(Token(TokenType.NUMBER, self.source[start:self.position], line, column))

    def tokenize(self) -> List[Token]:
        while (char := self.current()) is not None:
            if char.isspace():
                self.advance()
            elif self.startswith('//'):
                self.skip_line_comment()
            elif self.startswith('/*'):
                self.skip_block_comment()
            elif self.startswith('{:'):
                self.read_attribute()
            elif char.isalpha() or char == '_':
                self.read_word()
            elif char.isdigit():
                self.read_number()
            else:
                for operator in OPERATORS:
                    if self.startswith(operator):
                        self.tokens.append(Token(TokenType.OPERATOR, operator, self.line, self.column))
                        self.advance(len(operator))
                        break
                else:
                    raise MVLSyntaxError(f'unexpected character "{char}"', Span(self.line, self.column))

        self.tokens.append(Token(TokenType.EOF, '', self.line, self.column))
        return self.tokens
