from typing import Optional

from conform.nodes import Span


class ConformError(Exception):
    pass

class LocatedError(ConformError):
    def __init__(self, message: str, span: Optional[Span] = None) -> None:
        self.message = message
        self.span = span
        super().__init__(message if span is None else f'line {span.line}, column {span.column}: {message}')

class MVLSyntaxError(LocatedError):
    pass

class MVLTypeError(LocatedError):
    pass

class ShapeError(LocatedError):
    pass

class UnsupportedConstruct(LocatedError):
    pass

class PathExplosion(ConformError):
    pass

class EvaluationError(ConformError):
    pass

class DivisionByZero(EvaluationError):
    pass

class UnboundVariable(EvaluationError):
    pass

class SolverError(ConformError):
    pass

class BackendUnavailable(SolverError):
    pass

class MalformedModel(SolverError):
    pass

class PatchError(ConformError):
    pass

class AmbiguousOriginal(PatchError):
    pass

class OriginalNotFound(PatchError):
    pass

class ReparseFailure(PatchError):
    pass

class PluginFailure(ConformError):
    pass

class NoPatches(ConformError):
    pass

class BudgetExhausted(ConformError):
    pass

class ConfigError(ConformError):
    pass

class InsufficientDistinctMutations(ConformError):
    pass
