from functools import wraps
from types import TracebackType
from typing import Any, Callable, Optional, Tuple, Type

from emptylog import EmptyLogger, LoggerProtocol

from conform.errors import ConformError


def nothing() -> None:
    pass


class Guard:
    """Suppresses the listed exceptions around a call or a block and logs the outcome.

    As a decorator the wrapped call returns `default` when an exception is
    suppressed. Exceptions outside the list are logged and raised again."""

    def __init__(
        self,
        exceptions: Tuple[Type[BaseException], ...] = (ConformError,),
        default: Any = None,
        logger: LoggerProtocol = EmptyLogger(),
        doc: Optional[str] = None,
        before: Callable[[], Any] = nothing,
        success_callback: Callable[[], Any] = nothing,
        error_callback: Callable[[], Any] = nothing,
    ) -> None:
        self.exceptions = exceptions
        self.default = default
        self.logger = logger
        self.doc = doc
        self.wrapped_doc = '' if doc is None else f' ({doc})'
        self.before = before
        self.success_callback = success_callback
        self.error_callback = error_callback
        self.suppressed: Optional[BaseException] = None

    def __call__(self, function: Callable[..., Any]) -> Callable[..., Any]:
        @wraps(function)
        def wrapper(*args: Any, **kwargs: Any) -> Any:
            self.run_callback(self.before)

            try:
                result = function(*args, **kwargs)

            except self.exceptions as e:
                self.suppressed = e
                self.logger.exception(f'When executing function "{function.__name__}"{self.wrapped_doc}, the exception "{type(e).__name__}"{describe(e)} was suppressed.')
                self.run_callback(self.error_callback)
                return self.default

            except BaseException as e:
                self.logger.error(f'When executing function "{function.__name__}"{self.wrapped_doc}, the exception "{type(e).__name__}"{describe(e)} was not suppressed.')
                self.run_callback(self.error_callback)
                raise e

            self.run_callback(self.success_callback)
            return result

        return wrapper

    def __enter__(self) -> 'Guard':
        if self.default is not None:
            raise ValueError('A default value only makes sense for a decorated function, not for a block.')
        self.suppressed = None
        self.run_callback(self.before)
        return self

    def __exit__(self, exception_type: Optional[Type[BaseException]], exception_value: Optional[BaseException], traceback: Optional[TracebackType]) -> bool:
        if exception_type is None:
            self.run_callback(self.success_callback)
            return False

        muted = issubclass(exception_type, self.exceptions)
        if muted:
            self.suppressed = exception_value
            self.logger.exception(f'The "{exception_type.__name__}"{describe(exception_value)} exception was suppressed inside the block{self.wrapped_doc}.')
        else:
            self.logger.error(f'The "{exception_type.__name__}"{describe(exception_value)} exception was not suppressed inside the block{self.wrapped_doc}.')
        self.run_callback(self.error_callback)
        return muted

    def run_callback(self, callback: Callable[[], Any]) -> None:
        try:
            callback()

        except self.exceptions as e:
            self.logger.exception(f'When executing the callback "{callback.__name__}"{self.wrapped_doc}, the exception "{type(e).__name__}"{describe(e)} was suppressed.')

        except BaseException as e:
            self.logger.error(f'When executing the callback "{callback.__name__}"{self.wrapped_doc}, the exception "{type(e).__name__}"{describe(e)} was not suppressed.')
            raise e


def describe(error: Optional[BaseException]) -> str:
    return '' if error is None or not str(error) else f' ("{error}")'
