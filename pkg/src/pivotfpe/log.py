"""Path-prefixed loggers shared by the estimators, the experiments and the CLI.

Every logging object carries a ``path`` such as ``rejection/ma-poly[n=100][3]`` that is put in
front of each message, so records coming out of worker processes stay attributable.
"""
import functools
import logging
import time
from typing import Any
from typing import Callable
from typing import Iterable
from typing import Mapping
from typing import MutableMapping
from typing import Tuple
from typing import TypeVar
from typing import Union

from .exceptions import PivotFPEException


null_logger = logging.getLogger("pivotfpe_null")
null_logger.addHandler(logging.NullHandler())

Decorated = TypeVar("Decorated", bound=Callable[..., Any])


def call_sig(args: Iterable[Any], kwargs: Mapping[str, Any]) -> str:
    """Render positional and keyword arguments the way they would appear in a call."""
    parts = list(map(repr, args))
    parts += [f"{name}={value!r}" for name, value in kwargs.items()]
    return f"({', '.join(parts)})"


class PrependPathAdapter(logging.LoggerAdapter):
    """Puts ``[path]: `` in front of every message logged through it."""

    @property
    def path(self) -> str:
        assert self.extra is not None
        return str(self.extra["path"])

    def process(
        self, msg: str, kwargs: MutableMapping[str, Any]
    ) -> Tuple[str, MutableMapping[str, Any]]:
        # the path becomes part of the format string
        escaped = self.path.replace("%", "%%")
        return f"[{escaped}]: {msg}", kwargs

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.logger!r}, {self.path!r})"


def _create_logger_appender(parent: logging.Logger, suffix: str) -> PrependPathAdapter:
    if isinstance(parent, PrependPathAdapter):
        return PrependPathAdapter(parent.logger, {"path": parent.path + suffix})
    return PrependPathAdapter(parent, {"path": suffix.lstrip("/")})


def create_logger(path: str, logger: Union[logging.Logger, None] = None) -> PrependPathAdapter:
    """Logger for a top-level object named ``path``.

    Without ``logger`` the records go to a silent logger. When ``logger`` already is a
    :py:class:`PrependPathAdapter`, ``path`` is nested below its path.
    """
    if isinstance(logger, PrependPathAdapter):
        return _create_logger_appender(logger, f"/{path}")
    return PrependPathAdapter(logger or null_logger, {"path": path})


def create_child_logger(parent_logger: logging.Logger, child_name: str) -> PrependPathAdapter:
    """Logger for ``child_name`` owned by whatever logs through ``parent_logger``."""
    return _create_logger_appender(parent_logger, f"/{child_name}")


def create_item_logger(
    parent_logger: logging.Logger, item: Union[str, int]
) -> PrependPathAdapter:
    """Logger for one element of an iteration, e.g. a replicate index or an order ``p``.

    The item is appended as ``[item!r]`` without a separator.
    """
    return _create_logger_appender(parent_logger, f"[{item!r}]")


def logged(log_args: bool = False, log_result: bool = False) -> Callable[[Decorated], Decorated]:
    """Method decorator recording start, outcome and wall time through ``self.logger``.

    Library errors (:py:class:`~pivotfpe.exceptions.PivotFPEException`) are expected outcomes
    and produce a single warning. Anything else is logged with its traceback before it
    propagates.

    Args:
        log_args: include the call arguments in the messages.
        log_result: include the ``repr`` of the returned value in the completion message.
    """

    def decorate(method):
        @functools.wraps(method)
        def wrapper(self, *args, **kwargs):
            label = method.__name__
            if log_args:
                label += call_sig(args, kwargs)
            started = time.perf_counter()

            def elapsed_ms() -> float:
                return 1000.0 * (time.perf_counter() - started)

            self.logger.debug("%s started", label)
            try:
                value = method(self, *args, **kwargs)
            except PivotFPEException as error:
                self.logger.warning("%s failed: %s (elapsed %.0f ms)", label, error, elapsed_ms())
                raise
            except Exception:
                self.logger.exception("%s raised (elapsed %.0f ms)", label, elapsed_ms())
                raise
            if log_result:
                self.logger.info("%s -> %r (elapsed %.0f ms)", label, value, elapsed_ms())
            else:
                self.logger.info("%s done (elapsed %.0f ms)", label, elapsed_ms())
            return value

        return wrapper

    return decorate
