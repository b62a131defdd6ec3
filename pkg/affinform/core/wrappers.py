# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Wrappers used by the affinform package."""

# standard libs
import functools
from queue import Empty
from typing import Any, Callable
# Windows doesn't work with 'signal' package, so implement using multiprocessing
from multiprocessing import Process, Queue

# internal libs
from .logging import log
from .exceptions import AffinformError, EXIT_UNEXPECTED, EXIT_INTERRUPT


def _handler(queue: Queue, func: Callable, args: tuple, kwargs: dict) -> None:
    queue.put(func(*args, **kwargs))


def timeout(seconds: float = None, action: Any = None) -> Callable:
    """Calls any function in a separate process with timeout after 'seconds'.
       If a timeout occurs (or the process dies without a result), 'action' will be
       returned or called if it is a function-like object.

       The wrapped function must be importable at module level so the child
       process can unpickle it.
    """
    def fallback():
        return action() if hasattr(action, '__call__') else action

    def decorator(func: Callable) -> Callable:

        @functools.wraps(func)
        def wraps(*args, **kwargs):
            q = Queue()
            p = Process(target=_handler, args=(q, func, args, kwargs))
            p.start()
            p.join(timeout=seconds)
            if p.is_alive():
                p.terminate()
                p.join()
                return fallback()
            try:
                return q.get(timeout=1)
            except Empty:
                return fallback()

        return wraps

    return decorator


def command(func: Callable[..., int]) -> Callable[..., int]:
    """Map exceptions escaping a command line entry point to exit statuses.

       Domain errors use their `exit_status`; anything else exits with 1 and
       a keyboard interrupt with 130.
    """

    @functools.wraps(func)
    def wraps(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except KeyboardInterrupt:
            log.critical('interrupted')
            return EXIT_INTERRUPT
        except AffinformError as error:
            log.error(f'{type(error).__name__}: {error}')
            return error.exit_status
        except Exception as error:
            log.critical(f'unexpected {type(error).__name__}: {error}')
            return EXIT_UNEXPECTED

    return wraps
