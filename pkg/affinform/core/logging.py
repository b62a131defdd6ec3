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

"""Console logging for affinform.

   The threshold comes from $AFFINFORM_LOGLEVEL (debug, info, warning, error, critical),
   'info' when unset.
"""

# standard libs
import os
import datetime as dt

# external libs
from logalpha import ConsoleHandler, BaseLogger


LEVELS = ('debug', 'info', 'warning', 'error', 'critical')
LEVEL_VARIABLE = 'AFFINFORM_LOGLEVEL'


def _timestamp() -> str:
    return dt.datetime.now().strftime('%H:%M:%S')


def level_from_environment(default: str = 'info') -> str:
    """Threshold named by $AFFINFORM_LOGLEVEL; unknown names fall back to `default`."""
    level = os.getenv(LEVEL_VARIABLE, default).strip().lower()
    return level if level in LEVELS else default


_console_handler = ConsoleHandler(level=level_from_environment(),
                                  template='{level} {timestamp} {message}',
                                  timestamp=_timestamp)

log = BaseLogger([_console_handler])
