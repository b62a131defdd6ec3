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

"""Run every scenario in a directory, each in its own process."""

# standard libs
import argparse
from typing import List

# internal libs
from ..core.wrappers import command
from ..core.exceptions import EXIT_SUCCESS, EXIT_UNEXPECTED
from ..pipeline import batch


parser = argparse.ArgumentParser(prog='affinform batch', description=__doc__.split('\n')[0].strip())
parser.add_argument('directory', metavar='DIR',
                    help='directory of scenario files')
parser.add_argument('-o', '--output-root', default=None,
                    help='output directory root (default: $AFFINFORM_OUTPUT or ./output)')
parser.add_argument('-j', '--workers', type=int, default=None,
                    help='number of concurrent scenarios (default: executor default)')
parser.add_argument('-t', '--timeout', type=float, default=None,
                    help='seconds allowed per scenario (default: unlimited)')


@command
def main(argv: List[str] = None) -> int:
    """Entry point for 'batch' command."""
    args = parser.parse_args(argv)
    table = batch(args.directory, args.output_root, workers=args.workers, seconds=args.timeout)
    print(table.to_string(index=False))
    return EXIT_SUCCESS if (table.status == EXIT_SUCCESS).all() else EXIT_UNEXPECTED
