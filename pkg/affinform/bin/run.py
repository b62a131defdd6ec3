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

"""Design, analyse and simulate a formation scenario."""

# standard libs
import argparse
from typing import List

# internal libs
from ..core.wrappers import command
from ..core.exceptions import EXIT_SUCCESS
from ..pipeline import run_scenario


parser = argparse.ArgumentParser(prog='affinform run', description=__doc__.split('\n')[0].strip())
parser.add_argument('scenario', metavar='FILE',
                    help='path to scenario file (JSON, optionally compressed)')
parser.add_argument('-o', '--output-root', default=None,
                    help='output directory root (default: $AFFINFORM_OUTPUT or ./output)')
parser.add_argument('-m', '--monitor', dest='use_progress_bar', action='store_true',
                    help='display progress bar during integration')


@command
def main(argv: List[str] = None) -> int:
    """Entry point for 'run' command."""
    args = parser.parse_args(argv)
    run_scenario(args.scenario, args.output_root, progress=args.use_progress_bar)
    return EXIT_SUCCESS
