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

"""Write the design bundle for a scenario without simulating."""

# standard libs
import argparse
from typing import List

# internal libs
from ..core.wrappers import command
from ..core.exceptions import EXIT_SUCCESS
from ..pipeline import design_only


parser = argparse.ArgumentParser(prog='affinform design', description=__doc__.split('\n')[0].strip())
parser.add_argument('scenario', metavar='FILE',
                    help='path to scenario file (JSON, optionally compressed)')
parser.add_argument('-o', '--output-root', default=None,
                    help='output directory root (default: $AFFINFORM_OUTPUT or ./output)')


@command
def main(argv: List[str] = None) -> int:
    """Entry point for 'design' command."""
    args = parser.parse_args(argv)
    design_only(args.scenario, args.output_root)
    return EXIT_SUCCESS
