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

"""Run the property battery on bundled and randomized formations."""

# standard libs
import argparse
from typing import List

# internal libs
from ..core.wrappers import command
from ..core.exceptions import EXIT_SUCCESS, EXIT_VALIDATION
from ..pipeline import verify_suite


parser = argparse.ArgumentParser(prog='affinform verify', description=__doc__.split('\n')[0].strip())
parser.add_argument('-s', '--seed', type=int, default=0,
                    help='seed for randomized instances (default: 0)')
parser.add_argument('-w', '--weights', default=None, metavar='FILE',
                    help='also validate a weights file for the bundled square framework')


@command
def main(argv: List[str] = None) -> int:
    """Entry point for 'verify' command."""
    args = parser.parse_args(argv)
    table = verify_suite(seed=args.seed, weights_file=args.weights)
    print(table.to_string(index=False))
    return EXIT_SUCCESS if table.passed.all() else EXIT_VALIDATION
