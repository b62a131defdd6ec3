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

"""Leaderless affine formation maneuvering: design, analysis and simulation."""

# standard libs
import argparse
from typing import List

# internal libs
from ..__meta__ import __version__
from . import run, design, verify, batch


COMMANDS = {'run': run, 'design': design, 'verify': verify, 'batch': batch}

parser = argparse.ArgumentParser(prog='affinform', description=__doc__.split('\n')[0].strip())
parser.add_argument('command', choices=sorted(COMMANDS), help='command to run')
parser.add_argument('arguments', nargs=argparse.REMAINDER, help='arguments for the command')
parser.add_argument('-v', '--version', action='version', version=f'affinform {__version__}')


def main(argv: List[str] = None) -> int:
    """Entry point for 'affinform' command."""
    args = parser.parse_args(argv)
    return COMMANDS[args.command].main(args.arguments)
