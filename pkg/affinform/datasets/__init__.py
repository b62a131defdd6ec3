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

"""Bundled frameworks and scenario files."""

# standard libs
import os
from typing import Callable, Dict, List

# external libs
import numpy as np

# internal libs
from ..core.exceptions import ScenarioError
from ..formation.core import Graph, Framework


SCENARIO_DIR = os.path.join(os.path.dirname(__file__), 'scenarios')

# four agents on the corners of a square (body frame)
SQUARE = np.array([-1 - 1j, -1 + 1j, 1 + 1j, 1 - 1j])

# unit-side square with agent 1 at the origin
UNIT_SQUARE = np.array([0, 1j, 1 + 1j, 1])

# every ring of the 20-agent framework is the previous one rotated by π/3 and scaled by 1.2
RING_FACTOR = 1.2 * np.exp(1j * np.pi / 3)

SQUARE_EDGES = [(1, 2), (2, 3), (3, 4), (1, 3), (2, 4), (4, 1)]


def _ring_edges(first: int) -> List[tuple]:
    a, b, c, d = range(first, first + 4)
    return [(a, b), (b, c), (c, d), (d, a), (a, a - 4), (b, b - 4), (c, c - 4), (d, d - 4)]


def square() -> Framework:
    """Complete graph on the square [-1-i, -1+i, 1+i, 1-i]."""
    return Framework(Graph.from_one_based(4, SQUARE_EDGES), SQUARE)


def unit_square() -> Framework:
    """Complete graph on the unit-side square [0, i, 1+i, 1]."""
    return Framework(Graph.from_one_based(4, SQUARE_EDGES), UNIT_SQUARE)


def rings_shape(rings: int = 5) -> np.ndarray:
    """Concentric squares: SQUARE·RING_FACTOR^k for k = 0..rings-1."""
    return np.concatenate([SQUARE * RING_FACTOR ** k for k in range(rings)])


def rings() -> Framework:
    """Twenty agents on five concentric squares (38 edges).

       The inner square is complete; every further ring is a 4-cycle tied to the
       previous ring by one edge per agent.
    """
    edges = SQUARE_EDGES + [edge for first in (5, 9, 13, 17) for edge in _ring_edges(first)]
    return Framework(Graph.from_one_based(20, edges), rings_shape(5))


FRAMEWORKS: Dict[str, Callable[[], Framework]] = {
    'square': square,
    'unit_square': unit_square,
    'rings': rings,
}


def load_framework(name: str) -> Framework:
    """Bundled framework by name."""
    try:
        return FRAMEWORKS[name]()
    except KeyError:
        raise ScenarioError(f'no bundled framework named "{name}" '
                            f'(available: {", ".join(sorted(FRAMEWORKS))})') from None


def list_scenarios() -> List[str]:
    """Names of the bundled scenario files (without extension)."""
    return sorted(os.path.splitext(name)[0] for name in os.listdir(SCENARIO_DIR)
                  if name.endswith('.json'))


def scenario_path(name: str) -> str:
    """Absolute path of a bundled scenario file."""
    path = os.path.join(SCENARIO_DIR, name if name.endswith('.json') else f'{name}.json')
    if not os.path.isfile(path):
        raise ScenarioError(f'no bundled scenario named "{name}" '
                            f'(available: {", ".join(list_scenarios())})')
    return path
