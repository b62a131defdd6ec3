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

"""Read and write run artifacts: trajectories, weights and motion bases."""

# standard libs
import os
from typing import Any, Dict

# external libs
import numpy as np
import pandas as pd

# internal libs
from ..core.logging import log
from ..core.exceptions import WeightValidationError, ValidationError
from ..formation.core import Graph, Framework
from ..formation.weights import StressWeights
from ..formation.motion import MotionBasis, BASIS_NAMES
from ..simulation.integrate import Trajectory
from .common import read_json, write_json, select_compression


FORMAT_VERSION = 1

# float format of the trajectory table
FLOAT_FORMAT = '%.12g'


def write_trajectory(filepath: str, trajectory: Trajectory) -> None:
    """Write the trajectory table as CSV (compressed if the extension says so)."""
    directory = os.path.dirname(filepath)
    if directory:
        os.makedirs(directory, exist_ok=True)
    trajectory.to_frame().to_csv(filepath, index=False, float_format=FLOAT_FORMAT,
                                 compression=select_compression(filepath))
    log.debug(f'wrote {filepath}')


def read_trajectory(filepath: str) -> pd.DataFrame:
    return pd.read_csv(filepath, compression=select_compression(filepath))


def weights_to_dict(weights: StressWeights) -> Dict[str, Any]:
    graph = weights.graph
    return {'format_version': FORMAT_VERSION,
            'nodes': graph.node_count,
            'edges': graph.to_one_based(),
            'weights': [weights.weights[edge] for edge in graph.edges]}


def write_weights(filepath: str, weights: StressWeights) -> None:
    write_json(filepath, weights_to_dict(weights))


def read_weights(filepath: str, graph: Graph) -> StressWeights:
    """Load stress weights for `graph`.

       Accepted layouts: 'weights' in edge order, 'pairs' as [i, j, w] rows with 1-based
       nodes (both directions may be listed and must agree), or a full 'laplacian'.
    """
    data = read_json(filepath)
    if not isinstance(data, dict):
        raise WeightValidationError(f'{os.path.basename(filepath)}: expected a JSON object')
    if 'nodes' in data and int(data['nodes']) != graph.node_count:
        raise WeightValidationError(f'{os.path.basename(filepath)}: weights for {data["nodes"]} '
                                    f'nodes, framework has {graph.node_count}')
    if 'pairs' in data:
        mapping = {}
        for i, j, w in data['pairs']:
            key = (int(i) - 1, int(j) - 1)
            if key in mapping and mapping[key] != float(w):
                raise WeightValidationError(f'pair ({i}, {j}) listed twice with different weights')
            mapping[key] = float(w)
        for (i, j), w in mapping.items():
            if (j, i) in mapping and mapping[(j, i)] != w:
                raise WeightValidationError(f'weights are not symmetric: w_{i + 1}{j + 1} = {w} but '
                                            f'w_{j + 1}{i + 1} = {mapping[(j, i)]}')
        return StressWeights.from_weights(graph, mapping)
    if 'laplacian' in data:
        return StressWeights(graph, np.array(data['laplacian'], dtype=float))
    if 'weights' in data:
        if 'edges' in data and Graph.from_one_based(graph.node_count, data['edges']) != graph:
            raise WeightValidationError(f'{os.path.basename(filepath)}: edge order differs from the framework')
        return StressWeights.from_weights(graph, data['weights'])
    raise WeightValidationError(f'{os.path.basename(filepath)}: no "weights", "pairs" or "laplacian" field')


def basis_to_dict(basis: MotionBasis) -> Dict[str, Any]:
    graph = basis.framework.graph
    return {'format_version': FORMAT_VERSION,
            'nodes': graph.node_count,
            'edges': graph.to_one_based(),
            'matrices': {name: basis[name].tolist() for name in BASIS_NAMES}}


def write_motion_basis(filepath: str, basis: MotionBasis) -> None:
    write_json(filepath, basis_to_dict(basis))


def read_motion_basis(filepath: str, framework: Framework) -> MotionBasis:
    """Load the six basis matrices and check them against the framework."""
    data = read_json(filepath)
    if not isinstance(data, dict) or 'matrices' not in data:
        raise ValidationError(f'{os.path.basename(filepath)}: missing "matrices"')
    if 'edges' in data and Graph.from_one_based(framework.node_count, data['edges']) != framework.graph:
        raise ValidationError(f'{os.path.basename(filepath)}: edge order differs from the framework')
    basis = MotionBasis(framework, {name: np.array(matrix, dtype=float)
                                    for name, matrix in data['matrices'].items()})
    basis.check()
    return basis
