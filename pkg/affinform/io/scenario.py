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

"""Scenario files: the JSON description of one design-and-simulate run.

   Nodes are 1-based in the file and complex numbers are written as [re, im]
   pairs. Relative paths resolve against the scenario file's directory.
"""

# standard libs
import os
from numbers import Number
from typing import Any, Dict, Union

# external libs
import numpy as np

# internal libs
from ..core.exceptions import ScenarioError
from ..formation.core import Graph, Framework, AffineCoords, affine_map
from ..formation.weights import GainMatrix
from ..simulation.schedule import Schedule
from ..simulation.integrate import METHODS, DEFAULT_DT
from .. import datasets
from .common import read_json, from_pair, file_checksum


FORMAT_VERSION = 1
WEIGHT_SOURCES = ('design-complete', 'design-general', 'file')
MOTION_SOURCES = ('design', 'file')


def _fail(path: str, message: str) -> ScenarioError:
    return ScenarioError(f'scenario {os.path.basename(path)}: {message}')


def framework_from_dict(data: Dict[str, Any]) -> Framework:
    """Framework from {'nodes': n, 'edges': [[i, j], ...] (1-based), 'shape': [[x, y], ...]}."""
    try:
        n = int(data['nodes'])
        edges = [tuple(edge) for edge in data['edges']]
        shape = [from_pair(point) for point in data['shape']]
    except (KeyError, TypeError, ValueError) as error:
        raise ScenarioError(f'malformed framework description ({error})') from None
    return Framework(Graph.from_one_based(n, edges), shape)


class Scenario:
    """Validated contents of a scenario file.

       Attributes
       ----------
       name: str
           Scenario name (defaults to the file name).
       path: str
           Absolute path of the scenario file.
       framework: Framework
           Interaction graph and reference shape.
       gain: GainMatrix
           Diagonal gain K (identity when omitted).
       weights: dict
           Weight source ('design-complete', 'design-general' or 'file' with a path).
       motion: dict
           Motion basis source ('design' with optional pinned pairs, or 'file' with a path).
       h: Union[float, str]
           Stabilization gain, or 'auto' for the safety factor times the bound.
       kappa: float
           Default motion gain.
       schedule: Schedule
           Reference motions over time.
       initial: dict
           One of 'positions', 'affine' or 'offset'.
       integrator: dict
           'method', 'dt' and 'record_every'.
       seed: int
           Seed for any randomized design step.
       output: str
           Output subdirectory name.
    """

    def __init__(self, path: str, data: Dict[str, Any]) -> None:
        """Initialize attributes from parsed JSON (validates everything up front)."""
        self.path = os.path.abspath(path)
        if not isinstance(data, dict):
            raise _fail(path, 'top level must be an object')
        version = data.get('format_version')
        if version != FORMAT_VERSION:
            raise _fail(path, f'unsupported format_version {version} (expected {FORMAT_VERSION})')
        self.data = data
        self.name = str(data.get('name', os.path.splitext(os.path.basename(path))[0]))
        self.framework = self.__load_framework(data.get('framework'))
        self.gain = self.__load_gain(data.get('gain'))
        self.weights = self.__load_weights(data.get('weights', {'source': 'design-general'}))
        self.motion = self.__load_motion(data.get('motion', {'source': 'design'}))
        self.h = self.__load_h(data.get('h', 'auto'))
        self.kappa = self.__load_number('kappa', data.get('kappa', 1.0))
        self.schedule = self.__load_schedule(data.get('schedule'))
        self.initial = self.__load_initial(data.get('initial', {'offset': [0.0, 0.0]}))
        self.integrator = self.__load_integrator(data.get('integrator', {}))
        self.seed = self.__load_seed(data.get('seed', 0))
        self.output = str(data.get('output', self.name))

    def resolve(self, relative: str) -> str:
        """Path relative to the scenario file's directory."""
        return os.path.normpath(os.path.join(os.path.dirname(self.path), relative))

    def __require_file(self, relative: Any, what: str) -> str:
        if not isinstance(relative, str):
            raise _fail(self.path, f'{what} path must be a string, given {relative}')
        filepath = self.resolve(relative)
        if not os.path.isfile(filepath):
            raise _fail(self.path, f'{what} file not found: {filepath}')
        return filepath

    def __load_framework(self, entry: Any) -> Framework:
        if not isinstance(entry, dict):
            raise _fail(self.path, 'missing "framework" object')
        if 'bundled' in entry:
            return datasets.load_framework(entry['bundled'])
        if 'path' in entry:
            return framework_from_dict(read_json(self.__require_file(entry['path'], 'framework')))
        return framework_from_dict(entry)

    def __load_gain(self, entry: Any) -> GainMatrix:
        n = self.framework.node_count
        if entry is None:
            return GainMatrix.identity(n)
        try:
            gain = GainMatrix(entry)
        except (TypeError, ValueError) as error:
            raise _fail(self.path, f'invalid gain ({error})') from None
        if len(gain) != n:
            raise _fail(self.path, f'gain has {len(gain)} entries for {n} agents')
        return gain

    def __load_weights(self, entry: Any) -> Dict[str, Any]:
        if not isinstance(entry, dict) or entry.get('source') not in WEIGHT_SOURCES:
            raise _fail(self.path, f'weights.source must be one of {WEIGHT_SOURCES}')
        entry = dict(entry)
        if entry['source'] == 'file':
            entry['path'] = self.__require_file(entry.get('path'), 'weights')
        return entry

    def __load_motion(self, entry: Any) -> Dict[str, Any]:
        if not isinstance(entry, dict) or entry.get('source') not in MOTION_SOURCES:
            raise _fail(self.path, f'motion.source must be one of {MOTION_SOURCES}')
        entry = dict(entry)
        if entry['source'] == 'file':
            entry['path'] = self.__require_file(entry.get('path'), 'motion basis')
        else:
            n = self.framework.node_count
            pinned = []
            for pair in entry.get('pinned', []):
                try:
                    i, j = (int(v) for v in pair)
                except (TypeError, ValueError):
                    raise _fail(self.path, f'pinned entries must be [i, j] pairs, given {pair}') from None
                if not (1 <= i <= n and 1 <= j <= n and self.framework.graph.has_edge(i - 1, j - 1)):
                    raise _fail(self.path, f'pinned pair ({i}, {j}) is not an edge')
                pinned.append((i - 1, j - 1))
            entry['pinned'] = pinned
        return entry

    def __load_h(self, value: Any) -> Union[float, str]:
        if value == 'auto':
            return value
        h = self.__load_number('h', value)
        if not h > 0:
            raise _fail(self.path, f'h must be positive or "auto", given {value}')
        return h

    def __load_number(self, name: str, value: Any) -> float:
        if not isinstance(value, Number) or isinstance(value, (bool, complex)) or not np.isfinite(value):
            raise _fail(self.path, f'{name} must be a finite number, given {value}')
        return float(value)

    def __load_schedule(self, entry: Any) -> Schedule:
        if not isinstance(entry, dict):
            raise _fail(self.path, 'missing "schedule" object')
        try:
            return Schedule.from_dict(entry, default_kappa=self.kappa)
        except (TypeError, ValueError) as error:
            raise _fail(self.path, f'invalid schedule ({error})') from None

    def __load_initial(self, entry: Any) -> Dict[str, Any]:
        keys = {'positions', 'affine', 'offset'}
        if not isinstance(entry, dict) or len(keys & set(entry)) != 1:
            raise _fail(self.path, f'initial must give exactly one of {sorted(keys)}')
        try:
            self.initial_configuration_from(entry)
        except (TypeError, ValueError) as error:
            raise _fail(self.path, f'invalid initial condition ({error})') from None
        return dict(entry)

    def __load_integrator(self, entry: Any) -> Dict[str, Any]:
        if not isinstance(entry, dict):
            raise _fail(self.path, 'integrator must be an object')
        method = entry.get('method', 'rk4')
        if method not in METHODS:
            raise _fail(self.path, f'integrator.method must be one of {METHODS}, given {method}')
        dt = self.__load_number('integrator.dt', entry.get('dt', DEFAULT_DT))
        record_every = entry.get('record_every', 1)
        if not isinstance(record_every, int) or isinstance(record_every, bool) or record_every < 1:
            raise _fail(self.path, f'integrator.record_every must be a positive integer, given {record_every}')
        if not 0 < dt <= min(segment.duration for segment in self.schedule):
            raise _fail(self.path, f'integrator.dt must be positive and not exceed any segment, given {dt}')
        return {'method': method, 'dt': dt, 'record_every': record_every}

    def __load_seed(self, value: Any) -> int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise _fail(self.path, f'seed must be an integer, given {value}')
        return value

    def initial_configuration_from(self, entry: Dict[str, Any]) -> np.ndarray:
        p_star = self.framework.p_star
        if 'positions' in entry:
            p0 = np.array([from_pair(point) for point in entry['positions']])
            if p0.size != p_star.size:
                raise ValueError(f'{p0.size} positions given for {p_star.size} agents')
            return p0
        if 'affine' in entry:
            return affine_map(AffineCoords.from_array(entry['affine']), p_star)
        return p_star + from_pair(entry['offset'])

    def initial_configuration(self) -> np.ndarray:
        """p0 resolved against the reference shape."""
        return self.initial_configuration_from(self.initial)

    def checksum(self) -> str:
        return file_checksum(self.path)

    def __str__(self) -> str:
        return f'<Scenario {self.name} n={self.framework.node_count} segments={len(self.schedule)}>'

    def __repr__(self) -> str:
        return str(self)


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario file (may be compressed)."""
    if not os.path.isfile(path):
        raise ScenarioError(f'scenario file not found: {path}')
    try:
        data = read_json(path)
    except (ValueError, OSError) as error:
        raise ScenarioError(f'scenario {os.path.basename(path)}: invalid JSON ({error})') from None
    return Scenario(path, data)
