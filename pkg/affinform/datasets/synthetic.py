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

"""Seeded random shapes, reference motions and initial conditions."""

# standard libs
from numbers import Number

# external libs
import numpy as np

# internal libs
from ..formation.core import AffineCoords, ShapeBasis, ReferenceShape


class SyntheticFormations:
    """Random instances drawn from a seeded generator.

       Example
       -------
       >>> synthetic = SyntheticFormations(seed=1)
       >>> delta_v = synthetic.delta_v_for('C4')
    """

    def __init__(self, seed: int = 0, scale: float = 1.0) -> None:
        """Initialize attributes."""
        self.seed = seed
        self.scale = scale

    @property
    def seed(self) -> int:
        """Seed of the random number generator (reassigning it restarts the stream)."""
        return self.__seed

    @seed.setter
    def seed(self, value: int) -> None:
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise TypeError(f'{self.__class__.__name__}.seed expects an integer, given {value}.')
        self.__seed = int(value)
        self.__rng = np.random.default_rng(self.__seed)

    @property
    def scale(self) -> float:
        """Largest magnitude of a drawn motion coordinate."""
        return self.__scale

    @scale.setter
    def scale(self, value: float) -> None:
        if not isinstance(value, Number) or not value > 0:
            raise ValueError(f'{self.__class__.__name__}.scale must be positive, given {value}.')
        self.__scale = float(value)

    @property
    def rng(self) -> np.random.Generator:
        return self.__rng

    def _uniform(self, size: int = None) -> np.ndarray:
        return self.__rng.uniform(-self.__scale, self.__scale, size)

    def _nonzero(self) -> float:
        """Uniform magnitude in [0.2, 1]·scale with a random sign."""
        return float(self.__rng.choice([-1, 1]) * self.__rng.uniform(0.2, 1.0) * self.__scale)

    def shape(self, n: int) -> ReferenceShape:
        """Generic reference shape of `n` agents in the square [-1, 1]²."""
        return ReferenceShape(self.__rng.uniform(-1, 1, n) + 1j * self.__rng.uniform(-1, 1, n))

    def point_in_shape(self, basis: ShapeBasis) -> np.ndarray:
        """Random configuration c1 + c2·Re(p*) + c3·Im(p*) inside S."""
        coords = self.__rng.uniform(-1, 1, 3) + 1j * self.__rng.uniform(-1, 1, 3)
        return basis.lift(coords)

    def point_off_shape(self, basis: ShapeBasis, distance: float = 1.0) -> np.ndarray:
        """Random configuration whose component outside S has the given norm."""
        noise = basis.proj_c @ (self.__rng.standard_normal(basis.node_count)
                                + 1j * self.__rng.standard_normal(basis.node_count))
        return self.point_in_shape(basis) + distance * noise / np.linalg.norm(noise)

    def delta_v(self, structured: bool = False) -> AffineCoords:
        """Dense random motion, or (structured) one with a random subset of exact zeros."""
        values = self._uniform(6)
        if structured:
            values[self.__rng.random(6) < 0.5] = 0.0
        return AffineCoords.from_array(values)

    def delta_v_for(self, label: str) -> AffineCoords:
        """Random motion whose spectral case is `label` (one of C1a, C1b, C1, C2, ..., C6)."""
        x, y = self._uniform(2)
        if label in ('C1', 'C1a'):
            while True:
                ax, ay, hx, hy = self._uniform(4)
                det = ax * ay - hx * hy
                disc = ((ax - ay) / 2) ** 2 + hx * hy
                if abs(det) > 0.05 * self.__scale ** 2 and abs(disc) > 0.05 * self.__scale ** 2:
                    return AffineCoords(x, y, ax, ay, hx, hy)
        if label == 'C1b':
            a = self._nonzero()
            return AffineCoords(x, y, a, a, 0.0, 0.0)
        if label == 'C2':
            a, b = self._nonzero(), self._nonzero()
            branch = self.__rng.integers(3)
            if branch == 0:
                return AffineCoords(x, y, a, a, 0.0, b)
            if branch == 1:
                return AffineCoords(x, y, a, a, b, 0.0)
            d, s = self._nonzero(), self.__rng.uniform(0.5, 2.0)
            return AffineCoords(x, y, a + d, a - d, d * s, -d / s)
        if label in ('C3', 'C4'):
            # rank-one motion block with rows r and s·r
            a, b, s = self._nonzero(), self._nonzero(), self._nonzero()
            while abs(a + s * b) < 0.1 * self.__scale:
                s = self._nonzero()
            if label == 'C3':
                t = self._nonzero()
                x, y = t * a, t * b
            else:
                while abs(x * b - y * a) < 0.05 * self.__scale ** 2:
                    x, y = self._uniform(2)
            return AffineCoords(x, y, a, s * b, s * a, b)
        if label in ('C5', 'C6'):
            # nilpotent motion block [[a, b], [-a²/b, -a]]
            a, b = self._nonzero(), self._nonzero()
            c = -a * a / b
            if label == 'C5':
                if self.__rng.random() < 0.25:
                    return AffineCoords(x, y, 0.0, 0.0, 0.0, 0.0)
                t = self._nonzero()
                return AffineCoords(t * a, t * b, a, -a, c, b)
            while abs(x * a + y * c) < 0.05 * self.__scale ** 2 and abs(x * b - y * a) < 0.05 * self.__scale ** 2:
                x, y = self._uniform(2)
            return AffineCoords(x, y, a, -a, c, b)
        raise ValueError(f'{self.__class__.__name__}.delta_v_for: unknown case "{label}"')
