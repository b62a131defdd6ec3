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

"""Stress weight design for the formation Laplacian and validation of the gain matrix."""

# standard libs
import warnings
from typing import Dict, List, Mapping, Sequence, Union

# external libs
import numpy as np
from scipy import linalg
from scipy.optimize import minimize

# internal libs
from ..core.logging import log
from ..core.exceptions import (WeightValidationError, GainValidationError, NoStressError,
                               UnsupportedTopologyError, NotPSDWarning)
from .core import Edge, Graph, Framework, ReferenceShape, ShapeBasis, shape_basis, incidence_matrix


# |λ| <= ZERO_EIG_TOL·‖L‖₂ counts as a zero eigenvalue
ZERO_EIG_TOL = 1e-8

# relative residual allowed for the equilibrium balance L·phi = 0
BALANCE_TOL = 1e-10


def laplacian_from_weights(graph: Graph, weights: Sequence[float]) -> np.ndarray:
    """L = B·diag(w)·Bᵀ for weights given in edge order."""
    B = incidence_matrix(graph)
    return (B * np.asarray(weights, dtype=float)) @ B.T


class StressWeights:
    """Symmetric edge weights w_ij and the Laplacian L they define.

       Attributes
       ----------
       graph: Graph
           Interaction graph the weights live on.
       laplacian: np.ndarray
           n×n symmetric Laplacian with l_ij = -w_ij off the diagonal.
       weights: Dict[Edge, float]
           Edge weight for each declared (tail, head) pair, in edge order.
       spectrum: np.ndarray
           Eigenvalues of L in ascending order.
    """

    def __init__(self, graph: Graph, laplacian: np.ndarray) -> None:
        """Initialize attributes (validates symmetry, sparsity and zero row sums)."""
        if not isinstance(graph, Graph):
            raise TypeError(f'{self.__class__.__name__}.graph expects Graph, given {type(graph)}.')
        L = np.array(laplacian, dtype=float)
        n = graph.node_count
        if L.shape != (n, n):
            raise ValueError(f'{self.__class__.__name__}.laplacian expects shape {(n, n)}, given {L.shape}.')
        if not np.all(np.isfinite(L)):
            raise WeightValidationError('Laplacian has non-finite entries')
        scale = max(linalg.norm(L, 2), np.finfo(float).tiny)
        if linalg.norm(L - L.T, 2) > 1e-12 * scale:
            raise WeightValidationError('weights are not symmetric (w_ij != w_ji)')
        L = (L + L.T) / 2
        mask = np.ones((n, n), dtype=bool)
        np.fill_diagonal(mask, False)
        for i, j in graph.edges:
            mask[i, j] = mask[j, i] = False
        if np.any(L[mask] != 0):
            i, j = np.argwhere(mask & (L != 0))[0]
            raise WeightValidationError(f'nonzero weight between non-adjacent nodes {i + 1} and {j + 1}')
        if linalg.norm(L @ np.ones(n)) > BALANCE_TOL * scale * np.sqrt(n):
            raise WeightValidationError('Laplacian rows do not sum to zero')
        L.setflags(write=False)
        self.__graph = graph
        self.__laplacian = L
        self.__spectrum = linalg.eigvalsh(L)

    @classmethod
    def from_weights(cls, graph: Graph,
                     weights: Union[Sequence[float], Mapping[Edge, float]]) -> 'StressWeights':
        """Build from weights in edge order or from a mapping of 0-based node pairs.

           A mapping may list both directions of a pair; they must agree.
        """
        if isinstance(weights, Mapping):
            values = np.zeros(graph.edge_count)
            given = {}
            for (i, j), w in weights.items():
                w = float(w)
                key = (min(i, j), max(i, j))
                if key in given and given[key] != w:
                    raise WeightValidationError(f'weights are not symmetric: w_{i + 1}{j + 1} = {w} '
                                                f'but w_{j + 1}{i + 1} = {given[key]}')
                given[key] = w
                if not graph.has_edge(i, j):
                    if w != 0:
                        raise WeightValidationError(f'nonzero weight between non-adjacent nodes '
                                                    f'{i + 1} and {j + 1}')
                    continue
                values[graph.edge_index(i, j)] = w
        else:
            values = np.asarray(weights, dtype=float)
            if values.shape != (graph.edge_count, ):
                raise ValueError(f'{cls.__name__}.from_weights expects {graph.edge_count} weights, '
                                 f'given shape {values.shape}.')
        return cls(graph, laplacian_from_weights(graph, values))

    graph = property(lambda self: self.__graph)
    laplacian = property(lambda self: self.__laplacian)
    spectrum = property(lambda self: self.__spectrum)

    @property
    def weights(self) -> Dict[Edge, float]:
        return {(i, j): float(-self.__laplacian[i, j]) for i, j in self.__graph.edges}

    def zero_tolerance(self) -> float:
        return ZERO_EIG_TOL * linalg.norm(self.__laplacian, 2)

    def is_psd(self) -> bool:
        """All eigenvalues nonnegative with exactly three zeros."""
        tol = self.zero_tolerance()
        zeros = np.sum(np.abs(self.__spectrum) <= tol)
        return zeros == 3 and bool(np.all(self.__spectrum >= -tol))

    def check_balance(self, basis: ShapeBasis) -> None:
        """Raise WeightValidationError unless L·[1, Re(p*), Im(p*)] = 0."""
        phi = basis.phi.real
        residual = linalg.norm(self.__laplacian @ phi, 2)
        bound = BALANCE_TOL * linalg.norm(self.__laplacian, 2) * linalg.norm(phi, 2)
        if residual > max(bound, 1e-14):
            raise WeightValidationError(f'weights do not balance the reference shape '
                                        f'(‖L·phi‖ = {residual:.3e})')

    def __str__(self) -> str:
        return f'<StressWeights n={self.__graph.node_count} edges={self.__graph.edge_count}>'

    def __repr__(self) -> str:
        return str(self)


class GainMatrix:
    """Diagonal gain K = diag(k1, ..., kn) with nonzero entries."""

    def __init__(self, k: Sequence[float]) -> None:
        """Initialize attributes."""
        self.k = k

    @classmethod
    def identity(cls, n: int) -> 'GainMatrix':
        return cls(np.ones(n))

    @property
    def k(self) -> np.ndarray:
        return self.__k

    @k.setter
    def k(self, val: Sequence[float]) -> None:
        k = np.array(val, dtype=float)
        if k.ndim != 1 or k.size == 0:
            raise TypeError(f'{self.__class__.__name__}.k expects a vector, given {val}.')
        if not np.all(np.isfinite(k)) or np.any(k == 0):
            raise ValueError(f'{self.__class__.__name__}.k entries must be finite and nonzero.')
        k.setflags(write=False)
        self.__k = k

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.__k)

    @property
    def inverse(self) -> np.ndarray:
        return np.diag(1.0 / self.__k)

    def __len__(self) -> int:
        return self.__k.size

    def __str__(self) -> str:
        return f'<GainMatrix k={self.__k.tolist()}>'

    def __repr__(self) -> str:
        return str(self)


class GainReport:
    """Spectrum of K·L and the verdict of `validate_gain`."""

    def __init__(self, eigenvalues: np.ndarray, zero_count: int, offending: np.ndarray,
                 kernel_preserved: bool) -> None:
        self.eigenvalues = eigenvalues
        self.zero_count = zero_count
        self.offending = offending
        self.kernel_preserved = kernel_preserved

    @property
    def passed(self) -> bool:
        return self.zero_count == 3 and self.offending.size == 0 and self.kernel_preserved

    def require(self) -> 'GainReport':
        """Raise GainValidationError listing the offending eigenvalues unless passed."""
        if not self.passed:
            raise GainValidationError(f'K·L has {self.zero_count} zero eigenvalues (expected 3) and '
                                      f'{self.offending.size} with non-positive real part: '
                                      f'{np.round(self.offending, 12).tolist()}',
                                      offending=self.offending)
        return self

    def to_dict(self) -> dict:
        return {'passed': self.passed, 'zero_count': int(self.zero_count),
                'kernel_preserved': bool(self.kernel_preserved),
                'eigenvalues': [[float(v.real), float(v.imag)] for v in self.eigenvalues],
                'offending': [[float(v.real), float(v.imag)] for v in self.offending]}


def _rank(matrix: np.ndarray, tol: float) -> int:
    return int(np.sum(linalg.svdvals(matrix) > tol))


def validate_gain(weights: StressWeights, gain: GainMatrix) -> GainReport:
    """Eigenvalues of K·L; passes iff exactly three are zero and the rest have positive real part."""
    L = weights.laplacian
    if len(gain) != L.shape[0]:
        raise ValueError(f'gain has {len(gain)} entries for {L.shape[0]} agents')
    KL = gain.matrix @ L
    eigenvalues = linalg.eigvals(KL)
    eigenvalues = eigenvalues[np.lexsort((eigenvalues.imag, eigenvalues.real))]
    tol = weights.zero_tolerance()
    zero = np.abs(eigenvalues) <= tol
    nonzero = eigenvalues[~zero]
    offending = nonzero[nonzero.real <= 0]
    kernel_preserved = _rank(KL, tol) == _rank(L, tol)
    report = GainReport(eigenvalues, int(zero.sum()), offending, kernel_preserved)
    log.debug(f'validate_gain: zero={report.zero_count} offending={offending.size}')
    return report


def design_weights_complete(shape: Union[ReferenceShape, np.ndarray],
                            graph: Graph = None) -> StressWeights:
    """Closed-form weights L = I - proj_S for a complete interaction graph."""
    basis = shape_basis(shape)
    n = basis.node_count
    if graph is None:
        graph = Graph.complete(n)
    elif not graph.is_complete():
        raise UnsupportedTopologyError('closed-form weights need a complete graph; '
                                       'use design_weights_general')
    L = basis.proj_c
    return StressWeights(graph, (L + L.T) / 2)


def _stress_space(framework: Framework) -> np.ndarray:
    """Columns span all edge weights w with Σ_j w_ij (p*_i - p*_j) = 0 for every i."""
    graph, p = framework.graph, framework.p_star
    A = np.zeros((2 * graph.node_count, graph.edge_count))
    for k, (i, j) in enumerate(graph.edges):
        z = p[i] - p[j]
        A[2 * i, k], A[2 * i + 1, k] = z.real, z.imag
        A[2 * j, k], A[2 * j + 1, k] = -z.real, -z.imag
    return linalg.null_space(A, rcond=1e-9)


def _smallest(block: np.ndarray) -> float:
    if block.size == 0:
        return 0.0
    return float(linalg.eigvalsh(block)[0])


def design_weights_general(framework: Framework, seed: int = 0, starts: int = 12) -> StressWeights:
    """Weights on an arbitrary graph from the nullspace of the equilibrium constraints.

       The coefficients over the stress-space basis maximize the smallest nonzero
       eigenvalue of L (a concave function on the slice trace(L) = n - 3), searched
       with Nelder-Mead from `starts` seeded points. The result is scaled to ‖L‖₂ = 1.

       Raises NoStressError if no nontrivial stress exists. Emits NotPSDWarning when
       the best stress found is not positive semidefinite.
    """
    graph, basis = framework.graph, framework.basis
    n = graph.node_count
    space = _stress_space(framework)
    if space.shape[1] == 0:
        raise NoStressError(f'no nontrivial stress on framework with {n} nodes and '
                            f'{graph.edge_count} edges')

    U = basis.complement
    blocks = [U.T @ laplacian_from_weights(graph, w) @ U for w in space.T]
    traces = np.array([np.trace(b) for b in blocks])

    def restricted(c: np.ndarray) -> np.ndarray:
        return sum(ci * b for ci, b in zip(c, blocks))

    dim = space.shape[1]
    rng = np.random.default_rng(seed)
    if linalg.norm(traces) > 1e-12:
        origin = traces * (n - 3) / traces.dot(traces)
        directions = linalg.null_space(traces[None, :])

        def to_coeffs(y: np.ndarray) -> np.ndarray:
            return origin + directions @ y

        def objective(y: np.ndarray) -> float:
            return -_smallest(restricted(to_coeffs(y)))

    else:
        directions = np.eye(dim)

        def to_coeffs(y: np.ndarray) -> np.ndarray:
            return y / max(linalg.norm(y), 1e-300)

        def objective(y: np.ndarray) -> float:
            block = restricted(to_coeffs(y))
            return -_smallest(block) / max(linalg.norm(block, 2), 1e-300)

    if directions.shape[1] == 0:
        best = to_coeffs(np.zeros(0))
    else:
        m = directions.shape[1]
        candidates = [np.zeros(m) if linalg.norm(traces) > 1e-12 else np.eye(m)[0]]
        candidates += [rng.standard_normal(m) for _ in range(starts - 1)]
        best, best_value = None, np.inf
        for y0 in candidates:
            result = minimize(objective, y0, method='Nelder-Mead',
                              options={'xatol': 1e-10, 'fatol': 1e-13,
                                       'maxiter': 2000 * (m + 1), 'adaptive': m > 2})
            if result.fun < best_value:
                best, best_value = to_coeffs(result.x), result.fun
        if dim == 1 and _smallest(restricted(-best)) > _smallest(restricted(best)):
            best = -best

    values = space @ best
    values /= linalg.norm(laplacian_from_weights(graph, values), 2)
    weights = StressWeights.from_weights(graph, values)

    smallest = _smallest(U.T @ weights.laplacian @ U)
    log.info(f'designed stress weights (stress space dimension {dim}, '
             f'smallest nonzero eigenvalue {smallest:.6g})')
    if smallest <= weights.zero_tolerance():
        message = (f'best stress is not positive semidefinite (smallest eigenvalue on the '
                   f'complement {smallest:.3e}); a compensating gain K is required')
        log.warning(message)
        warnings.warn(NotPSDWarning(message))
    return weights
