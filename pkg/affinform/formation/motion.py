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

"""Motion parameters, the six-motion basis and the modified Laplacian."""

# standard libs
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

# external libs
import numpy as np
from scipy import linalg

# internal libs
from ..core.logging import log
from ..core.exceptions import UnreachableVelocityError, ZeroWeightError, ValidationError
from .core import Edge, Graph, Framework, AffineCoords, affine_map
from .weights import StressWeights, GainMatrix


# residual allowed in the per-agent velocity constraint (relative to max(1, |v*_i|))
MU_TOL = 1e-10

# relative residual allowed when checking an imported basis against its targets
BASIS_TOL = 1e-8

BASIS_NAMES = AffineCoords.MOTIONS


def solve_agent_mu(agent: int, relatives: Sequence[Tuple[int, complex]], v_star: complex,
                   pinned: Iterable[int] = ()) -> Dict[int, float]:
    """Minimum-norm motion parameters for one agent.

       Solves Σ_j μ_ij·z*_ij = v*_i as a real 2×|N_i| system (real and imaginary parts).

       Arguments
       ---------
       agent: int
           Index of the agent (used in error messages).
       relatives: Sequence[Tuple[int, complex]]
           Pairs (j, z*_ij) over the neighbors of the agent.
       v_star: complex
           Reference velocity of the agent.

       Options
       -------
       pinned: Iterable[int] (default=())
           Neighbors whose μ_ij is held at zero before solving.

       Returns
       -------
       mu: Dict[int, float]
           μ_ij keyed by neighbor, in the order of `relatives`.
    """
    pinned = set(pinned)
    v_star = complex(v_star)
    mu = {j: 0.0 for j, _ in relatives}
    free = [(j, z) for j, z in relatives if j not in pinned]
    b = np.array([v_star.real, v_star.imag])
    if free:
        A = np.array([[z.real for _, z in free], [z.imag for _, z in free]])
        x, _, _, _ = linalg.lstsq(A, b)
        residual = linalg.norm(A @ x - b)
    else:
        x, residual = [], linalg.norm(b)
    if residual > MU_TOL * max(1.0, abs(v_star)):
        raise UnreachableVelocityError(f'agent {agent + 1} cannot realize reference velocity '
                                       f'{v_star} from its relative positions '
                                       f'(residual {residual:.3e})', agent=agent)
    for (j, _), value in zip(free, x):
        mu[j] = float(value)
    return mu


def build_m_matrix(graph: Graph, mu: Mapping[Edge, float]) -> np.ndarray:
    """M with m_tail,k = μ_tail,head and m_head,k = -μ_head,tail for each edge k."""
    M = np.zeros((graph.node_count, graph.edge_count))
    for k, (tail, head) in enumerate(graph.edges):
        M[tail, k] = mu.get((tail, head), 0.0)
        M[head, k] = -mu.get((head, tail), 0.0)
    return M


class MotionParameters:
    """Directed motion parameters μ_ij (generally μ_ij != μ_ji) and their matrix M."""

    def __init__(self, graph: Graph, mu: Mapping[Edge, float]) -> None:
        """Initialize attributes."""
        for i, j in mu:
            if not graph.has_edge(i, j) and mu[(i, j)] != 0:
                raise ValidationError(f'motion parameter on non-edge ({i + 1}, {j + 1})')
        self.__graph = graph
        self.__mu = {key: float(value) for key, value in mu.items() if graph.has_edge(*key)}
        self.__m_matrix = build_m_matrix(graph, self.__mu)
        self.__m_matrix.setflags(write=False)

    @classmethod
    def from_matrix(cls, graph: Graph, m_matrix: np.ndarray) -> 'MotionParameters':
        """Recover μ from an n×|Z| matrix laid out as in `build_m_matrix`."""
        M = np.asarray(m_matrix, dtype=float)
        if M.shape != (graph.node_count, graph.edge_count):
            raise ValueError(f'{cls.__name__}.from_matrix expects shape '
                             f'{(graph.node_count, graph.edge_count)}, given {M.shape}.')
        mu = {}
        for k, (tail, head) in enumerate(graph.edges):
            mu[(tail, head)] = float(M[tail, k])
            mu[(head, tail)] = float(-M[head, k])
        return cls(graph, mu)

    graph = property(lambda self: self.__graph)
    m_matrix = property(lambda self: self.__m_matrix)

    @property
    def mu(self) -> Dict[Edge, float]:
        return dict(self.__mu)

    def __getitem__(self, edge: Edge) -> float:
        return self.__mu.get(tuple(edge), 0.0)


class MotionBasis:
    """The six matrices M_vx, M_vy, M_vax, M_vay, M_vhx, M_vhy of a framework.

       Any reference motion Δ_v is realized by M = Σ Δ_v[name]·M_name.
    """

    def __init__(self, framework: Framework, matrices: Mapping[str, np.ndarray]) -> None:
        """Initialize attributes."""
        shape = (framework.node_count, framework.graph.edge_count)
        missing = set(BASIS_NAMES) - set(matrices)
        if missing:
            raise ValidationError(f'motion basis is missing {sorted(missing)}')
        self.__framework = framework
        self.__matrices = {}
        for name in BASIS_NAMES:
            M = np.array(matrices[name], dtype=float)
            if M.shape != shape:
                raise ValidationError(f'motion basis matrix {name} has shape {M.shape}, '
                                      f'expected {shape}')
            M.setflags(write=False)
            self.__matrices[name] = M

    framework = property(lambda self: self.__framework)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.__matrices[name]

    def __iter__(self):
        return iter(BASIS_NAMES)

    def combine(self, delta_v: AffineCoords) -> np.ndarray:
        """M for the reference motion `delta_v`."""
        M = np.zeros_like(self.__matrices['vx'])
        for name, coefficient in zip(BASIS_NAMES, delta_v):
            if coefficient:
                M = M + coefficient * self.__matrices[name]
        return M

    def parameters(self, delta_v: AffineCoords) -> MotionParameters:
        return MotionParameters.from_matrix(self.__framework.graph, self.combine(delta_v))

    def rotation(self) -> np.ndarray:
        """M_vω = M_vhy - M_vhx (rigid rotation)."""
        return self.__matrices['vhy'] - self.__matrices['vhx']

    def cross_shear(self) -> np.ndarray:
        """M_vs = M_vhy + M_vhx (combined shear)."""
        return self.__matrices['vhy'] + self.__matrices['vhx']

    def residuals(self) -> Dict[str, float]:
        """‖M_name·Bᵀ·p* - target‖ for each basis motion."""
        B, p = self.__framework.incidence, self.__framework.p_star
        return {name: float(linalg.norm(self.__matrices[name] @ B.T @ p
                                        - affine_map(AffineCoords.unit(name), p)))
                for name in BASIS_NAMES}

    def check(self, tol: float = BASIS_TOL) -> None:
        """Raise ValidationError if any basis matrix misses its target motion."""
        scale = max(1.0, float(linalg.norm(self.__framework.p_star)))
        for name, residual in self.residuals().items():
            if residual > tol * scale:
                raise ValidationError(f'motion basis matrix {name} misses its target '
                                      f'(residual {residual:.3e})')

    def __str__(self) -> str:
        return f'<MotionBasis n={self.__framework.node_count}>'

    def __repr__(self) -> str:
        return str(self)


def _solve_motion(framework: Framework, name: str, pinned: Mapping[int, List[int]]) -> np.ndarray:
    target = affine_map(AffineCoords.unit(name), framework.p_star)
    mu = {}
    for i in range(framework.node_count):
        for j, value in solve_agent_mu(i, framework.relative_refs(i), target[i],
                                       pinned.get(i, ())).items():
            mu[(i, j)] = value
    return build_m_matrix(framework.graph, mu)


def build_motion_basis(framework: Framework, pinned: Iterable[Edge] = (),
                       workers: int = None) -> MotionBasis:
    """Solve the per-agent constraints for each of the six unit motions.

       `pinned` lists directed pairs (i, j) whose μ_ij is held at zero in every motion.
       With `workers` the six motions are solved on a thread pool; results are identical.
    """
    held = {}
    for i, j in pinned:
        held.setdefault(int(i), []).append(int(j))
    if workers:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(lambda name: _solve_motion(framework, name, held), BASIS_NAMES))
    else:
        solved = [_solve_motion(framework, name, held) for name in BASIS_NAMES]
    log.debug(f'built motion basis for {framework}')
    return MotionBasis(framework, dict(zip(BASIS_NAMES, solved)))


class ModifiedLaplacian:
    """Assembled closed-loop matrices for one reference motion.

       Attributes
       ----------
       h: float
           Shape-stabilization gain.
       kappa: float
           Motion gain.
       delta_v: AffineCoords
           Reference motion coordinates.
       m_matrix: np.ndarray
           M for `delta_v`.
       m_bt: np.ndarray
           M·Bᵀ.
       l_tilde: np.ndarray
           h·L - κ·K⁻¹·M·Bᵀ.
       closed_loop: np.ndarray
           -K·L̃ = -h·K·L + κ·M·Bᵀ.
       v_star: np.ndarray
           Reference velocity affine_map(Δ_v, p*).
    """

    def __init__(self, h: float, kappa: float, delta_v: AffineCoords, m_matrix: np.ndarray,
                 m_bt: np.ndarray, l_tilde: np.ndarray, closed_loop: np.ndarray,
                 v_star: np.ndarray) -> None:
        self.h = h
        self.kappa = kappa
        self.delta_v = delta_v
        self.m_matrix = m_matrix
        self.m_bt = m_bt
        self.l_tilde = l_tilde
        self.closed_loop = closed_loop
        self.v_star = v_star

    def __str__(self) -> str:
        return f'<ModifiedLaplacian h={self.h} kappa={self.kappa} delta_v={list(self.delta_v)}>'

    def __repr__(self) -> str:
        return str(self)


def assemble_modified(weights: StressWeights, gain: GainMatrix, basis: MotionBasis,
                      delta_v: AffineCoords, h: float, kappa: float) -> ModifiedLaplacian:
    """Combine the basis for `delta_v` and assemble L̃ and the closed-loop matrix."""
    if not h > 0:
        raise ValueError(f'assemble_modified: h must be positive, given {h}')
    framework = basis.framework
    M = basis.combine(delta_v)
    m_bt = M @ framework.incidence.T
    L = weights.laplacian
    l_tilde = h * L - kappa * gain.inverse @ m_bt
    closed_loop = -h * gain.matrix @ L + kappa * m_bt
    v_star = affine_map(delta_v, framework.p_star)
    return ModifiedLaplacian(h, kappa, delta_v, M, m_bt, l_tilde, closed_loop, v_star)


def hardware_scaling(weights: StressWeights, mu: MotionParameters, h: float,
                     kappa: float) -> Dict[Edge, float]:
    """Per directed edge factor s_ij with h·w_ij·s_ij = h·w_ij - κ·μ_ij."""
    scaling = {}
    for (i, j), w in weights.weights.items():
        for a, b in ((i, j), (j, i)):
            m = mu[(a, b)]
            if w == 0:
                if m != 0:
                    raise ZeroWeightError(f'edge ({a + 1}, {b + 1}) has zero weight but '
                                          f'μ = {m}', edge=(a, b))
                scaling[(a, b)] = 1.0
            else:
                scaling[(a, b)] = (h * w - kappa * m) / (h * w)
    return scaling


class FormationSystem:
    """A designed formation: framework, weights, gain, motion basis and gain h.

       Closed-loop matrices are assembled on demand and cached per (Δ_v, κ).
    """

    def __init__(self, framework: Framework, weights: StressWeights, gain: GainMatrix,
                 basis: MotionBasis, h: float) -> None:
        """Initialize attributes."""
        if weights.graph != framework.graph:
            raise ValidationError('weights were designed for a different graph')
        if len(gain) != framework.node_count:
            raise ValidationError(f'gain has {len(gain)} entries for {framework.node_count} agents')
        if not h > 0:
            raise ValueError(f'{self.__class__.__name__}.h must be positive, given {h}.')
        self.framework = framework
        self.weights = weights
        self.gain = gain
        self.basis = basis
        self.h = float(h)
        self.__cache = {}

    def modified(self, delta_v: AffineCoords, kappa: float) -> ModifiedLaplacian:
        key = (delta_v, float(kappa))
        if key not in self.__cache:
            self.__cache[key] = assemble_modified(self.weights, self.gain, self.basis,
                                                  delta_v, self.h, kappa)
        return self.__cache[key]

    def closed_loop(self, delta_v: AffineCoords, kappa: float) -> np.ndarray:
        return self.modified(delta_v, kappa).closed_loop

    def reference_velocity(self, delta_v: AffineCoords, kappa: float) -> np.ndarray:
        """κ·v*, the collective velocity realized once the formation is in shape."""
        return kappa * affine_map(delta_v, self.framework.p_star)

    def with_gain(self, h: float) -> 'FormationSystem':
        """Same design with a different stabilization gain h."""
        return FormationSystem(self.framework, self.weights, self.gain, self.basis, h)
