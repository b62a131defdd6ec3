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

"""Spectral cases of the closed loop on the shape set, Jordan chains and closed-form trajectories.

   On the desired shape set S the closed loop acts through the 3×3 operator
   κ·A with A = [[0, vx, vy], [0, vax, vhy], [0, vhx, vay]] in the coordinates
   [c1, c2, c3] of the basis [1, Re(p*), Im(p*)]. Its eigenvalues are 0 and
   l± = κ((vax + vay)/2 ± σ), σ = sqrt(((vax - vay)/2)² + vhx·vhy).
"""

# standard libs
import math
import warnings
from typing import List, Sequence, Tuple, Union

# external libs
import numpy as np
from scipy import linalg

# internal libs
from ..core.logging import log
from ..core.exceptions import OutOfShapeError, ConditioningError, ConditioningWarning
from ..formation.core import AffineCoords, ShapeBasis, as_configuration


# zero test for classification (on Δ_v normalized to unit max-norm)
ZERO_TOL = 1e-9

# relative residual accepted for constructed chain vectors
RESIDUAL_TOL = 1e-8

# p0 farther than this (relative) from S is rejected by analytic_solution
SHAPE_TOL = 1e-8

# largest acceptable condition number of the chain coordinate matrix
CONDITION_LIMIT = 1e12

CASE_LABELS = ('C1a', 'C1b', 'C2', 'C3', 'C4', 'C5', 'C6')

_ONE = np.array([1, 0, 0], dtype=complex)
_RE = np.array([0, 1, 0], dtype=complex)
_IM = np.array([0, 0, 1], dtype=complex)


class ReducedOperator:
    """The operator of the closed loop restricted to S, in basis coordinates."""

    def __init__(self, delta_v: AffineCoords, kappa: float) -> None:
        """Initialize attributes."""
        vx, vy, vax, vay, vhx, vhy = delta_v
        self.delta_v = delta_v
        self.kappa = float(kappa)
        self.a_vstar = np.array([[0.0, vx, vy],
                                 [0.0, vax, vhy],
                                 [0.0, vhx, vay]])

    @property
    def matrix(self) -> np.ndarray:
        """κ·A."""
        return self.kappa * self.a_vstar

    @property
    def trace(self) -> float:
        return self.delta_v.dax + self.delta_v.day

    @property
    def determinant(self) -> float:
        d = self.delta_v
        return d.dax * d.day - d.dhx * d.dhy

    @property
    def discriminant(self) -> float:
        d = self.delta_v
        return ((d.dax - d.day) / 2) ** 2 + d.dhx * d.dhy

    @property
    def sigma(self) -> complex:
        """Principal square root of the discriminant."""
        return complex(np.sqrt(complex(self.discriminant)))

    def eigenvalues(self) -> Tuple[complex, complex, complex]:
        """(0, l+, l-) straight from the formula."""
        half = self.trace / 2
        return 0j, self.kappa * (half + self.sigma), self.kappa * (half - self.sigma)


class Classification:
    """Case label and eigenvalues for a reference motion."""

    def __init__(self, label: str, branch: str, operator: ReducedOperator,
                 eigenvalues: Tuple[complex, complex, complex], zero_tol: float) -> None:
        if label not in CASE_LABELS:
            raise ValueError(f'{self.__class__.__name__}.label must be one of {CASE_LABELS}, given {label}.')
        self.label = label
        self.branch = branch
        self.operator = operator
        self.eigenvalues = eigenvalues
        self.zero_tol = zero_tol

    @property
    def sigma(self) -> complex:
        return self.operator.sigma

    @property
    def delta_v(self) -> AffineCoords:
        return self.operator.delta_v

    @property
    def kappa(self) -> float:
        return self.operator.kappa

    def __str__(self) -> str:
        return f'<Classification {self.label} ({self.branch})>'

    def __repr__(self) -> str:
        return str(self)


def classify(delta_v: AffineCoords, kappa: float, zero_tol: float = ZERO_TOL) -> Classification:
    """Assign the spectral case of the closed loop on S.

       Conditions are tested in the order C1, C2, C3, C4, C5, C6 on Δ_v scaled to
       unit max-norm, each equality as |·| < zero_tol. The all-zero operator
       (Δ_v = 0 or κ = 0) is reported as C5 with the 'static' branch.
    """
    if not zero_tol > 0:
        raise ValueError(f'classify: zero_tol must be positive, given {zero_tol}')
    operator = ReducedOperator(delta_v, kappa)
    if kappa == 0 or delta_v.is_zero():
        return Classification('C5', 'static', operator, (0j, 0j, 0j), zero_tol)

    scale = max(abs(v) for v in delta_v)
    x, y, ax, ay, hx, hy = (v / scale for v in delta_v)

    def zero(value: float) -> bool:
        return abs(value) < zero_tol

    trace = ax + ay
    det = ax * ay - hx * hy
    disc = ((ax - ay) / 2) ** 2 + hx * hy
    lam0, lplus, lminus = operator.eigenvalues()

    if not zero(det):
        if not zero(disc):
            label, branch = 'C1a', 'distinct'
        elif zero(ax - ay) and zero(hx) and zero(hy):
            label, branch = 'C1b', 'diagonal'
            lplus = lminus = complex(kappa * operator.trace / 2)
        else:
            label = 'C2'
            branch = 'vhx=0' if zero(hx) else 'vhy=0' if zero(hy) else 'general'
            lplus = lminus = complex(kappa * operator.trace / 2)
    elif not zero(trace):
        if zero(x * hy - ax * y) and zero(hx * y - ay * x):
            label, branch = 'C3', 'semisimple'
        else:
            label, branch = 'C4', 'defective'
        t = operator.trace
        lplus = complex(kappa * (t / 2 + abs(t) / 2))
        lminus = complex(kappa * (t / 2 - abs(t) / 2))
    else:
        lplus = lminus = 0j
        chained = (x * ax + y * hx, x * hy + y * ay)  # first row of A²
        if zero(chained[0]) and zero(chained[1]):
            label = 'C5'
            if zero(hx) and zero(hy):
                branch = 'vhx=vhy=0'
            elif zero(hx) and zero(x):
                branch = 'vhx=vx=0'
            elif zero(hy) and zero(y):
                branch = 'vhy=vy=0'
            else:
                branch = 'general'
        else:
            label = 'C6'
            if not zero(hx) and not zero(y) and zero(ax):
                branch = 'vhx,vy'
            elif not zero(hy) and not zero(x) and zero(ax):
                branch = 'vhy,vx'
            else:
                branch = 'general'
    return Classification(label, branch, operator, (lam0, lplus, lminus), zero_tol)


class JordanChain:
    """Generalized eigenvectors x¹..xʳ for one eigenvalue (x¹ is the eigenvector)."""

    def __init__(self, eigenvalue: complex, coordinates: Sequence[np.ndarray],
                 vectors: Sequence[np.ndarray], names: Sequence[str]) -> None:
        self.eigenvalue = complex(eigenvalue)
        self.coordinates = [np.asarray(c, dtype=complex) for c in coordinates]
        self.vectors = [np.asarray(v, dtype=complex) for v in vectors]
        self.names = list(names)

    @property
    def rank(self) -> int:
        return len(self.coordinates)

    def residuals(self, closed_loop: np.ndarray) -> List[float]:
        """‖(A - λI)x¹‖ and ‖(A - λI)xᵏ - xᵏ⁻¹‖ for a full n×n closed-loop matrix."""
        out, previous = [], None
        for x in self.vectors:
            image = closed_loop @ x - self.eigenvalue * x
            out.append(float(linalg.norm(image if previous is None else image - previous)))
            previous = x
        return out

    def to_dict(self) -> dict:
        return {'eigenvalue': [self.eigenvalue.real, self.eigenvalue.imag],
                'names': self.names,
                'coordinates': [[[float(v.real), float(v.imag)] for v in c] for c in self.coordinates]}


class SpectralReport:
    """Case label, eigenvalues and Jordan chains of the closed loop on S."""

    def __init__(self, classification: Classification, chains: List[JordanChain],
                 basis: ShapeBasis) -> None:
        self.classification = classification
        self.chains = chains
        self.basis = basis

    label = property(lambda self: self.classification.label)
    branch = property(lambda self: self.classification.branch)
    eigenvalues = property(lambda self: self.classification.eigenvalues)
    sigma = property(lambda self: self.classification.sigma)
    kappa = property(lambda self: self.classification.kappa)
    delta_v = property(lambda self: self.classification.delta_v)

    def coordinate_matrix(self) -> np.ndarray:
        """3×3 matrix whose columns are all chain vectors in basis coordinates."""
        return np.column_stack([c for chain in self.chains for c in chain.coordinates])

    def residuals(self, closed_loop: np.ndarray) -> List[float]:
        return [r for chain in self.chains for r in chain.residuals(closed_loop)]

    def to_dict(self) -> dict:
        return {'case_label': self.label,
                'branch': self.branch,
                'kappa': self.kappa,
                'delta_v': list(self.delta_v),
                'eigenvalues': [[v.real, v.imag] for v in map(complex, self.eigenvalues)],
                'sigma': [self.sigma.real, self.sigma.imag],
                'chains': [chain.to_dict() for chain in self.chains]}

    def __str__(self) -> str:
        return f'<SpectralReport {self.label} eigenvalues={[complex(v) for v in self.eigenvalues]}>'

    def __repr__(self) -> str:
        return str(self)


def _descend(matrix: np.ndarray, eigenvalue: complex, top: np.ndarray, rank: int) -> List[np.ndarray]:
    """[x¹, ..., xʳ] with xᵏ⁻¹ = (κA - λI)xᵏ, from the top vector xʳ."""
    shifted = matrix - eigenvalue * np.eye(3)
    chain = [np.asarray(top, dtype=complex)]
    while len(chain) < rank:
        chain.insert(0, shifted @ chain[0])
    return chain


def _prefer(primary: np.ndarray, alternative: np.ndarray) -> np.ndarray:
    """Keep the primary closed form unless it has (nearly) vanished."""
    if linalg.norm(primary[1:]) >= 1e-3 * linalg.norm(alternative[1:]):
        return primary
    return alternative


def _eigenvector(operator: ReducedOperator, eigenvalue: complex) -> np.ndarray:
    """Eigenvector γ·1 + vhy·Re(p*) + (l/κ - vax)·Im(p*) for a nonzero eigenvalue l."""
    vx, vy, vax, vay, vhx, vhy = operator.delta_v
    mu = eigenvalue / operator.kappa
    if abs(mu) < ZERO_TOL * max(abs(v) for v in operator.delta_v):
        raise ConditioningError(f'eigenvector formula divides by l/κ = {mu}; re-check the case')
    primary = np.array([(vx * vhy + vy * (mu - vax)) / mu, vhy, mu - vax], dtype=complex)
    alternative = np.array([(vx * (mu - vay) + vy * vhx) / mu, mu - vay, vhx], dtype=complex)
    return _prefer(primary, alternative)


def _kernel_direction(operator: ReducedOperator) -> np.ndarray:
    """[0, k] with N·k = 0 for the rank-one motion block N."""
    vx, vy, vax, vay, vhx, vhy = operator.delta_v
    return _prefer(np.array([0, vhy, -vax], dtype=complex), np.array([0, vay, -vhx], dtype=complex))


def _chains_for(classification: Classification) -> List[Tuple[complex, List[np.ndarray], List[str]]]:
    op = classification.operator
    K = op.matrix
    vx, vy, vax, vay, vhx, vhy = op.delta_v
    label, branch = classification.label, classification.branch
    _, lplus, lminus = classification.eigenvalues

    if branch == 'static':
        return [(0j, [_ONE], ['1']), (0j, [_RE], ['Re(p*)']), (0j, [_IM], ['Im(p*)'])]

    if label == 'C1a':
        return [(0j, [_ONE], ['1']),
                (lplus, [_eigenvector(op, lplus)], ['x(l+)']),
                (lminus, [_eigenvector(op, lminus)], ['x(l-)'])]

    if label == 'C1b':
        s = (vax + vay) / 2
        return [(0j, [_ONE], ['1']),
                (lplus, [np.array([vx, s, 0], dtype=complex)], ['x(l+)']),
                (lminus, [np.array([vy, 0, s], dtype=complex)], ['x(l-)'])]

    if label == 'C2':
        s = (vax + vay) / 2
        if branch == 'vhx=0':
            top = np.array([vy / vhy, 1, s / vhy], dtype=complex)
        elif branch == 'vhy=0':
            top = np.array([vx / vhx, s / vhx, 1], dtype=complex)
        else:
            nilpotent = np.array([[vax - s, vhy], [vhx, vay - s]])
            w = np.eye(2)[int(np.argmax(linalg.norm(nilpotent, axis=0)))]
            r = np.array([vx, vy])
            a = (s * r.dot(w) - r.dot(nilpotent @ w)) / s ** 2
            top = np.array([a, w[0], w[1]], dtype=complex)
        return [(0j, [_ONE], ['1']),
                (lplus, _descend(K, lplus, top, 2), ['x(l)^1', 'x(l)^2'])]

    if label in ('C3', 'C4'):
        nonzero = lplus if abs(lplus) >= abs(lminus) else lminus
        x_l = (nonzero, [_eigenvector(op, nonzero)], ['x(l)'])
        if label == 'C3':
            x0 = np.array([0, vy, -vx], dtype=complex)
            if linalg.norm(x0) < ZERO_TOL * max(abs(v) for v in op.delta_v):
                x0 = _kernel_direction(op)
            return [(0j, [_ONE], ['1']), (0j, [x0], ['x0']), x_l]
        return [(0j, _descend(K, 0j, _kernel_direction(op), 2), ['x0^1', 'x0^2']), x_l]

    if label == 'C5':
        if branch == 'vhx=vx=0':
            top, y0 = _IM, np.array([vhy, -vy, 0], dtype=complex)
        elif branch == 'vhy=vy=0':
            top, y0 = _RE, np.array([vhx, 0, -vx], dtype=complex)
        elif branch == 'vhx=vhy=0':
            top = np.array([0, vx, 1j * vy], dtype=complex)
            y0 = np.array([0, vy, -vx], dtype=complex)
        else:
            top = np.eye(3, dtype=complex)[1 + int(np.argmax(linalg.norm(op.a_vstar[:, 1:], axis=0)))]
            kernel = linalg.null_space(op.a_vstar)
            first = K @ top
            y0 = max(kernel.T, key=lambda y: abs(linalg.det(np.column_stack([first, top, y]))))
            y0 = y0.astype(complex)
        return [(0j, _descend(K, 0j, top, 2), ['x0^1', 'x0^2']), (0j, [y0], ['y0'])]

    # C6
    if branch == 'vhx,vy':
        top = np.array([0, vy, 0], dtype=complex)
    elif branch == 'vhy,vx':
        top = np.array([0, 0, vx], dtype=complex)
    else:
        chained = np.array([vx * vax + vy * vhx, vx * vhy + vy * vay])
        top = np.eye(3, dtype=complex)[1 + int(np.argmax(np.abs(chained)))]
    return [(0j, _descend(K, 0j, top, 3), ['x0^1', 'x0^2', 'x0^3'])]


def build_chains(classification: Classification, basis: ShapeBasis) -> SpectralReport:
    """Instantiate the closed-form (generalized) eigenvectors of the classified case.

       Chain vectors are built in basis coordinates and lifted to configurations
       through phi. A ConditioningWarning is emitted when a vector residual exceeds
       the relative tolerance.
    """
    K = classification.operator.matrix
    scale = max(1.0, float(linalg.norm(K, 2)))
    chains = []
    for eigenvalue, coords, names in _chains_for(classification):
        chain = JordanChain(eigenvalue, coords, [basis.lift(c) for c in coords], names)
        shifted = K - chain.eigenvalue * np.eye(3)
        previous = np.zeros(3)
        for name, c in zip(names, chain.coordinates):
            residual = linalg.norm(shifted @ c - previous)
            size = linalg.norm(c)
            if size == 0 or residual > RESIDUAL_TOL * scale * size:
                message = (f'{classification.label}: chain vector {name} is ill-conditioned '
                           f'(‖x‖ = {size:.3e}, residual {residual:.3e}); re-check the case')
                log.warning(message)
                warnings.warn(ConditioningWarning(message))
            previous = c
        chains.append(chain)
    return SpectralReport(classification, chains, basis)


class AnalyticTrajectory:
    """Closed-form p(t) = Σ α·e^{λt}·(xᵏ + xᵏ⁻¹·t + xᵏ⁻²·t²/2 + ...) for p(0) in S."""

    def __init__(self, report: SpectralReport, alphas: np.ndarray) -> None:
        self.report = report
        self.alphas = np.asarray(alphas, dtype=complex)

    @property
    def case_label(self) -> str:
        return self.report.label

    @property
    def terms(self) -> List[str]:
        """Human-readable terms of the closed-form sum."""
        out, index = [], 1
        for chain in self.report.chains:
            lam = chain.eigenvalue
            for k in range(chain.rank):
                parts = [chain.names[k - j] + ('' if j == 0 else '·t' if j == 1 else f'·t^{j}/{math.factorial(j)}')
                         for j in range(k + 1)]
                body = parts[0] if len(parts) == 1 else '(' + ' + '.join(parts) + ')'
                growth = '' if lam == 0 else f'·exp({lam:.6g}·t)'
                out.append(f'α{index}·{body}{growth}')
                index += 1
        return out

    def coordinates(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """Basis coordinates [c1, c2, c3] at time(s) `t` (shape (..., 3))."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        result = np.zeros((t.size, 3), dtype=complex)
        index = 0
        for chain in self.report.chains:
            growth = np.exp(chain.eigenvalue * t)
            for k in range(chain.rank):
                polynomial = np.zeros((t.size, 3), dtype=complex)
                for j in range(k + 1):
                    polynomial += np.outer(t ** j / math.factorial(j), chain.coordinates[k - j])
                result += self.alphas[index] * growth[:, None] * polynomial
                index += 1
        return result[0] if scalar else result

    def __call__(self, t: Union[float, np.ndarray]) -> np.ndarray:
        """Configuration at time `t` (or a T×n array for a vector of times)."""
        return self.coordinates(t) @ self.report.basis.phi.T

    def __str__(self) -> str:
        return f'<AnalyticTrajectory {self.case_label} alphas={np.round(self.alphas, 6).tolist()}>'

    def __repr__(self) -> str:
        return str(self)


def analytic_solution(p0: Sequence[complex], report: SpectralReport) -> AnalyticTrajectory:
    """Express p0 in the chain vectors and return the closed-form trajectory.

       Raises OutOfShapeError if p0 is not in S and ConditioningError if the chain
       vectors do not span S numerically.
    """
    basis = report.basis
    p0 = as_configuration(p0, basis.node_count)
    distance = basis.distance(p0)
    if distance > SHAPE_TOL * max(1.0, float(linalg.norm(p0))):
        raise OutOfShapeError(f'initial configuration is {distance:.3e} away from the shape set')
    V = report.coordinate_matrix()
    condition = np.linalg.cond(V)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise ConditioningError(f'{report.label}: chain vectors do not span the shape set '
                                f'(condition number {condition:.3e})')
    alphas = linalg.solve(V, basis.coordinates(p0))
    return AnalyticTrajectory(report, alphas)
