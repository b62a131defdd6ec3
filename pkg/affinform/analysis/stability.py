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

"""Lower bound on the stabilization gain h and projectors for a general gain K."""

# standard libs
from typing import Tuple

# external libs
import numpy as np
from scipy import linalg

# internal libs
from ..core.exceptions import StabilityPreconditionError, RankDefectError
from ..formation.core import ShapeBasis
from ..formation.weights import StressWeights, GainMatrix, ZERO_EIG_TOL


# ‖G·Gᴴ - Gᴴ·G‖ <= NORMAL_TOL·‖G‖² takes the eigenbasis path
NORMAL_TOL = 1e-10


class LyapunovSolution:
    """Q solving Q·J + Jᴴ·Q = 2I, with J the triangular (or diagonal) form used."""

    def __init__(self, j2: np.ndarray, q: np.ndarray, path: str) -> None:
        self.j2 = j2
        self.q = q
        self.path = path

    @property
    def residual(self) -> float:
        m = self.q.shape[0]
        if m == 0:
            return 0.0
        return float(linalg.norm(self.q @ self.j2 + self.j2.conj().T @ self.q - 2 * np.eye(m), 2))

    @property
    def q_norm(self) -> float:
        return float(linalg.norm(self.q, 2)) if self.q.size else 0.0


class StabilityReport:
    """h_l = |κ|·‖Q‖₂·‖M·Bᵀ‖₂ together with the pieces it is built from."""

    def __init__(self, h_l: float, kappa: float, mbt_norm: float, lyapunov: LyapunovSolution) -> None:
        self.h_l = h_l
        self.kappa = kappa
        self.mbt_norm = mbt_norm
        self.lyapunov = lyapunov

    def to_dict(self) -> dict:
        return {'h_l': self.h_l, 'kappa': self.kappa, 'mbt_norm': self.mbt_norm,
                'q_norm': self.lyapunov.q_norm, 'lyapunov_path': self.lyapunov.path,
                'lyapunov_residual': self.lyapunov.residual}


def complement_block(weights: StressWeights, gain: GainMatrix, basis: ShapeBasis) -> np.ndarray:
    """Uᵀ·K·L·U with U an orthonormal basis of the orthogonal complement of S.

       In the orthogonal frame [basis of S, U] the closed loop is block upper
       triangular and this block drives the distance to S.
    """
    U = basis.complement
    return U.T @ gain.matrix @ weights.laplacian @ U


def off_shape_growth(closed_loop: np.ndarray, basis: ShapeBasis) -> float:
    """Largest real part among the eigenvalues of the closed loop on the complement of S.

       Negative when S attracts; zero or positive when an off-shape component
       persists or grows (for instance when L has fewer than n - 3 nonzero eigenvalues).
    """
    U = basis.complement
    if U.shape[1] == 0:
        return -np.inf
    return float(linalg.eigvals(U.T @ np.asarray(closed_loop) @ U).real.max())


def _triangular_lyapunov(R: np.ndarray) -> np.ndarray:
    """Back-substitution for Q·R + Rᴴ·Q = 2I with R upper triangular."""
    m = R.shape[0]
    Q = np.zeros((m, m), dtype=complex)
    for j in range(m):
        for i in range(m):
            value = (2.0 if i == j else 0.0) - Q[i, :j] @ R[:j, j] - R[:i, i].conj() @ Q[:i, j]
            Q[i, j] = value / (R[j, j] + R[i, i].conj())
    return Q


def solve_lyapunov(block: np.ndarray) -> LyapunovSolution:
    """Solve the Lyapunov equation on the complement block.

       Normal blocks use their unitary eigenbasis (Q diagonal with q_ii = 1/Re(λ_i));
       others use the complex Schur form and triangular back-substitution.
    """
    block = np.asarray(block)
    m = block.shape[0]
    if m == 0:
        empty = np.zeros((0, 0), dtype=complex)
        return LyapunovSolution(empty, empty, 'empty')
    eigenvalues = linalg.eigvals(block)
    if np.any(eigenvalues.real <= 0):
        bad = eigenvalues[eigenvalues.real <= 0]
        raise StabilityPreconditionError(f'complement block has eigenvalues with non-positive '
                                         f'real part: {np.round(bad, 12).tolist()}')
    scale = linalg.norm(block, 2)
    commutator = block @ block.conj().T - block.conj().T @ block
    if linalg.norm(commutator, 2) <= NORMAL_TOL * scale ** 2:
        j2 = np.diag(eigenvalues.astype(complex))
        q = np.diag(1.0 / eigenvalues.real).astype(complex)
        return LyapunovSolution(j2, q, 'eigen')
    R, _ = linalg.schur(block.astype(complex), output='complex')
    return LyapunovSolution(R, _triangular_lyapunov(R), 'schur')


def stability_analysis(weights: StressWeights, gain: GainMatrix, m_times_bt: np.ndarray,
                       kappa: float, basis: ShapeBasis) -> StabilityReport:
    """Full stability bound computation (see `stability_bound`)."""
    lyapunov = solve_lyapunov(complement_block(weights, gain, basis))
    mbt_norm = float(linalg.norm(m_times_bt, 2))
    h_l = abs(kappa) * lyapunov.q_norm * mbt_norm
    return StabilityReport(h_l, kappa, mbt_norm, lyapunov)


def stability_bound(weights: StressWeights, gain: GainMatrix, m_times_bt: np.ndarray,
                    kappa: float, basis: ShapeBasis) -> float:
    """Gain h_l = κ·‖Q‖₂·‖M·Bᵀ‖₂ above which the shape error decays exponentially."""
    return stability_analysis(weights, gain, m_times_bt, kappa, basis).h_l


def spectral_projector(operator: np.ndarray, basis: ShapeBasis) -> Tuple[np.ndarray, np.ndarray]:
    """Projector onto S along the image of `operator` (normally K·L), and its complement.

       Built from the right kernel (S) and the left kernel of the operator:
       P = phi·(Wᵀ·phi)⁻¹·Wᵀ. Raises RankDefectError unless rank = n - 3.
    """
    operator = np.asarray(operator, dtype=float)
    n = basis.node_count
    tol = ZERO_EIG_TOL * max(float(linalg.norm(operator, 2)), np.finfo(float).tiny)
    rank = int(np.sum(linalg.svdvals(operator) > tol))
    if rank != n - 3:
        raise RankDefectError(f'operator has rank {rank}, expected {n - 3}')
    phi = basis.phi.real
    if linalg.norm(operator @ phi, 2) > 1e-8 * max(1.0, linalg.norm(operator, 2) * linalg.norm(phi, 2)):
        raise RankDefectError('operator kernel differs from the shape set')
    left = linalg.null_space(operator.T, rcond=ZERO_EIG_TOL)
    if left.shape[1] != 3:
        raise RankDefectError(f'left kernel has dimension {left.shape[1]}, expected 3')
    gram = left.T @ phi
    if np.linalg.cond(gram) > 1e12:
        raise RankDefectError('left and right kernels are numerically orthogonal')
    proj_s = phi @ linalg.solve(gram, left.T)
    return proj_s, np.eye(n) - proj_s
