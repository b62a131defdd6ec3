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

"""Tests for motion parameters, the motion basis and closed-loop assembly."""

# external libs
import numpy as np
import pytest
from numpy.testing import assert_allclose

# internal libs
from affinform import datasets
from affinform.core.exceptions import UnreachableVelocityError, ValidationError, ZeroWeightError
from affinform.formation import (AffineCoords, GainMatrix, StressWeights, MotionBasis, MotionParameters,
                                 FormationSystem, affine_map, solve_agent_mu, build_m_matrix,
                                 build_motion_basis, assemble_modified, hardware_scaling)


def test_pinned_motion_parameters():
    framework = datasets.unit_square()
    mu = solve_agent_mu(0, framework.relative_refs(0), (1 - 1j) / np.sqrt(2), pinned=[2])
    assert mu[1] == pytest.approx(1 / np.sqrt(2), abs=1e-12)
    assert mu[3] == pytest.approx(-1 / np.sqrt(2), abs=1e-12)
    assert mu[2] == 0


def test_min_norm_motion_parameters(square):
    mu = solve_agent_mu(0, square.relative_refs(0), 1.0)
    assert_allclose([mu[1], mu[2], mu[3]], [1 / 6, -1 / 6, -1 / 3], atol=1e-12)


def test_unreachable_velocity():
    with pytest.raises(UnreachableVelocityError) as error:
        solve_agent_mu(4, [(1, 1 + 0j)], 1j)
    assert error.value.agent == 4


def test_fully_pinned_agent():
    assert solve_agent_mu(0, [(1, 1 + 0j)], 0.0, pinned=[1]) == {1: 0.0}
    with pytest.raises(UnreachableVelocityError):
        solve_agent_mu(0, [(1, 1 + 0j)], 1.0, pinned=[1])


def test_m_matrix_layout(square):
    mu = {(0, 1): 2.0, (1, 0): 3.0}
    M = build_m_matrix(square.graph, mu)
    assert M[0, 0] == 2.0 and M[1, 0] == -3.0
    assert np.count_nonzero(M) == 2


def test_motion_parameters_from_matrix(square, square_basis):
    M = square_basis['vax']
    params = MotionParameters.from_matrix(square.graph, M)
    assert_allclose(params.m_matrix, M)


@pytest.mark.parametrize('name', AffineCoords.MOTIONS)
def test_basis_targets(square, square_basis, name):
    B, p = square.incidence, square.p_star
    assert_allclose(square_basis[name] @ B.T @ p, affine_map(AffineCoords.unit(name), p), atol=1e-12)


def test_basis_identities(square, square_basis, synthetic):
    B, p = square.incidence, square.p_star
    for _ in range(50):
        delta_v = synthetic.delta_v(structured=True)
        mbt = square_basis.combine(delta_v) @ B.T
        assert_allclose(mbt @ np.ones(4), 0, atol=1e-12)
        assert_allclose(mbt @ p, affine_map(delta_v, p), atol=1e-12)


def test_basis_on_rings():
    framework = datasets.rings()
    basis = build_motion_basis(framework)
    assert max(basis.residuals().values()) < 1e-10
    assert basis['vx'].shape == (20, 38)


def test_basis_threaded_matches(square, square_basis):
    threaded = build_motion_basis(square, workers=3)
    for name in square_basis:
        assert_allclose(threaded[name], square_basis[name])


def test_pinned_basis(square):
    basis = build_motion_basis(square, pinned=[(0, 2)])
    k = square.graph.edge_index(0, 2)
    for name in basis:
        assert basis[name][0, k] == 0
    basis.check()


def test_rotation_and_shear(square, square_basis):
    B, p = square.incidence, square.p_star
    assert_allclose(square_basis.rotation() @ B.T @ p, 1j * p, atol=1e-12)
    assert_allclose(square_basis.cross_shear() @ B.T @ p, affine_map(AffineCoords(dhx=1, dhy=1), p),
                    atol=1e-12)


def test_basis_missing_matrix(square, square_basis):
    matrices = {name: square_basis[name] for name in square_basis if name != 'vhy'}
    with pytest.raises(ValidationError):
        MotionBasis(square, matrices)


def test_basis_check_detects_corruption(square, square_basis):
    matrices = {name: square_basis[name] for name in square_basis}
    matrices['vx'] = matrices['vx'] * 2
    with pytest.raises(ValidationError):
        MotionBasis(square, matrices).check()


def test_closed_loop(square, square_weights, square_basis):
    gain = GainMatrix([1, 2, 3, 4])
    delta_v = AffineCoords(0.5, 0, 0.1, -0.2, 0.3, 0)
    modified = assemble_modified(square_weights, gain, square_basis, delta_v, h=2.0, kappa=0.7)
    M = square_basis.combine(delta_v)
    expected = -2.0 * gain.matrix @ square_weights.laplacian + 0.7 * M @ square.incidence.T
    assert_allclose(modified.closed_loop, expected, atol=1e-14)
    assert_allclose(-gain.matrix @ modified.l_tilde, expected, atol=1e-14)
    assert_allclose(modified.v_star, affine_map(delta_v, square.p_star))


def test_closed_loop_preserves_shape_set(square_system, synthetic):
    A = square_system.closed_loop(synthetic.delta_v(), 0.8)
    basis = square_system.framework.basis
    assert_allclose(basis.proj_c @ A @ basis.phi, 0, atol=1e-12)


def test_system_validation(square, square_weights, square_basis):
    with pytest.raises(ValidationError):
        FormationSystem(square, square_weights, GainMatrix.identity(3), square_basis, h=1.0)
    with pytest.raises(ValueError):
        FormationSystem(square, square_weights, GainMatrix.identity(4), square_basis, h=0.0)
    system = FormationSystem(square, square_weights, GainMatrix.identity(4), square_basis, h=1.0)
    assert system.with_gain(3.0).h == 3.0


def test_hardware_scaling(square_weights, square_basis):
    delta_v = AffineCoords(1, 0, 0, 0, 0.5, -0.5)
    mu = square_basis.parameters(delta_v)
    scaling = hardware_scaling(square_weights, mu, h=2.0, kappa=0.5)
    weight = {frozenset(edge): w for edge, w in square_weights.weights.items()}
    for (i, j), s in scaling.items():
        w = weight[frozenset((i, j))]
        assert 2.0 * w * s == pytest.approx(2.0 * w - 0.5 * mu[(i, j)])


def test_hardware_scaling_zero_weight(square):
    weights = StressWeights.from_weights(square.graph, np.zeros(6))
    mu = MotionParameters(square.graph, {(0, 1): 1.0})
    with pytest.raises(ZeroWeightError):
        hardware_scaling(weights, mu, h=1.0, kappa=1.0)
