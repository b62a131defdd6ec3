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

"""Tests for the spectral classification, Jordan chains and closed-form trajectories."""

# standard libs
import warnings

# external libs
import numpy as np
import pytest
from numpy.testing import assert_allclose

# internal libs
from affinform.core.exceptions import OutOfShapeError
from affinform.formation import AffineCoords
from affinform.analysis import CASE_LABELS, ReducedOperator, classify, build_chains, analytic_solution
from affinform.simulation import compare_with_analytic
from affinform.datasets.synthetic import SyntheticFormations


@pytest.mark.parametrize('delta_v, label', [
    ((0.5, 0.0, 0.0, 0.0, -1.0, 1.0), 'C1a'),
    ((1.0, 2.0, 0.5, 0.5, 0.0, 0.0), 'C1b'),
    ((1.0, 0.5, -0.2, -0.2, 0.0, 0.6), 'C2'),
    ((0.5, 0.0, 0.3, 0.0, 0.0, 0.0), 'C3'),
    ((0.0, 0.5, 0.3, 0.0, 0.0, 0.0), 'C4'),
    ((1.0, 0.5, 0.0, 0.0, 0.0, 0.0), 'C5'),
    ((1.0, 0.0, 0.0, 0.0, 0.0, 0.5), 'C6'),
])
def test_classify_examples(delta_v, label):
    assert classify(AffineCoords(*delta_v), 1.0).label == label


@pytest.mark.parametrize('delta_v, branch', [
    ((1.0, 0.5, 0.0, 0.0, 0.0, 0.0), 'vhx=vhy=0'),
    ((0.0, 1.0, 0.0, 0.0, 0.0, 0.5), 'vhx=vx=0'),
    ((1.0, 0.0, 0.0, 0.0, 0.5, 0.0), 'vhy=vy=0'),
])
def test_classify_translation_branches(delta_v, branch):
    classification = classify(AffineCoords(*delta_v), 1.0)
    assert (classification.label, classification.branch) == ('C5', branch)


@pytest.mark.parametrize('delta_v, kappa', [(AffineCoords(), 1.0), (AffineCoords(1, 2, 3, 4, 5, 6), 0.0)])
def test_classify_static(delta_v, kappa):
    classification = classify(delta_v, kappa)
    assert (classification.label, classification.branch) == ('C5', 'static')
    assert classification.eigenvalues == (0j, 0j, 0j)


def test_classify_scale_invariant():
    delta_v = AffineCoords(0.5, 0, 0.3, 0, 0, 0)
    assert classify(delta_v * 1e-6, 1.0).label == classify(delta_v, 1.0).label == 'C3'


def test_classify_tolerance():
    with pytest.raises(ValueError):
        classify(AffineCoords(1), 1.0, zero_tol=0)


def test_reduced_operator():
    operator = ReducedOperator(AffineCoords(1, 2, 3, 4, 5, 6), 0.5)
    assert_allclose(operator.matrix, 0.5 * np.array([[0, 1, 2], [0, 3, 6], [0, 5, 4]]))
    assert operator.trace == 7 and operator.determinant == -18
    expected = np.sort_complex(np.linalg.eigvals(operator.matrix))
    assert_allclose(np.sort_complex(np.array(operator.eigenvalues())), expected, atol=1e-12)


@pytest.mark.parametrize('label', CASE_LABELS)
def test_chain_relations(square, label):
    synthetic = SyntheticFormations(seed=7)
    for _ in range(25):
        report = build_chains(classify(synthetic.delta_v_for(label), 0.9), square.basis)
        assert report.label == label
        K = report.classification.operator.matrix
        for chain in report.chains:
            shifted = K - chain.eigenvalue * np.eye(3)
            previous = np.zeros(3)
            for c in chain.coordinates:
                assert np.linalg.norm(c) > 0
                tol = 1e-8 * max(1, np.linalg.norm(K, 2)) * np.linalg.norm(c)
                assert_allclose(shifted @ c, previous, atol=tol)
                previous = c
        assert np.linalg.matrix_rank(report.coordinate_matrix()) == 3


def test_chain_residuals_full_space(square_system, synthetic):
    delta_v = synthetic.delta_v_for('C4')
    report = build_chains(classify(delta_v, 1.0), square_system.framework.basis)
    A = square_system.closed_loop(delta_v, 1.0)
    assert max(report.residuals(A)) < 1e-8


def test_eigenvalues_match_operator(square, synthetic):
    delta_v = synthetic.delta_v_for('C1a')
    report = build_chains(classify(delta_v, 1.3), square.basis)
    computed = np.sort_complex(np.array(report.eigenvalues))
    assert_allclose(computed, np.sort_complex(np.linalg.eigvals(report.classification.operator.matrix)),
                    atol=1e-10)


def test_analytic_initial_condition(square, synthetic):
    p0 = synthetic.point_in_shape(square.basis)
    report = build_chains(classify(synthetic.delta_v_for('C6'), 1.0), square.basis)
    analytic = analytic_solution(p0, report)
    assert_allclose(analytic(0.0), p0, atol=1e-12)
    assert analytic(np.linspace(0, 1, 5)).shape == (5, 4)
    assert len(analytic.terms) == 3


def test_analytic_rejects_off_shape(square, synthetic):
    report = build_chains(classify(synthetic.delta_v(), 1.0), square.basis)
    with pytest.raises(OutOfShapeError):
        analytic_solution(synthetic.point_off_shape(square.basis), report)


@pytest.mark.parametrize('label', CASE_LABELS)
def test_analytic_matches_integration(square_system, label):
    synthetic = SyntheticFormations(seed=11)
    basis = square_system.framework.basis
    for _ in range(20):
        p0 = synthetic.point_in_shape(basis)
        with warnings.catch_warnings():
            warnings.simplefilter('ignore')
            report = compare_with_analytic(square_system, p0, synthetic.delta_v_for(label), 1.0, 3.0,
                                           method='rk4', dt=1e-5, record_every=10000)
        assert report.report.label == label
        assert report.relative_error <= 1e-4


def test_report_serializes(square):
    report = build_chains(classify(AffineCoords(0, 0.5, 0.3, 0, 0, 0), 1.0), square.basis)
    data = report.to_dict()
    assert data['case_label'] == 'C4'
    assert [len(chain['coordinates']) for chain in data['chains']] == [2, 1]
