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

"""Tests for stress weights and gain validation."""

# standard libs
import warnings

# external libs
import numpy as np
import pytest
from numpy.testing import assert_allclose

# internal libs
from affinform import datasets
from affinform.core.exceptions import (WeightValidationError, GainValidationError, NoStressError,
                                       UnsupportedTopologyError, NotPSDWarning)
from affinform.formation import (Graph, Framework, StressWeights, GainMatrix, design_weights_complete,
                                 design_weights_general, validate_gain)


def test_square_laplacian(square_laplacian):
    weights = design_weights_complete(datasets.SQUARE)
    assert_allclose(weights.laplacian, square_laplacian, atol=1e-12)
    assert weights.is_psd()
    assert_allclose(weights.spectrum, [0, 0, 0, 1], atol=1e-12)


@pytest.mark.parametrize('n', [4, 5, 8])
def test_complete_weights_balance(synthetic, n):
    shape = synthetic.shape(n)
    framework = Framework(Graph.complete(n), shape)
    weights = design_weights_complete(shape)
    weights.check_balance(framework.basis)
    assert weights.is_psd()
    assert_allclose(weights.laplacian @ framework.basis.phi, 0, atol=1e-10)


def test_complete_weights_need_complete_graph():
    graph = Graph.from_one_based(4, [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3)])
    with pytest.raises(UnsupportedTopologyError):
        design_weights_complete(datasets.SQUARE, graph)


def test_general_weights_on_square(square, square_laplacian):
    weights = design_weights_general(square)
    assert_allclose(weights.laplacian, square_laplacian, atol=1e-9)


def test_general_weights_complete_six(synthetic):
    framework = Framework(Graph.complete(6), synthetic.shape(6))
    weights = design_weights_general(framework, seed=3)
    weights.check_balance(framework.basis)
    assert weights.laplacian.shape == (6, 6)
    assert np.linalg.norm(weights.laplacian, 2) == pytest.approx(1.0)


def test_general_weights_tree():
    framework = Framework(Graph(4, [(0, 1), (1, 2), (2, 3)]), [0, 1, 1 + 1j, 2 + 3j])
    with pytest.raises(NoStressError):
        design_weights_general(framework)


def test_general_weights_not_psd_warns():
    # node 5 hangs off the square by two bars, so it carries no stress
    framework = Framework(Graph.from_one_based(5, [(1, 2), (2, 3), (3, 4), (4, 1), (1, 3), (2, 4), (4, 5), (3, 5)]),
                          list(datasets.SQUARE) + [3 + 0.5j])
    with pytest.warns(NotPSDWarning):
        weights = design_weights_general(framework)
    assert not weights.is_psd()


def test_gain_identity_passes(square_weights):
    report = validate_gain(square_weights, GainMatrix.identity(4))
    assert report.passed
    assert report.zero_count == 3
    assert report.require() is report


def test_gain_negative_fails(square_weights):
    report = validate_gain(square_weights, GainMatrix(-np.ones(4)))
    assert not report.passed
    with pytest.raises(GainValidationError) as error:
        report.require()
    assert len(error.value.offending) == 1


def test_gain_positive_diagonal(square_weights):
    assert validate_gain(square_weights, GainMatrix([0.5, 1, 2, 3])).passed


@pytest.mark.parametrize('k', [[1, 0, 1, 1], [1, float('inf'), 1, 1]])
def test_gain_rejects_entries(k):
    with pytest.raises(ValueError):
        GainMatrix(k)


def test_weights_from_mapping(square, square_laplacian):
    mapping = {edge: -square_laplacian[edge] for edge in square.graph.edges}
    mapping.update({(j, i): w for (i, j), w in list(mapping.items())})
    weights = StressWeights.from_weights(square.graph, mapping)
    assert_allclose(weights.laplacian, square_laplacian, atol=1e-15)


def test_weights_asymmetric_mapping(square):
    with pytest.raises(WeightValidationError, match='not symmetric'):
        StressWeights.from_weights(square.graph, {(0, 1): 1.0, (1, 0): 2.0})


def test_weights_non_adjacent():
    graph = Graph(3, [(0, 1), (1, 2)])
    with pytest.raises(WeightValidationError):
        StressWeights.from_weights(graph, {(0, 2): 1.0})


def test_laplacian_asymmetric(square):
    L = np.zeros((4, 4))
    L[0, 1], L[0, 0] = -1.0, 1.0
    with pytest.raises(WeightValidationError):
        StressWeights(square.graph, L)


def test_unbalanced_weights(square):
    weights = StressWeights.from_weights(square.graph, np.ones(6))
    with pytest.raises(WeightValidationError):
        weights.check_balance(square.basis)


def test_weights_property(square_weights):
    assert square_weights.weights[(0, 1)] == pytest.approx(0.25)
    assert square_weights.weights[(0, 2)] == pytest.approx(-0.25)
