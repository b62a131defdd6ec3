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

"""Tests for graphs, shapes and affine coordinates."""

# external libs
import numpy as np
import pytest
from numpy.testing import assert_allclose

# internal libs
from affinform import datasets
from affinform.core.exceptions import GraphError, DegenerateShapeError
from affinform.formation import (Graph, ReferenceShape, Framework, AffineCoords, incidence_matrix,
                                 affine_map, compose, decode_to_r2, encode_from_r2, shape_basis,
                                 shape_distance, motion_projector)


def test_complete_graph_order():
    graph = Graph.complete(4)
    assert graph.edge_count == 6
    assert graph.edges[0] == (0, 1)
    assert graph.edges[-1] == (2, 3)
    assert graph.is_complete()
    assert graph.neighbors(0) == [1, 2, 3]


def test_graph_from_one_based():
    graph = Graph.from_one_based(3, [(1, 2), (2, 3)])
    assert graph.edges == ((0, 1), (1, 2))
    assert graph.edge_index(2, 1) == 1
    assert graph.has_edge(1, 0)
    assert not graph.has_edge(0, 2)
    assert graph.to_one_based() == [[1, 2], [2, 3]]


@pytest.mark.parametrize('edges', [
    [(0, 0), (0, 1), (1, 2)],           # self-loop
    [(0, 1), (1, 0), (1, 2)],           # duplicate pair
    [(0, 1), (2, 3)],                   # disconnected
    [(0, 1), (1, 7)],                   # node out of range
])
def test_graph_rejects_malformed(edges):
    with pytest.raises(GraphError):
        Graph(4, edges)


def test_graph_node_count_type():
    with pytest.raises(TypeError):
        Graph(0, [])


def test_edge_index_missing():
    with pytest.raises(GraphError):
        Graph.complete(3).edge_index(0, 0)


def test_reference_shape_centered():
    shape = ReferenceShape([1, 1j, 2 + 1j])
    assert abs(shape.p_star.sum()) < 1e-12
    assert shape.shift == pytest.approx((3 + 2j) / 3)


@pytest.mark.parametrize('positions', [[0, 1, 2, 3], [1j, 2j, 3j], [0, 1 + 1j]])
def test_reference_shape_degenerate(positions):
    with pytest.raises(DegenerateShapeError):
        ReferenceShape(positions)


def test_framework_size_mismatch():
    with pytest.raises(GraphError):
        Framework(Graph.complete(3), datasets.SQUARE)


def test_incidence_matrix(square):
    B = incidence_matrix(square.graph)
    assert B.shape == (4, 6)
    assert_allclose(B.sum(axis=0), 0)
    assert B[0, 0] == 1 and B[1, 0] == -1


def test_relative_refs(square):
    refs = dict(square.relative_refs(0))
    assert refs[1] == pytest.approx(-2j)
    assert refs[3] == pytest.approx(-2)


def test_identity_map(square):
    assert_allclose(affine_map(AffineCoords.identity(), square.p_star), square.p_star)


def test_rotation_map(square):
    assert_allclose(affine_map(AffineCoords.rotation(2.0), square.p_star), 2j * square.p_star)


def test_compose_matches_sequential(synthetic):
    x = synthetic.shape(5).p_star
    outer, inner = synthetic.delta_v(), synthetic.delta_v()
    assert_allclose(affine_map(compose(outer, inner), x), affine_map(outer, affine_map(inner, x)),
                    atol=1e-12)


def test_affine_coords_algebra():
    a = AffineCoords(1, 2, 3, 4, 5, 6)
    b = AffineCoords.unit('vhx')
    assert list(a + b) == [1, 2, 3, 4, 6, 6]
    assert list(2 * b) == [0, 0, 0, 0, 2, 0]
    assert list(-a - a + 2 * a) == [0] * 6
    assert a.c1 == 1 + 2j and a.c2 == 3 + 6j and a.c3 == 5 + 4j
    assert AffineCoords.from_array(a.to_array()) == a
    assert a.to_dict(motion=True)['vay'] == 4


@pytest.mark.parametrize('value', [1j, float('nan'), 'x'])
def test_affine_coords_rejects(value):
    with pytest.raises((TypeError, ValueError)):
        AffineCoords(dx=value)


def test_decode_encode_inverse():
    x = np.array([1 + 2j, -3 + 0.5j])
    assert_allclose(decode_to_r2(x), [1, 2, -3, 0.5])
    assert_allclose(encode_from_r2(decode_to_r2(x)), x)
    with pytest.raises(ValueError):
        encode_from_r2([1.0, 2.0, 3.0])


def test_shape_basis_projectors(synthetic):
    basis = shape_basis(synthetic.shape(7))
    assert_allclose(basis.proj_s @ basis.proj_s, basis.proj_s, atol=1e-12)
    assert_allclose(basis.proj_s + basis.proj_c, np.eye(7), atol=1e-12)
    assert basis.complement.shape == (7, 4)
    assert_allclose(basis.complement.T @ basis.phi.real, 0, atol=1e-12)


def test_shape_distance(square, synthetic):
    basis = square.basis
    p = synthetic.point_in_shape(basis)
    assert shape_distance(p, basis) < 1e-12
    assert shape_distance(affine_map(synthetic.delta_v(), square.p_star), basis) < 1e-12
    off = synthetic.point_off_shape(basis, distance=0.7)
    assert shape_distance(off, basis) == pytest.approx(0.7)


def test_basis_coordinates(square):
    basis = square.basis
    assert_allclose(basis.coordinates(basis.lift([1 + 1j, 2, 3j])), [1 + 1j, 2, 3j], atol=1e-12)


def test_motion_projector_translation():
    P = motion_projector(np.ones(4))
    assert_allclose(P, np.full((4, 4), 0.25), atol=1e-12)
    assert_allclose(motion_projector(np.zeros(4)), np.full((4, 4), 0.25), atol=1e-12)


def test_motion_projector_rotation(square):
    P = motion_projector(1j * square.p_star)
    assert_allclose(P, square.basis.proj_s, atol=1e-12)


@pytest.mark.parametrize('value, expected', [(None, 'info'), ('debug', 'debug'),
                                             (' WARNING ', 'warning'), ('loud', 'info')])
def test_log_level_from_environment(monkeypatch, value, expected):
    from affinform.core.logging import level_from_environment, LEVEL_VARIABLE
    if value is None:
        monkeypatch.delenv(LEVEL_VARIABLE, raising=False)
    else:
        monkeypatch.setenv(LEVEL_VARIABLE, value)
    assert level_from_environment() == expected
