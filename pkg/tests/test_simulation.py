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

"""Tests for schedules and the fixed-step integrator."""

# external libs
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import linalg

# internal libs
from affinform import datasets
from affinform.core.exceptions import DivergenceError
from affinform.formation import AffineCoords, GainMatrix, FormationSystem
from affinform.analysis import stability_bound
from affinform.io import load_scenario
from affinform.simulation import (Schedule, AdaptedFrame, integrate, step_matrix, exponential_fit,
                                  compare_with_analytic)


def test_schedule_segments():
    schedule = Schedule([(0, AffineCoords(1.0), 1.0), (2.5, AffineCoords(0, 1.0), 0.5)], 4.0)
    assert len(schedule) == 2
    first, second = schedule.segments
    assert (first.t_start, first.t_end) == (0.0, 2.5)
    assert (second.t_start, second.t_end, second.kappa) == (2.5, 4.0, 0.5)
    assert schedule.segment_at(2.4) is first
    assert schedule.segment_at(2.5) is second
    assert schedule.segment_at(4.0) is second
    with pytest.raises(ValueError):
        schedule.segment_at(4.5)


@pytest.mark.parametrize('segments, total', [
    ([], 1.0),
    ([(0.5, AffineCoords(), 1.0)], 1.0),
    ([(0, AffineCoords(), 1.0), (0, AffineCoords(), 1.0)], 1.0),
    ([(0, AffineCoords(), 1.0), (1.0, AffineCoords(), 1.0)], 1.0),
    ([(0, AffineCoords(), 1.0)], 0.0),
])
def test_schedule_invalid(segments, total):
    with pytest.raises(ValueError):
        Schedule(segments, total)


def test_schedule_from_dict():
    data = {'total_time': 3, 'segments': [{'t_start': 0, 'delta_v': [1, 0, 0, 0, 0, 0]},
                                          {'t_start': 1, 'delta_v': [0, 0, 0, 0, 0, 1], 'kappa': 2}]}
    schedule = Schedule.from_dict(data, default_kappa=0.5)
    assert [s.kappa for s in schedule] == [0.5, 2.0]
    assert schedule.to_dict()['segments'][1]['delta_v'] == [0, 0, 0, 0, 0, 1]
    with pytest.raises(ValueError):
        Schedule.from_dict({'segments': []})


def test_step_matrix():
    A = np.array([[-1.0, 0.5], [0.2, -2.0]])
    assert_allclose(step_matrix(A, 0.01, 'euler'), np.eye(2) + 0.01 * A)
    assert_allclose(step_matrix(A, 0.01, 'rk4'), linalg.expm(0.01 * A), atol=1e-9)
    with pytest.raises(ValueError):
        step_matrix(A, 0.01, 'leapfrog')


@pytest.mark.parametrize('method', ['euler', 'rk4'])
def test_translation(square_system, method):
    p0 = square_system.framework.p_star + (1 - 2j)
    schedule = Schedule.constant(AffineCoords(1.0), 1.0, 2.0)
    trajectory = integrate(p0, schedule, square_system, method=method, dt=0.1)
    assert len(trajectory) == 21
    assert trajectory.times[-1] == pytest.approx(2.0)
    assert_allclose(trajectory.states[-1], p0 + 2.0, atol=1e-10)
    assert_allclose(trajectory.shape_error, 0, atol=1e-10)
    assert_allclose(trajectory.velocity_error, 0, atol=1e-10)
    assert_allclose(trajectory.control_norms, 1.0, atol=1e-10)


def test_closing_step(square_system):
    schedule = Schedule.constant(AffineCoords(1.0), 1.0, 1.0)
    trajectory = integrate(square_system.framework.p_star, schedule, square_system, dt=0.3)
    assert_allclose(trajectory.times, [0, 0.3, 0.6, 0.9, 1.0])
    assert_allclose(trajectory.states[-1], square_system.framework.p_star + 1.0, atol=1e-10)


def test_record_every(square_system):
    schedule = Schedule([(0, AffineCoords(1.0), 1.0), (1.0, AffineCoords(0, 1.0), 1.0)], 2.0)
    trajectory = integrate(square_system.framework.p_star, schedule, square_system,
                           dt=0.01, record_every=25)
    assert_allclose(trajectory.times, [0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])
    assert trajectory.segments.tolist() == [0, 0, 0, 0, 1, 1, 1, 1, 1]
    assert_allclose(trajectory.states[-1], square_system.framework.p_star + 1 + 1j, atol=1e-10)


def test_integrate_invalid(square_system):
    schedule = Schedule.constant(AffineCoords(1.0), 1.0, 1.0)
    p_star = square_system.framework.p_star
    with pytest.raises(ValueError):
        integrate(p_star, schedule, square_system, method='midpoint')
    with pytest.raises(ValueError):
        integrate(p_star, schedule, square_system, dt=2.0)
    with pytest.raises(ValueError):
        integrate(p_star, schedule, square_system, record_every=0)


def test_divergence(square_system):
    schedule = Schedule.constant(AffineCoords(0, 0, 50, 50, 0, 0), 1.0, 10.0)
    with pytest.raises(DivergenceError) as error:
        integrate(square_system.framework.p_star, schedule, square_system, dt=1e-2)
    assert error.value.last_time < 10.0
    assert np.all(np.isfinite(error.value.last_state))


def test_trajectory_frame(square_system):
    schedule = Schedule.constant(AffineCoords(1.0), 1.0, 0.5)
    frame = integrate(square_system.framework.p_star, schedule, square_system, dt=0.1).to_frame()
    assert list(frame.columns) == (['t', 'x1', 'y1', 'x2', 'y2', 'x3', 'y3', 'x4', 'y4',
                                    'shape_error', 'velocity_error', 'u1', 'u2', 'u3', 'u4'])
    assert len(frame) == 6


def test_shape_error_decays(square_system, synthetic):
    system = square_system.with_gain(5.0)
    p0 = synthetic.point_off_shape(system.framework.basis)
    schedule = Schedule.constant(AffineCoords(1.0), 1.0, 5.0)
    trajectory = integrate(p0, schedule, system, dt=1e-3, record_every=10)
    assert trajectory.shape_error[0] == pytest.approx(1.0)
    assert trajectory.shape_error[-1] < 1e-6
    fit = exponential_fit(trajectory)
    assert fit.applicable
    assert fit.rate < 0
    assert fit.r_squared >= 0.98


def test_zero_motion_decay_rate(square_system, synthetic):
    p0 = synthetic.point_off_shape(square_system.framework.basis)
    schedule = Schedule.constant(AffineCoords(), 1.0, 20.0)
    trajectory = integrate(p0, schedule, square_system, dt=1e-3, record_every=100)
    assert np.all(np.diff(trajectory.shape_error) < 0)
    assert trajectory.shape_error[-1] <= 1e-6
    fit = exponential_fit(trajectory)
    assert fit.applicable
    assert fit.rate == pytest.approx(-1.0, rel=0.1)


def test_gain_below_bound(square, square_weights, square_basis, synthetic):
    delta_v = AffineCoords(0, 0, 1, 1, 0, 0)
    gain = GainMatrix.identity(4)
    h_l = stability_bound(square_weights, gain, square_basis.combine(delta_v) @ square.incidence.T,
                          1.0, square.basis)
    p0 = synthetic.point_off_shape(square.basis)
    schedule = Schedule.constant(delta_v, 1.0, 10.0)
    for factor, converges in ((5.0, True), (0.1, False)):
        system = FormationSystem(square, square_weights, gain, square_basis, h=factor * h_l)
        try:
            trajectory = integrate(p0, schedule, system, dt=1e-3, record_every=100)
        except DivergenceError:
            assert not converges
            continue
        assert (trajectory.shape_error[-1] < trajectory.shape_error[0]) == converges


def test_rotation_preserves_distances(square_system):
    schedule = Schedule.constant(AffineCoords(0, 0, 0, 0, -0.5, 0.5), 1.0, 6.0)
    trajectory = integrate(square_system.framework.p_star, schedule, square_system,
                           dt=1e-3, record_every=100)
    states = trajectory.states
    distances = np.abs(states[:, :, None] - states[:, None, :])
    assert_allclose(distances, np.broadcast_to(distances[0], distances.shape), atol=1e-8)
    assert_allclose(trajectory.shape_error, 0, atol=1e-10)


def test_rk4_order(square_system):
    delta_v = AffineCoords(0.5, 0, 0, 0, -1, 1)
    p0 = square_system.framework.p_star
    coarse = compare_with_analytic(square_system, p0, delta_v, 1.0, 3.0, dt=0.1, record_every=5)
    fine = compare_with_analytic(square_system, p0, delta_v, 1.0, 3.0, dt=0.05, record_every=10)
    assert_allclose(coarse.trajectory.times, fine.trajectory.times)
    assert 14 < coarse.max_error / fine.max_error < 18


@pytest.mark.parametrize('label', ['C1', 'C2', 'C3', 'C4', 'C5', 'C6'])
def test_bundled_cases_against_closed_form(square_system, label):
    scenario = load_scenario(datasets.scenario_path(f'sim2_case{label}'))
    segment = scenario.schedule.segments[0]
    p0 = scenario.initial_configuration()
    for method, tolerance in (('euler', 1e-2), ('rk4', 1e-5)):
        report = compare_with_analytic(square_system, p0, segment.delta_v, segment.kappa, 3.0,
                                       method=method, dt=1e-3, record_every=100)
        assert report.relative_error <= tolerance


def test_adapted_frame(square, square_system, synthetic):
    frame = AdaptedFrame(square.basis)
    assert_allclose(frame.matrix.T @ frame.matrix, np.eye(4), atol=1e-12)
    inside = synthetic.point_in_shape(square.basis)
    y = frame.coordinates(inside)
    assert np.all(y[3:] == 0)
    assert_allclose(frame.configuration(y), inside, atol=1e-12)
    outside = synthetic.point_off_shape(square.basis, distance=1e-9)
    assert np.linalg.norm(frame.coordinates(outside)[3:]) == pytest.approx(1e-9, rel=1e-4)
    closed_loop = square_system.closed_loop(AffineCoords(0.5, 0, 0.3, 0, -1, 1), 1.0)
    assert np.all(frame.step(step_matrix(closed_loop, 0.01))[3:, :3] == 0)
    generic = np.random.default_rng(0).standard_normal((4, 4))
    assert np.any(frame.step(generic)[3:, :3] != 0)


def test_in_shape_start_holds_under_growth(square, square_weights, square_basis):
    # off-shape growth rate is 2s/3 - h for a uniform expansion of the square at rate s
    system = FormationSystem(square, square_weights, GainMatrix.identity(4), square_basis, h=0.1)
    schedule = Schedule.constant(AffineCoords(0, 0, 0.2, 0.2, 0, 0), 1.0, 40.0)
    trajectory = integrate(square.p_star + (3 - 2j), schedule, system, dt=1e-3, record_every=1000)
    scale = np.abs(trajectory.states).max()
    assert trajectory.shape_error.max() <= 1e-12 * scale
