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

"""Fixed-step integration of the closed-loop swarm under a schedule.

   Each segment is linear and time-invariant, so a step of either method is a
   fixed matrix: Euler advances by I + dt·A and RK4 by the fourth-order Taylor
   polynomial of dt·A. Runs of steps between recorded samples are applied as
   powers of that matrix.

   States are advanced in the orthogonal frame [basis of S, basis of its
   complement]. The closed loop maps S into S, so the step matrix is block upper
   triangular there and its lower-left block, when at rounding level, is held at
   exactly zero: a configuration in S never picks up an off-shape component from
   rounding.
"""

# standard libs
import math
from typing import List, Sequence

# external libs
import numpy as np
import pandas as pd
from scipy import linalg
from tqdm import tqdm

# internal libs
from ..core.logging import log
from ..core.exceptions import DivergenceError
from ..formation.core import AffineCoords, ShapeBasis, as_configuration, motion_projector
from ..formation.motion import FormationSystem
from ..analysis.spectral import (SpectralReport, AnalyticTrajectory, classify, build_chains,
                                 analytic_solution)
from ..statistics.fitting import ExponentialFit, fit_exponential
from .schedule import Schedule


DEFAULT_DT = 1e-3
METHODS = ('euler', 'rk4')

# states with a larger norm count as diverged
DIVERGENCE_LIMIT = 1e150

# slack when deciding whether dt divides a segment
_STEP_SLACK = 1e-9

# complement coordinates this small (relative to the state) are rounding of a state in S
ROUNDOFF_TOL = 1e3 * np.finfo(float).eps

# an S-to-complement step block below this (relative to the step) is rounding
LEAK_TOL = 1e-10


def step_matrix(closed_loop: np.ndarray, dt: float, method: str = 'rk4') -> np.ndarray:
    """One-step propagator of ṗ = A·p for the chosen method."""
    if method not in METHODS:
        raise ValueError(f'step_matrix: method must be one of {METHODS}, given "{method}"')
    A = dt * np.asarray(closed_loop, dtype=float)
    if method == 'euler':
        return np.eye(A.shape[0]) + A
    step, term = np.eye(A.shape[0]), np.eye(A.shape[0])
    for k in range(1, 5):
        term = term @ A / k
        step = step + term
    return step


class Trajectory:
    """Recorded samples of a run.

       Attributes
       ----------
       times: np.ndarray
           Strictly increasing sample times.
       states: np.ndarray
           T×n complex positions.
       velocities: np.ndarray
           T×n complex velocities ṗ under the segment active at each sample.
       shape_error: np.ndarray
           ‖proj_C·p(t)‖ per sample.
       velocity_error: np.ndarray
           ‖ṗ(t) - proj_M·ṗ(t)‖ per sample.
       control_norms: np.ndarray
           T×n per-agent speeds |ṗ_i(t)|.
       segments: np.ndarray
           Index of the active segment per sample.
    """

    def __init__(self, times: np.ndarray, states: np.ndarray, velocities: np.ndarray,
                 shape_error: np.ndarray, velocity_error: np.ndarray,
                 segments: np.ndarray) -> None:
        self.times = times
        self.states = states
        self.velocities = velocities
        self.shape_error = shape_error
        self.velocity_error = velocity_error
        self.segments = segments

    @property
    def control_norms(self) -> np.ndarray:
        return np.abs(self.velocities)

    @property
    def node_count(self) -> int:
        return self.states.shape[1]

    @property
    def peak_control_norm(self) -> float:
        return float(self.control_norms.max()) if self.times.size else 0.0

    def __len__(self) -> int:
        return self.times.size

    def to_frame(self) -> pd.DataFrame:
        """Table with columns t, x1, y1, ..., xn, yn, shape_error, velocity_error, u1, ..., un."""
        n = self.node_count
        data = {'t': self.times}
        for i in range(n):
            data[f'x{i + 1}'] = self.states[:, i].real
            data[f'y{i + 1}'] = self.states[:, i].imag
        data['shape_error'] = self.shape_error
        data['velocity_error'] = self.velocity_error
        for i in range(n):
            data[f'u{i + 1}'] = self.control_norms[:, i]
        return pd.DataFrame(data)

    def __str__(self) -> str:
        if not self.times.size:
            return '<Trajectory empty>'
        return f'<Trajectory samples={len(self)} t=[{self.times[0]:g}, {self.times[-1]:g}] n={self.node_count}>'

    def __repr__(self) -> str:
        return str(self)


def _segment_steps(duration: float, dt: float) -> List[float]:
    """Full steps of size dt plus a shorter closing step if dt does not divide `duration`."""
    count = int(math.floor(duration / dt + _STEP_SLACK))
    remainder = duration - count * dt
    if remainder > _STEP_SLACK * max(1.0, duration):
        return [dt] * count + [remainder]
    return [dt] * count


class AdaptedFrame:
    """Orthogonal frame [basis of S, basis of the complement of S].

       Coordinates y = Uᵀ·p split into the first three (inside S) and the rest
       (the off-shape component, with ‖y[3:]‖ equal to the shape error).
    """

    def __init__(self, basis: ShapeBasis) -> None:
        self.rank = basis.orthonormal.shape[1]
        self.matrix = np.hstack([basis.orthonormal, basis.complement])

    def coordinates(self, p: np.ndarray) -> np.ndarray:
        """Uᵀ·p, with an off-shape part at rounding level set to exactly zero."""
        y = self.matrix.T @ p
        if linalg.norm(y[self.rank:]) <= ROUNDOFF_TOL * max(1.0, float(linalg.norm(y))):
            y[self.rank:] = 0
        return y

    def configuration(self, y: np.ndarray) -> np.ndarray:
        return self.matrix @ y

    def step(self, phi: np.ndarray) -> np.ndarray:
        """Step matrix in frame coordinates; an S-to-complement block at rounding level is zeroed."""
        step = self.matrix.T @ phi @ self.matrix
        leak = step[self.rank:, :self.rank]
        if leak.size and linalg.norm(leak) <= LEAK_TOL * linalg.norm(step):
            step[self.rank:, :self.rank] = 0.0
        return step


class _Recorder:
    """Samples accumulated during integration."""

    def __init__(self) -> None:
        self.times, self.states, self.velocities = [], [], []
        self.segments, self.projectors = [], []

    def add(self, time: float, state: np.ndarray, closed_loop: np.ndarray, segment: int,
            projector: np.ndarray) -> None:
        self.times.append(time)
        self.states.append(state)
        self.velocities.append(closed_loop @ state)
        self.segments.append(segment)
        self.projectors.append(projector)

    def trajectory(self, basis: ShapeBasis) -> 'Trajectory':
        states = np.array(self.states)
        velocities = np.array(self.velocities)
        shape_error = linalg.norm(states @ basis.proj_c.T, axis=1)
        velocity_error = np.array([linalg.norm(v - P @ v) for v, P in zip(velocities, self.projectors)])
        return Trajectory(np.array(self.times), states, velocities, shape_error, velocity_error,
                          np.array(self.segments))


def _check_state(y: np.ndarray, t: float, last_time: float, last_state: np.ndarray) -> None:
    if not np.all(np.isfinite(y)) or linalg.norm(y) > DIVERGENCE_LIMIT:
        raise DivergenceError(f'state diverged before t = {t:.6g} (last finite state at '
                              f't = {last_time:.6g})', last_time=last_time, last_state=last_state)


def integrate(p0: Sequence[complex], schedule: Schedule, system: FormationSystem,
              method: str = 'rk4', dt: float = DEFAULT_DT, record_every: int = 1,
              progress: bool = False) -> Trajectory:
    """Integrate ṗ = -h·K·L·p + κ·M·Bᵀ·p over the schedule.

       Arguments
       ---------
       p0: Sequence[complex]
           Initial configuration.
       schedule: Schedule
           Piecewise-constant reference motions; the closed-loop matrix switches at
           segment starts and the state carries over.
       system: FormationSystem
           Designed formation supplying the closed-loop matrices.

       Options
       -------
       method: str (default='rk4')
           Either 'euler' or 'rk4'.
       dt: float (default=1e-3)
           Step size; must not exceed any segment length.
       record_every: int (default=1)
           Record every k-th step (segment starts and the final time are always recorded).
       progress: bool (default=False)
           Show a progress bar.

       Raises DivergenceError when the state becomes non-finite or explodes.
    """
    if method not in METHODS:
        raise ValueError(f'integrate: method must be one of {METHODS}, given "{method}"')
    if not dt > 0:
        raise ValueError(f'integrate: dt must be positive, given {dt}')
    if not isinstance(record_every, (int, np.integer)) or record_every < 1:
        raise ValueError(f'integrate: record_every must be a positive integer, given {record_every}')
    segments = schedule.segments
    shortest = min(segment.duration for segment in segments)
    if dt > shortest * (1 + _STEP_SLACK):
        raise ValueError(f'integrate: dt = {dt} exceeds the shortest segment ({shortest})')
    framework = system.framework
    frame = AdaptedFrame(framework.basis)
    y = frame.coordinates(as_configuration(p0, framework.node_count))

    recorder = _Recorder()
    total = sum(len(_segment_steps(segment.duration, dt)) for segment in segments)
    with tqdm(total=total, disable=not progress, desc='integrate', unit='step') as bar:
        for index, segment in enumerate(segments):
            A = system.closed_loop(segment.delta_v, segment.kappa)
            projector = motion_projector(system.reference_velocity(segment.delta_v, segment.kappa))
            steps = _segment_steps(segment.duration, dt)
            full = sum(1 for s in steps if s == dt)
            phi = frame.step(step_matrix(A, dt, method))
            stride = np.linalg.matrix_power(phi, record_every)
            t = segment.t_start

            recorder.add(t, frame.configuration(y), A, index, projector)
            done = 0
            while done + record_every <= full:
                last, last_t = y, t
                y = stride @ y
                done += record_every
                t = segment.t_start + done * dt
                _check_state(y, t, last_t, frame.configuration(last))
                bar.update(record_every)
                if done < full or len(steps) > full:
                    recorder.add(t, frame.configuration(y), A, index, projector)
            if done < full:
                last, last_t = y, t
                y = np.linalg.matrix_power(phi, full - done) @ y
                bar.update(full - done)
                t = segment.t_start + full * dt
                _check_state(y, t, last_t, frame.configuration(last))
            if len(steps) > full:
                last, last_t = y, t
                y = frame.step(step_matrix(A, steps[-1], method)) @ y
                bar.update(1)
                _check_state(y, segment.t_end, last_t, frame.configuration(last))
            if index == len(segments) - 1:
                recorder.add(segment.t_end, frame.configuration(y), A, index, projector)
            log.debug(f'integrated segment {index + 1}/{len(segments)} to t = {segment.t_end:g}')

    return recorder.trajectory(framework.basis)


class ComparisonReport:
    """Closed-form versus numerical positions on a common time grid."""

    def __init__(self, trajectory: Trajectory, analytic: AnalyticTrajectory, errors: np.ndarray) -> None:
        self.trajectory = trajectory
        self.analytic = analytic
        self.errors = errors

    @property
    def report(self) -> SpectralReport:
        return self.analytic.report

    @property
    def max_error(self) -> float:
        return float(self.errors.max())

    @property
    def max_norm(self) -> float:
        """Largest ‖p(t)‖ along the numerical path."""
        return float(linalg.norm(self.trajectory.states, axis=1).max())

    @property
    def relative_error(self) -> float:
        scale = self.max_norm
        return self.max_error / scale if scale > 0 else self.max_error

    def to_dict(self) -> dict:
        return {'case': self.report.label, 'max_error': self.max_error,
                'relative_error': self.relative_error, 'samples': len(self.trajectory),
                'alphas': [[float(a.real), float(a.imag)] for a in self.analytic.alphas]}

    def __str__(self) -> str:
        return f'<ComparisonReport {self.report.label} max_error={self.max_error:.3e}>'

    def __repr__(self) -> str:
        return str(self)


def compare_with_analytic(system: FormationSystem, p0: Sequence[complex], delta_v: AffineCoords,
                          kappa: float, t_final: float, method: str = 'rk4', dt: float = DEFAULT_DT,
                          record_every: int = 1) -> ComparisonReport:
    """Integrate from p0 ∈ S and evaluate the closed form on the recorded times.

       Raises OutOfShapeError if p0 is not in the desired shape set.
    """
    report = build_chains(classify(delta_v, kappa), system.framework.basis)
    analytic = analytic_solution(p0, report)
    schedule = Schedule.constant(delta_v, kappa, t_final)
    trajectory = integrate(p0, schedule, system, method=method, dt=dt, record_every=record_every)
    errors = linalg.norm(trajectory.states - analytic(trajectory.times), axis=1)
    log.debug(f'{report.label}: analytic vs {method} max error {errors.max():.3e}')
    return ComparisonReport(trajectory, analytic, errors)


def exponential_fit(trajectory: Trajectory) -> ExponentialFit:
    """Decay rate of the shape error (see `fit_exponential` for the window)."""
    return fit_exponential(trajectory.times, trajectory.shape_error)
