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

"""Scenario pipeline: design, analysis, simulation and export."""

# standard libs
import os
import glob
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Tuple

# external libs
import numpy as np
import pandas as pd
from scipy import linalg
from tqdm import tqdm

# internal libs
from .core.logging import log
from .core.wrappers import timeout as run_with_timeout
from .core.exceptions import (AffinformError, ValidationError, ConditioningError, EXIT_SUCCESS,
                              EXIT_UNEXPECTED)
from .formation.core import AffineCoords, Framework, Graph, affine_map
from .formation.weights import (StressWeights, GainMatrix, GainReport, design_weights_complete,
                                design_weights_general, validate_gain)
from .formation.motion import (MotionBasis, FormationSystem, build_motion_basis, hardware_scaling,
                               solve_agent_mu)
from .analysis.spectral import (CASE_LABELS, SHAPE_TOL, CONDITION_LIMIT, SpectralReport, classify,
                                build_chains, analytic_solution)
from .analysis.stability import (StabilityReport, stability_analysis, solve_lyapunov, complement_block,
                                 off_shape_growth)
from .simulation.integrate import Trajectory, integrate, exponential_fit, compare_with_analytic
from .simulation.schedule import Schedule
from .io.scenario import Scenario, load_scenario
from .io.export import (write_trajectory, write_weights, write_motion_basis, read_weights,
                        read_motion_basis)
from .io.common import write_json, checksum, to_pairs
from . import datasets
from .datasets.synthetic import SyntheticFormations


# h = SAFETY_FACTOR·h_l when the scenario asks for "auto"
SAFETY_FACTOR = 5.0

# h chosen by "auto" when no segment moves (h_l = 0)
DEFAULT_H = 1.0

OUTPUT_ENV = 'AFFINFORM_OUTPUT'
DEFAULT_OUTPUT = 'output'


def output_root(override: str = None) -> str:
    """Flag value, else $AFFINFORM_OUTPUT, else ./output."""
    return override or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT


class Design:
    """Weights, gain check and motion basis for a scenario's framework."""

    def __init__(self, framework: Framework, weights: StressWeights, gain: GainMatrix,
                 gain_report: GainReport, basis: MotionBasis) -> None:
        self.framework = framework
        self.weights = weights
        self.gain = gain
        self.gain_report = gain_report
        self.basis = basis

    def m_times_bt(self, delta_v: AffineCoords) -> np.ndarray:
        return self.basis.combine(delta_v) @ self.framework.incidence.T

    def stability(self, delta_v: AffineCoords, kappa: float) -> StabilityReport:
        return stability_analysis(self.weights, self.gain, self.m_times_bt(delta_v), kappa,
                                  self.framework.basis)


def build_design(scenario: Scenario) -> Design:
    """Weights (designed or loaded), K validation and the six-motion basis."""
    framework = scenario.framework
    source = scenario.weights['source']
    if source == 'design-complete':
        weights = design_weights_complete(framework.shape, framework.graph)
    elif source == 'design-general':
        weights = design_weights_general(framework, seed=scenario.seed)
    else:
        weights = read_weights(scenario.weights['path'], framework.graph)
    weights.check_balance(framework.basis)
    gain_report = validate_gain(weights, scenario.gain)
    if scenario.motion['source'] == 'file':
        basis = read_motion_basis(scenario.motion['path'], framework)
    else:
        basis = build_motion_basis(framework, pinned=scenario.motion.get('pinned', ()))
    log.info(f'{scenario.name}: designed {weights} and {basis}')
    return Design(framework, weights, scenario.gain, gain_report, basis)


def _stability_reports(design: Design, schedule: Schedule) -> List[StabilityReport]:
    return [design.stability(segment.delta_v, segment.kappa) for segment in schedule]


def _choose_h(scenario: Scenario, reports: Optional[List[StabilityReport]]) -> Tuple[float, str]:
    if scenario.h != 'auto':
        h = scenario.h
        if reports is not None:
            bound = max(report.h_l for report in reports)
            if h <= bound:
                log.warning(f'{scenario.name}: h = {h:g} does not exceed the stability bound '
                            f'h_l = {bound:.6g}; convergence to the shape is not guaranteed')
        return h, 'explicit'
    if reports is None:
        raise ValidationError(f'{scenario.name}: h = "auto" needs a gain K that passes validation')
    bound = max(report.h_l for report in reports)
    if bound == 0:
        log.info(f'{scenario.name}: no segment moves the formation, using h = {DEFAULT_H:g}')
        return DEFAULT_H, 'auto'
    return SAFETY_FACTOR * bound, 'auto'


def _segment_spectra(scenario: Scenario, design: Design, trajectory: Trajectory) -> List[Dict[str, Any]]:
    """Per segment: classification, chains and (when the segment starts in S) the closed-form check."""
    basis = design.framework.basis
    out = []
    for index, segment in enumerate(scenario.schedule):
        report = build_chains(classify(segment.delta_v, segment.kappa), basis)
        entry = {'index': index + 1, 't_start': segment.t_start, 't_end': segment.t_end,
                 'report': report.to_dict()}
        rows = np.flatnonzero(trajectory.segments == index)
        start = trajectory.states[rows[0]]
        in_shape = basis.distance(start) <= SHAPE_TOL * max(1.0, float(linalg.norm(start)))
        entry['starts_in_shape'] = bool(in_shape)
        if in_shape:
            try:
                analytic = analytic_solution(start, report)
            except ConditioningError as error:
                log.warning(f'{scenario.name}: segment {index + 1}: {error}')
                analytic = None
            if analytic is not None:
                predicted = analytic(trajectory.times[rows] - segment.t_start)
                errors = linalg.norm(trajectory.states[rows] - predicted, axis=1)
                entry['alphas'] = to_pairs(analytic.alphas)
                entry['terms'] = analytic.terms
                entry['max_error'] = float(errors.max())
        log.info(f'{scenario.name}: segment {index + 1} is case {report.label} ({report.branch})')
        out.append(entry)
    return out


def run_scenario(path: str, root: str = None, progress: bool = False) -> Dict[str, Any]:
    """Design, analyse, integrate and export one scenario; returns the metadata written.

       Artifacts go to <root>/<scenario output>/: trajectory.csv, metadata.json and
       spectral.json.
    """
    scenario = load_scenario(path)
    design = build_design(scenario)
    framework = design.framework
    p0 = scenario.initial_configuration()
    in_shape = framework.basis.distance(p0) <= SHAPE_TOL * max(1.0, float(linalg.norm(p0)))

    reports = None
    if design.gain_report.passed:
        reports = _stability_reports(design, scenario.schedule)
    elif in_shape and scenario.h != 'auto':
        log.warning(f'{scenario.name}: K·L fails validation ({design.gain_report.zero_count} zero '
                    f'eigenvalues); p0 is in the shape set, which stays invariant but is not attractive')
    else:
        design.gain_report.require()
    h, h_source = _choose_h(scenario, reports)
    system = FormationSystem(framework, design.weights, design.gain, design.basis, h)
    growth = [off_shape_growth(system.closed_loop(segment.delta_v, segment.kappa), framework.basis)
              for segment in scenario.schedule]
    if max(growth) >= 0:
        log.warning(f'{scenario.name}: the shape set is not attractive (off-shape growth rate up to '
                    f'{max(growth):.3g}); the shape holds only from a start inside it')

    settings = scenario.integrator
    trajectory = integrate(p0, scenario.schedule, system, method=settings['method'],
                           dt=settings['dt'], record_every=settings['record_every'], progress=progress)
    spectra = _segment_spectra(scenario, design, trajectory)
    fit = exponential_fit(trajectory)

    segments = scenario.schedule.segments
    metadata = {
        'scenario': scenario.name,
        'scenario_sha256': scenario.checksum(),
        'nodes': framework.node_count,
        'edges': framework.graph.edge_count,
        'h': h,
        'h_source': h_source,
        'h_l': None if reports is None else [report.h_l for report in reports],
        'h_l_max': None if reports is None else max(report.h_l for report in reports),
        'kappa': [segment.kappa for segment in segments],
        'off_shape_growth': [rate if np.isfinite(rate) else None for rate in growth],
        'case_labels': [entry['report']['case_label'] for entry in spectra],
        'schedule': scenario.schedule.to_dict(),
        'integrator': settings,
        'checksums': {'L': checksum(design.weights.laplacian),
                      'B': checksum(framework.incidence),
                      'K': checksum(design.gain.matrix),
                      'M': [checksum(design.basis.combine(segment.delta_v)) for segment in segments]},
        'laplacian_spectrum': design.weights.spectrum.tolist(),
        'gain_validation': design.gain_report.to_dict(),
        'exponential_fit': fit.to_dict(),
        'peak_control_norm': trajectory.peak_control_norm,
        'final_shape_error': float(trajectory.shape_error[-1]),
        'max_shape_error': float(trajectory.shape_error.max()),
        'final_velocities': to_pairs(trajectory.velocities[-1]),
        'samples': len(trajectory),
    }

    target = os.path.join(output_root(root), scenario.output)
    write_trajectory(os.path.join(target, 'trajectory.csv'), trajectory)
    write_json(os.path.join(target, 'metadata.json'), metadata)
    write_json(os.path.join(target, 'spectral.json'), {'scenario': scenario.name, 'segments': spectra})
    log.info(f'{scenario.name}: wrote artifacts to {target}')
    return metadata


def design_only(path: str, root: str = None) -> Dict[str, Any]:
    """Write the design bundle (design.json, weights.json, basis.json) without simulating."""
    scenario = load_scenario(path)
    design = build_design(scenario)
    framework = design.framework
    first = scenario.schedule.segments[0]
    bundle = {
        'scenario': scenario.name,
        'nodes': framework.node_count,
        'edges': framework.graph.to_one_based(),
        'laplacian': design.weights.laplacian.tolist(),
        'weights': [design.weights.weights[edge] for edge in framework.graph.edges],
        'laplacian_spectrum': design.weights.spectrum.tolist(),
        'zero_eigenvalues': int(np.sum(np.abs(design.weights.spectrum) <= design.weights.zero_tolerance())),
        'gain_validation': design.gain_report.to_dict(),
        'basis': {name: design.basis[name].tolist() for name in design.basis},
        'basis_residuals': design.basis.residuals(),
        'kappa': first.kappa,
        'h_l': None,
        'hardware_scaling': None,
    }
    if design.gain_report.passed:
        report = design.stability(first.delta_v, first.kappa)
        bundle['h_l'] = report.h_l
        bundle['stability'] = report.to_dict()
        h = scenario.h if scenario.h != 'auto' else (SAFETY_FACTOR * report.h_l or DEFAULT_H)
        scaling = hardware_scaling(design.weights, design.basis.parameters(first.delta_v), h, first.kappa)
        bundle['hardware_scaling'] = [[i + 1, j + 1, s] for (i, j), s in sorted(scaling.items())]
    else:
        log.warning(f'{scenario.name}: K·L fails validation, no stability bound reported')

    target = os.path.join(output_root(root), scenario.output)
    write_json(os.path.join(target, 'design.json'), bundle)
    write_weights(os.path.join(target, 'weights.json'), design.weights)
    write_motion_basis(os.path.join(target, 'basis.json'), design.basis)
    log.info(f'{scenario.name}: wrote design bundle to {target}')
    return bundle


# ---------------------------------------------------------------------------------------------
# property battery

SQUARE_LAPLACIAN = 0.25 * np.array([[1, -1, 1, -1], [-1, 1, -1, 1], [1, -1, 1, -1], [-1, 1, -1, 1]])


def _check_square_laplacian(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    L = design_weights_complete(datasets.SQUARE).laplacian
    error = float(np.abs(L - SQUARE_LAPLACIAN).max())
    return error <= 1e-12, f'max deviation {error:.2e}'


def _check_balance(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    worst = 0.0
    for n in (4, 5, 6, 8):
        shape = synthetic.shape(n)
        weights = design_weights_complete(shape)
        phi = np.column_stack([np.ones(n), shape.p_star.real, shape.p_star.imag])
        worst = max(worst, float(linalg.norm(weights.laplacian @ phi)))
    return worst <= 1e-10, f'max ‖L·phi‖ {worst:.2e}'


def _check_general_weights(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    framework = Framework(Graph.complete(6), synthetic.shape(6).p_star)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        weights = design_weights_general(framework, seed=synthetic.seed)
    report = validate_gain(weights, GainMatrix.identity(6))
    return report.passed, f'{report.zero_count} zero eigenvalues'


def _check_gain(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    weights = design_weights_complete(datasets.SQUARE)
    identity = validate_gain(weights, GainMatrix.identity(4)).passed
    negative = validate_gain(weights, GainMatrix(-np.ones(4))).passed
    return identity and not negative, f'K = I passes: {identity}, K = -I passes: {negative}'


def _check_pinned_mu(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    framework = datasets.unit_square()
    target = (1 - 1j) / np.sqrt(2)
    mu = solve_agent_mu(0, framework.relative_refs(0), target, pinned=[2])
    error = max(abs(mu[1] - 1 / np.sqrt(2)), abs(mu[3] + 1 / np.sqrt(2)), abs(mu[2]))
    return error <= 1e-12, f'max deviation {error:.2e}'


def _check_min_norm_mu(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    framework = datasets.square()
    mu = solve_agent_mu(0, framework.relative_refs(0), 1.0)
    expected = {1: 1 / 6, 2: -1 / 6, 3: -1 / 3}
    error = max(abs(mu[j] - value) for j, value in expected.items())
    return error <= 1e-12, f'max deviation {error:.2e}'


def _check_basis(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    worst = 0.0
    for framework in (datasets.square(), Framework(Graph.complete(6), synthetic.shape(6).p_star),
                      datasets.rings()):
        basis = build_motion_basis(framework)
        worst = max(worst, max(basis.residuals().values()))
    return worst <= 1e-8, f'max residual {worst:.2e}'


def _check_motion_identities(synthetic: SyntheticFormations, draws: int = 1000) -> Tuple[bool, str]:
    framework = datasets.square()
    basis = build_motion_basis(framework)
    B, p = framework.incidence, framework.p_star
    worst = 0.0
    for _ in range(draws):
        delta_v = synthetic.delta_v(structured=synthetic.rng.random() < 0.3)
        mbt = basis.combine(delta_v) @ B.T
        worst = max(worst, float(linalg.norm(mbt @ np.ones(4))),
                    float(linalg.norm(mbt @ p - affine_map(delta_v, p))))
    return worst <= 1e-9, f'{draws} draws, max residual {worst:.2e}'


def _chain_residual(report: SpectralReport) -> float:
    """Largest relative residual of (K - λI)·c_k = c_{k-1} over the chains of a report."""
    K = report.classification.operator.matrix
    scale = max(1.0, float(linalg.norm(K, 2)))
    worst = 0.0
    for chain in report.chains:
        shifted = K - chain.eigenvalue * np.eye(3)
        previous = np.zeros(3)
        for c in chain.coordinates:
            size = float(linalg.norm(c))
            residual = float(linalg.norm(shifted @ c - previous))
            worst = max(worst, residual / (scale * size) if size > 0 else np.inf)
            previous = c
    return worst


def _check_classifier(synthetic: SyntheticFormations, draws: int = 10000,
                      targeted: int = 50) -> Tuple[bool, str]:
    """Random draws must each get one label; targeted draws must reach every label."""
    framework = datasets.square()
    counts = dict.fromkeys(CASE_LABELS, 0)
    worst, singular, mislabeled = 0.0, 0, 0
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        instances = [(None, synthetic.delta_v(structured=k % 2 == 1)) for k in range(draws)]
        instances += [(label, synthetic.delta_v_for(label))
                      for label in CASE_LABELS for _ in range(targeted)]
        for expected, delta_v in instances:
            report = build_chains(classify(delta_v, 1.0), framework.basis)
            counts[report.label] += 1
            if expected is not None and report.label != expected:
                mislabeled += 1
            worst = max(worst, _chain_residual(report))
            if np.linalg.cond(report.coordinate_matrix()) > CONDITION_LIMIT:
                singular += 1
    missing = [label for label, count in counts.items() if count == 0]
    passed = (sum(counts.values()) == len(instances) and not missing and mislabeled == 0
              and worst <= 1e-8 and singular == 0)
    summary = ' '.join(f'{label}={count}' for label, count in counts.items())
    return passed, (f'{summary}; {mislabeled} mislabeled; max relative residual {worst:.2e}; '
                    f'{singular} non-spanning')


def _check_lyapunov(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    framework = Framework(Graph.complete(6), synthetic.shape(6).p_star)
    weights = design_weights_complete(framework.shape, framework.graph)
    worst = 0.0
    for k in (np.ones(6), synthetic.rng.uniform(0.5, 2.0, 6)):
        solution = solve_lyapunov(complement_block(weights, GainMatrix(k), framework.basis))
        worst = max(worst, solution.residual)
    return worst <= 1e-9, f'max residual {worst:.2e}'


def _square_system(h: float = 1.0) -> FormationSystem:
    framework = datasets.square()
    return FormationSystem(framework, design_weights_complete(framework.shape, framework.graph),
                           GainMatrix.identity(4), build_motion_basis(framework), h=h)


def _check_analytic(synthetic: SyntheticFormations, instances: int = 20,
                    dt: float = 1e-5) -> Tuple[bool, str]:
    """Closed form against RK4 on [0, 3] for every case, relative to max‖p(t)‖."""
    system = _square_system()
    worst = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        for label in CASE_LABELS:
            for _ in range(instances):
                p0 = synthetic.point_in_shape(system.framework.basis)
                report = compare_with_analytic(system, p0, synthetic.delta_v_for(label), 1.0, 3.0,
                                               method='rk4', dt=dt, record_every=10000)
                worst = max(worst, report.relative_error)
    return worst <= 1e-4, f'{instances} per case, max relative error {worst:.2e}'


def _check_invariance(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    system = _square_system()
    worst = 0.0
    for _ in range(3):
        schedule = Schedule.constant(synthetic.delta_v(), 0.3, 10.0)
        trajectory = integrate(synthetic.point_in_shape(system.framework.basis), schedule, system,
                               dt=1e-3, record_every=500)
        scale = max(1.0, float(np.abs(trajectory.states).max()))
        worst = max(worst, float(trajectory.shape_error.max()) / scale)
    return worst <= 1e-5, f'max relative shape error {worst:.2e}'


def _check_rings_invariance(synthetic: SyntheticFormations) -> Tuple[bool, str]:
    """Bundled 20-agent maneuver: the shape must hold although S is not attractive there."""
    scenario = load_scenario(datasets.scenario_path('sim3'))
    with warnings.catch_warnings():
        warnings.simplefilter('ignore')
        design = build_design(scenario)
    system = FormationSystem(design.framework, design.weights, design.gain, design.basis, scenario.h)
    growth = max(off_shape_growth(system.closed_loop(segment.delta_v, segment.kappa),
                                  design.framework.basis) for segment in scenario.schedule)
    trajectory = integrate(scenario.initial_configuration(), scenario.schedule, system,
                           **scenario.integrator)
    worst = float(trajectory.shape_error.max())
    return worst <= 1e-5, f'max shape error {worst:.2e}; off-shape growth rate up to {growth:.3g}'


def _check_weights_file(weights_file: str) -> Callable[[SyntheticFormations], Tuple[bool, str]]:
    def check(synthetic: SyntheticFormations) -> Tuple[bool, str]:
        framework = datasets.square()
        try:
            weights = read_weights(weights_file, framework.graph)
            weights.check_balance(framework.basis)
            validate_gain(weights, GainMatrix.identity(4)).require()
        except ValidationError as error:
            return False, f'{type(error).__name__}: {error}'
        return True, 'weights accepted'
    return check


CHECKS = {
    'square-laplacian': _check_square_laplacian,
    'equilibrium-balance': _check_balance,
    'general-weights': _check_general_weights,
    'gain-validation': _check_gain,
    'pinned-motion-parameters': _check_pinned_mu,
    'min-norm-motion-parameters': _check_min_norm_mu,
    'motion-basis-residuals': _check_basis,
    'motion-identities': _check_motion_identities,
    'classifier-exhaustive': _check_classifier,
    'lyapunov-residual': _check_lyapunov,
    'analytic-vs-rk4': _check_analytic,
    'shape-invariance': _check_invariance,
    'rings-invariance': _check_rings_invariance,
}


def verify_suite(seed: int = 0, weights_file: str = None,
                 checks: Dict[str, Callable] = None) -> pd.DataFrame:
    """Run the property battery; returns a table with columns check, passed, detail.

       A failing or raising check is reported in the table, not raised. With
       `weights_file` the battery also validates externally supplied weights for the
       square framework.
    """
    checks = dict(CHECKS if checks is None else checks)
    if weights_file is not None:
        checks['weights-file'] = _check_weights_file(weights_file)
    rows = []
    for name, check in checks.items():
        synthetic = SyntheticFormations(seed=seed)
        try:
            passed, detail = check(synthetic)
        except AffinformError as error:
            passed, detail = False, f'{type(error).__name__}: {error}'
        rows.append({'check': name, 'passed': bool(passed), 'detail': detail})
        log.debug(f'verify: {name} -> {"pass" if passed else "FAIL"} ({detail})')
    return pd.DataFrame(rows, columns=['check', 'passed', 'detail'])


# ---------------------------------------------------------------------------------------------
# batch execution

def _run_isolated(path: str, root: Optional[str]) -> Tuple[int, str]:
    """Run one scenario, mapping failures to (exit status, message)."""
    try:
        run_scenario(path, root)
    except AffinformError as error:
        return error.exit_status, f'{type(error).__name__}: {error}'
    except Exception as error:
        return EXIT_UNEXPECTED, f'{type(error).__name__}: {error}'
    return EXIT_SUCCESS, 'ok'


def batch(directory: str, root: str = None, workers: int = None, seconds: float = None,
          progress: bool = True) -> pd.DataFrame:
    """Run every scenario file in `directory`, each in its own process.

       Returns a table with columns scenario, status and message; a run exceeding
       `seconds` is terminated and reported with status None.
    """
    paths = sorted(glob.glob(os.path.join(directory, '*.json'))
                   + glob.glob(os.path.join(directory, '*.json.gz')))
    if not paths:
        log.warning(f'no scenario files found in {directory}')
    isolated = run_with_timeout(seconds, action=(None, 'timed out'))(_run_isolated)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(tqdm(pool.map(lambda path: isolated(path, root), paths),
                            total=len(paths), disable=not progress, desc='batch'))
    return pd.DataFrame({'scenario': [os.path.basename(path) for path in paths],
                         'status': [status for status, _ in results],
                         'message': [message for _, message in results]})
