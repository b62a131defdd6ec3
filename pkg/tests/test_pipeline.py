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

"""Tests for the end-to-end runs, the property battery and the command line."""

# standard libs
import os
import shutil

# external libs
import numpy as np
import pytest

# internal libs
from affinform import datasets
from affinform.analysis import CASE_LABELS
from affinform.core.exceptions import NoStressError, EXIT_DESIGN, EXIT_VALIDATION
from affinform.io.common import read_json, write_json
from affinform.io.export import write_weights
from affinform.pipeline import (CHECKS, OUTPUT_ENV, SAFETY_FACTOR, DEFAULT_H, output_root,
                                run_scenario, design_only, verify_suite, batch)
from affinform.bin import main as cli


ARTIFACTS = ('trajectory.csv', 'metadata.json', 'spectral.json')


def tree_scenario(directory) -> str:
    path = str(directory / 'tree.json')
    write_json(path, {'format_version': 1,
                      'framework': {'nodes': 4, 'edges': [[1, 2], [2, 3], [3, 4]],
                                    'shape': [[0, 0], [1, 0], [1, 1], [0, 2]]},
                      'weights': {'source': 'design-general'},
                      'schedule': {'total_time': 1.0,
                                   'segments': [{'t_start': 0, 'delta_v': [1, 0, 0, 0, 0, 0]}]}})
    return path


def square_scenario(directory, delta_v, h='auto') -> str:
    path = str(directory / 'square.json')
    write_json(path, {'format_version': 1,
                      'framework': {'bundled': 'square'},
                      'weights': {'source': 'design-complete'},
                      'h': h,
                      'schedule': {'total_time': 1.0, 'segments': [{'t_start': 0, 'delta_v': delta_v}]},
                      'integrator': {'dt': 0.01}})
    return path


def test_output_root(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert output_root() == 'output'
    monkeypatch.setenv(OUTPUT_ENV, '/tmp/formations')
    assert output_root() == '/tmp/formations'
    assert output_root('results') == 'results'


def test_run_sim1(tmp_path):
    metadata = run_scenario(datasets.scenario_path('sim1'), str(tmp_path))
    for name in ARTIFACTS:
        assert os.path.isfile(tmp_path / 'sim1' / name)
    assert metadata['h'] == 5.0 and metadata['h_source'] == 'explicit'
    assert metadata['h_l_max'] < 5.0
    assert metadata['case_labels'] == ['C5']
    assert metadata['gain_validation']['passed']
    assert metadata['exponential_fit']['applicable']
    assert metadata['exponential_fit']['rate'] < 0
    assert metadata['final_shape_error'] < 1e-6
    velocities = np.array([complex(*pair) for pair in metadata['final_velocities']])
    np.testing.assert_allclose(velocities, 1.0, atol=1e-3)
    spectral = read_json(str(tmp_path / 'sim1' / 'spectral.json'))
    assert spectral['segments'][0]['report']['branch'] == 'vhx=vhy=0'
    assert not spectral['segments'][0]['starts_in_shape']


def test_run_deterministic(tmp_path):
    path = datasets.scenario_path('sim1')
    run_scenario(path, str(tmp_path / 'first'))
    run_scenario(path, str(tmp_path / 'second'))
    for name in ARTIFACTS:
        first = (tmp_path / 'first' / 'sim1' / name).read_bytes()
        second = (tmp_path / 'second' / 'sim1' / name).read_bytes()
        assert first == second


def test_run_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    run_scenario(datasets.scenario_path('sim2_caseC3'))
    assert os.path.isfile(tmp_path / 'sim2_caseC3' / 'metadata.json')


def test_run_closed_form_segment(tmp_path):
    metadata = run_scenario(datasets.scenario_path('sim2_caseC4'), str(tmp_path))
    assert metadata['case_labels'] == ['C4']
    segment = read_json(str(tmp_path / 'sim2_caseC4' / 'spectral.json'))['segments'][0]
    assert segment['starts_in_shape']
    assert segment['max_error'] < 1e-6
    assert len(segment['alphas']) == 3
    assert metadata['max_shape_error'] < 1e-8


def test_run_sim3(tmp_path):
    metadata = run_scenario(datasets.scenario_path('sim3'), str(tmp_path))
    assert (metadata['nodes'], metadata['edges']) == (20, 38)
    assert metadata['case_labels'] == ['C5', 'C1a', 'C1b', 'C1b']
    assert not metadata['gain_validation']['passed']
    # S is invariant but not attractive on this graph
    assert max(metadata['off_shape_growth']) > 0
    assert metadata['max_shape_error'] <= 1e-6



def test_auto_gain(tmp_path):
    metadata = run_scenario(square_scenario(tmp_path, [0, 0, 0, 0, 0, 1]), str(tmp_path))
    assert metadata['h_source'] == 'auto'
    assert metadata['h'] == pytest.approx(SAFETY_FACTOR * metadata['h_l_max'])
    metadata = run_scenario(square_scenario(tmp_path, [0, 0, 0, 0, 0, 0]), str(tmp_path))
    assert metadata['h_l_max'] == 0
    assert metadata['h'] == DEFAULT_H


def test_design_only(tmp_path):
    bundle = design_only(datasets.scenario_path('sim1'), str(tmp_path))
    for name in ('design.json', 'weights.json', 'basis.json'):
        assert os.path.isfile(tmp_path / 'sim1' / name)
    assert bundle['zero_eigenvalues'] == 3
    assert bundle['edges'] == [list(edge) for edge in datasets.SQUARE_EDGES]
    assert max(bundle['basis_residuals'].values()) < 1e-8
    assert bundle['h_l'] is not None
    assert len(bundle['hardware_scaling']) == 12


def test_no_stress(tmp_path):
    with pytest.raises(NoStressError):
        run_scenario(tree_scenario(tmp_path), str(tmp_path))


def test_verify_subset():
    names = ['square-laplacian', 'equilibrium-balance', 'gain-validation',
             'pinned-motion-parameters', 'min-norm-motion-parameters', 'lyapunov-residual']
    table = verify_suite(seed=3, checks={name: CHECKS[name] for name in names})
    assert table.check.tolist() == names
    assert table.passed.all(), table.to_string()


def test_classifier_check_reaches_every_case():
    table = verify_suite(seed=5, checks={'classifier-exhaustive': CHECKS['classifier-exhaustive']})
    assert table.passed[0], table.detail[0]
    counts = dict(item.split('=') for item in table.detail[0].split(';')[0].split())
    assert list(counts) == list(CASE_LABELS)
    assert all(int(count) >= 50 for count in counts.values())



def test_verify_reports_failures():
    def broken(synthetic):
        raise NoStressError('nothing to find')
    table = verify_suite(checks={'broken': broken, 'fine': lambda synthetic: (True, 'ok')})
    assert table.passed.tolist() == [False, True]
    assert table.detail[0].startswith('NoStressError')


def test_verify_weights_file(tmp_path, square_weights):
    good, bad = str(tmp_path / 'good.json'), str(tmp_path / 'bad.json')
    write_weights(good, square_weights)
    write_json(bad, {'pairs': [[1, 2, 0.5], [2, 1, 0.6]]})
    assert verify_suite(checks={}, weights_file=good).passed.tolist() == [True]
    table = verify_suite(checks={}, weights_file=bad)
    assert table.check.tolist() == ['weights-file']
    assert not table.passed[0]


def test_verify_full():
    table = verify_suite(seed=0)
    assert table.check.tolist() == list(CHECKS)
    assert table.passed.all(), table.to_string()


def test_batch(tmp_path):
    scenarios = tmp_path / 'scenarios'
    scenarios.mkdir()
    shutil.copy(datasets.scenario_path('sim2_caseC4'), scenarios / 'good.json')
    write_json(str(scenarios / 'bad.json'), {'format_version': 7})
    table = batch(str(scenarios), str(tmp_path / 'out'), workers=2, progress=False)
    assert table.scenario.tolist() == ['bad.json', 'good.json']
    assert table.status.tolist() == [EXIT_VALIDATION, 0]
    assert os.path.isfile(tmp_path / 'out' / 'sim2_caseC4' / 'metadata.json')


def test_cli_exit_status(tmp_path):
    assert cli.main(['run', datasets.scenario_path('sim2_caseC5'), '-o', str(tmp_path)]) == 0
    assert cli.main(['design', tree_scenario(tmp_path), '--output-root', str(tmp_path)]) == EXIT_DESIGN
    assert cli.main(['run', str(tmp_path / 'missing.json')]) == EXIT_VALIDATION
    with pytest.raises(SystemExit):
        cli.main(['simulate'])
