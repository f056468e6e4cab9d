#  Copyright (c) 2021 robfit
import json
import os

import numpy as np
import pandas as pd
import pytest

from robfit.cli.commands import EXIT_IO, EXIT_OK, EXIT_SOLVER, EXIT_VERIFICATION, _exit_code, load_residuals
from robfit.cli.main import LOG_FILE, main
from robfit.minimizers.report import SolveReport
from robfit.minimizers.termination import COST_INCREASE, ITERATION_LIMIT, NO_VALID_BLOCKS, SINGULAR_SYSTEM
from robfit.util.exception import ResidualFileError

SMALL_BA = """
solver:
  max_em_iterations: 10
ba:
  n_cameras: 4
  n_landmarks: 30
"""

SMALL_ICP = """
icp:
  n_points: 150
  max_icp_iterations: 10
"""

CONTAMINATED_LINE = """
outliers:
  fraction: 0.3
"""


SCHEMA_DIR = os.path.join(os.path.dirname(__file__), os.pardir, 'docs', 'schemas')


def assert_schema_keys(document, schema_name):
    with open(os.path.join(SCHEMA_DIR, schema_name)) as file:
        schema = json.load(file)
    assert set(schema['required']) <= set(document)
    assert set(document) <= set(schema['properties'])


def write_config(tmp_path, text, name='config.yaml'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(tmp_path, *argv, outdir='out'):
    output_dir = tmp_path / outdir
    code = main([*argv, '--output-dir', str(output_dir)])
    return code, output_dir


def test_help_exits():
    with pytest.raises(SystemExit) as info:
        main(['--help'])
    assert info.value.code == 0
    with pytest.raises(SystemExit):
        main(['no-such-command'])


def test_partition_table_build_and_verify(tmp_path):
    path = str(tmp_path / 'table.txt')
    code, output_dir = run(tmp_path, 'partition-table', path)
    assert code == EXIT_OK
    assert os.path.exists(path)
    assert os.path.exists(output_dir / LOG_FILE)
    code, _ = run(tmp_path, 'partition-table', path, '--verify')
    assert code == EXIT_OK


def test_partition_table_default_path(tmp_path):
    code, output_dir = run(tmp_path, 'partition-table')
    assert code == EXIT_OK
    assert (output_dir / 'partition_table.txt').exists()


def test_corrupted_table_fails_verification(tmp_path):
    path = tmp_path / 'table.txt'
    code, _ = run(tmp_path, 'partition-table', str(path))
    assert code == EXIT_OK
    lines = path.read_text().splitlines()
    # first value line follows the comment and the six header lines
    lines[20] = repr(float(lines[20]) + 1e-3)
    path.write_text("\n".join(lines) + "\n")
    code, _ = run(tmp_path, 'partition-table', str(path), '--verify')
    assert code == EXIT_VERIFICATION

    path.write_text("\n".join(lines[:-1]) + "\n")
    code, _ = run(tmp_path, 'partition-table', str(path), '--verify')
    assert code == EXIT_VERIFICATION


def test_estimate_alpha(tmp_path, capsys):
    rng = np.random.default_rng(3)
    residuals = tmp_path / 'residuals.txt'
    residuals.write_text("# gaussian residuals\n" + "\n".join(repr(value) for value in rng.normal(size=500)) + "\n")
    code, _ = run(tmp_path, 'estimate-alpha', str(residuals))
    assert code == EXIT_OK
    printed = json.loads(capsys.readouterr().out)
    assert printed['n_total'] == 500
    assert printed['alpha'] >= 1.5
    assert_schema_keys(printed, 'alpha_estimate.schema.json')

    output = tmp_path / 'estimate.json'
    code, _ = run(tmp_path, 'estimate-alpha', str(residuals), '--output', str(output))
    assert code == EXIT_OK
    assert json.loads(output.read_text()) == printed


def test_estimate_alpha_with_table_file(tmp_path, capsys):
    table = str(tmp_path / 'table.txt')
    assert run(tmp_path, 'partition-table', table)[0] == EXIT_OK
    residuals = tmp_path / 'residuals.txt'
    residuals.write_text("0.1\n-0.3\n2.5\n0.0\n")
    capsys.readouterr()
    code, _ = run(tmp_path, 'estimate-alpha', str(residuals), '--table', table)
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)['n_used'] == 4


@pytest.mark.parametrize('content', ["", "# only a comment\n", "0.5\nabc\n", "0.5\nnan\n"])
def test_estimate_alpha_bad_residuals(tmp_path, content):
    residuals = tmp_path / 'residuals.txt'
    residuals.write_text(content)
    code, _ = run(tmp_path, 'estimate-alpha', str(residuals))
    assert code == EXIT_IO


def test_load_residuals_line_numbers(tmp_path):
    residuals = tmp_path / 'residuals.txt'
    residuals.write_text("# header\n\n1.5\n-2\nx\n")
    with pytest.raises(ResidualFileError, match="line 5") as info:
        load_residuals(residuals)
    assert info.value.line == 5
    residuals.write_text("# header\n\n1.5\n-2\n")
    np.testing.assert_array_equal(load_residuals(residuals), [1.5, -2.])


def test_missing_residual_file(tmp_path):
    code, _ = run(tmp_path, 'estimate-alpha', str(tmp_path / 'missing.txt'))
    assert code == EXIT_IO


def test_fit_compare(tmp_path):
    config = write_config(tmp_path, CONTAMINATED_LINE)
    code, output_dir = run(tmp_path, 'fit', '--config', config, '--seed', '1', '--compare', 'adaptive,squared')
    assert code == EXIT_OK
    for policy in ('adaptive', 'squared'):
        for suffix in ('report.json', 'trace.csv', 'params.json'):
            assert (output_dir / f"fit_{policy}_{suffix}").exists()
    comparison = pd.read_csv(output_dir / 'fit_compare.csv')
    assert list(comparison['policy']) == ['adaptive', 'squared']
    errors = comparison.set_index('policy')['parameter_error']
    assert errors['adaptive'] < errors['squared']

    report = json.loads((output_dir / 'fit_adaptive_report.json').read_text())
    assert report['policy'] == 'adaptive'
    assert 'wall_time' not in report
    trace = pd.read_csv(output_dir / 'fit_adaptive_trace.csv')
    assert list(trace.columns) == ['iteration', 'alpha', 'robust_cost', 'max_step']
    assert len(trace) == report['n_iterations']
    params = json.loads((output_dir / 'fit_adaptive_params.json').read_text())
    assert len(params['theta']) == 2


def test_fit_input_file(tmp_path):
    points = tmp_path / 'points.txt'
    x = np.linspace(-3, 3, 30)
    points.write_text("\n".join(f"{xi!r} {2 * xi - 1!r}" for xi in x) + "\n")
    config = write_config(tmp_path, f"problem:\n  input: {points}\nkernel:\n  policy: cauchy\n")
    code, output_dir = run(tmp_path, 'fit', '--config', config)
    assert code == EXIT_OK
    theta = json.loads((output_dir / 'fit_cauchy_params.json').read_text())['theta']
    np.testing.assert_allclose(theta, [2., -1.], atol=1e-6)
    assert not (output_dir / 'fit_compare.csv').exists()


def test_fit_deterministic(tmp_path):
    config = write_config(tmp_path, CONTAMINATED_LINE)
    names = ['fit_adaptive_report.json', 'fit_adaptive_trace.csv', 'fit_adaptive_params.json']
    _, first = run(tmp_path, 'fit', '--config', config, '--seed', '4', outdir='first')
    _, second = run(tmp_path, 'fit', '--config', config, '--seed', '4', outdir='second')
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()
    _, other = run(tmp_path, 'fit', '--config', config, '--seed', '5', outdir='other')
    assert (first / names[2]).read_bytes() != (other / names[2]).read_bytes()


def test_icp(tmp_path):
    config = write_config(tmp_path, SMALL_ICP)
    code, output_dir = run(tmp_path, 'icp', '--config', config, '--compare', 'adaptive,huber')
    assert code == EXIT_OK
    comparison = pd.read_csv(output_dir / 'icp_compare.csv')
    assert list(comparison['policy']) == ['adaptive', 'huber']
    assert {'rotation_error_deg', 'translation_error_m'} <= set(comparison.columns)
    assert (output_dir / 'icp_adaptive_report.json').exists()


def test_icp_frames(tmp_path):
    config = write_config(tmp_path, SMALL_ICP + "outliers:\n  fraction: 0.2\n  cluster_size: 15\n")
    code, output_dir = run(tmp_path, 'icp', '--config', config, '--frames', '3')
    assert code == EXIT_OK
    frames = pd.read_csv(output_dir / 'icp_adaptive_frames.csv')
    assert list(frames['frame']) == [1, 2]
    assert frames['alpha'].notna().all()


def test_icp_input_needs_target(tmp_path):
    points = tmp_path / 'cloud.txt'
    points.write_text("0 0 0\n1 0 0\n0 1 0\n0 0 1\n")
    config = write_config(tmp_path, f"problem:\n  input: {points}\n")
    code, _ = run(tmp_path, 'icp', '--config', config)
    assert code == EXIT_IO


def test_ba(tmp_path):
    config = write_config(tmp_path, SMALL_BA)
    code, output_dir = run(tmp_path, 'ba', '--config', config, '--compare', 'adaptive,squared')
    assert code == EXIT_OK
    comparison = pd.read_csv(output_dir / 'ba_compare.csv')
    assert list(comparison['policy']) == ['adaptive', 'squared']
    for policy in ('adaptive', 'squared'):
        accuracy = pd.read_csv(output_dir / f"ba_{policy}_accuracy.csv")
        assert len(accuracy) > 0
    params = json.loads((output_dir / 'ba_adaptive_params.json').read_text())['theta']
    assert len(params['poses']) == 4
    assert len(params['landmarks']) == 30
    report = json.loads((output_dir / 'ba_adaptive_report.json').read_text())
    assert_schema_keys(report, 'solve_report.schema.json')
    for record in report['records']:
        assert record['iteration'] >= 1


def test_basin_sweep(tmp_path):
    config = write_config(tmp_path, SMALL_BA + "  pixel_noise: 0.\n")
    code, output_dir = run(tmp_path, 'basin-sweep', '--config', config, '--sigmas', '0', '--samples', '1',
                           '--policies', 'squared,huber')
    assert code == EXIT_OK
    records = pd.read_csv(output_dir / 'sweep_records.csv')
    summary = pd.read_csv(output_dir / 'sweep_summary.csv')
    assert len(records) == 2
    assert list(summary['policy']) == ['squared', 'huber']
    np.testing.assert_array_equal(summary['success_rate'], 1.)


def test_curves(tmp_path):
    code, output_dir = run(tmp_path, 'curves', '--alphas', '2,0,0.13', '--points', '11', '--r-max', '5')
    assert code == EXIT_OK
    curves = pd.read_csv(output_dir / 'curves.csv')
    assert len(curves) == 33
    assert sorted(curves['alpha'].unique()) == [0., 0.1, 2.]
    at_zero = curves[(curves['alpha'] == 2.) & (curves['r'] == 0.)]
    assert float(at_zero['rho'].iloc[0]) == 0.
    assert float(at_zero['weight'].iloc[0]) == pytest.approx(1.)
    assert curves['in_support'].all()


def test_unknown_config_key(tmp_path):
    config = write_config(tmp_path, "solver:\n  lm_lambda: 1e-3\n  colour: red\n")
    code, _ = run(tmp_path, 'fit', '--config', config)
    assert code == EXIT_IO


def test_missing_config(tmp_path):
    code, _ = run(tmp_path, 'fit', '--config', str(tmp_path / 'missing.yaml'))
    assert code == EXIT_IO


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv('ROBFIT_OUTPUT_DIR', str(tmp_path / 'env_out'))
    residuals = tmp_path / 'residuals.txt'
    residuals.write_text("0.1\n-0.2\n")
    assert main(['estimate-alpha', str(residuals)]) == EXIT_OK
    assert (tmp_path / 'env_out' / LOG_FILE).exists()


@pytest.mark.parametrize('reason, code', [(ITERATION_LIMIT, EXIT_OK), (COST_INCREASE, EXIT_OK),
                                          (SINGULAR_SYSTEM, EXIT_SOLVER), (NO_VALID_BLOCKS, EXIT_SOLVER)])
def test_exit_code_of_reports(reason, code):
    stopped = SolveReport(theta=np.zeros(2), converged=False, reason=reason, records=[], policy='squared',
                          kernel='squared', c=1.)
    converged = SolveReport(theta=np.zeros(2), converged=True, reason='step size below tolerance', records=[],
                            policy='squared', kernel='squared', c=1.)
    assert _exit_code([converged, stopped]) == code
    assert _exit_code([converged]) == EXIT_OK
