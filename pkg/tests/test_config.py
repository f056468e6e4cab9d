#  Copyright (c) 2021 robfit
import os

import pytest

from robfit.cli.config import DEFAULTS, SOLVER_KEYS, load_run_config, parse_run_config, solver_fields
from robfit.minimizers.config import SolverConfig
from robfit.util.exception import ConfigError

CONFIG = """
# a run configuration
problem:
  seed: 7
kernel:
  policy: huber
  c: 0.5

solver:
  lm_lambda: 0.001
  resolution: 0.2
output:
"""


def test_defaults(monkeypatch):
    monkeypatch.delenv("ROBFIT_OUTPUT_DIR", raising=False)
    config = load_run_config()
    assert config.kernel.policy == 'adaptive'
    assert config.solver.resolution == DEFAULTS['solver']['resolution']
    assert config.output.directory == 'robfit_output'
    assert set(solver_fields(config)) == set(SOLVER_KEYS)


def test_parse():
    config = parse_run_config(CONFIG)
    assert config.problem.seed == 7
    assert config.problem.n_points == DEFAULTS['problem']['n_points']
    assert config.kernel.policy == 'huber'
    assert config.solver.lm_lambda == 0.001
    assert config.solver.resolution == 0.2
    assert config.output.directory == 'robfit_output'
    solver = SolverConfig(c=config.kernel.c, policy=config.kernel.policy, **solver_fields(config))
    assert solver.resolution == 0.2
    assert DEFAULTS['problem']['seed'] == 0
    assert parse_run_config("").kernel.policy == 'adaptive'


@pytest.mark.parametrize(['text', 'line'], [
    ["problem:\n  seed: 1\ncolour: red\n", 3],
    ["problem:\n  seed: 1\n  colour: red\n", 3],
    ["# comment\n\nsolver:\n  lm_lambda: 1.\n  lm_lamda: 2.\n", 5],
    ["kernel: adaptive\n", 1],
])
def test_config_errors(text, line):
    with pytest.raises(ConfigError, match=f"line {line}") as info:
        parse_run_config(text)
    assert info.value.line == line


def test_malformed_documents():
    with pytest.raises(ConfigError):
        parse_run_config("- problem\n- kernel\n")
    with pytest.raises(ConfigError):
        parse_run_config("solver:\n  lm_lambda: [1.\n")


def test_load(tmp_path, monkeypatch):
    path = tmp_path / 'config.yaml'
    path.write_text(CONFIG)
    monkeypatch.delenv('ROBFIT_OUTPUT_DIR', raising=False)
    assert load_run_config(path).kernel.c == 0.5
    monkeypatch.setenv('ROBFIT_OUTPUT_DIR', str(tmp_path / 'results'))
    assert load_run_config(path).output.directory == str(tmp_path / 'results')
    assert load_run_config().output.directory == str(tmp_path / 'results')
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / 'missing.yaml')


def test_example_config_lists_defaults():
    path = os.path.join(os.path.dirname(__file__), os.pardir, 'docs', 'getting_started', 'example_config.yaml')
    with open(path) as file:
        config = parse_run_config(file.read())
    assert config.toDict() == DEFAULTS
