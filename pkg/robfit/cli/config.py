"""Run configuration of the command line: YAML sections with documented defaults, exposed as a `DotMap`."""

#  Copyright (c) 2021 robfit
import copy
import os
from typing import Dict, Optional

import yaml
from dotmap import DotMap

from ..core.partition import DEFAULT_ALPHA_MAX, DEFAULT_ALPHA_MIN, DEFAULT_RESOLUTION, DEFAULT_TAU
from ..util import ztyping
from ..util.exception import ConfigError

DEFAULTS = {
    'problem': {
        'seed': 0,
        'input': None,  # data file, synthetic data if empty
        'n_points': 200,
        'slope': 2.,
        'intercept': 1.,
        'noise': 0.5,
    },
    'kernel': {
        'policy': 'adaptive',
        'c': None,  # per command: 1 for fit, 0.05 m for icp, 1 px for ba
        'alpha': None,
    },
    'solver': {
        'alpha_min': DEFAULT_ALPHA_MIN,
        'alpha_max': DEFAULT_ALPHA_MAX,
        'resolution': DEFAULT_RESOLUTION,
        'tau_factor': DEFAULT_TAU,
        'max_em_iterations': 50,
        'max_irls_iterations': 20,
        'lm_lambda': 1e-4,
        'lm_up': 10.,
        'lm_down': 0.1,
        'lm_lambda_max': 1e12,
        'scale_damping': True,
        'step_tol': 1e-8,
        'cost_tol': 1e-10,
        'subsample_cap': 200_000,
        'subsample_seed': 0,
    },
    'outliers': {
        'fraction': 0.,
        'model': None,  # per command: uniform for fit, clustered for icp, shuffle for ba
        'low': -50.,
        'high': 50.,
        'magnitude': 0.5,
        'cluster_size': 50,
    },
    'icp': {
        'variant': 'point_to_plane',
        'max_icp_iterations': 30,
        'rotation_tol': 1e-7,
        'translation_tol': 1e-7,
        'alpha_cadence': 'iteration',
        'target': None,  # with problem.input: point cloud files
        'n_points': 500,
        'noise': 0.,
        'yaw_deg': 10.,
        'translation': [0.3, 0.1, 0.],
    },
    'ba': {
        'n_cameras': 8,
        'n_landmarks': 150,
        'pixel_noise': 0.5,
        'init_sigma': 0.05,
    },
    'sweep': {
        'sigmas': [0.1, 0.5, 1., 2., 5.],
        'samples': 20,
        'policies': ['squared', 'huber', 'geman_mcclure', 'adaptive'],
        'rotation_sigma': 0.,
        'success_threshold': 0.01,
    },
    'output': {
        'directory': 'robfit_output',
        'include_timing': False,
    },
}

SOLVER_KEYS = tuple(DEFAULTS['solver'])


def _line_numbers(text: str) -> Dict:
    """Map every section and (section, key) of the document to its 1-based line."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as error:
        mark = getattr(error, 'problem_mark', None)
        raise ConfigError(f"invalid YAML: {error}", line=None if mark is None else mark.line + 1) from error
    lines = {}
    if root is None:
        return lines
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("the configuration has to be a mapping of sections", line=root.start_mark.line + 1)
    for section_node, content_node in root.value:
        section = section_node.value
        lines[section] = section_node.start_mark.line + 1
        if isinstance(content_node, yaml.MappingNode):
            for key_node, _ in content_node.value:
                lines[section, key_node.value] = key_node.start_mark.line + 1
    return lines


def parse_run_config(text: str) -> DotMap:
    """Merge the sections of the YAML document `text` into the defaults.

    Raises:
        ConfigError: with the line of the first unknown section or key, or of a section that is not a mapping.
    """
    lines = _line_numbers(text)
    content = yaml.safe_load(text) or {}
    config = copy.deepcopy(DEFAULTS)
    for section, values in content.items():
        if section not in DEFAULTS:
            raise ConfigError(f"unknown section {section!r}, has to be one of {list(DEFAULTS)}",
                              line=lines.get(section))
        if values is None:
            continue
        if not isinstance(values, dict):
            raise ConfigError(f"section {section!r} has to be a mapping of keys to values", line=lines.get(section))
        for key, value in values.items():
            if key not in DEFAULTS[section]:
                raise ConfigError(f"unknown key {key!r} in section {section!r}", line=lines.get((section, key)))
            config[section][key] = value
    return DotMap(config)


def load_run_config(path: Optional[ztyping.PathType] = None) -> DotMap:
    """Read the run configuration from `path`, the defaults without one.

    The environment variable `ROBFIT_OUTPUT_DIR` replaces the configured output directory.
    """
    if path is None:
        config = DotMap(copy.deepcopy(DEFAULTS))
    else:
        try:
            with open(path) as file:
                text = file.read()
        except OSError as error:
            raise ConfigError(f"cannot read the configuration {path}: {error}") from error
        config = parse_run_config(text)
    output_dir = os.environ.get("ROBFIT_OUTPUT_DIR")
    if output_dir:
        config.output.directory = output_dir
    return config


def solver_fields(config: DotMap) -> Dict:
    """The `SolverConfig` keyword arguments of a run configuration, except `c` and the policy."""
    return {key: config.solver[key] for key in SOLVER_KEYS}
