#  Copyright (c) 2021 robfit

from .core.interfaces import ProblemInstance
from .core.problem import BaseProblem, ResidualBlock
from .models.bundle import BAProblem, BAScene, BAState, ba_problem, synthetic_scene
from .models.cloud import PointCloud
from .models.geometry import RigidTransform, pose_error
from .models.line import LineFitProblem, LocationProblem, line_fit_problem, synthetic_line
from .models.outliers import OutlierSpec, inject_outliers
from .models.registration import (IcpConfig, RegistrationProblem, icp_pipeline, nearest_correspondences,
                                  odometry_sequence, registration_problem)
from .models.sweep import basin_sweep
from .models.synthetic import synthetic_scan, synthetic_sequence

__all__ = ['ProblemInstance', 'BaseProblem', 'ResidualBlock',
           'LineFitProblem', 'LocationProblem', 'line_fit_problem', 'synthetic_line',
           'RigidTransform', 'pose_error', 'PointCloud',
           'RegistrationProblem', 'registration_problem', 'nearest_correspondences', 'IcpConfig', 'icp_pipeline',
           'odometry_sequence', 'synthetic_scan', 'synthetic_sequence',
           'BAScene', 'BAState', 'BAProblem', 'ba_problem', 'synthetic_scene', 'basin_sweep',
           'OutlierSpec', 'inject_outliers',
           ]
