"""The setup script."""

#  Copyright (c) 2021 robfit
import os

from setuptools import setup

here = os.path.abspath(os.path.dirname(__file__))

with open(os.path.join(here, 'requirements.txt'), encoding='utf-8') as requirements_file:
    requirements = requirements_file.read().splitlines()

with open(os.path.join(here, 'requirements_dev.txt'), encoding='utf-8') as requirements_dev_file:
    requirements_dev = requirements_dev_file.read().splitlines()

tests_require = [
    'pytest>=6',
    'pytest-rerunfailures>=6',
    'pytest-xdist',
    'pytest-randomly',
    'pytest-timeout>=1',
]
extras_require = {}
extras_require['tests'] = tests_require
extras_require['dev'] = requirements_dev + extras_require['tests']

setup(
    author="robfit developers",
    install_requires=requirements,
    tests_require=tests_require,
    extras_require=extras_require,
    entry_points={
        'console_scripts': ['robfit=robfit.cli.main:main'],
    },
    use_scm_version=True,
)
