#!/usr/bin/env python3
"""
Install script for the trajectory planner
"""

from setuptools import setup

setup(
    name="cav-ocp",
    version="0.1.0",
    description="Closed-form minimum-energy vehicle trajectories with speed and acceleration bounds",
    python_requires=">=3.9",
    py_modules=[
        "activation",
        "cli",
        "config",
        "constrained",
        "core",
        "instance_config",
        "models",
        "oracle",
        "scenario",
        "unconstrained",
    ],
    install_requires=[
        "numpy>=1.24",
        "cvxpy>=1.4",
        "clarabel>=0.6",
        "python-dotenv>=1.0",
    ],
    extras_require={"test": ["pytest>=7", "scipy>=1.10"]},
    entry_points={"console_scripts": ["cav-ocp=cli:main"]},
)
