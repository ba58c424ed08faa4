#!/usr/bin/env python3
"""
Quantum dot optimizer setup script

    pip install -e .
"""

from pathlib import Path

from setuptools import find_packages, setup


def read_requirements():
    """Runtime requirements from requirements.txt, without the test runner"""
    lines = Path(__file__).with_name("requirements.txt").read_text(encoding="utf-8").splitlines()
    reqs = [line.strip() for line in lines if line.strip() and not line.startswith("#")]
    return [r for r in reqs if not r.startswith(("pytest", "httpx"))]


setup(
    name="qdot-optimizer",
    version="1.0.0",
    description="Ground-state energy minimization over rearrangement classes of quantum dot potentials",
    packages=find_packages(include=["app", "app.*"]),
    py_modules=["main"],
    python_requires=">=3.9",
    install_requires=read_requirements(),
    extras_require={"test": ["pytest>=7.4.0", "httpx>=0.25.2"]},
    entry_points={"console_scripts": ["qdot=app.cli:main"]},
)
