#!/usr/bin/env python
"""Setup script for floquet-lab package."""
from setuptools import setup, find_packages

setup(
    packages=find_packages(include=["src.logic*"]),
    package_dir={"": "."},
)
