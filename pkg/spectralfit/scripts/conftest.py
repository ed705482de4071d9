#!/usr/bin/env python3
"""
Shared fixtures for the spectralfit test scripts.
"""

import os
import sys

import numpy as np
import pytest

# Add the repository root to the path so the package imports without installation
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
