# tests/conftest.py
"""Shared fixtures: the two-state chains and channels used across the suite"""

import os
import sys

_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, _ROOT)

import numpy as np
import pytest

from src.channel.channel_models import binary_additive_mac, build_switch_mac, build_two_state_agn
from src.config.config import Config
from src.markov.markov_chain import two_state_chain

MODELS_DIR = os.path.join(_ROOT, "models")


@pytest.fixture
def good_bad_chain():
    """g = b = 0.1, pi = (0.5, 0.5), second eigenvalue 0.8"""
    return two_state_chain(0.1, 0.1)


@pytest.fixture
def agn_model():
    """Two-state AGN MAC: sigma2 = (1, 100), P1 = P2 = 10"""
    return build_two_state_agn(0.1, 0.1, 1.0, 100.0, 10.0, 10.0)


@pytest.fixture
def equal_noise_model():
    return build_two_state_agn(0.1, 0.1, 4.0, 4.0, 10.0, 10.0)


@pytest.fixture
def switch_model():
    return build_switch_mac()


@pytest.fixture
def bsc_pair(good_bad_chain):
    """Y = X1 xor X2 xor N with flip 0.1 in G and 0.4 in B"""
    return binary_additive_mac([0.1, 0.4], good_bad_chain.states)


@pytest.fixture
def small_settings():
    """Fast discrete-optimizer settings for unit tests"""
    return Config.get_solver_settings(multi_start=4, aux_size=1, discrete_max_iter=1500, seed=11)


@pytest.fixture
def rng():
    return Config.get_rng(12345)
