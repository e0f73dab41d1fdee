# src/config/config.py
"""
Configuration module for the delayed-CSI capacity toolkit
Solver tolerances, budgets and output locations, overridable from the environment
"""

import os
from typing import Optional

import numpy as np
from dotenv import load_dotenv

from src.state.rate_state import SolverSettings

load_dotenv()


class Config:
    """Configuration for solvers, simulations and the CLI"""

    # Gaussian power-control solver
    SOLVER_TOLERANCE = float(os.getenv("SOLVER_TOLERANCE", "1e-8"))
    KKT_ACCEPT = float(os.getenv("KKT_ACCEPT", "1e-6"))
    SOLVER_MAX_ITER = int(os.getenv("SOLVER_MAX_ITER", "5000"))

    # Discrete policy optimizer
    DISCRETE_MAX_ITER = int(os.getenv("DISCRETE_MAX_ITER", "3000"))
    STALL_WINDOW = int(os.getenv("STALL_WINDOW", "50"))
    STALL_TOL = float(os.getenv("STALL_TOL", "1e-9"))
    MULTI_START = int(os.getenv("MULTI_START", "16"))
    AUX_SIZE = int(os.getenv("AUX_SIZE", "3"))
    POLICY_FLOOR = float(os.getenv("POLICY_FLOOR", "1e-9"))
    BRUTE_FORCE_BUDGET = int(os.getenv("BRUTE_FORCE_BUDGET", "200000"))

    # Multi-letter evaluation limits
    MULTILETTER_MAX_N = int(os.getenv("MULTILETTER_MAX_N", "4"))
    MULTILETTER_MAX_ALPHABET = int(os.getenv("MULTILETTER_MAX_ALPHABET", "4"))

    # Simulation
    DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "20240521"))
    EPSILON_PRIME = float(os.getenv("EPSILON_PRIME", "0.01"))

    # Output
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "results")
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    EMIT_SVG = os.getenv("EMIT_SVG", "false").lower() in ("1", "true", "yes")

    @classmethod
    def get_rng(cls, seed: Optional[int] = None) -> np.random.Generator:
        """Return a numpy Generator backed by PCG64 (64-bit seed)"""
        if seed is None:
            seed = cls.DEFAULT_SEED
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
        return np.random.Generator(np.random.PCG64(seed))

    @classmethod
    def get_solver_settings(cls, **overrides) -> SolverSettings:
        """Return solver settings from the environment, with explicit overrides"""
        values = dict(
            tolerance=cls.SOLVER_TOLERANCE,
            kkt_accept=cls.KKT_ACCEPT,
            max_iter=cls.SOLVER_MAX_ITER,
            discrete_max_iter=cls.DISCRETE_MAX_ITER,
            stall_window=cls.STALL_WINDOW,
            stall_tol=cls.STALL_TOL,
            multi_start=cls.MULTI_START,
            aux_size=cls.AUX_SIZE,
            policy_floor=cls.POLICY_FLOOR,
            brute_force_budget=cls.BRUTE_FORCE_BUDGET,
            seed=cls.DEFAULT_SEED,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return SolverSettings(**values)
