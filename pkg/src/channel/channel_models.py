# src/channel/channel_models.py
"""
Channel models for the state-dependent MAC

Discrete channels carry a full law table p(y | x1, x2, s). Gaussian and
fading channels stay parametric (noise variance, gains, power budgets);
their rates are evaluated in closed form by src.gaussian_power.
"""

import logging
import math
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.errors.exceptions import (
    IllConditionedError,
    MissingStateError,
    NonNormalizedError,
    NonPositiveVarianceError,
    ShapeMismatchError,
)
from src.markov.markov_chain import MarkovChain, two_state_chain

logger = logging.getLogger(__name__)

LAW_SUM_TOL = 1e-9
MAX_VARIANCE_RATIO = 1e12

Alphabet = Union[int, Sequence[str]]


class DiscreteStateMac(BaseModel):
    """Finite-alphabet MAC whose law is selected by the current state"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    states: Tuple[str, ...] = Field(description="State labels, in chain order")
    x1_labels: Tuple[str, ...] = Field(description="Input alphabet of encoder 1")
    x2_labels: Tuple[str, ...] = Field(description="Input alphabet of encoder 2")
    y_labels: Tuple[str, ...] = Field(description="Output alphabet")
    law: np.ndarray = Field(description="p(y | x1, x2, s), shape (X1, X2, S, Y)")

    @property
    def sizes(self) -> Tuple[int, int, int, int]:
        return self.law.shape


class GaussianStateMac(BaseModel):
    """Y = h1(s) X1 + h2(s) X2 + N_s with N_s ~ N(0, sigma2[s])"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    states: Tuple[str, ...] = Field(description="State labels, in chain order")
    sigma2: np.ndarray = Field(description="Noise variance per state")
    h1: np.ndarray = Field(description="Fading gain of encoder 1 per state")
    h2: np.ndarray = Field(description="Fading gain of encoder 2 per state")
    P1: float = Field(ge=0, description="Average power budget of encoder 1")
    P2: float = Field(ge=0, description="Average power budget of encoder 2")


def _labels(name: str, alphabet: Alphabet) -> Tuple[str, ...]:
    if isinstance(alphabet, int):
        if alphabet < 1:
            raise ShapeMismatchError(f"alphabet {name} must have at least one symbol")
        return tuple(str(i) for i in range(alphabet))
    labels = tuple(str(a) for a in alphabet)
    if not labels or len(set(labels)) != len(labels):
        raise ShapeMismatchError(f"alphabet {name} needs distinct labels, got {labels}")
    return labels


def build_discrete_mac(
    alphabets: Mapping[str, Alphabet],
    law,
    states: Sequence[str],
) -> DiscreteStateMac:
    """
    Validate a discrete channel law

    Args:
        alphabets: sizes or label lists under keys "X1", "X2", "Y"
        law: array of shape (X1, X2, S, Y), or a mapping state -> (X1, X2, Y) table
        states: state labels, in chain order

    Returns:
        DiscreteStateMac whose rows sum to 1 within 1e-12
    """
    try:
        x1 = _labels("X1", alphabets["X1"])
        x2 = _labels("X2", alphabets["X2"])
        y = _labels("Y", alphabets["Y"])
    except KeyError as e:
        raise ShapeMismatchError(f"missing alphabet {e}") from e
    states = tuple(str(s) for s in states)

    if isinstance(law, Mapping):
        unknown = set(map(str, law)) - set(states)
        if unknown:
            raise MissingStateError(f"law given for undeclared states {sorted(unknown)}")
        missing = [s for s in states if s not in law]
        if missing:
            raise MissingStateError(f"law missing for states {missing}")
        tables = [np.asarray(law[s], dtype=np.float64) for s in states]
        if any(t.shape != (len(x1), len(x2), len(y)) for t in tables):
            raise ShapeMismatchError(
                f"every per-state table must have shape {(len(x1), len(x2), len(y))}"
            )
        table = np.stack(tables, axis=2)
    else:
        table = np.array(law, dtype=np.float64)

    expected = (len(x1), len(x2), len(states), len(y))
    if table.shape != expected:
        raise ShapeMismatchError(f"law has shape {table.shape}, expected {expected}")
    if np.any(table < 0.0) or np.any(table > 1.0) or not np.all(np.isfinite(table)):
        raise NonNormalizedError("channel probabilities must lie in [0, 1]")
    sums = table.sum(axis=3)
    worst = float(np.max(np.abs(sums - 1.0)))
    if worst > LAW_SUM_TOL:
        raise NonNormalizedError(f"p(y|x1,x2,s) rows must sum to 1, largest deviation {worst:.3e}")
    table = table / sums[..., None]
    table.setflags(write=False)
    return DiscreteStateMac(states=states, x1_labels=x1, x2_labels=x2, y_labels=y, law=table)


def _state_vector(name: str, values: Optional[Mapping[str, float]], states: Tuple[str, ...], default: float) -> np.ndarray:
    if values is None:
        return np.full(len(states), default, dtype=np.float64)
    unknown = set(map(str, values)) - set(states)
    if unknown:
        raise MissingStateError(f"{name} references undeclared states {sorted(unknown)}")
    missing = [s for s in states if s not in values]
    if missing:
        raise MissingStateError(f"{name} has no value for states {missing}")
    return np.array([float(values[s]) for s in states], dtype=np.float64)


def build_fading_mac(
    chain: MarkovChain,
    sigma2: Mapping[str, float],
    h1: Optional[Mapping[str, float]] = None,
    h2: Optional[Mapping[str, float]] = None,
    P1: float = 0.0,
    P2: float = 0.0,
) -> GaussianStateMac:
    """
    Build a Gaussian fading MAC over the states of a chain

    Args:
        chain: state process
        sigma2: noise variance per state label
        h1, h2: fading gains per state label (default 1 everywhere)
        P1, P2: average power budgets

    Returns:
        GaussianStateMac
    """
    states = chain.states
    s2 = _state_vector("sigma2", sigma2, states, 1.0)
    g1 = _state_vector("h1", h1, states, 1.0)
    g2 = _state_vector("h2", h2, states, 1.0)

    if np.any(~np.isfinite(s2)) or np.any(s2 <= 0.0):
        raise NonPositiveVarianceError(f"noise variances must be positive, got {s2}")
    if s2.max() / s2.min() > MAX_VARIANCE_RATIO:
        raise IllConditionedError(
            f"noise variance spread {s2.max() / s2.min():.3e} exceeds {MAX_VARIANCE_RATIO:.0e}"
        )
    if not np.all(np.isfinite(g1)) or not np.all(np.isfinite(g2)):
        raise ShapeMismatchError("fading gains must be finite")
    for name, budget in (("P1", P1), ("P2", P2)):
        if not math.isfinite(budget) or budget < 0:
            raise ValueError(f"{name} must be finite and nonnegative, got {budget}")

    for arr in (s2, g1, g2):
        arr.setflags(write=False)
    return GaussianStateMac(states=states, sigma2=s2, h1=g1, h2=g2, P1=float(P1), P2=float(P2))


def build_two_state_agn(
    g: float,
    b: float,
    sigmaG2: float,
    sigmaB2: float,
    P1: float,
    P2: float,
) -> Tuple[MarkovChain, GaussianStateMac]:
    """Two-state additive Gaussian noise MAC (unit gains) and its G/B chain"""
    chain = two_state_chain(g, b)
    model = build_fading_mac(chain, {"G": sigmaG2, "B": sigmaB2}, P1=P1, P2=P2)
    return chain, model


def build_switch_mac(
    g: float = 0.1,
    b: float = 0.1,
    sigmaG2: float = 1.0,
    sigmaB2: float = 10.0,
    P1: float = 10.0,
    P2: float = 10.0,
) -> Tuple[MarkovChain, GaussianStateMac]:
    """Switch channel: only encoder 1 reaches the receiver in G, only encoder 2 in B"""
    chain = two_state_chain(g, b)
    model = build_fading_mac(
        chain,
        {"G": sigmaG2, "B": sigmaB2},
        h1={"G": 1.0, "B": 0.0},
        h2={"G": 0.0, "B": 1.0},
        P1=P1,
        P2=P2,
    )
    return chain, model


def build_crossed_fading_mac(
    g: float = 0.1,
    b: float = 0.1,
    sigmaG2: float = 1.0,
    sigmaB2: float = 1.0,
    P1: float = 10.0,
    P2: float = 10.0,
) -> Tuple[MarkovChain, GaussianStateMac]:
    """Fading channel where each encoder is strong in one state and half-strength in the other"""
    chain = two_state_chain(g, b)
    model = build_fading_mac(
        chain,
        {"G": sigmaG2, "B": sigmaB2},
        h1={"G": 1.0, "B": 0.5},
        h2={"G": 0.5, "B": 1.0},
        P1=P1,
        P2=P2,
    )
    return chain, model


def binary_additive_mac(flips: Sequence[float], states: Sequence[str]) -> DiscreteStateMac:
    """Y = X1 xor X2 xor N with N ~ Bernoulli(flips[s])"""
    states = tuple(states)
    if len(flips) != len(states):
        raise ShapeMismatchError(f"need one flip probability per state, got {len(flips)} for {len(states)}")
    law = np.zeros((2, 2, len(states), 2))
    for x1 in range(2):
        for x2 in range(2):
            clean = x1 ^ x2
            for s, p in enumerate(flips):
                law[x1, x2, s, clean] = 1.0 - p
                law[x1, x2, s, 1 - clean] = p
    return build_discrete_mac({"X1": 2, "X2": 2, "Y": 2}, law, states)


def identity_mac(states: Sequence[str], size: int = 2) -> DiscreteStateMac:
    """Y = X1 in every state; encoder 2 is not heard"""
    states = tuple(states)
    law = np.zeros((size, size, len(states), size))
    for x1 in range(size):
        law[x1, :, :, x1] = 1.0
    return build_discrete_mac({"X1": size, "X2": size, "Y": size}, law, states)


def noise_only_mac(states: Sequence[str], size: int = 2) -> DiscreteStateMac:
    """Y uniform and independent of both inputs"""
    states = tuple(states)
    law = np.full((size, size, len(states), size), 1.0 / size)
    return build_discrete_mac({"X1": size, "X2": size, "Y": size}, law, states)
