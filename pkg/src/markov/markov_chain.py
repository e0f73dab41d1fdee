# src/markov/markov_chain.py
"""
Finite-state Markov chain machinery: validation, stationary law, d-step
powers and the joint law of the delayed states seen by the two encoders.

Matrices are row-stochastic: K[i, j] = P(next = j | current = i).
"""

import logging
import math
from enum import Enum
from functools import reduce
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.errors.exceptions import (
    DegenerateChainError,
    NonStochasticError,
    NotErgodicError,
    ShapeMismatchError,
    ZeroStationaryMassError,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-9
MIN_STATIONARY_MASS = 1e-15


class InfiniteDelay(str, Enum):
    """Marker for an encoder that never sees the state"""

    INFINITE = "inf"


INFINITE = InfiniteDelay.INFINITE


class MarkovChain(BaseModel):
    """Validated irreducible, aperiodic chain with its stationary law"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    states: Tuple[str, ...] = Field(description="Ordered state labels")
    K: np.ndarray = Field(description="Row-stochastic one-step transition matrix")
    pi: np.ndarray = Field(description="Stationary distribution")

    @property
    def k(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        return self.states.index(label)

    def transition(self, src: str, dst: str, d: int = 1) -> float:
        """P(S_{i+d} = dst | S_i = src)"""
        return float(d_step_matrix(self, d)[self.index(src), self.index(dst)])


class DelayProfile(BaseModel):
    """Encoder delays with d1 >= d2; d1 may be INFINITE"""

    model_config = ConfigDict(frozen=True)

    d1: Union[InfiniteDelay, int] = Field(description="Delay of encoder 1 (or INFINITE)")
    d2: int = Field(ge=0, description="Delay of encoder 2")

    @field_validator("d1", mode="before")
    @classmethod
    def _parse_infinite(cls, value):
        if isinstance(value, str) and value.strip().lower() in ("inf", "infinite", "infinity"):
            return INFINITE
        if isinstance(value, float) and math.isinf(value):
            return INFINITE
        return value

    @model_validator(mode="after")
    def _check_order(self):
        if self.d1 is not INFINITE:
            if self.d1 < 0:
                raise ValueError(f"d1 must be nonnegative, got {self.d1}")
            if self.d2 > self.d1:
                raise ValueError(f"delays must satisfy d2 <= d1, got d1={self.d1}, d2={self.d2}")
        return self

    @property
    def one_encoder(self) -> bool:
        """True when encoder 1 has no state information"""
        return self.d1 is INFINITE

    @property
    def symmetric(self) -> bool:
        return not self.one_encoder and self.d1 == self.d2

    @property
    def gap(self) -> Optional[int]:
        return None if self.one_encoder else self.d1 - self.d2

    @property
    def case(self) -> str:
        if self.one_encoder:
            return "one-encoder"
        return "symmetric" if self.symmetric else "asymmetric"

    def label(self) -> str:
        d1 = "inf" if self.one_encoder else str(self.d1)
        return f"d1={d1},d2={self.d2}"


class DelayedJoint(BaseModel):
    """Joint pmf of (s~1, s~2, s)

    The table has shape (k1, k, k); k1 == 1 when d1 is INFINITE, in which
    case the first axis is a singleton "no state" coordinate.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    table: np.ndarray = Field(description="P(s~1, s~2, s)")
    states: Tuple[str, ...] = Field(description="State labels of the chain")
    delays: DelayProfile = Field(description="Delays that produced the table")

    @property
    def first_weights(self) -> np.ndarray:
        """P(s~1), shape (k1,)"""
        return self.table.sum(axis=(1, 2))

    @property
    def pair_weights(self) -> np.ndarray:
        """P(s~1, s~2), shape (k1, k)"""
        return self.table.sum(axis=2)

    @property
    def state_marginal(self) -> np.ndarray:
        return self.table.sum(axis=(0, 1))


def _is_irreducible(support: np.ndarray) -> bool:
    k = support.shape[0]
    reach = (support | np.eye(k, dtype=bool)).astype(np.int64)
    for _ in range(max(1, math.ceil(math.log2(k)) + 1)):
        reach = ((reach @ reach) > 0).astype(np.int64)
    return bool(reach.all())


def _period(support: np.ndarray) -> int:
    """gcd of closed-walk lengths up to 2k"""
    k = support.shape[0]
    step = support.astype(np.int64)
    walk = np.eye(k, dtype=np.int64)
    lengths = []
    for length in range(1, 2 * k + 1):
        walk = ((walk @ step) > 0).astype(np.int64)
        if np.any(np.diag(walk)):
            lengths.append(length)
    if not lengths:
        return 0
    return reduce(math.gcd, lengths)


def _stationary(K: np.ndarray) -> np.ndarray:
    k = K.shape[0]
    system = np.vstack([K.T - np.eye(k), np.ones((1, k))])
    rhs = np.zeros(k + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return pi


def validate_chain(K, states: Optional[Sequence[str]] = None) -> MarkovChain:
    """
    Validate a transition matrix and build a chain with its stationary law

    Args:
        K: square matrix, K[i, j] = P(j | i)
        states: optional state labels (defaults to "0", "1", ...)

    Returns:
        MarkovChain with cached pi
    """
    K = np.array(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] == 0:
        raise ShapeMismatchError(f"transition matrix must be square, got shape {K.shape}", module="markov")
    k = K.shape[0]
    if states is None:
        states = tuple(str(i) for i in range(k))
    states = tuple(str(s) for s in states)
    if len(states) != k or len(set(states)) != k:
        raise ShapeMismatchError(f"need {k} distinct state labels, got {states}", module="markov")

    if np.any(K < 0.0) or np.any(K > 1.0) or not np.all(np.isfinite(K)):
        raise NonStochasticError("transition probabilities must lie in [0, 1]")
    row_sums = K.sum(axis=1)
    worst = float(np.max(np.abs(row_sums - 1.0)))
    if worst > ROW_SUM_TOL:
        raise NonStochasticError(f"rows must sum to 1, largest deviation {worst:.3e}")
    K = K / row_sums[:, None]

    support = K > 0.0
    if not _is_irreducible(support):
        raise NotErgodicError("chain is reducible (more than one communicating class)")
    period = _period(support)
    if period != 1:
        raise NotErgodicError(f"chain is periodic with period {period}")

    pi = _stationary(K)
    if np.any(pi <= MIN_STATIONARY_MASS):
        raise ZeroStationaryMassError(f"stationary law has a state with no mass: {pi}")
    pi = pi / pi.sum()

    K.setflags(write=False)
    pi.setflags(write=False)
    logger.debug("validated %d-state chain, pi=%s", k, pi)
    return MarkovChain(states=states, K=K, pi=pi)


def two_state_chain(g: float, b: float, states: Sequence[str] = ("G", "B")) -> MarkovChain:
    """Good/bad chain with P(B|G) = b and P(G|B) = g, so pi(G) = g / (g + b)"""
    _check_two_state(g, b)
    return validate_chain([[1.0 - b, b], [g, 1.0 - g]], states=states)


def d_step_matrix(chain: MarkovChain, d: int) -> np.ndarray:
    """K^d by repeated squaring; d = 0 gives the identity"""
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d}")
    return np.array(np.linalg.matrix_power(chain.K, int(d)))


def _check_two_state(g: float, b: float):
    if not (0.0 <= g <= 1.0 and 0.0 <= b <= 1.0):
        raise NonStochasticError(f"g and b must be probabilities, got g={g}, b={b}")
    if g + b == 0.0:
        raise DegenerateChainError("g = b = 0 leaves both states absorbing")


def two_state_d_step(g: float, b: float, d: int) -> np.ndarray:
    """
    Closed-form d-step matrix of the two-state chain

    K^d = Pi + (1 - g - b)^d (I - Pi), where every row of Pi is the
    stationary law (g, b) / (g + b).

    Args:
        g: P(G | B)
        b: P(B | G)
        d: number of steps

    Returns:
        2x2 row-stochastic matrix in (G, B) order
    """
    _check_two_state(g, b)
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d}")
    pi_g = g / (g + b)
    limit = np.array([[pi_g, 1.0 - pi_g], [pi_g, 1.0 - pi_g]])
    lam = (1.0 - g - b) ** int(d)
    return limit + lam * (np.eye(2) - limit)


def delayed_joint(chain: MarkovChain, delays: DelayProfile) -> DelayedJoint:
    """
    Joint law of the delayed states and the current state

    P(s~1, s~2, s) = pi(s~1) K^{d1-d2}[s~1, s~2] K^{d2}[s~2, s]. With d1
    INFINITE the s~1 axis is a singleton and the table is
    pi(s~2) K^{d2}[s~2, s].
    """
    Kd2 = d_step_matrix(chain, delays.d2)
    if delays.one_encoder:
        table = (chain.pi[:, None] * Kd2)[None, :, :]
    else:
        head = chain.pi[:, None] * d_step_matrix(chain, delays.gap)
        table = head[:, :, None] * Kd2[None, :, :]
    table.setflags(write=False)
    return DelayedJoint(table=table, states=chain.states, delays=delays)


def mixing_distance(chain: MarkovChain, d: int) -> float:
    """Largest total-variation distance between two rows of K^d"""
    Kd = d_step_matrix(chain, d)
    diffs = np.abs(Kd[:, None, :] - Kd[None, :, :]).sum(axis=2)
    return 0.5 * float(diffs.max())


def reverse_conditional(chain: MarkovChain, gap: int) -> np.ndarray:
    """P(S_{i-gap} = a | S_i = b) as a matrix indexed [a, b]"""
    forward = chain.pi[:, None] * d_step_matrix(chain, gap)
    return forward / forward.sum(axis=0, keepdims=True)
