# src/inforate/information_rates.py
"""
Single-letter rate bounds for discrete channels

The joint law of (u, s~1, s~2, s, x1, x2, y) is assembled from the delayed
state law, the input policy and the channel, and the three conditional
mutual informations bounding R1, R2 and R1 + R2 are evaluated by exact
summation. Axis order of every joint in this module:

    0: u   1: s~1   2: s~2   3: s   4: x1   5: x2   6: y
"""

import hashlib
import logging
import math
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import entr

from src.channel.channel_models import DiscreteStateMac
from src.errors.exceptions import (
    AuxCardinalityError,
    NonNormalizedError,
    NonNormalizedJointError,
    ShapeMismatchError,
)
from src.markov.markov_chain import DelayProfile, MarkovChain, delayed_joint
from src.state.rate_state import RateTriple

logger = logging.getLogger(__name__)

MAX_AUX_SIZE = 3
POLICY_SUM_TOL = 1e-9
JOINT_SUM_TOL = 1e-10
LN2 = math.log(2.0)

U_AXIS, S1_AXIS, S2_AXIS, S_AXIS, X1_AXIS, X2_AXIS, Y_AXIS = range(7)
CONDITION_AXES = (U_AXIS, S1_AXIS, S2_AXIS, S_AXIS)


class InputPolicy(BaseModel):
    """
    Conditional input laws P(u|s~1) P(x1|s~1,u) P(x2|s~1,s~2,u)

    Shapes: pu (k1, U), px1 (k1, U, X1), px2 (k1, k, U, X2). For an
    encoder 1 without state information k1 == 1.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    pu: np.ndarray = Field(description="P(u | s~1)")
    px1: np.ndarray = Field(description="P(x1 | s~1, u)")
    px2: np.ndarray = Field(description="P(x2 | s~1, s~2, u)")

    @property
    def aux_size(self) -> int:
        return self.pu.shape[1]

    @property
    def k1(self) -> int:
        return self.pu.shape[0]


def _check_slices(name: str, table: np.ndarray):
    if not np.all(np.isfinite(table)) or np.any(table < -POLICY_SUM_TOL) or np.any(table > 1.0 + POLICY_SUM_TOL):
        raise NonNormalizedError(f"{name} entries must lie in [0, 1]", module="inforate")
    worst = float(np.max(np.abs(table.sum(axis=-1) - 1.0)))
    if worst > POLICY_SUM_TOL:
        raise NonNormalizedError(f"{name} slices must sum to 1, largest deviation {worst:.3e}", module="inforate")


def build_input_policy(pu, px1, px2) -> InputPolicy:
    """
    Validate and freeze an input policy

    Args:
        pu: P(u | s~1), shape (k1, U)
        px1: P(x1 | s~1, u), shape (k1, U, X1)
        px2: P(x2 | s~1, s~2, u), shape (k1, k, U, X2)

    Returns:
        InputPolicy with every slice renormalized
    """
    pu = np.array(pu, dtype=np.float64)
    px1 = np.array(px1, dtype=np.float64)
    px2 = np.array(px2, dtype=np.float64)
    if pu.ndim != 2 or px1.ndim != 3 or px2.ndim != 4:
        raise ShapeMismatchError("policy tables must have 2, 3 and 4 axes", module="inforate")
    k1, n_aux = pu.shape
    if n_aux > MAX_AUX_SIZE:
        raise AuxCardinalityError(f"|U| = {n_aux} exceeds the bound {MAX_AUX_SIZE}")
    if px1.shape[:2] != (k1, n_aux) or px2.shape[0] != k1 or px2.shape[2] != n_aux:
        raise ShapeMismatchError(
            f"inconsistent policy shapes pu{pu.shape}, px1{px1.shape}, px2{px2.shape}",
            module="inforate",
        )
    for name, table in (("P(u|s~1)", pu), ("P(x1|s~1,u)", px1), ("P(x2|s~1,s~2,u)", px2)):
        _check_slices(name, table)
    clipped = [np.clip(t, 0.0, 1.0) for t in (pu, px1, px2)]
    tables = [t / t.sum(axis=-1, keepdims=True) for t in clipped]
    for t in tables:
        t.setflags(write=False)
    return InputPolicy(pu=tables[0], px1=tables[1], px2=tables[2])


def uniform_policy(k1: int, k: int, x1_size: int, x2_size: int, aux_size: int = 1) -> InputPolicy:
    return build_input_policy(
        np.full((k1, aux_size), 1.0 / aux_size),
        np.full((k1, aux_size, x1_size), 1.0 / x1_size),
        np.full((k1, k, aux_size, x2_size), 1.0 / x2_size),
    )


def symmetric_policy(pu, px1, px2) -> InputPolicy:
    """
    Policy for equal delays, P(u|s~) P(x1|s~,u) P(x2|s~,u)

    Args:
        pu: shape (k, U)
        px1: shape (k, U, X1)
        px2: shape (k, U, X2)
    """
    px2 = np.asarray(px2, dtype=np.float64)
    k = px2.shape[0]
    lifted = np.broadcast_to(px2[:, None, :, :], (k, k) + px2.shape[1:])
    return build_input_policy(pu, px1, lifted)


def one_encoder_policy(pq, px1, px2) -> InputPolicy:
    """
    Policy for an encoder 1 without state, P(q) P(x1|q) P(x2|s~,q)

    Args:
        pq: shape (U,)
        px1: shape (U, X1)
        px2: shape (k, U, X2)
    """
    return build_input_policy(
        np.asarray(pq, dtype=np.float64)[None, :],
        np.asarray(px1, dtype=np.float64)[None, :, :],
        np.asarray(px2, dtype=np.float64)[None, :, :, :],
    )


def random_policy(rng: np.random.Generator, k1: int, k: int, x1_size: int, x2_size: int, aux_size: int = 1) -> InputPolicy:
    """Every conditional slice drawn from a flat Dirichlet"""
    return build_input_policy(
        rng.dirichlet(np.ones(aux_size), size=(k1,)),
        rng.dirichlet(np.ones(x1_size), size=(k1, aux_size)),
        rng.dirichlet(np.ones(x2_size), size=(k1, k, aux_size)),
    )


def policy_vector(policy: InputPolicy) -> np.ndarray:
    return np.concatenate([policy.pu.ravel(), policy.px1.ravel(), policy.px2.ravel()])


def policy_hash(policy) -> str:
    """Short stable id of a policy (anything exposing numpy arrays via policy_vector or .vector())"""
    vector = policy.vector() if hasattr(policy, "vector") else policy_vector(policy)
    rounded = np.round(np.asarray(vector, dtype=np.float64), 12) + 0.0
    return hashlib.md5(rounded.tobytes()).hexdigest()[:12]


def compose_joint(table: np.ndarray, law: np.ndarray, pu: np.ndarray, px1: np.ndarray, px2: np.ndarray) -> np.ndarray:
    """Product of the delayed-state table, the policy factors and the channel law"""
    return np.einsum("abs,au,aup,abuq,pqsy->uabspqy", table, pu, px1, px2, law)


def assemble_joint(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    policy: InputPolicy,
) -> np.ndarray:
    """
    Joint pmf over (u, s~1, s~2, s, x1, x2, y)

    Args:
        chain: state process
        delays: encoder delays
        channel: discrete channel over the chain's states
        policy: input policy matching the delay case

    Returns:
        array of shape (U, k1, k, k, X1, X2, Y) summing to 1
    """
    if channel.law.shape[2] != chain.k:
        raise ShapeMismatchError(
            f"channel has {channel.law.shape[2]} states, chain has {chain.k}", module="inforate"
        )
    dj = delayed_joint(chain, delays)
    k1 = dj.table.shape[0]
    x1_size, x2_size = channel.law.shape[:2]
    expected = {
        "pu": (k1, policy.aux_size),
        "px1": (k1, policy.aux_size, x1_size),
        "px2": (k1, chain.k, policy.aux_size, x2_size),
    }
    for name, shape in expected.items():
        if getattr(policy, name).shape != shape:
            raise ShapeMismatchError(
                f"{name} has shape {getattr(policy, name).shape}, expected {shape} for {delays.label()}",
                module="inforate",
            )
    return compose_joint(dj.table, channel.law, policy.pu, policy.px1, policy.px2)


def collapse_symmetric(joint: np.ndarray) -> np.ndarray:
    """Merge the s~2 axis into s~1 for equal delays (s~1 == s~2 almost surely)"""
    return joint.sum(axis=S2_AXIS, keepdims=True)


def marginal_entropy(joint: np.ndarray, keep: Iterable[int]) -> float:
    """Entropy in nats of the marginal on the kept axes (0 log 0 = 0)"""
    keep = tuple(sorted(set(keep)))
    drop = tuple(ax for ax in range(joint.ndim) if ax not in keep)
    marginal = joint.sum(axis=drop) if drop else joint
    return math.fsum(entr(marginal).ravel())


def mutual_information(joint: np.ndarray, a: Sequence[int], b: Sequence[int], given: Sequence[int] = ()) -> float:
    """I(A; B | C) in bits, by exact summation over the joint"""
    a, b, given = tuple(a), tuple(b), tuple(given)
    nats = math.fsum([
        marginal_entropy(joint, a + given),
        marginal_entropy(joint, b + given),
        -marginal_entropy(joint, a + b + given),
        -marginal_entropy(joint, given) if given else 0.0,
    ])
    return max(nats, 0.0) / LN2


def rate_triple(joint: np.ndarray) -> RateTriple:
    """
    Evaluate I(X1;Y|X2,C), I(X2;Y|X1,C) and I(X1,X2;Y|C) with C = (U, S~1, S~2, S)

    Args:
        joint: normalized pmf in the axis order of this module

    Returns:
        RateTriple in bits/symbol
    """
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != 7:
        raise ShapeMismatchError(f"joint must have 7 axes, got {joint.ndim}", module="inforate")
    total = math.fsum(joint.ravel())
    if np.any(joint < 0.0) or abs(total - 1.0) > JOINT_SUM_TOL:
        raise NonNormalizedJointError(f"joint must be a pmf, total mass {total!r}")

    cond = CONDITION_AXES
    return RateTriple(
        r1=mutual_information(joint, (X1_AXIS,), (Y_AXIS,), cond + (X2_AXIS,)),
        r2=mutual_information(joint, (X2_AXIS,), (Y_AXIS,), cond + (X1_AXIS,)),
        rsum=mutual_information(joint, (X1_AXIS, X2_AXIS), (Y_AXIS,), cond),
    )
