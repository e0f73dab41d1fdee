# src/multiletter/directed_information.py
"""
Multi-letter evaluation at small block lengths

Causally conditioned input laws P(x^n || s^{n-d}) are combined with the
state chain and the channel into the full joint over (s^n, x1^n, x2^n, y^n);
the per-symbol rate bounds are directed informations with the state
sequence as causal side information at the receiver:

    R1   <= (1/n) sum_i I(X1^i ; Y_i | Y^{i-1}, S^i, X2^i)
    R2   <= (1/n) sum_i I(X2^i ; Y_i | Y^{i-1}, S^i, X1^i)
    Rsum <= (1/n) sum_i I(X1^i, X2^i ; Y_i | Y^{i-1}, S^i)

Everything is exact summation, so block length and alphabets are capped.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.channel.channel_models import DiscreteStateMac
from src.config.config import Config
from src.errors.exceptions import (
    BudgetExceededError,
    NonNormalizedError,
    NonNormalizedJointError,
    ShapeMismatchError,
)
from src.inforate.information_rates import (
    InputPolicy,
    assemble_joint,
    mutual_information,
    rate_triple,
)
from src.markov.markov_chain import (
    INFINITE,
    DelayProfile,
    InfiniteDelay,
    MarkovChain,
    delayed_joint,
    reverse_conditional,
)
from src.state.rate_state import RateTriple

logger = logging.getLogger(__name__)

LAW_SUM_TOL = 1e-9
JOINT_SUM_TOL = 1e-10
MAX_JOINT_ENTRIES = 2 ** 22

Delay = Union[int, InfiniteDelay]


def _state_count(step: int, delay: Delay) -> int:
    """How many states s^{i-d} the input at 1-based step i may depend on"""
    if delay is INFINITE:
        return 0
    return max(step - delay, 0)


class CausalLaw(BaseModel):
    """
    P(x^n || s^{n-d}) as one conditional table per step

    steps[i-1] has shape (X,)*(i-1) + (k,)*max(i-d, 0) + (X,): past inputs,
    then the visible states s_1..s_{i-d}, then the current input.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = Field(ge=1, description="Block length")
    delay: Union[InfiniteDelay, int] = Field(description="State delay of this encoder")
    x_size: int = Field(ge=1, description="Input alphabet size")
    n_states: int = Field(ge=1, description="Number of channel states")
    steps: Tuple[np.ndarray, ...] = Field(description="Conditional table of each step")

    def step_shape(self, step: int) -> Tuple[int, ...]:
        m = _state_count(step, self.delay)
        return (self.x_size,) * (step - 1) + (self.n_states,) * m + (self.x_size,)


def _check_horizon(n: int, *sizes: int):
    if n < 1:
        raise ValueError(f"block length must be positive, got {n}")
    if n > Config.MULTILETTER_MAX_N:
        raise BudgetExceededError(f"block length {n} exceeds {Config.MULTILETTER_MAX_N}", module="multiletter")
    if any(s > Config.MULTILETTER_MAX_ALPHABET for s in sizes):
        raise BudgetExceededError(
            f"alphabet sizes {sizes} exceed {Config.MULTILETTER_MAX_ALPHABET}", module="multiletter"
        )


def build_causal_law(steps: Sequence, delay: Delay, x_size: int, n_states: int) -> CausalLaw:
    """
    Validate per-step conditional tables

    Args:
        steps: n arrays, steps[i-1] of shape (X,)*(i-1) + (k,)*max(i-d,0) + (X,)
        delay: state delay d (or INFINITE)
        x_size: input alphabet size
        n_states: number of states k

    Returns:
        CausalLaw
    """
    n = len(steps)
    _check_horizon(n, x_size)
    tables = []
    for i, raw in enumerate(steps, start=1):
        table = np.array(raw, dtype=np.float64)
        m = _state_count(i, delay)
        expected = (x_size,) * (i - 1) + (n_states,) * m + (x_size,)
        if table.shape != expected:
            raise ShapeMismatchError(f"step {i} has shape {table.shape}, expected {expected}", module="multiletter")
        if np.any(table < 0.0) or not np.all(np.isfinite(table)):
            raise NonNormalizedError(f"step {i} has negative entries", module="multiletter")
        worst = float(np.max(np.abs(table.sum(axis=-1) - 1.0)))
        if worst > LAW_SUM_TOL:
            raise NonNormalizedError(f"step {i} slices must sum to 1 (deviation {worst:.3e})", module="multiletter")
        table = table / table.sum(axis=-1, keepdims=True)
        table.setflags(write=False)
        tables.append(table)
    return CausalLaw(n=n, delay=delay, x_size=x_size, n_states=n_states, steps=tuple(tables))


def _place(core: np.ndarray, state_axes: Sequence[int], step: int, m: int, x_size: int, n_states: int) -> np.ndarray:
    """Broadcast a table over selected state axes to the full step shape"""
    shape = [1] * (step - 1 + m) + [x_size]
    for j in state_axes:
        shape[step - 1 + j] = n_states
    full = (x_size,) * (step - 1) + (n_states,) * m + (x_size,)
    return np.broadcast_to(core.reshape(shape), full).copy()


def stationary_causal_law(
    table: np.ndarray,
    delay: Delay,
    n: int,
    n_states: int,
    fallback: Optional[np.ndarray] = None,
) -> CausalLaw:
    """
    Memoryless policy P(x_i | s_{i-d}) repeated over n steps

    Args:
        table: P(x | s~), shape (k, X); shape (X,) when delay is INFINITE
        delay: state delay d
        n: block length
        n_states: number of states
        fallback: input law of the first d steps (default: uniform over table rows)

    Returns:
        CausalLaw
    """
    table = np.asarray(table, dtype=np.float64)
    x_size = table.shape[-1]
    if table.ndim == 1:
        fallback = table
    elif fallback is None:
        fallback = table.mean(axis=0)
    fallback = np.asarray(fallback, dtype=np.float64)
    steps = []
    for i in range(1, n + 1):
        m = _state_count(i, delay)
        if m >= 1 and table.ndim == 2:
            steps.append(_place(table, [m - 1], i, m, x_size, n_states))
        else:
            steps.append(_place(fallback, [], i, m, x_size, n_states))
    return build_causal_law(steps, delay, x_size, n_states)


def embed_policy(chain: MarkovChain, delays: DelayProfile, policy: InputPolicy, n: int) -> Tuple[CausalLaw, CausalLaw]:
    """
    Turn a single-letter policy (|U| = 1) into a pair of causal laws

    Encoder 1 uses P(x1 | s_{i-d1}) and encoder 2 P(x2 | s_{i-d1}, s_{i-d2}).
    Steps without the needed states fall back to the policy's marginal law
    given whatever state is visible.
    """
    if policy.aux_size != 1:
        raise ValueError("only policies with a single auxiliary value can be embedded")
    k = chain.k
    px1 = policy.px1[:, 0, :]
    px2 = policy.px2[:, :, 0, :]
    x1_size, x2_size = px1.shape[-1], px2.shape[-1]
    pair = delayed_joint(chain, delays).pair_weights

    steps1, steps2 = [], []
    for i in range(1, n + 1):
        m1 = _state_count(i, delays.d1)
        m2 = _state_count(i, delays.d2)
        if delays.one_encoder:
            steps1.append(_place(px1[0], [], i, 0, x1_size, k))
        elif m1 >= 1:
            steps1.append(_place(px1, [m1 - 1], i, m1, x1_size, k))
        else:
            steps1.append(_place(pair.sum(axis=1) @ px1, [], i, 0, x1_size, k))

        if delays.one_encoder:
            if m2 >= 1:
                steps2.append(_place(px2[0], [m2 - 1], i, m2, x2_size, k))
            else:
                steps2.append(_place(pair[0] @ px2[0], [], i, 0, x2_size, k))
        elif m1 >= 1:
            a_axis, b_axis = m1 - 1, m2 - 1
            if a_axis == b_axis:
                core = px2[np.arange(k), np.arange(k)]
                steps2.append(_place(core, [a_axis], i, m2, x2_size, k))
            else:
                steps2.append(_place(px2, [a_axis, b_axis], i, m2, x2_size, k))
        elif m2 >= 1:
            back = reverse_conditional(chain, delays.gap)
            core = np.einsum("ab,abx->bx", back, px2)
            steps2.append(_place(core, [m2 - 1], i, m2, x2_size, k))
        else:
            steps2.append(_place(np.einsum("ab,abx->x", pair, px2), [], i, 0, x2_size, k))

    law1 = build_causal_law(steps1, delays.d1, x1_size, k)
    law2 = build_causal_law(steps2, delays.d2, x2_size, k)
    return law1, law2


def _as_sequences(axes) -> List[List[int]]:
    axes = list(axes)
    if axes and isinstance(axes[0], (int, np.integer)):
        return [list(axes)]
    return [list(seq) for seq in axes]


def _check_joint(joint: np.ndarray, outputs: Sequence[int], inputs: List[List[int]]):
    total = math.fsum(np.asarray(joint).ravel())
    if np.any(joint < 0) or abs(total - 1.0) > JOINT_SUM_TOL:
        raise NonNormalizedJointError(f"sequence joint must be a pmf, total mass {total!r}", module="multiletter")
    sizes = [joint.shape[ax] for ax in list(outputs) + [a for seq in inputs for a in seq]]
    _check_horizon(len(outputs), *sizes)
    for seq in inputs:
        if len(seq) != len(outputs):
            raise ShapeMismatchError("every input sequence must have one axis per output", module="multiletter")


def directed_information(
    joint: np.ndarray,
    inputs,
    outputs: Sequence[int],
    conditioning=(),
) -> float:
    """
    sum_i I(X^i ; Y_i | Y^{i-1}, Z^i) in bits

    Args:
        joint: pmf over sequence axes
        inputs: axes x_1..x_n of one input sequence, or a list of such sequences
            (treated jointly)
        outputs: axes y_1..y_n
        conditioning: optional causal side sequences z (one or several)

    Returns:
        directed information I(X^n -> Y^n || Z^n)
    """
    inputs = _as_sequences(inputs)
    side = _as_sequences(conditioning) if len(conditioning) else []
    outputs = list(outputs)
    _check_joint(joint, outputs, inputs + side)
    total = []
    for i in range(len(outputs)):
        a = [seq[j] for seq in inputs for j in range(i + 1)]
        given = outputs[:i] + [seq[j] for seq in side for j in range(i + 1)]
        total.append(mutual_information(joint, a, [outputs[i]], given))
    return math.fsum(total)


def _marginal(joint: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    drop = tuple(ax for ax in range(joint.ndim) if ax not in set(keep))
    return joint.sum(axis=drop, keepdims=True) if drop else joint


def causally_conditioned_pmf(joint: np.ndarray, outputs: Sequence[int], inputs) -> np.ndarray:
    """P(y^n || x^n) = prod_i P(y_i | y^{i-1}, x^i), broadcastable against the joint"""
    inputs = _as_sequences(inputs)
    outputs = list(outputs)
    result = np.ones((1,) * joint.ndim)
    for i in range(len(outputs)):
        past = outputs[:i] + [seq[j] for seq in inputs for j in range(i + 1)]
        num = _marginal(joint, past + [outputs[i]])
        den = _marginal(joint, past)
        result = result * np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return result


def directed_information_log_ratio(joint: np.ndarray, inputs, outputs: Sequence[int]) -> float:
    """E[log2 P(Y^n || X^n) / P(Y^n)], the expectation form of directed information"""
    inputs = _as_sequences(inputs)
    _check_joint(joint, list(outputs), inputs)
    causal = np.broadcast_to(causally_conditioned_pmf(joint, outputs, inputs), joint.shape)
    marginal = np.broadcast_to(_marginal(joint, list(outputs)), joint.shape)
    live = joint > 0
    terms = joint[live] * np.log2(causal[live] / marginal[live])
    return math.fsum(terms)


def sequence_joint(chain: MarkovChain, channel: DiscreteStateMac, laws: Tuple[CausalLaw, CausalLaw], n: int) -> np.ndarray:
    """
    Joint pmf over (s_1..s_n, x1_1..x1_n, x2_1..x2_n, y_1..y_n)

    The chain starts from its stationary law.
    """
    law1, law2 = laws
    x1_size, x2_size, k, y_size = channel.law.shape
    _check_horizon(n, x1_size, x2_size, y_size)
    if k != chain.k or law1.n_states != k or law2.n_states != k:
        raise ShapeMismatchError("chain, channel and causal laws disagree on the number of states", module="multiletter")
    if law1.n < n or law2.n < n or law1.x_size != x1_size or law2.x_size != x2_size:
        raise ShapeMismatchError("causal laws do not cover the block length or alphabets", module="multiletter")
    entries = (k * x1_size * x2_size * y_size) ** n
    if entries > MAX_JOINT_ENTRIES:
        raise BudgetExceededError(f"sequence joint would have {entries} entries", module="multiletter")

    s = list(range(n))
    a = [n + t for t in range(n)]
    b = [2 * n + t for t in range(n)]
    y = [3 * n + t for t in range(n)]

    operands = [chain.pi, [s[0]]]
    for t in range(1, n):
        operands += [chain.K, [s[t - 1], s[t]]]
    for law, x in ((law1, a), (law2, b)):
        for t in range(n):
            m = _state_count(t + 1, law.delay)
            operands += [law.steps[t], x[:t] + s[:m] + [x[t]]]
    for t in range(n):
        operands += [channel.law, [a[t], b[t], s[t], y[t]]]
    return np.einsum(*operands, s + a + b + y, optimize="greedy")


def rn_point(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    laws: Tuple[CausalLaw, CausalLaw],
    n: int,
) -> RateTriple:
    """
    Per-symbol rate bounds of a pair of causal input laws at block length n

    Returns:
        RateTriple divided by n
    """
    law1, law2 = laws
    if law1.delay != delays.d1 or law2.delay != delays.d2:
        raise ShapeMismatchError(
            f"causal laws use delays ({law1.delay}, {law2.delay}), expected {delays.label()}",
            module="multiletter",
        )
    joint = sequence_joint(chain, channel, laws, n)
    s = list(range(n))
    x1 = [n + t for t in range(n)]
    x2 = [2 * n + t for t in range(n)]
    y = [3 * n + t for t in range(n)]
    return RateTriple(
        r1=directed_information(joint, [x1], y, [x2, s]) / n,
        r2=directed_information(joint, [x2], y, [x1, s]) / n,
        rsum=directed_information(joint, [x1, x2], y, [s]) / n,
    )


def embedding_deficit(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    policy: InputPolicy,
    n: int,
) -> float:
    """Largest shortfall of the embedded per-symbol bounds below the single-letter ones (>= 0)"""
    single = rate_triple(assemble_joint(chain, delays, channel, policy))
    multi = rn_point(chain, delays, channel, embed_policy(chain, delays, policy, n), n)
    shortfall = max(single.r1 - multi.r1, single.r2 - multi.r2, single.rsum - multi.rsum, 0.0)
    logger.debug("embedding deficit at n=%d: %.3e", n, shortfall)
    return shortfall
