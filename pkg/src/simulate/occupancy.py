# src/simulate/occupancy.py
"""
Monte Carlo checks of the multiplexing coding scheme

Samples state paths of the chain, tallies how often every delayed-state
value (one codebook per value) is visited, declares an error when a
codebook would run short, and estimates rates by plug-in from simulated
symbols.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from src.channel.channel_models import DiscreteStateMac
from src.config.config import Config
from src.errors.exceptions import ShapeMismatchError
from src.inforate.information_rates import InputPolicy, rate_triple
from src.markov.markov_chain import DelayProfile, MarkovChain, delayed_joint
from src.state.rate_state import RateTriple

logger = logging.getLogger(__name__)

NO_STATE = "*"


class OccupancyReport(BaseModel):
    """Codebook occupancy of one simulated block"""

    model_config = ConfigDict(frozen=True)

    n: int = Field(description="Block length")
    seed: int = Field(description="Seed of the trial")
    window: int = Field(description="Symbols whose delayed states are defined")
    counts1: Dict[str, int] = Field(description="N(s~1) per delayed state of encoder 1")
    counts2: Dict[str, int] = Field(description="N(s~1, s~2), keyed 'a,b'")
    thresholds1: Dict[str, float] = Field(description="Codebook lengths n1(s~1) = (P(s~1) - eps')n")
    thresholds2: Dict[str, float] = Field(description="Codebook lengths n2(s~1, s~2)")
    frequencies: Dict[str, float] = Field(description="N(s~2)/window per state (zero on an empty window)")
    deviation: float = Field(description="max |N(s~2)/window - pi(s~2)|")
    declared_error: bool = Field(description="Some count fell below its codebook length")
    epsilon_prime: float = Field(description="Codebook slack eps'")

    def as_row(self) -> dict:
        row = {"seed": self.seed, "n": self.n, "window": self.window}
        row.update({f"N1_{key}": value for key, value in self.counts1.items()})
        row.update({f"N2_{key.replace(',', '')}": value for key, value in self.counts2.items()})
        row.update({"deviation": self.deviation, "declared_error": int(self.declared_error)})
        return row


class OccupancyStudy(BaseModel):
    """Aggregate of independent occupancy trials"""

    model_config = ConfigDict(frozen=True)

    trials: List[OccupancyReport]
    expected_spread: Dict[str, float] = Field(description="Stationary std of N(s)/n per state")

    @property
    def declared_error_frequency(self) -> float:
        return sum(t.declared_error for t in self.trials) / len(self.trials)

    @property
    def max_deviation(self) -> float:
        return max(t.deviation for t in self.trials)

    def fraction_within(self, window: float) -> float:
        return sum(t.deviation <= window for t in self.trials) / len(self.trials)

    def empirical_spread(self) -> Dict[str, float]:
        labels = self.trials[0].frequencies.keys()
        return {
            label: float(np.std([t.frequencies[label] for t in self.trials], ddof=1))
            for label in labels
        }

    def summary_row(self) -> dict:
        return {
            "seed": "summary",
            "n": self.trials[0].n,
            "window": self.trials[0].window,
            "deviation": self.max_deviation,
            "declared_error": self.declared_error_frequency,
        }


def sample_state_path(chain: MarkovChain, n: int, seed: Optional[int] = None) -> np.ndarray:
    """
    Draw s_1..s_n with s_1 ~ pi and Markov steps after that

    Args:
        chain: validated chain
        n: path length (>= 1)
        seed: 64-bit seed (Config.DEFAULT_SEED when None)

    Returns:
        int array of state indices
    """
    if n < 1:
        raise ValueError(f"path length must be positive, got {n}")
    rng = Config.get_rng(seed)
    uniforms = rng.random(n)
    first = int(np.searchsorted(np.cumsum(chain.pi), uniforms[0], side="right"))
    cum = np.cumsum(chain.K, axis=1)
    # next state from every current state, for every step
    jumps = np.stack([np.searchsorted(row, uniforms, side="right") for row in cum])
    np.minimum(jumps, chain.k - 1, out=jumps)

    table = jumps.tolist()
    path = [min(first, chain.k - 1)]
    for i in range(1, n):
        path.append(table[path[-1]][i])
    return np.asarray(path, dtype=np.int64)


def delayed_states(path: np.ndarray, delays: DelayProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Align (s~1, s~2, s) over the symbols where the delayed states exist

    With d1 infinite the s~1 column is all zeros (a single "no state" value).
    """
    n = len(path)
    start = delays.d2 if delays.one_encoder else delays.d1
    if start >= n:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    current = path[start:]
    second = path[start - delays.d2: n - delays.d2]
    if delays.one_encoder:
        first = np.zeros_like(current)
    else:
        first = path[: n - delays.d1]
    return first, second, current


def _threshold_labels(chain: MarkovChain, delays: DelayProfile) -> Tuple[List[str], List[str]]:
    first = [NO_STATE] if delays.one_encoder else list(chain.states)
    return first, list(chain.states)


def occupancy_trial(
    chain: MarkovChain,
    delays: DelayProfile,
    n: int,
    epsilon_prime: Optional[float] = None,
    seed: Optional[int] = None,
) -> OccupancyReport:
    """
    Tally delayed-state occupancy along one sampled path

    Args:
        chain: state process
        delays: encoder delays
        n: block length
        epsilon_prime: codebook slack, 0 < eps' < min pi
        seed: trial seed

    Returns:
        OccupancyReport
    """
    eps = Config.EPSILON_PRIME if epsilon_prime is None else float(epsilon_prime)
    if not 0.0 < eps < float(chain.pi.min()):
        raise ValueError(f"epsilon_prime must lie in (0, {chain.pi.min():.6g}), got {eps}")
    seed = Config.DEFAULT_SEED if seed is None else int(seed)

    path = sample_state_path(chain, n, seed)
    first, second, _ = delayed_states(path, delays)
    dj = delayed_joint(chain, delays)
    k1, k = dj.table.shape[0], chain.k

    pair_counts = np.bincount(first * k + second, minlength=k1 * k).reshape(k1, k)
    single_counts = pair_counts.sum(axis=1)
    need1 = (dj.first_weights - eps) * n
    need2 = (dj.pair_weights - eps) * n
    declared = bool(np.any(single_counts < need1) or np.any(pair_counts < need2))

    state_counts = np.bincount(second, minlength=k)
    freq = state_counts / max(len(second), 1)
    labels1, labels2 = _threshold_labels(chain, delays)
    pair_keys = [f"{a},{b}" for a in labels1 for b in labels2]
    report = OccupancyReport(
        n=n,
        seed=seed,
        window=int(len(first)),
        counts1=dict(zip(labels1, single_counts.tolist())),
        counts2=dict(zip(pair_keys, pair_counts.ravel().tolist())),
        thresholds1=dict(zip(labels1, need1.tolist())),
        thresholds2=dict(zip(pair_keys, need2.ravel().tolist())),
        frequencies=dict(zip(labels2, freq.tolist())),
        deviation=float(np.max(np.abs(freq - chain.pi))),
        declared_error=declared,
        epsilon_prime=eps,
    )
    logger.debug("trial seed=%d deviation=%.4g declared=%s", seed, report.deviation, declared)
    return report


def occupancy_spread(chain: MarkovChain, n: int) -> np.ndarray:
    """
    Stationary standard deviation of the visit frequency of every state

    Uses the fundamental matrix Z = (I - K + 1 pi)^-1:
    n Var(N_a/n) -> pi_a (2 Z_aa - 1 - pi_a).
    """
    k = chain.k
    Z = np.linalg.inv(np.eye(k) - chain.K + np.outer(np.ones(k), chain.pi))
    variance = chain.pi * (2.0 * np.diag(Z) - 1.0 - chain.pi)
    return np.sqrt(np.maximum(variance, 0.0) / n)


def trial_seeds(seed: Optional[int], trials: int) -> List[int]:
    """Independent 64-bit per-trial seeds spawned from one root seed"""
    root = np.random.SeedSequence(Config.DEFAULT_SEED if seed is None else seed)
    return [int(s) for s in root.generate_state(trials, dtype=np.uint64)]


def occupancy_study(
    chain: MarkovChain,
    delays: DelayProfile,
    n: int,
    epsilon_prime: Optional[float] = None,
    seeds: Optional[Sequence[int]] = None,
    trials: int = 100,
    seed: Optional[int] = None,
    show_progress: bool = False,
) -> OccupancyStudy:
    """
    Run independent occupancy trials

    Args:
        chain, delays, n, epsilon_prime: as in occupancy_trial
        seeds: explicit per-trial seeds; spawned from `seed` when omitted
        trials: number of trials when seeds are spawned
        seed: root seed for spawning
        show_progress: tqdm progress bar

    Returns:
        OccupancyStudy
    """
    if seeds is None:
        seeds = trial_seeds(seed, trials)
    reports = [
        occupancy_trial(chain, delays, n, epsilon_prime, s)
        for s in tqdm(seeds, desc="Occupancy trials", disable=not show_progress)
    ]
    spread = dict(zip(chain.states, occupancy_spread(chain, n).tolist()))
    study = OccupancyStudy(trials=reports, expected_spread=spread)
    logger.info(
        "%d trials at n=%d: declared-error frequency %.3f, max deviation %.4f",
        len(reports), n, study.declared_error_frequency, study.max_deviation,
    )
    return study


def _draw(rng: np.random.Generator, rows: np.ndarray) -> np.ndarray:
    """One draw per row of a batch of pmfs, by inverse CDF"""
    cum = np.cumsum(rows, axis=-1)
    u = rng.random(rows.shape[0]) * cum[:, -1]
    picks = (u[:, None] >= cum).sum(axis=-1)
    return np.minimum(picks, rows.shape[-1] - 1)


def empirical_joint(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    policy: InputPolicy,
    n: int,
    seed: Optional[int] = None,
) -> np.ndarray:
    """
    Empirical pmf over (u, s~1, s~2, s, x1, x2, y) from one simulated block

    States follow a sampled path; u, x1, x2 and y are drawn from the policy
    and the channel given the delayed states.
    """
    x1_size, x2_size, k, y_size = channel.law.shape
    if k != chain.k:
        raise ShapeMismatchError(f"channel has {k} states, chain has {chain.k}", module="simulate")
    k1 = 1 if delays.one_encoder else k
    if policy.pu.shape[0] != k1 or policy.px2.shape[1] != k:
        raise ShapeMismatchError(f"policy does not match delays {delays.label()}", module="simulate")

    seed = Config.DEFAULT_SEED if seed is None else int(seed)
    path = sample_state_path(chain, n, seed)
    a, b, s = delayed_states(path, delays)
    if len(s) == 0:
        raise ValueError(f"block length {n} leaves no symbol after the delays {delays.label()}")
    # separate stream for the symbols so the path matches occupancy_trial
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 1])))

    u = _draw(rng, policy.pu[a])
    x1 = _draw(rng, policy.px1[a, u])
    x2 = _draw(rng, policy.px2[a, b, u])
    y = _draw(rng, channel.law[x1, x2, s])

    counts = np.zeros((policy.aux_size, k1, k, k, x1_size, x2_size, y_size))
    np.add.at(counts, (u, a, b, s, x1, x2, y), 1.0)
    return counts / counts.sum()


def empirical_rate_estimate(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    policy: InputPolicy,
    n: int,
    seed: Optional[int] = None,
) -> RateTriple:
    """Plug-in estimate of the rate triple from n simulated symbols"""
    estimate = rate_triple(empirical_joint(chain, delays, channel, policy, n, seed))
    logger.debug("plug-in rates at n=%d: %s", n, estimate)
    return estimate
