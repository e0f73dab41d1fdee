# src/gaussian_power/power_control.py
"""
Power control for the Gaussian / fading MAC with delayed CSI

Rates are closed-form weighted sums of log terms over the delayed-state
law W(s~1, s~2, s). Policies map the encoder's delayed state to a power:
p1 has shape (k1,) and p2 shape (k1, k), k1 == 1 when encoder 1 has no
state. Every objective handled here is a nonnegative combination

    c1 * R1 + c2 * R2 + c3 * (R1 + R2)

which is concave in (p1, p2), so a projected-gradient ascent that reaches
the KKT conditions has found the global optimum.
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from src.channel.channel_models import GaussianStateMac
from src.config.config import Config
from src.errors.exceptions import NonConvergenceError, ShapeMismatchError
from src.inforate.information_rates import policy_hash
from src.markov.markov_chain import (
    INFINITE,
    DelayProfile,
    MarkovChain,
    delayed_joint,
)
from src.region.rate_region import upper_concave_envelope
from src.region.simplex_projection import project_weighted_simplex
from src.state.rate_state import (
    PointProvenance,
    RatePoint,
    RateRegion,
    RateTriple,
    SolverSettings,
)

logger = logging.getLogger(__name__)

HALF_LOG2 = 0.5 / math.log(2.0)
ARMIJO = 1e-4
ACTIVE_TOL = 1e-12
SUM_RATE = (0.0, 0.0, 1.0)


class PowerPolicy(BaseModel):
    """Power per delayed state: p1[s~1] and p2[s~1, s~2]"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    p1: np.ndarray = Field(description="Power of encoder 1, shape (k1,)")
    p2: np.ndarray = Field(description="Power of encoder 2, shape (k1, k)")
    states: Tuple[str, ...] = Field(description="State labels")
    delays: DelayProfile = Field(description="Delay case the policy was built for")

    def vector(self) -> np.ndarray:
        return np.concatenate([self.p1.ravel(), self.p2.ravel()])

    def p1_map(self) -> Dict[str, float]:
        """s~1 -> power; a single '*' entry when encoder 1 has no state"""
        if self.delays.one_encoder:
            return {"*": float(self.p1[0])}
        return {a: float(self.p1[i]) for i, a in enumerate(self.states)}

    def p2_map(self) -> Dict[object, float]:
        """(s~1, s~2) -> power; keyed by s~ alone in the symmetric and one-encoder cases"""
        if self.delays.one_encoder:
            return {b: float(self.p2[0, j]) for j, b in enumerate(self.states)}
        if self.delays.symmetric:
            return {a: float(self.p2[i, i]) for i, a in enumerate(self.states)}
        return {
            (a, b): float(self.p2[i, j])
            for i, a in enumerate(self.states)
            for j, b in enumerate(self.states)
        }

    def csv_columns(self) -> Dict[str, float]:
        """Flat p1_<a>, p2_<a><b> columns for every state pair"""
        row = {}
        for i, a in enumerate(self.states):
            row[f"p1_{a}"] = float(self.p1[0 if self.delays.one_encoder else i])
        for i, a in enumerate(self.states):
            for j, b in enumerate(self.states):
                if self.delays.one_encoder:
                    value = self.p2[0, j]
                elif self.delays.symmetric:
                    value = self.p2[i, i] if i == j else 0.0
                else:
                    value = self.p2[i, j]
                row[f"p2_{a}{b}"] = float(value)
        return row


class KKTResidual(BaseModel):
    """Optimality diagnostics of a power policy"""

    model_config = ConfigDict(frozen=True)

    stationarity: float = Field(description="Largest marginal-utility gap to the multiplier")
    complementary_slackness: float = Field(description="Largest multiplier times budget slack")
    primal_feasibility: float = Field(description="Budget overrun plus negative power")
    dual_feasibility: float = Field(description="Negative part of the multipliers")
    nu1: float = Field(description="Multiplier of the encoder 1 budget")
    nu2: float = Field(description="Multiplier of the encoder 2 budget")
    gaps1: List[float] = Field(default_factory=list, description="Per-s~1 stationarity gaps of encoder 1")
    gaps2: List[List[float]] = Field(default_factory=list, description="Per-(s~1, s~2) gaps of encoder 2")

    @property
    def max_residual(self) -> float:
        return max(
            self.stationarity,
            self.complementary_slackness,
            self.primal_feasibility,
            self.dual_feasibility,
        )


class DelaySweepRow(BaseModel):
    """One point of a delay sweep"""

    model_config = ConfigDict(frozen=True)

    d: int = Field(description="Swept delay value")
    delays: DelayProfile = Field(description="Delay pair used")
    sum_rate: float = Field(description="Optimal sum rate in bits/symbol")
    policy: PowerPolicy = Field(description="Optimal power policy")
    residual: float = Field(description="KKT residual of the returned policy")


class _GaussianObjective:
    """c1 R1 + c2 R2 + c3 Rsum over a fixed delayed-state law, with derivatives"""

    def __init__(self, table: np.ndarray, model: GaussianStateMac, coef: Sequence[float]):
        self.W = table
        self.w1 = table.sum(axis=(1, 2))
        self.w2 = table.sum(axis=2)
        self.sigma2 = model.sigma2[None, None, :]
        self.g1 = (model.h1 ** 2)[None, None, :]
        self.g2 = (model.h2 ** 2)[None, None, :]
        self.coef = tuple(float(c) for c in coef)

    def _snr(self, p1: np.ndarray, p2: np.ndarray):
        a = self.g1 * p1[:, None, None]
        b = self.g2 * p2[:, :, None]
        return a, b

    def rates(self, p1: np.ndarray, p2: np.ndarray) -> RateTriple:
        a, b = self._snr(p1, p2)
        s = self.sigma2

        def bound(snr):
            terms = self.W * np.log1p(np.broadcast_to(snr / s, self.W.shape))
            return max(HALF_LOG2 * math.fsum(terms.ravel()), 0.0)

        return RateTriple(r1=bound(a), r2=bound(b), rsum=bound(a + b))

    def value(self, p1: np.ndarray, p2: np.ndarray) -> float:
        r = self.rates(p1, p2)
        c1, c2, c3 = self.coef
        return c1 * r.r1 + c2 * r.r2 + c3 * r.rsum

    def gradient(self, p1: np.ndarray, p2: np.ndarray):
        a, b = self._snr(p1, p2)
        c1, c2, c3 = self.coef
        d1 = self.sigma2 + a
        d2 = self.sigma2 + b
        ds = self.sigma2 + a + b
        grad1 = HALF_LOG2 * np.sum(self.W * self.g1 * (c1 / d1 + c3 / ds), axis=(1, 2))
        grad2 = HALF_LOG2 * np.sum(self.W * self.g2 * (c2 / d2 + c3 / ds), axis=2)
        curv1 = HALF_LOG2 * np.sum(self.W * self.g1 ** 2 * (c1 / d1 ** 2 + c3 / ds ** 2), axis=(1, 2))
        curv2 = HALF_LOG2 * np.sum(self.W * self.g2 ** 2 * (c2 / d2 ** 2 + c3 / ds ** 2), axis=2)
        return grad1, grad2, curv1, curv2


def _check_policy_shape(chain: MarkovChain, delays: DelayProfile, p1: np.ndarray, p2: np.ndarray):
    k1 = 1 if delays.one_encoder else chain.k
    if p1.shape != (k1,) or p2.shape != (k1, chain.k):
        raise ShapeMismatchError(
            f"policy shapes p1{p1.shape}, p2{p2.shape} do not fit {delays.label()} "
            f"(expected ({k1},) and ({k1}, {chain.k}))",
            module="gaussian_power",
        )


def build_power_policy(chain: MarkovChain, delays: DelayProfile, p1, p2) -> PowerPolicy:
    """
    Validate a power policy for a delay case

    Args:
        chain: state process
        delays: delay pair
        p1: shape (k1,), or a scalar when encoder 1 has no state
        p2: shape (k1, k); in the symmetric case a (k,) vector is placed on the diagonal

    Returns:
        PowerPolicy
    """
    p1 = np.atleast_1d(np.array(p1, dtype=np.float64))
    p2 = np.array(p2, dtype=np.float64)
    if delays.symmetric and p2.shape == (chain.k,):
        p2 = np.diag(p2)
    if delays.one_encoder and p2.shape == (chain.k,):
        p2 = p2[None, :]
    _check_policy_shape(chain, delays, p1, p2)
    if np.any(p1 < 0) or np.any(p2 < 0) or not (np.all(np.isfinite(p1)) and np.all(np.isfinite(p2))):
        raise ValueError("powers must be finite and nonnegative")
    p1.setflags(write=False)
    p2.setflags(write=False)
    return PowerPolicy(p1=p1, p2=p2, states=chain.states, delays=delays)


def constant_policy(chain: MarkovChain, delays: DelayProfile, model: GaussianStateMac) -> PowerPolicy:
    """Full budget in every delayed state (zero where a state pair has no probability)"""
    dj = delayed_joint(chain, delays)
    p1 = np.full(dj.table.shape[0], model.P1)
    p2 = np.where(dj.pair_weights > 0, model.P2, 0.0)
    return build_power_policy(chain, delays, p1, p2)


def gaussian_rate_triple(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    policy: PowerPolicy,
) -> RateTriple:
    """
    Evaluate the three rate bounds of a power policy in closed form

    Each bound is 1/2 sum_{s~1,s~2,s} W(s~1,s~2,s) log2(1 + SNR) with SNR
    h1^2 p1/sigma^2, h2^2 p2/sigma^2 and their sum respectively.
    """
    _check_policy_shape(chain, delays, policy.p1, policy.p2)
    objective = _GaussianObjective(delayed_joint(chain, delays).table, model, SUM_RATE)
    return objective.rates(policy.p1, policy.p2)


def one_encoder_r1(chain: MarkovChain, model: GaussianStateMac) -> float:
    """R1 bound when encoder 1 has no state: 1/2 sum_s pi(s) log2(1 + h1^2 P1 / sigma_s^2)"""
    terms = chain.pi * np.log1p(model.h1 ** 2 * model.P1 / model.sigma2)
    return HALF_LOG2 * math.fsum(terms)


def _group_residual(x: np.ndarray, grad: np.ndarray, w: np.ndarray, budget: float):
    """Stationarity gaps, multiplier, slackness and feasibility of one budget group"""
    gaps = np.zeros_like(x)
    live = w > 0
    if budget <= 0 or not np.any(live):
        overrun = max(float(np.sum(w * x)) - budget, 0.0)
        return gaps, 0.0, 0.0, overrun + max(-float(x.min(initial=0.0)), 0.0)

    utility = np.zeros_like(x)
    utility[live] = grad[live] / w[live]
    nu = float(utility[live].max())
    active = live & (x > ACTIVE_TOL * max(budget, 1.0))
    gaps[active] = nu - utility[active]
    inactive = live & ~active
    gaps[inactive] = np.maximum(utility[inactive] - nu, 0.0)
    slack = budget - float(np.sum(w * x))
    slackness = abs(nu) * abs(slack)
    feasibility = max(-slack, 0.0) + max(-float(x.min()), 0.0)
    return gaps, nu, slackness, feasibility


def _residual(objective: _GaussianObjective, p1, p2, P1: float, P2: float) -> KKTResidual:
    grad1, grad2, _, _ = objective.gradient(p1, p2)
    gaps1, nu1, cs1, pf1 = _group_residual(p1, grad1, objective.w1, P1)
    gaps2, nu2, cs2, pf2 = _group_residual(p2.ravel(), grad2.ravel(), objective.w2.ravel(), P2)
    return KKTResidual(
        stationarity=float(max(gaps1.max(initial=0.0), gaps2.max(initial=0.0))),
        complementary_slackness=max(cs1, cs2),
        primal_feasibility=max(pf1, pf2),
        dual_feasibility=max(-nu1, -nu2, 0.0),
        nu1=nu1,
        nu2=nu2,
        gaps1=gaps1.tolist(),
        gaps2=gaps2.reshape(p2.shape).tolist(),
    )


def kkt_residual(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    policy: PowerPolicy,
    coefficients: Sequence[float] = SUM_RATE,
) -> KKTResidual:
    """
    KKT diagnostics of a policy for c1 R1 + c2 R2 + c3 Rsum (default: sum rate)

    Marginal utilities are gradient entries divided by their constraint
    weights; the multiplier of each budget is the largest utility, and the
    stationarity gap of an entry is the distance of its utility to that
    multiplier (entries at zero power only count when they exceed it).
    """
    _check_policy_shape(chain, delays, policy.p1, policy.p2)
    objective = _GaussianObjective(delayed_joint(chain, delays).table, model, coefficients)
    return _residual(objective, policy.p1, policy.p2, model.P1, model.P2)


def _metric(curv: np.ndarray, w: np.ndarray) -> np.ndarray:
    scale = curv[w > 0] / w[w > 0] if np.any(w > 0) else np.ones(1)
    floor = 1e-8 * max(float(scale.max(initial=0.0)), 1e-12)
    return np.maximum(curv, floor * np.maximum(w, 1e-300))


def _project(z: np.ndarray, w: np.ndarray, budget: float, metric: np.ndarray) -> np.ndarray:
    return project_weighted_simplex(z.ravel(), w.ravel(), budget, metric.ravel()).reshape(z.shape)


def _solve(
    objective: _GaussianObjective,
    P1: float,
    P2: float,
    settings: SolverSettings,
) -> Tuple[np.ndarray, np.ndarray, KKTResidual, int]:
    """Diagonally scaled projected-gradient ascent with Armijo backtracking"""
    w1, w2 = objective.w1, objective.w2
    p1 = np.where(w1 > 0, P1, 0.0)
    p2 = np.where(w2 > 0, P2, 0.0)

    iteration = 0
    residual = _residual(objective, p1, p2, P1, P2)
    while iteration < settings.max_iter and residual.max_residual > settings.tolerance:
        iteration += 1
        grad1, grad2, curv1, curv2 = objective.gradient(p1, p2)
        m1, m2 = _metric(curv1, w1), _metric(curv2, w2)
        current = objective.value(p1, p2)

        step = 1.0
        while True:
            q1 = _project(p1 + step * grad1 / m1, w1, P1, m1)
            q2 = _project(p2 + step * grad2 / m2, w2, P2, m2)
            ascent = float(np.sum(grad1 * (q1 - p1)) + np.sum(grad2 * (q2 - p2)))
            trial = objective.value(q1, q2)
            if trial >= current + ARMIJO * ascent - 1e-15 * max(1.0, abs(current)):
                break
            step *= 0.5
            if step < 1e-12:
                break
        if step < 1e-12:
            logger.debug("line search stalled at iteration %d", iteration)
            break
        moved = max(float(np.max(np.abs(q1 - p1), initial=0.0)), float(np.max(np.abs(q2 - p2), initial=0.0)))
        p1, p2 = q1, q2
        residual = _residual(objective, p1, p2, P1, P2)
        if moved == 0.0:
            break
    return p1, p2, residual, iteration


def _certify(
    chain: MarkovChain,
    delays: DelayProfile,
    p1: np.ndarray,
    p2: np.ndarray,
    residual: KKTResidual,
    iterations: int,
    settings: SolverSettings,
) -> PowerPolicy:
    policy = build_power_policy(chain, delays, np.maximum(p1, 0.0), np.maximum(p2, 0.0))
    worst = residual.max_residual
    if worst <= settings.tolerance:
        logger.debug("converged for %s in %d iterations (residual %.2e)", delays.label(), iterations, worst)
    elif worst <= settings.kkt_accept:
        logger.warning(
            "solver for %s stopped at residual %.2e (target %.1e) after %d iterations",
            delays.label(), worst, settings.tolerance, iterations,
        )
    else:
        raise NonConvergenceError(
            f"no KKT point for {delays.label()} after {iterations} iterations, residual {worst:.3e}",
            module="gaussian_power",
            best=policy,
            residual=worst,
        )
    return policy


def _optimize(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    coef: Sequence[float],
    settings: Optional[SolverSettings],
) -> Tuple[PowerPolicy, RateTriple, KKTResidual]:
    settings = settings or Config.get_solver_settings()
    objective = _GaussianObjective(delayed_joint(chain, delays).table, model, coef)
    p1, p2, residual, iterations = _solve(objective, model.P1, model.P2, settings)
    policy = _certify(chain, delays, p1, p2, residual, iterations, settings)
    return policy, objective.rates(policy.p1, policy.p2), residual


def optimize_sum_rate(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    settings: Optional[SolverSettings] = None,
) -> Tuple[PowerPolicy, float]:
    """
    Maximize R1 + R2 over power policies under both average-power budgets

    Args:
        chain: state process
        delays: delay pair (any case)
        model: Gaussian / fading channel with budgets
        settings: solver settings (defaults from Config)

    Returns:
        (optimal policy, sum rate in bits/symbol)
    """
    policy, rates, residual = _optimize(chain, delays, model, SUM_RATE, settings)
    logger.info("sum rate %.6f bits for %s (KKT %.1e)", rates.rsum, delays.label(), residual.max_residual)
    return policy, rates.rsum


def corner_objective(w1: float, w2: float) -> Tuple[str, Tuple[float, float, float]]:
    """Concave corner objective of direction (w1, w2); ties go to corner A"""
    if w1 >= w2:
        return "A", (w1 - w2, 0.0, w2)
    return "B", (0.0, w2 - w1, w1)


def optimize_weighted(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    alpha: float,
    orientation: str = "r1",
    settings: Optional[SolverSettings] = None,
) -> Tuple[RatePoint, PowerPolicy]:
    """
    Maximize alpha * R1 + R2 (orientation "r1") or R1 + alpha * R2 ("r2")

    The support value of one policy's pentagon in direction (w1, w2) is
    w1 R1 + w2 (Rsum - R1) at corner A when w1 >= w2, and w1 (Rsum - R2) + w2 R2
    at corner B otherwise, so only that corner is optimized.

    Returns:
        (corner point, achieving policy)
    """
    point, policy, _ = _weighted(chain, delays, model, alpha, orientation, settings)
    return point, policy


def _weighted(chain, delays, model, alpha, orientation, settings):
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite and nonnegative, got {alpha}")
    if orientation not in ("r1", "r2"):
        raise ValueError(f"orientation must be 'r1' or 'r2', got {orientation!r}")
    w1, w2 = (alpha, 1.0) if orientation == "r1" else (1.0, alpha)
    corner, coef = corner_objective(w1, w2)
    policy, rates, _ = _optimize(chain, delays, model, coef, settings)
    point = rates.corner_a() if corner == "A" else rates.corner_b()
    return point, policy, corner


def delay_sweep(
    chain: MarkovChain,
    model: GaussianStateMac,
    case: str,
    d_values: Sequence[int],
    d2_fixed: int = 0,
    settings: Optional[SolverSettings] = None,
) -> List[DelaySweepRow]:
    """
    Optimal sum rate and policy for each delay value

    Args:
        chain: state process
        model: Gaussian channel
        case: "asymmetric" (d2 = d2_fixed, d1 = d), "symmetric" (d1 = d2 = d)
            or "one-encoder" (d1 = INFINITE, d2 = d)
        d_values: nonempty list of delays
        d2_fixed: d2 of the asymmetric case

    Returns:
        one DelaySweepRow per delay value, in input order
    """
    if not d_values:
        raise ValueError("d_values must not be empty")
    rows = []
    for d in tqdm(list(d_values), desc=f"Sweeping {case} delays", disable=len(d_values) < 5):
        delays = sweep_delays(case, int(d), d2_fixed)
        policy, rate = optimize_sum_rate(chain, delays, model, settings)
        residual = kkt_residual(chain, delays, model, policy).max_residual
        rows.append(DelaySweepRow(d=int(d), delays=delays, sum_rate=rate, policy=policy, residual=residual))
    return rows


def sweep_delays(case: str, d: int, d2_fixed: int = 0) -> DelayProfile:
    """Delay pair of one sweep point"""
    if case == "asymmetric":
        return DelayProfile(d1=d, d2=d2_fixed)
    if case == "symmetric":
        return DelayProfile(d1=d, d2=d)
    if case == "one-encoder":
        return DelayProfile(d1=INFINITE, d2=d)
    raise ValueError(f"unknown delay case {case!r}; use asymmetric, symmetric or one-encoder")


def gaussian_frontier_sweep(
    chain: MarkovChain,
    delays: DelayProfile,
    model: GaussianStateMac,
    alphas: Sequence[float],
    settings: Optional[SolverSettings] = None,
) -> Tuple[RateRegion, List[Tuple[float, str, RatePoint, PowerPolicy]]]:
    """
    Region frontier from weighted problems in both orientations

    Returns:
        (enveloped region, raw records (alpha, orientation, point, policy))
    """
    if not alphas:
        raise ValueError("alphas must not be empty")
    records = []
    points, provenance = [], []
    for orientation in ("r1", "r2"):
        for alpha in tqdm(list(alphas), desc=f"Weighted sweep ({orientation})", disable=len(alphas) < 5):
            point, policy, corner = _weighted(chain, delays, model, float(alpha), orientation, settings)
            records.append((float(alpha), orientation, point, policy))
            points.append(point)
            provenance.append(
                PointProvenance(
                    alpha=float(alpha),
                    orientation=orientation,
                    corner_id=corner,
                    policy_hash=policy_hash(policy),
                )
            )
    return upper_concave_envelope(points, provenance), records
