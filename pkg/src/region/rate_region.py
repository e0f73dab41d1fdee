# src/region/rate_region.py
"""
Capacity-region frontier for discrete channels

The region is the convex hull of the rate pentagons of all input
policies. Its support value in a direction (w1, w2) is found by
maximizing the matching pentagon corner over policies:

    corner A = (R1, Rsum - R1)   value w1 R1 + w2 (Rsum - R1)
    corner B = (Rsum - R2, R2)   value w1 (Rsum - R2) + w2 R2

Each corner objective is a combination of conditional entropies of the
joint law and is maximized by multi-start projected-gradient ascent over
the product of policy simplices. The problem is not concave in the
policy, so the result is a lower bound on the support value.
"""

import itertools
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial import ConvexHull, QhullError
from scipy.special import entr
from tqdm import tqdm

from src.channel.channel_models import DiscreteStateMac
from src.config.config import Config
from src.errors.exceptions import BudgetExceededError, ShapeMismatchError
from src.inforate.information_rates import (
    CONDITION_AXES,
    InputPolicy,
    LN2,
    X1_AXIS,
    X2_AXIS,
    Y_AXIS,
    build_input_policy,
    compose_joint,
    policy_hash,
    policy_vector,
    rate_triple,
)
from src.markov.markov_chain import DelayProfile, MarkovChain, delayed_joint
from src.region.simplex_projection import project_rows_to_simplex
from src.state.rate_state import (
    PointProvenance,
    RatePoint,
    RateRegion,
    SolverSettings,
)

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
MIN_STEP = 1e-10
MAX_STEP = 1e3
TIE_TOL = 1e-12


class DirectionResult(BaseModel):
    """Best corner found for one weight direction"""

    model_config = ConfigDict(frozen=True)

    point: RatePoint = Field(description="Best pentagon corner")
    policy: InputPolicy = Field(description="Policy achieving it")
    corner_id: str = Field(description="'A' or 'B'")
    value: float = Field(description="Support value w1 r1 + w2 r2")
    converged: bool = Field(description="Whether the best start met the stall criterion")
    residual: float = Field(description="Projected-gradient norm at the best iterate")


# envelope

def upper_concave_envelope(
    points: Sequence[RatePoint],
    provenance: Optional[Sequence[PointProvenance]] = None,
) -> RateRegion:
    """
    Non-dominated vertices of the convex hull of points, axes and origin

    Args:
        points: achieved rate points
        provenance: optional record per point (same length as points)

    Returns:
        RateRegion with frontier sorted by r1
    """
    points = list(points)
    provenance = list(provenance) if provenance is not None else [PointProvenance() for _ in points]
    if len(provenance) != len(points):
        raise ValueError("need one provenance record per point")

    max_r1 = max((p.r1 for p in points), default=0.0)
    max_r2 = max((p.r2 for p in points), default=0.0)
    candidates = points + [RatePoint(r1=max_r1, r2=0.0), RatePoint(r1=0.0, r2=max_r2), RatePoint(r1=0.0, r2=0.0)]
    records = provenance + [
        PointProvenance(corner_id="axis"),
        PointProvenance(corner_id="axis"),
        PointProvenance(corner_id="origin"),
    ]
    coords = np.array([[p.r1, p.r2] for p in candidates])

    try:
        keep = sorted(set(ConvexHull(coords).vertices.tolist()))
    except (QhullError, ValueError):
        keep = list(range(len(candidates)))

    frontier = []
    for i in keep:
        dominated = any(
            coords[j, 0] >= coords[i, 0] - TIE_TOL
            and coords[j, 1] >= coords[i, 1] - TIE_TOL
            and (coords[j, 0] > coords[i, 0] + TIE_TOL or coords[j, 1] > coords[i, 1] + TIE_TOL)
            for j in range(len(candidates))
        )
        if not dominated:
            frontier.append(i)

    # first occurrence wins among duplicates
    chosen = {}
    for i in sorted(frontier):
        key = (round(coords[i, 0], 12), round(coords[i, 1], 12))
        chosen.setdefault(key, i)
    ordered = sorted(chosen.values(), key=lambda i: (coords[i, 0], -coords[i, 1]))
    return RateRegion(
        frontier=[candidates[i] for i in ordered],
        provenance=[records[i] for i in ordered],
    )


def region_contains(region: RateRegion, point: RatePoint, tol: float = 1e-9) -> bool:
    """Whether point lies under the piecewise-linear frontier (region is down-closed)"""
    frontier = [RatePoint(r1=0.0, r2=region.max_r2())] + list(region.frontier) + [RatePoint(r1=region.max_r1(), r2=0.0)]
    if point.r1 > region.max_r1() + tol or point.r2 > region.max_r2() + tol:
        return False
    for left, right in zip(frontier, frontier[1:]):
        if left.r1 - tol <= point.r1 <= right.r1 + tol:
            if right.r1 - left.r1 <= TIE_TOL:
                ceiling = max(left.r2, right.r2)
            else:
                t = min(max((point.r1 - left.r1) / (right.r1 - left.r1), 0.0), 1.0)
                ceiling = left.r2 + t * (right.r2 - left.r2)
            if point.r2 <= ceiling + tol:
                return True
    return False


# discrete policy optimizer

class _CornerObjective:
    """c1 R1 + c2 R2 + c3 Rsum of a discrete policy, in bits, with its gradient"""

    def __init__(self, table: np.ndarray, law: np.ndarray, coef: Sequence[float]):
        self.table = table
        self.law = law
        c1, c2, c3 = (float(c) for c in coef)
        cond = CONDITION_AXES
        total = c1 + c2 + c3
        self.terms = [
            (cond + (X2_AXIS, Y_AXIS), c1),
            (cond + (X2_AXIS,), -c1),
            (cond + (X1_AXIS, Y_AXIS), c2),
            (cond + (X1_AXIS,), -c2),
            (cond + (Y_AXIS,), c3),
            (cond, -c3),
            (cond + (X1_AXIS, X2_AXIS, Y_AXIS), -total),
            (cond + (X1_AXIS, X2_AXIS), total),
        ]
        self.terms = [(keep, weight) for keep, weight in self.terms if weight != 0.0]

    def _marginal(self, joint: np.ndarray, keep: Tuple[int, ...]) -> np.ndarray:
        drop = tuple(ax for ax in range(joint.ndim) if ax not in keep)
        return joint.sum(axis=drop, keepdims=True) if drop else joint

    def value(self, pu, px1, px2) -> float:
        joint = compose_joint(self.table, self.law, pu, px1, px2)
        nats = math.fsum(w * math.fsum(entr(self._marginal(joint, keep)).ravel()) for keep, w in self.terms)
        return nats / LN2

    def gradient(self, pu, px1, px2):
        joint = compose_joint(self.table, self.law, pu, px1, px2)
        G = np.zeros_like(joint)
        for keep, weight in self.terms:
            m = self._marginal(joint, keep)
            logm = np.log(m, out=np.zeros_like(m), where=m > 0)
            G = G - weight * logm
        G = G / LN2
        W, law = self.table, self.law
        gpu = np.einsum("uabspqy,abs,aup,abuq,pqsy->au", G, W, px1, px2, law)
        gpx1 = np.einsum("uabspqy,abs,au,abuq,pqsy->aup", G, W, pu, px2, law)
        gpx2 = np.einsum("uabspqy,abs,au,aup,pqsy->abuq", G, W, pu, px1, law)
        return gpu, gpx1, gpx2


def _project(parts, floor: float):
    return tuple(project_rows_to_simplex(p, total=1.0, floor=floor) for p in parts)


def _ascend(objective: _CornerObjective, start, settings: SolverSettings):
    """Projected-gradient ascent from one start; returns (policy parts, value, converged, residual)"""
    floor = settings.policy_floor
    x = _project(start, floor)
    f = objective.value(*x)
    history = [f]
    step = 1.0
    converged = False
    for _ in range(settings.discrete_max_iter):
        g = objective.gradient(*x)
        while True:
            y = _project([xi + step * gi for xi, gi in zip(x, g)], floor)
            fy = objective.value(*y)
            ascent = sum(float(np.sum(gi * (yi - xi))) for xi, yi, gi in zip(x, y, g))
            if fy >= f + ARMIJO * ascent:
                break
            step *= 0.5
            if step < MIN_STEP:
                break
        if step < MIN_STEP:
            converged = True
            break
        x, f = y, fy
        step = min(step * 2.0, MAX_STEP)
        history.append(f)
        if len(history) > settings.stall_window and history[-1] - history[-1 - settings.stall_window] < settings.stall_tol:
            converged = True
            break
    g = objective.gradient(*x)
    moved = _project([xi + gi for xi, gi in zip(x, g)], floor)
    residual = max(float(np.max(np.abs(mi - xi))) for mi, xi in zip(moved, x))
    return x, f, converged, residual


def _starts(rng: np.random.Generator, shapes, count: int):
    """Uniform start, symbol-leaning starts, then flat-Dirichlet starts"""
    uniform = tuple(np.full(s, 1.0 / s[-1]) for s in shapes)
    starts = [uniform]
    max_symbols = max(s[-1] for s in shapes[1:])
    for symbol in range(max_symbols):
        if len(starts) >= count:
            break
        lean = []
        for s in shapes:
            m = s[-1]
            part = np.full(s, 0.1 / max(m - 1, 1))
            part[..., symbol % m] = 0.9 if m > 1 else 1.0
            lean.append(part)
        starts.append(tuple(lean))
    while len(starts) < count:
        starts.append(tuple(rng.dirichlet(np.ones(s[-1]), size=s[:-1]) for s in shapes))
    return starts[:count]


def _policy_shapes(chain: MarkovChain, delays: DelayProfile, channel: DiscreteStateMac, aux_size: int):
    k1 = 1 if delays.one_encoder else chain.k
    x1_size, x2_size = channel.law.shape[:2]
    return [(k1, aux_size), (k1, aux_size, x1_size), (k1, chain.k, aux_size, x2_size)]


def _check_channel(chain: MarkovChain, channel: DiscreteStateMac):
    if channel.law.shape[2] != chain.k:
        raise ShapeMismatchError(f"channel has {channel.law.shape[2]} states, chain has {chain.k}", module="region")


def maximize_direction(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    w1: float,
    w2: float,
    settings: Optional[SolverSettings] = None,
) -> DirectionResult:
    """
    Best pentagon corner in direction (w1, w2) over input policies

    Both corner objectives are optimized from the same set of starts; the
    larger support value wins, ties go to corner A and then to the
    lexicographically smallest policy vector.
    """
    if w1 < 0 or w2 < 0:
        raise ValueError(f"weights must be nonnegative, got ({w1}, {w2})")
    _check_channel(chain, channel)
    settings = settings or Config.get_solver_settings()
    table = delayed_joint(chain, delays).table
    shapes = _policy_shapes(chain, delays, channel, settings.aux_size)
    starts = _starts(Config.get_rng(settings.seed), shapes, settings.multi_start)

    corners = {"A": (w1 - w2, 0.0, w2), "B": (0.0, w2 - w1, w1)}
    best = None
    for corner_id, coef in corners.items():
        objective = _CornerObjective(table, channel.law, coef)
        for start in starts:
            parts, value, converged, residual = _ascend(objective, start, settings)
            policy = build_input_policy(*parts)
            key = tuple(np.round(policy_vector(policy), 12))
            candidate = (value, key, corner_id, policy, converged, residual)
            if best is None or value > best[0] + TIE_TOL or (abs(value - best[0]) <= TIE_TOL and corner_id == best[2] and key < best[1]):
                best = candidate

    value, _, corner_id, policy, converged, residual = best
    rates = rate_triple(compose_joint(table, channel.law, policy.pu, policy.px1, policy.px2))
    point = rates.corner_a() if corner_id == "A" else rates.corner_b()
    if not converged:
        logger.warning(
            "direction (%.3g, %.3g): best start hit the iteration cap, projected-gradient residual %.2e",
            w1, w2, residual,
        )
    return DirectionResult(
        point=point,
        policy=policy,
        corner_id=corner_id,
        value=point.support(w1, w2),
        converged=converged,
        residual=residual,
    )


def weighted_sum_max(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    alpha: float,
    settings: Optional[SolverSettings] = None,
) -> Tuple[RatePoint, InputPolicy]:
    """
    Maximize alpha * R1 + R2 over input policies (a lower bound on the support value)

    Args:
        chain: state process
        delays: delay pair
        channel: discrete channel
        alpha: weight on R1 (>= 0)
        settings: solver settings (defaults from Config)

    Returns:
        (best corner point, achieving policy)
    """
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError(f"alpha must be finite and nonnegative, got {alpha}")
    result = maximize_direction(chain, delays, channel, alpha, 1.0, settings)
    return result.point, result.policy


def frontier_sweep(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    alphas: Sequence[float],
    settings: Optional[SolverSettings] = None,
) -> RateRegion:
    """
    Region frontier from weighted problems in both orientations

    Directions (alpha, 1) and (1, alpha) are swept; the achieved corners,
    the axis points and the origin are reduced to their upper concave
    envelope.
    """
    if not alphas:
        raise ValueError("alphas must not be empty")
    points, provenance = [], []
    directions = [("r1", a) for a in alphas] + [("r2", a) for a in alphas]
    for orientation, alpha in tqdm(directions, desc="Frontier sweep", disable=len(directions) < 5):
        w1, w2 = (alpha, 1.0) if orientation == "r1" else (1.0, alpha)
        result = maximize_direction(chain, delays, channel, float(w1), float(w2), settings)
        points.append(result.point)
        provenance.append(
            PointProvenance(
                alpha=float(alpha),
                orientation=orientation,
                corner_id=result.corner_id,
                policy_hash=policy_hash(result.policy),
            )
        )
    return upper_concave_envelope(points, provenance)


# brute-force oracle

def _grid(size: int, step: float) -> List[np.ndarray]:
    """All pmfs on `size` symbols whose entries are multiples of step"""
    n = int(round(1.0 / step))
    if n <= 0 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step must divide 1, got {step}")
    return [
        np.array(c, dtype=np.float64) / n
        for c in itertools.product(range(n + 1), repeat=size)
        if sum(c) == n
    ]


def count_grid_policies(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    grid_step: float,
    aux_size: int = 1,
) -> int:
    """Number of policies brute_force_region would enumerate"""
    table = delayed_joint(chain, delays).table
    k1 = table.shape[0]
    live_pairs = int(np.count_nonzero(table.sum(axis=2) > 0))
    x1_size, x2_size = channel.law.shape[:2]
    n = int(round(1.0 / grid_step))
    per = {m: math.comb(n + m - 1, m - 1) for m in {aux_size, x1_size, x2_size}}
    return per[aux_size] ** k1 * per[x1_size] ** (k1 * aux_size) * per[x2_size] ** (live_pairs * aux_size)


def brute_force_region(
    chain: MarkovChain,
    delays: DelayProfile,
    channel: DiscreteStateMac,
    grid_step: float,
    aux_size: int = 1,
    budget: Optional[int] = None,
) -> List[RatePoint]:
    """
    Pentagon corners of every policy on a probability grid

    Only conditional slices that carry probability under the delayed-state
    law are enumerated; the others are held uniform since they do not
    affect any rate.

    Args:
        chain: state process
        delays: delay pair
        channel: discrete channel
        grid_step: probability increment (must divide 1)
        aux_size: |U| of the enumerated policies
        budget: maximum policy count (default Config.BRUTE_FORCE_BUDGET)

    Returns:
        both pentagon corners of every grid policy
    """
    _check_channel(chain, channel)
    budget = Config.BRUTE_FORCE_BUDGET if budget is None else budget
    total = count_grid_policies(chain, delays, channel, grid_step, aux_size)
    if total > budget:
        raise BudgetExceededError(f"{total} grid policies exceed the budget of {budget}", module="region")

    table = delayed_joint(chain, delays).table
    k1, k = table.shape[0], table.shape[1]
    x1_size, x2_size = channel.law.shape[:2]
    live_pairs = [(a, b) for a in range(k1) for b in range(k) if table[a, b].sum() > 0]
    slots = (
        [("pu", (a,), aux_size) for a in range(k1)]
        + [("px1", (a, u), x1_size) for a in range(k1) for u in range(aux_size)]
        + [("px2", (a, b, u), x2_size) for a, b in live_pairs for u in range(aux_size)]
    )
    grids = {m: _grid(m, grid_step) for m in {aux_size, x1_size, x2_size}}

    pu = np.full((k1, aux_size), 1.0 / aux_size)
    px1 = np.full((k1, aux_size, x1_size), 1.0 / x1_size)
    px2 = np.full((k1, k, aux_size, x2_size), 1.0 / x2_size)
    target = {"pu": pu, "px1": px1, "px2": px2}

    corners = []
    combos = itertools.product(*(grids[m] for _, _, m in slots))
    for combo in tqdm(combos, total=total, desc="Brute-force policies", disable=total < 1000):
        for (name, index, _), pmf in zip(slots, combo):
            target[name][index] = pmf
        rates = rate_triple(compose_joint(table, channel.law, pu, px1, px2))
        corners.append(rates.corner_a())
        corners.append(rates.corner_b())
    logger.info("brute force evaluated %d policies (%d corners)", total, len(corners))
    return corners
