# src/state/rate_state.py
"""
Result containers shared by the rate evaluators, optimizers and the CLI
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class RateTriple(BaseModel):
    """The three bounds of one rate pentagon, in bits/symbol"""

    model_config = ConfigDict(frozen=True)

    r1: float = Field(description="Bound on R1")
    r2: float = Field(description="Bound on R2")
    rsum: float = Field(description="Bound on R1 + R2")

    def corner_a(self) -> "RatePoint":
        """Corner where user 1 is decoded last: (r1, rsum - r1)"""
        return RatePoint(r1=self.r1, r2=max(self.rsum - self.r1, 0.0))

    def corner_b(self) -> "RatePoint":
        """Corner where user 2 is decoded last: (rsum - r2, r2)"""
        return RatePoint(r1=max(self.rsum - self.r2, 0.0), r2=self.r2)

    def is_consistent(self, tol: float = 1e-9) -> bool:
        """Pentagon consistency max(r1, r2) <= rsum <= r1 + r2"""
        return (
            self.r1 >= -tol
            and self.r2 >= -tol
            and max(self.r1, self.r2) <= self.rsum + tol
            and self.rsum <= self.r1 + self.r2 + tol
        )


class RatePoint(BaseModel):
    """A rate pair (R1, R2) in bits/symbol"""

    model_config = ConfigDict(frozen=True)

    r1: float = Field(description="Rate of user 1")
    r2: float = Field(description="Rate of user 2")

    def dominates(self, other: "RatePoint", tol: float = 0.0) -> bool:
        return self.r1 >= other.r1 - tol and self.r2 >= other.r2 - tol

    def support(self, w1: float, w2: float) -> float:
        return w1 * self.r1 + w2 * self.r2


class PointProvenance(BaseModel):
    """Where a frontier point came from"""

    model_config = ConfigDict(frozen=True)

    alpha: Optional[float] = Field(default=None, description="Sweep weight that produced the point")
    orientation: str = Field(default="r1", description="'r1' for direction (alpha, 1), 'r2' for (1, alpha)")
    corner_id: str = Field(default="", description="'A', 'B', 'axis' or 'origin'")
    policy_hash: str = Field(default="", description="Short hash of the achieving policy")


class RateRegion(BaseModel):
    """Achievable region summarized by its non-dominated frontier

    The frontier is the upper concave envelope of all achieved points,
    sorted by r1, with one provenance record per frontier point.
    """

    model_config = ConfigDict(frozen=True)

    frontier: List[RatePoint] = Field(default_factory=list, description="Non-dominated envelope vertices sorted by r1")
    provenance: List[PointProvenance] = Field(default_factory=list, description="One record per frontier point")

    def support_value(self, w1: float, w2: float) -> float:
        """max over the region of w1*R1 + w2*R2 (w1, w2 >= 0)"""
        if not self.frontier:
            return 0.0
        return max(0.0, max(p.support(w1, w2) for p in self.frontier))

    def max_r1(self) -> float:
        return max((p.r1 for p in self.frontier), default=0.0)

    def max_r2(self) -> float:
        return max((p.r2 for p in self.frontier), default=0.0)


class SolverSettings(BaseModel):
    """Numerical settings for the optimizers (see Config for defaults)"""

    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(default=1e-8, gt=0, description="KKT target of the Gaussian solver")
    kkt_accept: float = Field(default=1e-6, gt=0, description="Largest residual still returned")
    max_iter: int = Field(default=5000, ge=1, description="Gaussian solver iteration cap")
    discrete_max_iter: int = Field(default=3000, ge=1, description="Per-start cap of the discrete optimizer")
    stall_window: int = Field(default=50, ge=1, description="Iterations without progress before stopping")
    stall_tol: float = Field(default=1e-9, ge=0, description="Minimum improvement over the stall window")
    multi_start: int = Field(default=16, ge=1, description="Number of starts of the discrete optimizer")
    aux_size: int = Field(default=3, ge=1, le=3, description="Cardinality of the auxiliary variable U")
    policy_floor: float = Field(default=1e-9, ge=0, lt=0.01, description="Lower bound on policy probabilities")
    brute_force_budget: int = Field(default=200000, ge=1, description="Maximum number of enumerated policies")
    seed: int = Field(default=20240521, ge=0, description="Seed of the multi-start sampler")
