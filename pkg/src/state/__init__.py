from .rate_state import (
    RateTriple,
    RatePoint,
    PointProvenance,
    RateRegion,
    SolverSettings,
)
