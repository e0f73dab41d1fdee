from .exceptions import (
    CapacityError,
    NonStochasticError,
    NotErgodicError,
    ZeroStationaryMassError,
    DegenerateChainError,
    NonNormalizedError,
    ShapeMismatchError,
    MissingStateError,
    NonPositiveVarianceError,
    IllConditionedError,
    NonNormalizedJointError,
    AuxCardinalityError,
    NonConvergenceError,
    BudgetExceededError,
    ModelParseError,
    ModelSchemaError,
)
