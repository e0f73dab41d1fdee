# src/cli/model_file.py
"""
JSON model files

A model file declares one chain, one channel, the encoder delays and
optional solver settings:

    {
      "name": "two_state_agn",
      "chain": {"two_state": {"g": 0.1, "b": 0.1}},
      "channel": {"gaussian": {"sigma2": {"G": 1, "B": 100}, "P1": 10, "P2": 10}},
      "delays": {"d1": 1, "d2": 0},
      "solver": {"tolerance": 1e-8, "multi_start": 16, "seed": 7}
    }

A chain can also be given explicitly as {"K": [[...]], "states": [...]}, and
a discrete channel as {"discrete": {"x1": 2, "x2": 2, "y": 2, "law": {state: table}}}.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.channel.channel_models import (
    DiscreteStateMac,
    GaussianStateMac,
    build_discrete_mac,
    build_fading_mac,
)
from src.config.config import Config
from src.errors.exceptions import ModelParseError, ModelSchemaError
from src.markov.markov_chain import DelayProfile, MarkovChain, two_state_chain, validate_chain
from src.state.rate_state import SolverSettings

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TwoStateBlock(_Block):
    g: float = Field(description="P(G | B)")
    b: float = Field(description="P(B | G)")


class ChainBlock(_Block):
    K: Optional[List[List[float]]] = Field(default=None, description="Row-stochastic transition matrix")
    states: Optional[List[str]] = Field(default=None, description="State labels for K")
    two_state: Optional[TwoStateBlock] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.K is None) == (self.two_state is None):
            raise ValueError("chain needs exactly one of 'K' or 'two_state'")
        if self.two_state is not None and self.states is not None:
            raise ValueError("'states' only applies to an explicit 'K'")
        return self


class DiscreteBlock(_Block):
    x1: Union[int, List[str]] = Field(description="Size or labels of the X1 alphabet")
    x2: Union[int, List[str]] = Field(description="Size or labels of the X2 alphabet")
    y: Union[int, List[str]] = Field(description="Size or labels of the output alphabet")
    law: Dict[str, List[List[List[float]]]] = Field(description="Per-state p(y | x1, x2) tables")


class GaussianBlock(_Block):
    sigma2: Dict[str, float] = Field(description="Noise variance per state")
    h1: Optional[Dict[str, float]] = Field(default=None, description="Gain of encoder 1 per state")
    h2: Optional[Dict[str, float]] = Field(default=None, description="Gain of encoder 2 per state")
    P1: float = Field(ge=0, description="Power budget of encoder 1")
    P2: float = Field(ge=0, description="Power budget of encoder 2")


class ChannelBlock(_Block):
    discrete: Optional[DiscreteBlock] = None
    gaussian: Optional[GaussianBlock] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.discrete is None) == (self.gaussian is None):
            raise ValueError("channel needs exactly one of 'discrete' or 'gaussian'")
        return self


class DelaysBlock(_Block):
    d1: Union[int, Literal["inf"]] = 0
    d2: int = 0


class SolverBlock(_Block):
    tolerance: Optional[float] = None
    kkt_accept: Optional[float] = None
    max_iter: Optional[int] = None
    multi_start: Optional[int] = None
    aux_size: Optional[int] = None
    seed: Optional[int] = None


class ModelFile(_Block):
    """Top-level schema of a model file"""

    name: str = "model"
    chain: ChainBlock
    channel: ChannelBlock
    delays: DelaysBlock = Field(default_factory=DelaysBlock)
    solver: SolverBlock = Field(default_factory=SolverBlock)


class LoadedModel(BaseModel):
    """Validated domain objects built from a model file"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    path: Optional[str] = None
    chain: MarkovChain
    channel: Union[DiscreteStateMac, GaussianStateMac]
    delays: DelayProfile
    settings: SolverSettings

    @property
    def is_gaussian(self) -> bool:
        return isinstance(self.channel, GaussianStateMac)


def parse_model_text(text: str) -> ModelFile:
    """
    Parse and schema-check model-file text

    Raises:
        ModelParseError: malformed JSON (with line and column)
        ModelSchemaError: JSON that does not match the schema
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelParseError(e.msg, line=e.lineno, column=e.colno) from e
    try:
        return ModelFile.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise ModelSchemaError(f"invalid model file: {problems}") from e


def build_model(spec: ModelFile, path: Optional[str] = None) -> LoadedModel:
    """Turn a parsed model file into a chain, a channel and delays"""
    if spec.chain.two_state is not None:
        chain = two_state_chain(spec.chain.two_state.g, spec.chain.two_state.b)
    else:
        chain = validate_chain(spec.chain.K, spec.chain.states)

    if spec.channel.gaussian is not None:
        block = spec.channel.gaussian
        channel = build_fading_mac(chain, block.sigma2, block.h1, block.h2, block.P1, block.P2)
    else:
        block = spec.channel.discrete
        channel = build_discrete_mac({"X1": block.x1, "X2": block.x2, "Y": block.y}, block.law, chain.states)

    delays = DelayProfile(d1=spec.delays.d1, d2=spec.delays.d2)
    settings = Config.get_solver_settings(**spec.solver.model_dump())
    logger.info("Loaded model %s: %d states, delays %s", spec.name, chain.k, delays.label())
    return LoadedModel(name=spec.name, path=path, chain=chain, channel=channel, delays=delays, settings=settings)


def load_model(path: Union[str, Path]) -> LoadedModel:
    """Read, parse and validate a model file"""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return build_model(parse_model_text(path.read_text(encoding="utf-8")), str(path))
