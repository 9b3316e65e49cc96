"""Cooperative inter-vehicle ranging from shared GPS pseudoranges."""

from .errors import (
    CoopRangingError,
    ConvergenceError,
    DegenerateGeometryError,
    DomainError,
    EncodingError,
    InsufficientObservationsError,
    MalformedMessageError,
    ParseError,
    SingularGeometryError,
    TimeMismatchError,
    TruncatedMessageError,
)
from .estimators import BaselineEstimate, Method, SharedObsPair, estimate_baseline
from .exchange import DistanceResult, DropReason, EpochCache, ExchangeConfig, on_receive
from .measurement import NoiseModel, PseudorangeObs, ReceiverEpoch, SatelliteEpochState
from .codec import PiggybackMessage, decode, encode

__version__ = "0.1.0"
