"""Skeptic strategies for the bounded forecasting game and checks of their capital bounds."""
from .game import GameError, GameState, Trajectory, run_game, step, update_average
from .strategies import (
    DyadicDiscrete,
    FixedEpsilon,
    LinearOperatorSpec,
    Mixture,
    OneSidedNegative,
    OneSidedPositive,
    PastAverage,
    UniformHalf,
)
from .reality import (
    AdversarialMinimizer,
    BiasedCoin,
    ConstantBias,
    FairCoin,
    RatePath,
    UniformNoise,
    VectorUnitBall,
)

__all__ = [
    "AdversarialMinimizer", "BiasedCoin", "ConstantBias", "DyadicDiscrete", "FairCoin",
    "FixedEpsilon", "GameError", "GameState", "LinearOperatorSpec", "Mixture",
    "OneSidedNegative", "OneSidedPositive", "PastAverage", "RatePath", "Trajectory",
    "UniformHalf", "UniformNoise", "VectorUnitBall", "run_game", "step", "update_average",
]
