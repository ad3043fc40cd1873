"""Target-driven navigation with semantic siamese actor-critic networks."""

from ._semnav import *  # noqa: F401,F403
from ._semnav import (
    ConfigError,
    ContractError,
    IoError,
    NumericError,
    SemnavError,
)

ACTIONS = ("forward", "backward", "rotate_left", "rotate_right")

__all__ = [name for name in dir() if not name.startswith("_")]
