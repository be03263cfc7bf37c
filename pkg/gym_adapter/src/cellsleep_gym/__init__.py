"""Gymnasium-style remote client for the cellsleep simulator."""

from .checker import check_env
from .client import ProtocolError, WireClient
from .env import (
    DISCRETE,
    MULTIBINARY,
    RemoteCellOnOffEnv,
    RemoteEnvConfig,
    index_to_bits,
)
from .spaces import Box, Discrete, MultiBinary

__version__ = "0.1.0"
