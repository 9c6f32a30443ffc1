"""Quantum Fisher information, geometric Renyi divergences and channel bounds."""

from . import bounds, channels, divergences, ensembles, fisher, linalg, sdp
from .channels import Choi, ChannelFamily, gadc_choi, gadc_family
from .errors import InputError, NumericalError, QdbError

__version__ = "0.1.0"

__all__ = [
    "bounds",
    "channels",
    "divergences",
    "ensembles",
    "fisher",
    "linalg",
    "sdp",
    "Choi",
    "ChannelFamily",
    "gadc_choi",
    "gadc_family",
    "QdbError",
    "InputError",
    "NumericalError",
]
