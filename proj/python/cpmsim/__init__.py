"""Interference-network simulator: CSI exchange by continuous power
modulation with quantized RSSI feedback, and sum-rate power control on the
recovered estimates."""

from ._cpmsim import *  # noqa: F401,F403
from ._cpmsim import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
