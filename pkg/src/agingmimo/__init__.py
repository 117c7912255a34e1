"""Deterministic sum spectral efficiency for uplink MIMO under channel aging.

The library predicts per-user rates from channel statistics alone (no
sampling), validates the prediction with a Monte Carlo oracle, and searches
pilot spacing and transmit beamformers for the rate-optimal configuration.
"""

__version__ = "0.1.0"

from .channel import ChannelStats, UserParams, build_channel_stats
from .config import SystemConfig, default_config, load_config
from .detse import SseEvaluator, sse_objective
from .frames import FrameSchedule
from .mcoracle import McReport, validate_deterministic
from .optimizer import OptimizationResult, optimize_frames

__all__ = [
    "__version__",
    "ChannelStats",
    "UserParams",
    "build_channel_stats",
    "SystemConfig",
    "default_config",
    "load_config",
    "SseEvaluator",
    "sse_objective",
    "FrameSchedule",
    "McReport",
    "validate_deterministic",
    "OptimizationResult",
    "optimize_frames",
]
