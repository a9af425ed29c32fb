from .schedule import DiffusionSchedule
from .unet import DenoiserNetwork, UNetConfig
from .engine import DiffusionEngine, SampleRequest, build_engine, cfg_combine

__all__ = [
    "DiffusionSchedule",
    "DenoiserNetwork",
    "UNetConfig",
    "DiffusionEngine",
    "SampleRequest",
    "build_engine",
    "cfg_combine",
]
