from .base import JOB_STATES, SchedulerClient, SchedulerJobStatus, SchedulerRequest
from .fork import ForkBackend
from .registry import SchedulerRegistry, WrapperClient
from .simulated import SimulatedBackend
from .templates import HEADER_TEMPLATES, header_lines

__all__ = [
    "JOB_STATES",
    "SchedulerClient",
    "SchedulerJobStatus",
    "SchedulerRequest",
    "ForkBackend",
    "SimulatedBackend",
    "SchedulerRegistry",
    "WrapperClient",
    "HEADER_TEMPLATES",
    "header_lines",
]
