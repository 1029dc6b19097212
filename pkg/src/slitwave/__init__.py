"""Wavepacket scattering from single and double slits."""

from .analytic import AnalyticParams, backward_amplitude
from .cavity import TotalWaveConfig, cavity_kirchhoff_wave
from .core import Grid2D, PacketParams, SlitGeometry, make_packet
from .kirchhoff import ContourSpec, SlitSourceParams, kirchhoff_wave
from .presets import PRESETS, load_preset
from .runner import mismatch, run_preset
from .tdse import StepperConfig, propagate

__version__ = "0.1.0"

__all__ = [
    "AnalyticParams", "backward_amplitude", "TotalWaveConfig", "cavity_kirchhoff_wave", "Grid2D",
    "PacketParams", "SlitGeometry", "make_packet", "ContourSpec", "SlitSourceParams", "kirchhoff_wave",
    "PRESETS", "load_preset", "mismatch", "run_preset", "StepperConfig", "propagate",
]
