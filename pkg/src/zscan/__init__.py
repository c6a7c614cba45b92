"""Firmware-activity fingerprinting from RF impedance sweeps."""

__version__ = "0.1.0"

from .errors import ZscanError  # noqa: E402
from .rf import (  # noqa: E402
    LabeledDataset,
    SweepTrace,
    feature_matrix,
    impedance_to_reflection,
    reflection_to_impedance,
)

__all__ = [
    "LabeledDataset", "SweepTrace", "ZscanError", "__version__", "feature_matrix",
    "impedance_to_reflection", "reflection_to_impedance",
]
