"""Fault diagnosis from Haar-compressed transient signals with a deep feedforward regressor."""

from .errors import DegenerateInputError, ModelFormatError, ParseError, StructureError, WavediagError
from .signal import ClassLabel, LabeledPointSet, Recording, load_recording_csv, save_recording_csv, window_iter

__version__ = "0.1.0"
