"""Keyboard acoustic analysis toolkit.

Recover typed input from audio recordings of a keyboard: isolate individual
keystrokes, turn them into spectral feature vectors, train classifiers, and
evaluate recovery attacks and countermeasures, including audio degraded by a
lossy transmission channel or masked by concurrent speech.
"""

__version__ = "0.1.0"

from .audio import AudioBuffer, load_wav, normalize_rms, save_wav
from .errors import (
    ContractError,
    DegenerateInputError,
    KeytapError,
    UnsupportedWavEncodingError,
    WavError,
    WavParseError,
)

__all__ = [
    "__version__",
    "AudioBuffer",
    "load_wav",
    "save_wav",
    "normalize_rms",
    "KeytapError",
    "ContractError",
    "DegenerateInputError",
    "WavError",
    "WavParseError",
    "UnsupportedWavEncodingError",
]
