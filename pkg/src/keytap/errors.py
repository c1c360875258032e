"""Exception and warning types shared across the package."""


class KeytapError(Exception):
    """Base class for all keytap errors."""


class ContractError(KeytapError):
    """An argument or precondition violated an operation's contract."""


class DegenerateInputError(ContractError):
    """Input is structurally valid but degenerate (e.g. all-zero audio)."""


class WavError(KeytapError):
    """Base class for WAV file problems (treated as I/O errors by the CLI)."""


class WavParseError(WavError):
    """Malformed or truncated RIFF/WAVE data.

    `offset` is the byte position at which parsing failed.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class UnsupportedWavEncodingError(WavError):
    """The WAV file uses an encoding outside PCM16/PCM32/float32."""

    def __init__(self, encoding):
        super().__init__(f"unsupported WAV encoding: {encoding}")
        self.encoding = encoding


class CalibrationWarning(UserWarning):
    """Threshold calibration could not hit the requested detection count."""


class VoiceWrapWarning(UserWarning):
    """The voice recording was shorter than the target and was wrapped."""
