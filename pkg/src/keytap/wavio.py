"""Minimal RIFF/WAVE reader and writer.

Supports PCM 16-bit signed, PCM 32-bit signed and IEEE float 32-bit, little
endian, mono or multi-channel, at any sample rate. Nothing else: compressed
codecs raise UnsupportedWavEncodingError naming the offending format tag.
"""

import struct

import numpy as np

from .errors import UnsupportedWavEncodingError, WavParseError

FORMAT_PCM = 0x0001
FORMAT_IEEE_FLOAT = 0x0003
FORMAT_EXTENSIBLE = 0xFFFE

_FORMAT_NAMES = {
    0x0002: "ADPCM (0x0002)",
    0x0006: "A-law (0x0006)",
    0x0007: "mu-law (0x0007)",
    0x0011: "IMA ADPCM (0x0011)",
    0x0055: "MP3 (0x0055)",
}

# encoding name -> (format tag, bits per sample)
ENCODINGS = {
    "pcm16": (FORMAT_PCM, 16),
    "pcm32": (FORMAT_PCM, 32),
    "float32": (FORMAT_IEEE_FLOAT, 32),
}


def _format_name(tag, bits):
    if tag == FORMAT_PCM:
        return f"PCM {bits}-bit"
    if tag == FORMAT_IEEE_FLOAT:
        return f"IEEE float {bits}-bit"
    return _FORMAT_NAMES.get(tag, f"format tag 0x{tag:04X}")


def read_wav(path):
    """Read a WAV file.

    Returns (data, sample_rate, encoding) where data is a float64 array of
    shape (frames, channels) scaled to the nominal [-1, 1] range and encoding
    is one of the keys of ENCODINGS.
    """
    with open(path, "rb") as fh:
        raw = fh.read()

    if len(raw) < 12:
        raise WavParseError("file too short for RIFF header", len(raw))
    if raw[0:4] != b"RIFF":
        raise WavParseError("missing RIFF magic", 0)
    if raw[8:12] != b"WAVE":
        raise WavParseError("missing WAVE form type", 8)

    fmt = None
    data_bytes = None
    pos = 12
    while pos < len(raw):
        if pos + 8 > len(raw):
            raise WavParseError("truncated chunk header", pos)
        chunk_id = raw[pos:pos + 4]
        (size,) = struct.unpack_from("<I", raw, pos + 4)
        body_start = pos + 8
        if body_start + size > len(raw):
            raise WavParseError(
                f"chunk {chunk_id!r} declares {size} bytes beyond end of file",
                body_start)
        body = raw[body_start:body_start + size]
        if chunk_id == b"fmt ":
            if size < 16:
                raise WavParseError("fmt chunk shorter than 16 bytes", body_start)
            fmt = struct.unpack_from("<HHIIHH", body, 0)
            if fmt[0] == FORMAT_EXTENSIBLE:
                # format tag lives in the first two bytes of the SubFormat GUID
                if size < 40:
                    raise WavParseError("extensible fmt chunk too short", body_start)
                (subformat,) = struct.unpack_from("<H", body, 24)
                fmt = (subformat,) + fmt[1:]
        elif chunk_id == b"data":
            data_bytes = body
        pos = body_start + size + (size & 1)  # chunks are word aligned

    if fmt is None:
        raise WavParseError("no fmt chunk found", len(raw))
    if data_bytes is None:
        raise WavParseError("no data chunk found", len(raw))

    tag, channels, rate, _byte_rate, _block_align, bits = fmt
    if channels < 1:
        raise WavParseError("fmt chunk declares zero channels", 0)
    if rate <= 0:
        raise WavParseError("fmt chunk declares non-positive sample rate", 0)

    if tag == FORMAT_PCM and bits == 16:
        samples = np.frombuffer(data_bytes[:len(data_bytes) // 2 * 2], dtype="<i2")
        scaled = samples.astype(np.float64) / 32768.0
        encoding = "pcm16"
    elif tag == FORMAT_PCM and bits == 32:
        samples = np.frombuffer(data_bytes[:len(data_bytes) // 4 * 4], dtype="<i4")
        scaled = samples.astype(np.float64) / 2147483648.0
        encoding = "pcm32"
    elif tag == FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(data_bytes[:len(data_bytes) // 4 * 4], dtype="<f4")
        scaled = samples.astype(np.float64)
        encoding = "float32"
    else:
        raise UnsupportedWavEncodingError(_format_name(tag, bits))

    frames = len(scaled) // channels
    return scaled[:frames * channels].reshape(frames, channels), rate, encoding


def write_wav(path, data, sample_rate, encoding="float32"):
    """Write samples to a WAV file.

    `data` is (frames,) or (frames, channels) of floats in nominal [-1, 1].
    """
    if encoding not in ENCODINGS:
        raise ValueError(f"unknown encoding {encoding!r}; "
                         f"choose from {sorted(ENCODINGS)}")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2:
        raise ValueError("data must be 1-D or 2-D (frames, channels)")
    frames, channels = data.shape

    tag, bits = ENCODINGS[encoding]
    if encoding == "pcm16":
        ints = np.clip(np.rint(data * 32768.0), -32768, 32767).astype("<i2")
        payload = ints.tobytes()
    elif encoding == "pcm32":
        ints = np.clip(np.rint(data * 2147483648.0),
                       -2147483648, 2147483647).astype("<i4")
        payload = ints.tobytes()
    else:
        payload = data.astype("<f4").tobytes()

    block_align = channels * bits // 8
    byte_rate = sample_rate * block_align
    fmt_chunk = struct.pack("<HHIIHH", tag, channels, sample_rate,
                            byte_rate, block_align, bits)
    size = 4 + (8 + len(fmt_chunk)) + (8 + len(payload)) + (len(payload) & 1)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", size) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt_chunk)) + fmt_chunk)
        fh.write(b"data" + struct.pack("<I", len(payload)) + payload)
        if len(payload) & 1:
            fh.write(b"\x00")
