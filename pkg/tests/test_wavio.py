"""WAV reader/writer contract tests."""

import struct

import numpy as np
import pytest

from conftest import write_wav_oracle
from keytap import wavio
from keytap.errors import UnsupportedWavEncodingError, WavParseError


def test_pcm32_silence_roundtrip(tmp_path):
    path = tmp_path / "silence.wav"
    wavio.write_wav(path, np.zeros(44100), 44100, encoding="pcm32")
    data, rate, encoding = wavio.read_wav(path)
    assert rate == 44100
    assert encoding == "pcm32"
    assert data.shape == (44100, 1)
    assert np.all(data == 0.0)


def test_stereo_symmetric_channels_mix_to_zero(tmp_path):
    from keytap.audio import load_wav
    path = tmp_path / "stereo.wav"
    frames = np.column_stack([np.full(1000, 0.5), np.full(1000, -0.5)])
    wavio.write_wav(path, frames, 8000, encoding="float32")
    buf = load_wav(path)
    assert buf.sample_rate == 8000
    assert np.all(buf.samples == 0.0)


def test_pcm16_square_wave_against_independent_writer(tmp_path):
    path = tmp_path / "square.wav"
    ints = np.tile([32767, -32767], 500)
    write_wav_oracle(path, ints, 44100)
    data, rate, encoding = wavio.read_wav(path)
    assert rate == 44100 and encoding == "pcm16"
    expected = np.tile([32767 / 32768, -32767 / 32768], 500)[:, None]
    assert np.array_equal(data, expected)


def test_float32_roundtrip_bit_exact(tmp_path, rng):
    path = tmp_path / "f32.wav"
    original = rng.uniform(-1, 1, 2048).astype(np.float32).astype(np.float64)
    wavio.write_wav(path, original, 16000, encoding="float32")
    data, _rate, encoding = wavio.read_wav(path)
    assert encoding == "float32"
    assert np.array_equal(data[:, 0], original)


def test_pcm16_roundtrip_within_one_step(tmp_path, rng):
    path = tmp_path / "p16.wav"
    original = rng.uniform(-0.99, 0.99, 2048)
    wavio.write_wav(path, original, 16000, encoding="pcm16")
    data, _rate, _encoding = wavio.read_wav(path)
    assert np.max(np.abs(data[:, 0] - original)) <= 1.0 / 32768


def test_truncated_file_reports_byte_offset(tmp_path):
    path = tmp_path / "good.wav"
    wavio.write_wav(path, np.zeros(100), 8000, encoding="pcm16")
    raw = path.read_bytes()
    bad = tmp_path / "truncated.wav"
    bad.write_bytes(raw[:len(raw) - 50])
    with pytest.raises(WavParseError, match=r"at byte \d+"):
        wavio.read_wav(bad)


def test_unsupported_encoding_names_the_format(tmp_path):
    path = tmp_path / "alaw.wav"
    fmt = struct.pack("<HHIIHH", 0x0006, 1, 8000, 8000, 1, 8)
    payload = bytes(16)
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + 8 + len(fmt) + 8 + len(payload)) + b"WAVE")
        fh.write(b"fmt " + struct.pack("<I", len(fmt)) + fmt)
        fh.write(b"data" + struct.pack("<I", len(payload)) + payload)
    with pytest.raises(UnsupportedWavEncodingError, match="A-law"):
        wavio.read_wav(path)


def test_missing_riff_magic(tmp_path):
    path = tmp_path / "bad.wav"
    path.write_bytes(b"JUNKxxxxWAVE" + bytes(32))
    with pytest.raises(WavParseError, match="RIFF"):
        wavio.read_wav(path)


def test_odd_sized_chunk_is_word_aligned(tmp_path):
    path = tmp_path / "padded.wav"
    fmt = struct.pack("<HHIIHH", 1, 1, 8000, 16000, 2, 16)
    extra = b"xyz"  # odd-length auxiliary chunk before data
    payload = struct.pack("<4h", 100, -100, 200, -200)
    with open(path, "wb") as fh:
        body = (b"fmt " + struct.pack("<I", len(fmt)) + fmt
                + b"LIST" + struct.pack("<I", len(extra)) + extra + b"\x00"
                + b"data" + struct.pack("<I", len(payload)) + payload)
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    data, rate, encoding = wavio.read_wav(path)
    assert np.allclose(data[:, 0] * 32768, [100, -100, 200, -200])


def test_extensible_format_pcm16(tmp_path):
    path = tmp_path / "ext.wav"
    guid_tail = b"\x00\x00\x00\x00\x10\x00\x80\x00\x00\xaa\x00\x38\x9b\x71"
    fmt = (struct.pack("<HHIIHH", 0xFFFE, 1, 8000, 16000, 2, 16)
           + struct.pack("<HHIH", 22, 16, 0, 1) + guid_tail)
    payload = struct.pack("<2h", 16384, -16384)
    with open(path, "wb") as fh:
        body = (b"fmt " + struct.pack("<I", len(fmt)) + fmt
                + b"data" + struct.pack("<I", len(payload)) + payload)
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE" + body)
    data, _rate, encoding = wavio.read_wav(path)
    assert encoding == "pcm16"
    assert np.allclose(data[:, 0], [0.5, -0.5])


def test_write_rejects_unknown_encoding(tmp_path):
    with pytest.raises(ValueError, match="unknown encoding"):
        wavio.write_wav(tmp_path / "x.wav", np.zeros(4), 8000, encoding="pcm24")
