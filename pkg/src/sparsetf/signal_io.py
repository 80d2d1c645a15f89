"""Signal ingestion, synthetic fixtures, raw matrix files and spectrogram images.

Matrix files are raw little-endian float32 payloads (complex grids store
interleaved real/imag pairs) written row-major, with a JSON sidecar at
``<path>.json`` describing shape, dtype and the run parameters. The format
is deliberately container-free so any language can parse it bit-exactly.
"""

from __future__ import annotations

import json
import struct
import warnings
import wave
from pathlib import Path

import numpy as np

from .errors import AboveNyquist, EmptyFile, LengthMismatch, SidecarMismatch, UnsupportedFormat
from .gabor import Signal
from .metrics import db_magnitude

__all__ = [
    "read_wav",
    "write_wav",
    "synthesize",
    "write_matrix",
    "read_matrix",
    "render_spectrogram",
    "sidecar_path",
    "SYNTH_KINDS",
]

SYNTH_KINDS = ("tone", "two_tone", "linear_chirp", "impulse_train", "tone_plus_impulses")


def read_wav(path, hop: int | None = None) -> Signal:
    """Load a PCM WAV file as a normalized Signal.

    Accepts 16- or 24-bit PCM; multichannel files keep the first channel
    with a warning. Samples are scaled to [-1, 1]. When ``hop`` is given
    the signal is truncated (never padded) to the largest hop multiple.
    """
    try:
        with wave.open(str(path), "rb") as wav:
            if wav.getcomptype() != "NONE":
                raise UnsupportedFormat(f"compressed WAV ({wav.getcomptype()}) is not supported")
            width = wav.getsampwidth()
            if width not in (2, 3):
                raise UnsupportedFormat(f"only 16/24-bit PCM supported, got {8 * width}-bit")
            channels = wav.getnchannels()
            nframes = wav.getnframes()
            rate = wav.getframerate()
            raw = wav.readframes(nframes)
    except wave.Error as exc:
        raise UnsupportedFormat(f"not a readable WAV file: {exc}") from exc
    if nframes == 0:
        raise EmptyFile(f"{path} contains no samples")
    if channels > 1:
        warnings.warn(f"{path}: {channels} channels, keeping the first", stacklevel=2)

    if width == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64)
        data = data.reshape(-1, channels)[:, 0] / 32768.0
    else:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, channels, 3)[:, 0, :].astype(np.int32)
        vals = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        vals -= (vals & 0x800000) << 1  # sign-extend 24-bit
        data = vals.astype(np.float64) / 8388608.0

    if hop is not None:
        if hop < 1:
            raise ValueError(f"hop must be >= 1, got {hop}")
        usable = (data.size // hop) * hop
        if usable == 0:
            raise LengthMismatch(f"signal shorter ({data.size}) than one hop ({hop})")
        data = data[:usable]
    return Signal(data, sample_rate=float(rate))


def write_wav(path, signal: Signal) -> None:
    """Write the real part as 16-bit PCM; sample_rate defaults to 16 kHz."""
    rate = int(signal.sample_rate or 16000)
    samples = np.clip(signal.samples.real, -1.0, 1.0)
    pcm = np.round(samples * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(rate)
        wav.writeframes(pcm.tobytes())


def _check_freq(f: float, sample_rate: float) -> None:
    if f >= sample_rate / 2.0:
        raise AboveNyquist(f"frequency {f} Hz >= Nyquist {sample_rate / 2.0} Hz")


def synthesize(kind: str, length: int, sample_rate: float = 16000.0, **params) -> Signal:
    """Deterministic unit-amplitude test fixtures.

    Kinds: tone(f), two_tone(f1, f2), linear_chirp(f0, f1),
    impulse_train(period), tone_plus_impulses(f, period).
    """
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    t = np.arange(length) / sample_rate
    if kind == "tone":
        f = params.get("f", 440.0)
        _check_freq(f, sample_rate)
        data = np.cos(2.0 * np.pi * f * t)
    elif kind == "two_tone":
        f1 = params.get("f1", 440.0)
        f2 = params.get("f2", 2080.0)
        _check_freq(f1, sample_rate)
        _check_freq(f2, sample_rate)
        data = 0.5 * (np.cos(2.0 * np.pi * f1 * t) + np.cos(2.0 * np.pi * f2 * t))
    elif kind == "linear_chirp":
        f0 = params.get("f0", 100.0)
        f1 = params.get("f1", sample_rate / 2.0 * 0.8)
        _check_freq(f0, sample_rate)
        _check_freq(f1, sample_rate)
        duration = length / sample_rate
        data = np.cos(2.0 * np.pi * (f0 * t + (f1 - f0) * t * t / (2.0 * duration)))
    elif kind == "impulse_train":
        period = int(params.get("period", 256))
        if period < 1:
            raise ValueError(f"period must be >= 1, got {period}")
        data = np.zeros(length)
        data[::period] = 1.0
    elif kind == "tone_plus_impulses":
        f = params.get("f", 440.0)
        _check_freq(f, sample_rate)
        period = int(params.get("period", 256))
        if period < 1:
            raise ValueError(f"period must be >= 1, got {period}")
        data = 0.5 * np.cos(2.0 * np.pi * f * t)
        data[::period] += 0.5
    else:
        raise ValueError(f"unknown fixture kind {kind!r}; choose from {SYNTH_KINDS}")
    return Signal(data, sample_rate=float(sample_rate))


def sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def write_matrix(path, grid: np.ndarray, sidecar: dict | None = None) -> None:
    """Write a grid as raw float32 payload plus JSON sidecar.

    Complex grids are stored as interleaved (real, imag) float32 pairs.
    Caller-provided sidecar keys (hop, channels, lambda, ...) pass through;
    shape and dtype are always overwritten from the data.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise SidecarMismatch(f"matrix files hold 2-d grids, got shape {grid.shape}")
    meta = dict(sidecar or {})
    if np.iscomplexobj(grid):
        payload = np.ascontiguousarray(grid.astype("<c8"))
        meta["dtype"] = "c64-interleaved-f32"
    else:
        payload = np.ascontiguousarray(grid.astype("<f4"))
        meta["dtype"] = "f32"
    meta["shape"] = [int(grid.shape[0]), int(grid.shape[1])]
    Path(path).write_bytes(payload.tobytes(order="C"))
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_matrix(path):
    """Read (grid, sidecar) back; raises SidecarMismatch on inconsistent sizes."""
    side = sidecar_path(path)
    if not side.exists():
        raise SidecarMismatch(f"missing sidecar {side}")
    meta = json.loads(side.read_text())
    try:
        m, n = (int(v) for v in meta["shape"])
        dtype = meta["dtype"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SidecarMismatch(f"sidecar {side} lacks a valid shape/dtype: {exc}") from exc
    payload = Path(path).read_bytes()
    if dtype == "f32":
        itemsize, np_dtype = 4, "<f4"
    elif dtype == "c64-interleaved-f32":
        itemsize, np_dtype = 8, "<c8"
    else:
        raise SidecarMismatch(f"unknown payload dtype {dtype!r}")
    if len(payload) != m * n * itemsize:
        raise SidecarMismatch(
            f"payload holds {len(payload)} bytes, sidecar declares {m}x{n} {dtype} ({m * n * itemsize} bytes)"
        )
    grid = np.frombuffer(payload, dtype=np_dtype).reshape(m, n)
    return grid, meta


def render_spectrogram(path, grid: np.ndarray, range_db: float = 100.0) -> None:
    """Write a grayscale PGM, one pixel per T-F bin.

    Frequency runs bottom-up (row 0 of the image is the highest channel),
    time left-to-right; pixel values are linear in dB over
    [peak - range_db, peak].
    """
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError(f"spectrogram needs a nonempty 2-d grid, got shape {grid.shape}")
    db = db_magnitude(grid, range_db=range_db)
    pixels = np.round((db + range_db) / range_db * 255.0).astype(np.uint8)
    flipped = pixels[::-1, :]  # low frequencies at the bottom of the image
    m, n = grid.shape
    header = f"P5\n{n} {m}\n255\n".encode("ascii")
    Path(path).write_bytes(header + flipped.tobytes(order="C"))
