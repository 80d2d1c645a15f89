"""Discrete Gabor analysis: transform, adjoint, dual window, constraint projection.

The signal model is periodic (all window shifts wrap modulo the signal
length), so the analysis/synthesis pair is exact: with the canonical dual
window, ``adjoint_dgt(system, dgt(system, d), "dual_window")`` recovers
``d`` to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IncompleteCover,
    LengthMismatch,
    NonDivisibleHop,
    NotPainless,
    ShapeMismatch,
)

__all__ = [
    "Signal",
    "GaborSystem",
    "ConstraintSet",
    "build_system",
    "dgt",
    "adjoint_dgt",
    "project_constraint",
    "feasibility_residual",
]


def _frozen_array(a, dtype):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Signal:
    """A finite discrete signal; real inputs are stored with zero imaginary part.

    sample_rate is metadata only and may be None for synthetic signals.
    """

    samples: np.ndarray
    sample_rate: float | None = None

    def __post_init__(self):
        samples = _frozen_array(self.samples, np.complex128)
        if samples.ndim != 1 or samples.size < 1:
            raise LengthMismatch("signal must be a nonempty 1-d vector")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class GaborSystem:
    """Analysis/synthesis transform pair fixed by a window, hop and channel count.

    ``window`` and ``dual_window`` are full length-L real vectors; the window
    support (``window_length`` samples) is embedded centered at the frame
    origin with periodic wrap. Derived per-frame gather indices are
    precomputed so dgt/adjoint_dgt are allocation-light.
    """

    window: np.ndarray
    dual_window: np.ndarray
    hop: int
    channels: int
    signal_length: int
    window_length: int
    _frame_indices: np.ndarray = field(init=False, repr=False, compare=False)
    _frame_bins: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "window", _frozen_array(self.window, np.float64))
        object.__setattr__(self, "dual_window", _frozen_array(self.dual_window, np.float64))
        L, a, lw = self.signal_length, self.hop, self.window_length
        start = (-(lw // 2)) % L
        offs = (start + np.arange(lw)) % L
        idx = (offs[None, :] + a * np.arange(self.frames)[:, None]) % L
        object.__setattr__(self, "_frame_indices", idx)
        object.__setattr__(self, "_frame_bins", idx % self.channels)

    @property
    def frames(self) -> int:
        return self.signal_length // self.hop

    @property
    def shape(self) -> tuple[int, int]:
        """(channels, frames) shape of coefficient grids."""
        return (self.channels, self.frames)

    def _support(self, which: str) -> np.ndarray:
        full = self.window if which == "analysis_window" else self.dual_window
        return full[self._frame_indices[0]]


def _embed_window(values: np.ndarray, signal_length: int) -> np.ndarray:
    """Center the window support at index 0 with periodic wrap."""
    lw = values.size
    full = np.zeros(signal_length)
    pos = (np.arange(lw) - lw // 2) % signal_length
    full[pos] = values
    return full


def _window_values(window_kind: str, window_length: int, window) -> np.ndarray:
    if window_kind == "hann":
        j = np.arange(window_length)
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * j / window_length))
    if window_kind == "rectangular":
        return np.ones(window_length)
    if window_kind == "custom":
        if window is None:
            raise ValueError("custom window requires an explicit vector")
        values = np.asarray(window)
        if np.iscomplexobj(values):
            raise ValueError("windows must be real-valued")
        values = values.astype(np.float64)
        if values.ndim != 1 or values.size != window_length:
            raise LengthMismatch(
                f"custom window has length {values.size}, expected {window_length}"
            )
        return values
    raise ValueError(f"unknown window kind {window_kind!r}")


def build_system(
    window_kind: str,
    window_length: int,
    hop: int,
    channels: int,
    signal_length: int,
    window=None,
) -> GaborSystem:
    """Construct a painless-case Gabor system with its canonical dual window.

    The frame operator is diagonal in the painless case with entries
    M * sum_n |w(l - a n)|^2, so the dual window is the entrywise quotient
    w / diag. Raises NonDivisibleHop, NotPainless or IncompleteCover when
    the geometry breaks those assumptions.
    """
    L, a, M, lw = signal_length, hop, channels, window_length
    if L < 1 or a < 1 or M < 1 or lw < 1:
        raise ValueError("window_length, hop, channels, signal_length must be >= 1")
    if L % a != 0:
        raise NonDivisibleHop(f"hop {a} does not divide signal length {L}")
    if lw > M:
        raise NotPainless(f"window length {lw} exceeds channel count {M}")
    if lw > L:
        raise LengthMismatch(f"window length {lw} exceeds signal length {L}")
    # With periodic wrap, two support samples of one frame can land in the
    # same residue class mod M when M does not divide L, which makes the
    # frame operator non-diagonal. Reject those geometries.
    if L % M != 0:
        delta = L % M
        if min(delta, M - delta) < lw:
            raise NotPainless(
                f"support wrap collides modulo channels (L={L}, M={M}, L_w={lw})"
            )

    values = _window_values(window_kind, window_length, window)
    if not np.any(values != 0.0):
        raise ValueError("window vector is identically zero")
    full = _embed_window(values, L)

    # a-periodic frame-operator diagonal: M * sum_n |w(l - a n)|^2.
    sq = full * full
    diag_period = M * sq.reshape(L // a, a).sum(axis=0)
    if np.any(diag_period <= 0.0):
        raise IncompleteCover("window shifts leave uncovered samples (zero diagonal)")
    diag = np.tile(diag_period, L // a)
    dual = full / diag

    return GaborSystem(
        window=full,
        dual_window=dual,
        hop=a,
        channels=M,
        signal_length=L,
        window_length=lw,
    )


def _as_samples(d, L: int) -> np.ndarray:
    samples = d.samples if isinstance(d, Signal) else np.asarray(d, dtype=np.complex128)
    if samples.ndim != 1 or samples.size != L:
        raise LengthMismatch(f"signal length {samples.size}, system expects {L}")
    return samples


def dgt(system: GaborSystem, d, which: str = "analysis_window") -> np.ndarray:
    """Analyze a signal into its (channels, frames) coefficient grid.

    x[m, n] = sum_l d[l] * conj(w[l - a n]) * exp(-2 pi i m l / M), window
    indices modulo L; evaluated per frame as a length-M FFT of the windowed
    segment folded into M bins. ``which`` selects the analysis or the dual
    window (the latter is needed by the fixed-weight normal equations).
    """
    samples = _as_samples(d, system.signal_length)
    M, N = system.shape
    if which not in ("analysis_window", "dual_window"):
        raise ValueError(f"unknown window selector {which!r}")
    seg = samples[system._frame_indices] * np.conj(system._support(which))
    buf = np.zeros((N, M), dtype=np.complex128)
    # In-frame bins are distinct (painless geometry), so plain scatter is exact.
    buf[np.arange(N)[:, None], system._frame_bins] = seg
    return np.fft.fft(buf, axis=1).T


def adjoint_dgt(system: GaborSystem, x: np.ndarray, which: str = "dual_window") -> Signal:
    """Apply the Hermitian adjoint of the analysis map for the chosen window.

    (G^H x)[l] = sum_{m,n} win[l - a n] * exp(2 pi i m l / M) * x[m, n];
    per frame a length-M inverse FFT (scaled by M) followed by windowed
    overlap-add with periodic wrap. The overlap-add accumulation order is
    fixed (frame-major), so results do not depend on scheduling.
    """
    x = np.asarray(x)
    M, N = system.shape
    if x.shape != (M, N):
        raise ShapeMismatch(f"grid shape {x.shape}, system expects {(M, N)}")
    if which not in ("analysis_window", "dual_window"):
        raise ValueError(f"unknown window selector {which!r}")
    frames_fft = M * np.fft.ifft(x, axis=0)  # [j, n] = sum_m x[m,n] e^{2pi i m j/M}
    contrib = system._support(which)[None, :] * frames_fft[system._frame_bins, np.arange(N)[:, None]]
    out = np.zeros(system.signal_length, dtype=np.complex128)
    np.add.at(out, system._frame_indices.ravel(), contrib.ravel())
    return Signal(out)


@dataclass(frozen=True)
class ConstraintSet:
    """Analysis-consistency set {x : G_dual^H x = d} for a fixed system and target."""

    system: GaborSystem
    target: Signal
    tolerance: float = 1e-10

    def __post_init__(self):
        if len(self.target) != self.system.signal_length:
            raise LengthMismatch(
                f"target length {len(self.target)} != system length {self.system.signal_length}"
            )

    def residual(self, x: np.ndarray) -> float:
        return feasibility_residual(self.system, x, self.target)

    def contains(self, x: np.ndarray) -> bool:
        return self.residual(x) <= self.tolerance


def feasibility_residual(system: GaborSystem, x: np.ndarray, d) -> float:
    """Relative constraint violation ||G_dual^H x - d||_2 / ||d||_2."""
    samples = _as_samples(d, system.signal_length)
    synth = adjoint_dgt(system, x, "dual_window").samples
    denom = np.linalg.norm(samples)
    if denom == 0.0:
        return float(np.linalg.norm(synth))
    return float(np.linalg.norm(synth - samples) / denom)


def project_constraint(cs: ConstraintSet, x: np.ndarray) -> np.ndarray:
    """Orthogonal projection onto the constraint set.

    P(x) = x - G_w (G_dual^H x - d); with the canonical dual pairing the
    output satisfies the constraint exactly and feasible points are fixed.
    """
    x = np.asarray(x)
    if x.shape != cs.system.shape:
        raise ShapeMismatch(f"grid shape {x.shape}, system expects {cs.system.shape}")
    residual = adjoint_dgt(cs.system, x, "dual_window").samples - cs.target.samples
    return x - dgt(cs.system, residual)
