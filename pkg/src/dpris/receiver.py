"""Receive-side processing: harmonic extraction, estimation, detection, BER.

The data rides on the first lower harmonic of the symbol clock, so the
symbol statistic is a single-bin discrete correlator over one symbol period.
Stream separation is plain zero forcing on a least-squares channel estimate
(the simplest detector consistent with an unspecified receiver chain), and
bit decisions are nearest-point demapping on the Gray 16-QAM table.

BER bookkeeping uses Wilson 95% intervals, which stay honest at the low
error counts typical of the high-SNR end of a sweep.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .modulation import (
    CONSTELLATION16,
    QAM16_BITS_PER_SYMBOL,
    QAM16_SCALE,
    TWO_PI,
    symbol_indices_to_bits,
)

WILSON_Z = 1.959963984540054  # two-sided 95%

# Orthogonal pilot construction: stream 0 cycles the four unit-amplitude
# corner points, stream 1 is the same sequence with alternating sign (a sign
# flip maps a corner onto the opposite corner, so pilots stay valid
# constellation points).  Equal magnitudes + balanced signs => orthogonal rows.
_PILOT_CORNER_INDICES = (10, 2, 0, 8)


class SingularChannelError(ValueError):
    """Estimated channel too ill-conditioned to invert for stream separation."""

    def __init__(self, condition: float, limit: float):
        super().__init__(
            f"channel estimate condition number {condition:.3e} exceeds limit {limit:.3e}"
        )
        self.condition = condition
        self.limit = limit


@dataclass(frozen=True)
class PilotBlock:
    """Known 2 x L pilot symbol matrix with full row rank."""

    symbols: np.ndarray

    def __post_init__(self):
        s = np.array(self.symbols, dtype=np.complex128)
        if s.ndim != 2 or s.shape[0] != 2 or s.shape[1] < 2:
            raise ValueError(f"pilot matrix must be 2 x L with L >= 2, got {s.shape}")
        gram = s @ s.conj().T
        if np.linalg.matrix_rank(gram) < 2:
            raise ValueError("pilot matrix is rank deficient")
        s.setflags(write=False)
        object.__setattr__(self, "symbols", s)

    @property
    def length(self) -> int:
        return self.symbols.shape[1]


def default_pilot_block(length: int = 16) -> PilotBlock:
    """Corner-cycling Walsh pilots; see module notes on orthogonality."""
    if length < 2 or length % 2 != 0:
        raise ValueError("pilot length must be an even number >= 2")
    idx0 = np.array([_PILOT_CORNER_INDICES[k % 4] for k in range(length)])
    signs = np.where(np.arange(length) % 2 == 0, 1.0, -1.0)
    s0 = CONSTELLATION16[idx0]
    return PilotBlock(symbols=np.stack([s0, s0 * signs]))


@dataclass(frozen=True)
class BerRecord:
    """Per-operating-point Monte Carlo tally."""

    ebn0_db: float
    bits_sent: int
    bit_errors: int
    symbol_errors: int
    ber: float
    wilson_interval_halfwidth: float


def wilson_interval_halfwidth(errors: int, trials: int, z: float = WILSON_Z) -> float:
    """Half-width of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    return (z / denom) * np.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))


def extract_harmonic(rx_waveform, order: int = -1) -> complex:
    """Single-bin correlator over one symbol period of M samples.

    For the data-bearing order -1 this is (1/M) * sum rx[m] * e^{+j2*pi*m/M};
    the estimate converges to the exact Fourier coefficient as O(1/M).
    """
    rx = np.asarray(rx_waveform, dtype=np.complex128)
    m = rx.shape[-1]
    if m < 2:
        raise ValueError("waveform must span at least 2 samples")
    probe = np.exp(-1j * TWO_PI * order * np.arange(m) / m)
    return rx @ probe / m


def estimate_channel(pilot: PilotBlock, observations) -> np.ndarray:
    """Least-squares 2x2 channel estimate minimizing ||Y - G S||_F."""
    y = np.asarray(observations, dtype=np.complex128)
    if y.shape != pilot.symbols.shape:
        raise ValueError(
            f"observations shape {y.shape} must match pilot shape {pilot.symbols.shape}"
        )
    s = pilot.symbols
    gram = s @ s.conj().T
    return y @ s.conj().T @ np.linalg.inv(gram)


def zf_equalize(g_hat, y, condition_limit: float = 1e8) -> np.ndarray:
    """Zero-forcing stream separation: s_hat = G_hat^{-1} y.

    ``y`` may be a 2-vector or a (2, n) block of symbols.  Raises
    :class:`SingularChannelError` when the estimate is too close to singular
    to resolve the streams.
    """
    g = np.asarray(g_hat, dtype=np.complex128)
    if g.shape != (2, 2):
        raise ValueError(f"g_hat must be 2x2, got {g.shape}")
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > condition_limit:
        raise SingularChannelError(float(cond), condition_limit)
    return np.linalg.solve(g, np.asarray(y, dtype=np.complex128))


def demap(point: complex, constellation=CONSTELLATION16):
    """Nearest-point decision; ties resolve to the lowest symbol index.

    Returns (bits, symbol_index) with bits as a length-4 int array.
    """
    idx = int(np.argmin(np.abs(np.asarray(constellation) - point)))
    return symbol_indices_to_bits(np.array([idx])), idx


def demap_indices(points, constellation=CONSTELLATION16) -> np.ndarray:
    """Vectorized nearest-point demapping (argmin keeps the lowest-index tie)."""
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    d = np.abs(pts[:, None] - np.asarray(constellation)[None, :])
    return np.argmin(d, axis=1)


def slicer_demap_indices(points) -> np.ndarray:
    """Per-dimension threshold demapper for the Gray 16-QAM table.

    Equivalent to :func:`demap_indices` on the square grid (checked by
    test), and O(n) instead of O(16 n) for big Monte Carlo blocks.
    """
    pts = np.asarray(points, dtype=np.complex128).reshape(-1)
    re = pts.real / QAM16_SCALE
    im = pts.imag / QAM16_SCALE
    b0 = (re > 0).astype(np.int64)
    b1 = (np.abs(re) < 2.0).astype(np.int64)
    b2 = (im > 0).astype(np.int64)
    b3 = (np.abs(im) < 2.0).astype(np.int64)
    return (b0 << 3) | (b1 << 2) | (b2 << 1) | b3


def theoretical_ber_16qam(ebn0_db) -> float | np.ndarray:
    """Exact Gray-coded 16-QAM bit error probability in AWGN.

    Assembled from the per-bit threshold-crossing terms of the two Gray
    4-PAM dimensions (not the nearest-neighbor approximation):

        Pb = (1/4) * [3 Q(a) + 2 Q(3a) - Q(5a)],  a = sqrt(0.8 * Eb/N0)
    """
    gamma = 10.0 ** (np.asarray(ebn0_db, dtype=float) / 10.0)
    a = np.sqrt(0.8 * gamma)

    def q(x):
        return 0.5 * erfc(x / np.sqrt(2.0))

    out = 0.25 * (3.0 * q(a) + 2.0 * q(3.0 * a) - q(5.0 * a))
    return float(out) if out.ndim == 0 else out


def ber_count(tx_bits, rx_bits, ebn0_db: float = float("nan")) -> BerRecord:
    """Tally bit and symbol errors between transmitted and received bits."""
    tx = np.asarray(tx_bits, dtype=np.int64).reshape(-1)
    rx = np.asarray(rx_bits, dtype=np.int64).reshape(-1)
    if tx.shape != rx.shape:
        raise ValueError(f"bit streams differ in length: {tx.size} vs {rx.size}")
    if tx.size == 0:
        raise ValueError("bit streams must be non-empty")
    bit_errors = int(np.count_nonzero(tx != rx))
    if tx.size % QAM16_BITS_PER_SYMBOL == 0:
        diff = (tx != rx).reshape(-1, QAM16_BITS_PER_SYMBOL)
        symbol_errors = int(np.count_nonzero(diff.any(axis=1)))
    else:
        symbol_errors = 0
    return BerRecord(
        ebn0_db=ebn0_db,
        bits_sent=tx.size,
        bit_errors=bit_errors,
        symbol_errors=symbol_errors,
        ber=bit_errors / tx.size,
        wilson_interval_halfwidth=float(wilson_interval_halfwidth(bit_errors, tx.size)),
    )
