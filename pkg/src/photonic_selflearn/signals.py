"""NRZ test patterns, eye folding and the eye-opening area metric."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Primitive feedback taps (1-based) giving maximal-length sequences.
PRBS_TAPS = {7: (7, 6), 9: (9, 5), 11: (11, 9), 15: (15, 14), 23: (23, 18), 31: (31, 28)}

# Per-channel offsets into the PRBS period; chosen so four shifted copies of
# PRBS-7 hit all 16 joint bit patterns.
CHANNEL_OFFSETS = (0, 31, 67, 101)


@dataclass(frozen=True)
class NrzConfig:
    bitrate: float = 10.0  # Gbit/s
    prbs_order: int = 7
    samples_per_bit: int = 32
    rise_time_fraction: float = 0.25
    amplitude_noise_sigma: float = 0.02
    rng_seed: int = 0

    def __post_init__(self):
        if self.samples_per_bit < 8:
            raise ValueError("samples_per_bit must be >= 8")
        if not 0 <= self.rise_time_fraction < 0.5:
            raise ValueError("rise_time_fraction must be in [0, 0.5)")
        if self.prbs_order not in PRBS_TAPS:
            raise ValueError(f"unsupported PRBS order {self.prbs_order}")
        if self.amplitude_noise_sigma < 0:
            raise ValueError("noise sigma must be non-negative")

    @property
    def period_bits(self) -> int:
        return 2**self.prbs_order - 1

    @property
    def unit_interval_ps(self) -> float:
        return 1e3 / self.bitrate


@lru_cache(maxsize=16)
def _prbs_period(order: int) -> tuple:
    a, b = PRBS_TAPS[order]
    state = [1] * order
    out = []
    for _ in range(2**order - 1):
        new = state[a - 1] ^ state[b - 1]
        out.append(state[-1])
        state = [new] + state[:-1]
    return tuple(out)


def prbs(order: int, n_bits: int, offset: int = 0) -> np.ndarray:
    """Maximal-length pseudo-random bit sequence starting ``offset`` bits into the period."""
    period = np.array(_prbs_period(order), dtype=np.int8)
    idx = (np.arange(n_bits) + offset) % len(period)
    return period[idx]


def channel_bits(config: NrzConfig, n_bits: int, channel: int = 0) -> np.ndarray:
    offset = CHANNEL_OFFSETS[channel % len(CHANNEL_OFFSETS)] + 13 * (channel // len(CHANNEL_OFFSETS))
    return prbs(config.prbs_order, n_bits, offset + config.rng_seed)


def nrz_waveform(bits, config: NrzConfig, noise: bool = True, channel: int = 0) -> np.ndarray:
    """Sampled NRZ waveform (levels 0/1) with raised-cosine edges centred on bit boundaries.

    The pattern is treated as periodic, so the first and last bits join smoothly.
    """
    bits = np.asarray(bits, dtype=float)
    spb = config.samples_per_bit
    t = np.arange(spb) / spb
    prev = np.roll(bits, 1)[:, None]
    nxt = np.roll(bits, -1)[:, None]
    cur = bits[:, None]
    wave = np.repeat(cur, spb, axis=1)
    r = config.rise_time_fraction
    if r > 0:
        lead = t < r / 2
        u = (t[lead] + r / 2) / r
        wave[:, lead] = prev + (cur - prev) * (1 - np.cos(np.pi * u)) / 2
        tail = t > 1 - r / 2
        u = (t[tail] - (1 - r / 2)) / r
        wave[:, tail] = cur + (nxt - cur) * (1 - np.cos(np.pi * u)) / 2
    wave = wave.ravel()
    if noise and config.amplitude_noise_sigma > 0:
        rng = np.random.default_rng([config.rng_seed, channel])
        wave = wave + rng.normal(0.0, config.amplitude_noise_sigma, wave.shape)
    return wave


def generate_nrz(config: NrzConfig, n_bits: int | None = None, channel: int = 0):
    """Return ``(time_ps, waveform, bits)`` for one channel."""
    if n_bits is None:
        n_bits = config.period_bits
    if n_bits < config.period_bits:
        raise ValueError(f"need at least {config.period_bits} bits for PRBS-{config.prbs_order}")
    bits = channel_bits(config, n_bits, channel)
    wave = nrz_waveform(bits, config, channel=channel)
    time_ps = np.arange(wave.size) * config.unit_interval_ps / config.samples_per_bit
    return time_ps, wave, bits


@dataclass(frozen=True)
class EyeTrace:
    """Folded waveform: ``t`` in unit intervals, ``amplitude`` and a 0/1 ``label`` per point."""

    t: np.ndarray
    amplitude: np.ndarray
    label: np.ndarray
    samples_per_bit: int

    def __len__(self):
        return self.t.size

    def scaled(self, factor: float) -> "EyeTrace":
        return EyeTrace(self.t, self.amplitude * factor, self.label, self.samples_per_bit)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "amplitude", "label"])
            for t, a, lab in zip(self.t, self.amplitude, self.label):
                w.writerow([f"{t:.6f}", f"{a:.9g}", int(lab)])

    @classmethod
    def from_csv(cls, path, samples_per_bit: int) -> "EyeTrace":
        data = np.genfromtxt(path, delimiter=",", skip_header=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2].astype(np.int8), samples_per_bit)


def fold_eye(waveform, config: NrzConfig, bits=None) -> EyeTrace:
    """Fold a waveform modulo one unit interval.

    Each bit period is labelled with ``bits`` when given, otherwise by
    thresholding its sample at t = 0.5 against the waveform mid-level.
    """
    waveform = np.asarray(waveform, dtype=float)
    spb = config.samples_per_bit
    if waveform.size == 0 or waveform.size % spb:
        raise ValueError(f"waveform length {waveform.size} is not a multiple of {spb} samples per bit")
    segments = waveform.reshape(-1, spb)
    if bits is None:
        centre = segments[:, spb // 2]
        mid = 0.5 * (waveform.min() + waveform.max())
        labels = (centre > mid).astype(np.int8)
    else:
        labels = np.asarray(bits, dtype=np.int8)
        if labels.size != segments.shape[0]:
            raise ValueError("one label per bit period is required")
    t = np.tile(np.arange(spb) / spb, segments.shape[0])
    return EyeTrace(t, waveform.copy(), np.repeat(labels, spb), spb)


def eye_gap(eye: EyeTrace, n_bins: int | None = None) -> float:
    """Un-normalised opening: sum over time bins of max(0, min(ones) - max(zeros)) * bin width."""
    if len(eye) == 0:
        raise ValueError("empty eye")
    ones = eye.label == 1
    if not ones.any() or ones.all():
        return 0.0
    n_bins = n_bins or eye.samples_per_bit
    b = np.minimum((eye.t * n_bins).astype(int), n_bins - 1)
    lo_one = np.full(n_bins, np.inf)
    hi_zero = np.full(n_bins, -np.inf)
    np.minimum.at(lo_one, b[ones], eye.amplitude[ones])
    np.maximum.at(hi_zero, b[~ones], eye.amplitude[~ones])
    gap = lo_one - hi_zero
    gap = np.where(np.isfinite(gap), gap, 0.0)
    return float(np.sum(np.maximum(gap, 0.0)) / n_bins)


def eye_opening_area(eye: EyeTrace, nominal_amplitude: float = 1.0, n_bins: int | None = None) -> float:
    """Normalised eye-opening area in [0, 1]; an ideal square eye of height ``nominal_amplitude`` scores 1."""
    return float(min(1.0, eye_gap(eye, n_bins) / nominal_amplitude))
