"""Affine warping of sampled power spectra.

The frequency axis is mapped by ``G(f) = alpha f + kappa (alpha - 1)``, the
top of the band is bent back so the warped axis still ends at ``f_max``,
and the amplitudes are re-interpolated onto the original bins.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .model import AffineParams

DEFAULT_F0_FRACTION = 0.85


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Amplitudes sampled on a strictly increasing frequency axis.

    Input spectra are on uniform bins; warped spectra (``uniform=False``)
    only need an increasing axis.
    """

    freqs: np.ndarray
    amps: np.ndarray
    uniform: bool = True
    # text of each (freq, amp) as read from disk; reused on output where the value is unchanged
    tokens: tuple[tuple[str, str], ...] | None = None

    def __post_init__(self):
        f = np.array(self.freqs, dtype=float).reshape(-1)
        a = np.array(self.amps, dtype=float).reshape(-1)
        if f.size != a.size:
            raise ValueError(f"{f.size} frequencies but {a.size} amplitudes")
        if f.size < 2:
            raise ValueError("a spectrum needs at least two bins")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(a))):
            raise ValueError("spectrum values must be finite")
        if np.any(a < 0):
            raise ValueError("power amplitudes must be non-negative")
        steps = np.diff(f)
        if np.any(steps <= 0):
            k = int(np.argmax(steps <= 0))
            raise ValueError(f"frequency axis not strictly increasing at bin {k + 1} ({f[k]} -> {f[k + 1]})")
        if self.uniform:
            if np.max(np.abs(steps - steps.mean())) > 1e-9 * max(abs(steps.mean()), abs(f[-1])):
                raise ValueError("frequency bins are not uniformly spaced")
            if not f[-1] > 0:
                raise ValueError("f_max must be positive")
        f.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "amps", a)

    @property
    def f_max(self) -> float:
        return float(self.freqs[-1])

    def __len__(self):
        return self.freqs.size


def warp_axis(spec: Spectrum, params: AffineParams) -> Spectrum:
    """Move every bin to ``alpha f + kappa (alpha - 1)``; amplitudes ride along."""
    return Spectrum(params.alpha * spec.freqs + params.kappa * (params.alpha - 1.0), spec.amps, uniform=False)


class AxisMap:
    """Piecewise-linear frequency map through the points ``(src, dst)``, extended linearly past the ends."""

    def __init__(self, src: Sequence[float], dst: Sequence[float]):
        self.src = np.asarray(src, dtype=float)
        self.dst = np.asarray(dst, dtype=float)
        if self.src.shape != self.dst.shape or self.src.size < 2:
            raise ValueError("need matching source/destination axes with at least two points")
        if np.any(np.diff(self.src) <= 0):
            raise ValueError("source axis must be strictly increasing")

    @classmethod
    def of_warp(cls, spec: Spectrum, params: AffineParams) -> "AxisMap":
        return cls(spec.freqs, warp_axis(spec, params).freqs)

    def __call__(self, f):
        f = np.asarray(f, dtype=float)
        s, d = self.src, self.dst
        out = np.interp(f, s, d)
        lo = f < s[0]
        hi = f > s[-1]
        if np.any(lo):
            out = np.where(lo, d[0] + (f - s[0]) * (d[1] - d[0]) / (s[1] - s[0]), out)
        if np.any(hi):
            out = np.where(hi, d[-1] + (f - s[-1]) * (d[-1] - d[-2]) / (s[-1] - s[-2]), out)
        return out


def bandwidth_adjust(warped: Callable, f0: float, f_max: float) -> Callable:
    """Bend the top of a warped axis so it ends at ``f_max``.

    ``G'(f) = G(f)`` for ``f <= f0``; above ``f0`` it is the straight line
    from ``(f0, G(f0))`` to ``(f_max, f_max)``, written as
    ``f + (1 - t) (G(f0) - f0)`` with ``t = (f - f0) / (f_max - f0)`` so that
    ``G'(f_max) = f_max`` exactly and an identity ``G`` stays the identity.
    """
    if not 0 < f0 < f_max:
        raise ValueError(f"need 0 < f0 < f_max, got f0={f0}, f_max={f_max}")
    g0 = float(np.asarray(warped(f0)))
    lift = g0 - f0
    span = f_max - f0

    def adjusted(f):
        f = np.asarray(f, dtype=float)
        below = np.asarray(warped(np.minimum(f, f0)), dtype=float)
        t = (f - f0) / span
        above = f + (1.0 - t) * lift
        return np.where(f <= f0, below, above)

    return adjusted


def resample_to_bins(warped: Spectrum, target_freqs: Sequence[float]) -> Spectrum:
    """Linear interpolation of the warped amplitudes at ``target_freqs``; targets off the warped support get 0."""
    t = np.asarray(target_freqs, dtype=float)
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise ValueError("target frequencies must be strictly increasing")
    if np.any(np.diff(warped.freqs) <= 0):
        raise ValueError("warped axis is not strictly increasing")
    amps = np.interp(t, warped.freqs, warped.amps, left=0.0, right=0.0)
    return Spectrum(t, amps, uniform=False)


def warp_spectrum(spec: Spectrum, params: AffineParams, f0: float | None = None) -> Spectrum:
    """Warp, bandwidth-adjust and resample back onto the input bins."""
    f_max = spec.f_max
    f0 = DEFAULT_F0_FRACTION * f_max if f0 is None else float(f0)
    g = AxisMap.of_warp(spec, params)
    g_adj = bandwidth_adjust(g, f0, f_max)
    moved = Spectrum(g_adj(spec.freqs), spec.amps, uniform=False)
    out = resample_to_bins(moved, spec.freqs)
    return Spectrum(spec.freqs, out.amps, tokens=spec.tokens)


def _fmt(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


def read_spectrum_csv(path) -> Spectrum:
    """Two-column CSV ``freq_hz,amplitude`` with a header; '#' lines are skipped."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"spectrum file not found: {p}")
    rows = [(i + 1, ln) for i, ln in enumerate(p.read_text(encoding="utf-8").splitlines())
            if ln.strip() and not ln.startswith("#")]
    if not rows or rows[0][1].replace(" ", "") != "freq_hz,amplitude":
        raise ValueError(f"{p}: expected header 'freq_hz,amplitude'")
    freqs, amps, tokens = [], [], []
    for lineno, ln in rows[1:]:
        parts = ln.split(",")
        if len(parts) != 2:
            raise ValueError(f"{p}:{lineno}: expected two fields")
        try:
            freqs.append(float(parts[0]))
            amps.append(float(parts[1]))
        except ValueError:
            raise ValueError(f"{p}:{lineno}: non-numeric value") from None
        tokens.append((parts[0].strip(), parts[1].strip()))
    return Spectrum(freqs, amps, tokens=tuple(tokens))


def _token(v: float, original: str | None) -> str:
    if original is not None and float(original) == v:
        return original
    return _fmt(v)


def format_spectrum(spec: Spectrum) -> str:
    """CSV text; values equal to what was read keep their original spelling."""
    toks = spec.tokens if spec.tokens is not None and len(spec.tokens) == len(spec) else [(None, None)] * len(spec)
    body = "".join(f"{_token(f, tf)},{_token(a, ta)}\n" for f, a, (tf, ta) in zip(spec.freqs, spec.amps, toks))
    return "freq_hz,amplitude\n" + body


def write_spectrum_csv(spec: Spectrum, path, stamp: str | None = None) -> None:
    text = format_spectrum(spec)
    if stamp:
        text = f"# {stamp}\n" + text
    Path(path).write_text(text, encoding="utf-8")

