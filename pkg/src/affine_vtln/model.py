"""The affine warp model and the data containers shared by the estimators.

A subject's formant vector ``X`` is mapped onto a reference ``Y`` by

    Y = alpha * X + kappa * (alpha - 1) + noise,

applied componentwise. ``alpha`` is the speaker scale and ``kappa`` a shift
in Hz that is shared by the whole database.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

MAX_FREQUENCY_HZ = 10000.0


class Category(enum.Enum):
    MALE = "M"
    FEMALE = "F"
    CHILD = "C"

    @classmethod
    def parse(cls, token) -> "Category":
        if isinstance(token, Category):
            return token
        key = str(token).strip()
        for member in cls:
            if key.upper() in (member.value, member.name) or key.lower() == member.name.lower():
                return member
        aliases = {"MAN": cls.MALE, "WOMAN": cls.FEMALE, "W": cls.FEMALE, "BOY": cls.CHILD, "GIRL": cls.CHILD,
                   "B": cls.CHILD, "G": cls.CHILD}
        if key.upper() in aliases:
            return aliases[key.upper()]
        raise ValueError(f"unknown speaker category {token!r} (expected M, F or C)")


Label = tuple[str, int]


class LayoutMismatchError(ValueError):
    """Two formant vectors do not share the same (vowel, formant) layout."""


class FormantVector:
    """A speaker's concatenated formant frequencies.

    Entries are ``(vowel_label, formant_index, frequency_hz)`` triples and are
    stored sorted by vowel label then formant index, so two vectors built
    from the same vowels line up componentwise whatever the input order.
    Instances are immutable; ``values`` is a read-only array.
    """

    __slots__ = ("speaker_id", "category", "_labels", "_values")

    def __init__(self, speaker_id: str, category, entries: Iterable[tuple[str, int, float]]):
        rows = sorted(((str(v), int(k), float(f)) for v, k, f in entries), key=lambda e: (e[0], e[1]))
        if not rows:
            raise ValueError(f"speaker {speaker_id!r}: formant vector is empty")
        labels = tuple((v, k) for v, k, _ in rows)
        if len(set(labels)) != len(labels):
            dup = next(lab for i, lab in enumerate(labels) if lab in labels[:i])
            raise ValueError(f"speaker {speaker_id!r}: duplicate entry {dup}")
        values = np.array([f for _, _, f in rows], dtype=float)
        for (v, k), f in zip(labels, values):
            if not 1 <= k <= 3:
                raise ValueError(f"speaker {speaker_id!r}: formant index {k} for {v!r} outside 1..3")
            if not (0.0 < f <= MAX_FREQUENCY_HZ):
                raise ValueError(
                    f"speaker {speaker_id!r}: F{k} of {v!r} = {f} Hz outside (0, {MAX_FREQUENCY_HZ:g}]"
                )
        values.setflags(write=False)
        self.speaker_id = str(speaker_id)
        self.category = Category.parse(category) if category is not None else None
        self._labels = labels
        self._values = values

    @classmethod
    def from_values(cls, speaker_id: str, category, labels: Sequence[Label], values: Sequence[float]):
        if len(labels) != len(values):
            raise ValueError("labels and values differ in length")
        return cls(speaker_id, category, [(v, k, f) for (v, k), f in zip(labels, values)])

    @property
    def labels(self) -> tuple[Label, ...]:
        return self._labels

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def r(self) -> int:
        return self._values.size

    @property
    def vowels(self) -> list[str]:
        return sorted({v for v, _ in self._labels})

    @property
    def entries(self) -> list[tuple[str, int, float]]:
        return [(v, k, float(f)) for (v, k), f in zip(self._labels, self._values)]

    def with_values(self, values: Sequence[float]) -> "FormantVector":
        """Same speaker and layout, new frequencies."""
        return FormantVector.from_values(self.speaker_id, self.category, self._labels, values)

    def same_layout(self, other: "FormantVector") -> bool:
        return self._labels == other._labels

    def __len__(self):
        return self.r

    def __repr__(self):
        cat = self.category.value if self.category else None
        return f"FormantVector({self.speaker_id!r}, {cat!r}, r={self.r})"


def check_layout(a: FormantVector, b: FormantVector) -> None:
    """Raise :class:`LayoutMismatchError` naming the first differing label."""
    if a.labels == b.labels:
        return
    for la, lb in zip(a.labels, b.labels):
        if la != lb:
            raise LayoutMismatchError(
                f"layout mismatch between {a.speaker_id!r} and {b.speaker_id!r}: {la} vs {lb}"
            )
    raise LayoutMismatchError(
        f"layout mismatch between {a.speaker_id!r} (r={a.r}) and {b.speaker_id!r} (r={b.r})"
    )


@dataclass(frozen=True)
class AffineParams:
    alpha: float
    kappa: float = 0.0
    sigma: float | None = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise ValueError(f"sigma must be positive when given, got {self.sigma!r}")

    @property
    def intercept(self) -> float:
        return self.kappa * (self.alpha - 1.0)


def warp_values(values, alpha: float, kappa: float) -> np.ndarray:
    """``alpha * x + kappa * (alpha - 1)`` on a plain array."""
    return alpha * np.asarray(values, dtype=float) + kappa * (alpha - 1.0)


def warp_formants(x: FormantVector, params: AffineParams) -> FormantVector:
    out = warp_values(x.values, params.alpha, params.kappa)
    if np.any(out <= 0):
        k = int(np.argmax(out <= 0))
        raise ValueError(
            f"warp pushed {x.labels[k]} of {x.speaker_id!r} to {out[k]:.3f} Hz (alpha={params.alpha}, "
            f"kappa={params.kappa})"
        )
    return x.with_values(out)


def residual(y: FormantVector, x: FormantVector, params: AffineParams) -> np.ndarray:
    """``y - warp(x)`` componentwise."""
    check_layout(y, x)
    return y.values - warp_values(x.values, params.alpha, params.kappa)


@dataclass(frozen=True)
class SufficientStats:
    """Inner products that every posterior and likelihood formula needs."""

    n: int
    r: int
    xx: float  # X'X
    x1: float  # X'1
    y1: np.ndarray  # Y_i'1
    xy: np.ndarray  # X'Y_i
    yy: np.ndarray  # Y_i'Y_i


@dataclass(frozen=True, eq=False)
class PairedDataset:
    """A subject vector ``x`` with ``n`` aligned reference vectors ``ys``.

    ``x`` has shape ``(r,)`` and ``ys`` shape ``(n, r)``. Use
    :meth:`from_vectors` to build one from :class:`FormantVector` objects
    (layouts are checked) or :meth:`from_arrays` for raw numbers.
    """

    x: np.ndarray
    ys: np.ndarray
    subject: FormantVector | None = None
    references: tuple[FormantVector, ...] = field(default=())

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        ys = np.array(self.ys, dtype=float)
        if ys.ndim == 1:
            ys = ys.reshape(1, -1)
        if ys.ndim != 2 or ys.shape[0] < 1:
            raise ValueError("need at least one reference vector")
        if ys.shape[1] != x.size or x.size < 1:
            raise ValueError(f"reference length {ys.shape[1]} differs from subject length {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(ys))):
            raise ValueError("formant data must be finite")
        x.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "references", tuple(self.references))

    @classmethod
    def from_vectors(cls, subject: FormantVector, references: Sequence[FormantVector]) -> "PairedDataset":
        refs = list(references)
        if not refs:
            raise ValueError("need at least one reference speaker")
        for ref in refs:
            check_layout(ref, subject)
        return cls(subject.values, np.vstack([ref.values for ref in refs]), subject, tuple(refs))

    @classmethod
    def from_arrays(cls, x, ys) -> "PairedDataset":
        return cls(x, ys)

    @property
    def n(self) -> int:
        return self.ys.shape[0]

    @property
    def r(self) -> int:
        return self.x.size

    @cached_property
    def stats(self) -> SufficientStats:
        x, ys = self.x, self.ys
        return SufficientStats(
            n=self.n,
            r=self.r,
            xx=float(x @ x),
            x1=float(x.sum()),
            y1=ys.sum(axis=1),
            xy=ys @ x,
            yy=np.einsum("ij,ij->i", ys, ys),
        )

    def subset(self, indices: Sequence[int]) -> "PairedDataset":
        idx = list(indices)
        refs = tuple(self.references[i] for i in idx) if self.references else ()
        return PairedDataset(self.x, self.ys[idx], self.subject, refs)
