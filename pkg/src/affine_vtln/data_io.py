"""Vowel formant tables and the synthetic data generator.

Both corpora use one CSV layout::

    speaker_id,category,vowel,repetition,F1,F2,F3

with a header row, category in {M, F, C} and frequencies in Hz. Rows with a
zero formant are rejected and reported rather than loaded.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import math
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bayes import Hyperparams
from .model import Category, FormantVector, PairedDataset, warp_values
from .numerics import RngStream

log = logging.getLogger(__name__)

HEADER = ("speaker_id", "category", "vowel", "repetition", "F1", "F2", "F3")
PNB_VOWELS = ("aa", "ae", "ah", "ao", "eh", "er", "ih", "iy", "uh", "uw")
HIL_VOWELS = ("ae", "ah", "aw", "eh", "ei", "er", "ih", "iy", "oa", "oo", "uh", "uw")

# average adult male formants (Hz) for the ten PnB vowels; default synthetic subject
MALE_TEMPLATE = {
    "iy": (270.0, 2290.0, 3010.0),
    "ih": (390.0, 1990.0, 2550.0),
    "eh": (530.0, 1840.0, 2480.0),
    "ae": (660.0, 1720.0, 2410.0),
    "ah": (520.0, 1190.0, 2390.0),
    "aa": (730.0, 1090.0, 2440.0),
    "ao": (570.0, 840.0, 2410.0),
    "uh": (440.0, 1020.0, 2240.0),
    "uw": (300.0, 870.0, 2240.0),
    "er": (490.0, 1350.0, 1690.0),
}


class DatabaseName(enum.Enum):
    PNB = "PnB"
    HIL = "Hil"
    SYNTHETIC = "Synthetic"
    GENERIC = "Generic"


class RepetitionPolicy(enum.Enum):
    MEAN_OF_REPETITIONS = "mean"
    EACH_REPETITION = "each"

    @classmethod
    def parse(cls, token) -> "RepetitionPolicy":
        if isinstance(token, RepetitionPolicy):
            return token
        key = str(token).strip().lower()
        aliases = {"mean": cls.MEAN_OF_REPETITIONS, "meanofrepetitions": cls.MEAN_OF_REPETITIONS,
                   "each": cls.EACH_REPETITION, "eachrepetition": cls.EACH_REPETITION}
        if key not in aliases:
            raise ValueError(f"unknown repetition policy {token!r}")
        return aliases[key]


@dataclass(frozen=True)
class VowelRecord:
    speaker_id: str
    category: Category
    vowel: str
    repetition: int
    formants: tuple[float, float, float]


@dataclass(frozen=True)
class RejectedRow:
    line: int
    speaker_id: str
    vowel: str
    reason: str


@dataclass
class VowelDatabase:
    name: DatabaseName
    records: list[VowelRecord]
    rejected: list[RejectedRow] = field(default_factory=list)

    def __eq__(self, other):
        if not isinstance(other, VowelDatabase):
            return NotImplemented
        return self.name == other.name and self.records == other.records

    def speakers(self) -> "OrderedDict[str, Category]":
        out: "OrderedDict[str, Category]" = OrderedDict()
        for rec in self.records:
            prev = out.setdefault(rec.speaker_id, rec.category)
            if prev is not rec.category:
                raise ValueError(f"speaker {rec.speaker_id!r} listed with two categories")
        return out

    def speaker_ids(self, category: Category | None = None) -> list[str]:
        return [s for s, c in self.speakers().items() if category is None or c is category]

    def vowels(self) -> list[str]:
        return sorted({rec.vowel for rec in self.records})

    def records_of(self, speaker_id: str) -> list[VowelRecord]:
        return [rec for rec in self.records if rec.speaker_id == speaker_id]

    def count_by_category(self) -> dict[Category, int]:
        counts = {c: 0 for c in Category}
        for c in self.speakers().values():
            counts[c] += 1
        return counts

    def complete_speakers(self, vowels: Sequence[str] | None = None) -> "VowelDatabase":
        """Only speakers having every vowel (default: every vowel in the table)."""
        want = set(vowels) if vowels is not None else set(self.vowels())
        have: dict[str, set] = {}
        for rec in self.records:
            have.setdefault(rec.speaker_id, set()).add(rec.vowel)
        keep = {s for s, v in have.items() if want <= v}
        dropped = sorted(set(have) - keep)
        if dropped:
            log.info("%s: dropping %d speakers with missing vowels", self.name.value, len(dropped))
        return VowelDatabase(self.name, [r for r in self.records if r.speaker_id in keep], list(self.rejected))


def _format_for(fmt) -> DatabaseName:
    if isinstance(fmt, DatabaseName):
        return fmt
    key = str(fmt).strip().lower().replace("_csv", "")
    table = {"pnb": DatabaseName.PNB, "hil": DatabaseName.HIL, "synthetic": DatabaseName.SYNTHETIC,
             "generic": DatabaseName.GENERIC}
    if key not in table:
        raise ValueError(f"unknown database format {fmt!r}")
    return table[key]


def parse_database(text: str, fmt="generic", source: str = "<string>") -> VowelDatabase:
    name = _format_for(fmt)
    lines = text.splitlines()
    numbered = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.lstrip().startswith("#")]
    if not numbered:
        raise ValueError(f"{source}: empty file")
    head_line, head = numbered[0]
    cols = tuple(c.strip() for c in head.split(","))
    if cols != HEADER:
        raise ValueError(f"{source}:{head_line}: expected header {','.join(HEADER)}, got {head.strip()!r}")
    records: list[VowelRecord] = []
    rejected: list[RejectedRow] = []
    seen: set = set()
    for lineno, line in numbered[1:]:
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != len(HEADER):
            raise ValueError(f"{source}:{lineno}: expected {len(HEADER)} fields, got {len(parts)}")
        sid, cat, vowel, rep = parts[:4]
        if not sid or not vowel:
            raise ValueError(f"{source}:{lineno}: empty speaker_id or vowel")
        if cat not in ("M", "F", "C"):
            raise ValueError(f"{source}:{lineno}: category {cat!r} not in M, F, C")
        try:
            repetition = int(rep)
            formants = tuple(float(v) for v in parts[4:])
        except ValueError:
            raise ValueError(f"{source}:{lineno}: non-numeric repetition or formant in {line.strip()!r}") from None
        if any(not math.isfinite(f) or f < 0 for f in formants):
            raise ValueError(f"{source}:{lineno}: formants must be finite and non-negative")
        if any(f == 0 for f in formants):
            missing = [f"F{k + 1}" for k, f in enumerate(formants) if f == 0]
            rejected.append(RejectedRow(lineno, sid, vowel, f"zero {'/'.join(missing)}"))
            continue
        key = (sid, vowel, repetition)
        if key in seen:
            raise ValueError(f"{source}:{lineno}: duplicate row for speaker {sid!r}, vowel {vowel!r}, "
                             f"repetition {repetition}")
        seen.add(key)
        records.append(VowelRecord(sid, Category(cat), vowel, repetition, formants))  # type: ignore[arg-type]
    for rej in rejected:
        log.warning("%s:%d: rejected %s/%s (%s)", source, rej.line, rej.speaker_id, rej.vowel, rej.reason)
    db = VowelDatabase(name, records, rejected)
    db.speakers()  # category consistency
    return db


def load_database(path, fmt="generic") -> VowelDatabase:
    """Read a formant table in the common CSV layout."""
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"database file not found: {p}")
    return parse_database(p.read_text(encoding="utf-8"), fmt, str(p))


def _fmt_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def format_database(db: VowelDatabase) -> str:
    buf = io.StringIO()
    buf.write(",".join(HEADER) + "\n")
    for rec in db.records:
        buf.write(",".join([rec.speaker_id, rec.category.value, rec.vowel, str(rec.repetition)]
                           + [_fmt_number(f) for f in rec.formants]) + "\n")
    return buf.getvalue()


def write_database(db: VowelDatabase, path, stamp: str | None = None) -> None:
    text = format_database(db)
    if stamp:
        text = f"# {stamp}\n" + text
    Path(path).write_text(text, encoding="utf-8")


def speaker_formant_vector(db: VowelDatabase, speaker_id: str, policy=RepetitionPolicy.MEAN_OF_REPETITIONS,
                           vowels: Sequence[str] | None = None) -> FormantVector:
    policy = RepetitionPolicy.parse(policy)
    recs = db.records_of(speaker_id)
    if not recs:
        raise KeyError(f"unknown speaker {speaker_id!r}")
    wanted = list(vowels) if vowels is not None else db.vowels()
    by_vowel: dict[str, list[VowelRecord]] = {}
    for rec in recs:
        by_vowel.setdefault(rec.vowel, []).append(rec)
    entries = []
    for v in wanted:
        if v not in by_vowel:
            raise ValueError(f"speaker {speaker_id!r} has no usable token of vowel {v!r}")
        toks = sorted(by_vowel[v], key=lambda r: r.repetition)
        if policy is RepetitionPolicy.MEAN_OF_REPETITIONS:
            mean = np.mean([t.formants for t in toks], axis=0)
            entries += [(v, k + 1, float(mean[k])) for k in range(3)]
        else:
            for t in toks:
                entries += [(f"{v}#{t.repetition}", k + 1, t.formants[k]) for k in range(3)]
    return FormantVector(speaker_id, recs[0].category, entries)


def build_formant_vectors(db: VowelDatabase, repetition_policy=RepetitionPolicy.MEAN_OF_REPETITIONS,
                          speakers: Iterable[str] | None = None) -> list[FormantVector]:
    """One concatenated formant vector per speaker over the table's full vowel set."""
    vowels = db.vowels()
    ids = list(speakers) if speakers is not None else db.speaker_ids()
    return [speaker_formant_vector(db, s, repetition_policy, vowels) for s in ids]


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def template_vector(speaker_id: str = "subject", category=Category.MALE) -> FormantVector:
    return FormantVector(speaker_id, category,
                         [(v, k + 1, f) for v, fs in MALE_TEMPLATE.items() for k, f in enumerate(fs)])


@dataclass(frozen=True)
class SyntheticTruth:
    kappa_true: float
    alpha_true: tuple[float, ...]
    sigma_true: float
    hyperparams_used: Hyperparams | None
    rng: RngStream

    def __post_init__(self):
        object.__setattr__(self, "alpha_true", tuple(float(a) for a in self.alpha_true))
        if not self.sigma_true >= 0:
            raise ValueError("sigma_true must be non-negative")
        if any(not a > 0 for a in self.alpha_true):
            raise ValueError("alpha_true entries must be positive")


def draw_truth(seed: int, n: int, kappa_true: float, sigma_true: float, alpha_mean: float = 1.0,
               alpha_sd: float = 0.05, hyperparams: Hyperparams | None = None) -> SyntheticTruth:
    """Draw the reference scales from N(alpha_mean, alpha_sd^2) on stream (seed, 0).

    The returned truth carries stream (seed, 1) for the observation noise.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    alphas = alpha_mean + alpha_sd * RngStream(seed, 0).standard_normal(n)
    return SyntheticTruth(float(kappa_true), tuple(alphas), float(sigma_true), hyperparams, RngStream(seed, 1))


def generate_synthetic(x_template: FormantVector, truth: SyntheticTruth, n: int | None = None) -> PairedDataset:
    """References ``Y_i = alpha_i X + kappa (alpha_i - 1) + sigma * noise`` around the template.

    Noise comes from a rewound copy of ``truth.rng``, so regeneration is
    exact. ``n`` defaults to ``len(truth.alpha_true)``.
    """
    n = len(truth.alpha_true) if n is None else n
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > len(truth.alpha_true):
        raise ValueError(f"truth holds {len(truth.alpha_true)} scales, asked for {n} references")
    gen = truth.rng.fresh()
    noise = gen.standard_normal((n, x_template.r))
    refs = []
    for i in range(n):
        a = truth.alpha_true[i]
        values = warp_values(x_template.values, a, truth.kappa_true) + truth.sigma_true * noise[i]
        refs.append(FormantVector.from_values(f"ref{i + 1:03d}", x_template.category, x_template.labels, values))
    return PairedDataset.from_vectors(x_template, refs)


def paired_to_database(data: PairedDataset) -> VowelDatabase:
    """Subject and references as speakers of a table (requires F1-F3 for each vowel)."""
    vectors = [data.subject] + list(data.references)
    if any(v is None for v in vectors):
        raise ValueError("dataset was not built from formant vectors")
    records = []
    for vec in vectors:
        per_vowel: dict[str, dict[int, float]] = {}
        for v, k, f in vec.entries:
            per_vowel.setdefault(v, {})[k] = f
        for v, fs in per_vowel.items():
            if sorted(fs) != [1, 2, 3]:
                raise ValueError(f"vowel {v!r} of {vec.speaker_id!r} lacks some of F1-F3")
            records.append(VowelRecord(vec.speaker_id, vec.category or Category.MALE, v, 1,
                                       (fs[1], fs[2], fs[3])))
    return VowelDatabase(DatabaseName.SYNTHETIC, records)


def write_truth_sidecar(truth: SyntheticTruth, path) -> None:
    """Key=value text: ``kappa_true=150.0`` style, one per line."""
    lines = [f"kappa_true={truth.kappa_true!r}", f"sigma_true={truth.sigma_true!r}",
             f"n={len(truth.alpha_true)}"]
    lines += [f"alpha_true_{i + 1}={a!r}" for i, a in enumerate(truth.alpha_true)]
    lines += [f"seed={truth.rng.seed}", f"stream_id={truth.rng.stream_id}"]
    if truth.hyperparams_used is not None:
        lines += [f"{k}={v!r}" for k, v in truth.hyperparams_used.as_dict().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_sidecar(path) -> dict[str, float]:
    out: dict[str, float] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        k, v = line.split("=", 1)
        out[k.strip()] = float(v)
    return out


def read_truth_sidecar(path) -> SyntheticTruth:
    kv = read_sidecar(path)
    n = int(kv["n"])
    hp = None
    if all(k in kv for k in Hyperparams.NAMES):
        hp = Hyperparams(**{k: kv[k] for k in Hyperparams.NAMES})
    return SyntheticTruth(kv["kappa_true"], tuple(kv[f"alpha_true_{i + 1}"] for i in range(n)), kv["sigma_true"],
                          hp, RngStream(int(kv["seed"]), int(kv["stream_id"])))


def read_csv_rows(path) -> list[dict[str, str]]:
    """Rows of a stamped CSV (lines starting with '#' skipped)."""
    text = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(text))
