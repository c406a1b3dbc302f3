"""Sweeps, the spectral similarity surrogate, and smoothness scoring.

Smoothness of a morph sweep is the Pearson correlation between the alpha grid
and each clip's similarity to the sweep's target-endpoint clip. Similarity is
cosine over concatenated per-band means and standard deviations of a 64-band
log-magnitude mel-style filterbank (25 ms frames, 10 ms hop, 50-8000 Hz), a
deterministic stand-in for a learned audio-text embedding; swap in another
scorer through the SimilarityProvider contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Optional, Protocol, Sequence

import numpy as np

from .audio import AudioClip
from .baselines import prompt_morph, waveform_mix
from .capture import CaptureSession, record_session_pair
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    InputError,
    UndefinedCorrelationError,
)
from .morph import FULL_MASK, ComponentMask, MorphConfig, run_morph

if TYPE_CHECKING:
    from .backend import DiffusionBackend

MEL_BANDS = 64
FRAME_SECONDS = 0.025
HOP_SECONDS = 0.010
BAND_FMIN = 50.0
BAND_FMAX = 8000.0

WEIGHT_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0)

METHODS = ("ours", "mix", "prompt")

# Ablation rows, in fixed display order.
MASK_TABLE: tuple[tuple[str, ComponentMask], ...] = (
    ("Q,K,V", ComponentMask(True, True, True)),
    ("K,V", ComponentMask(False, True, True)),
    ("Q,K", ComponentMask(True, True, False)),
    ("Q,V", ComponentMask(True, False, True)),
    ("Q only", ComponentMask(True, False, False)),
    ("K only", ComponentMask(False, True, False)),
    ("V only", ComponentMask(False, False, True)),
)

WORD_TYPES = ("adjective", "verb")


@dataclass(frozen=True)
class PromptPair:
    """A source/target prompt pair, optionally tagged by the word that varies."""

    source: str
    target: str
    word_type: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.source.strip() or not self.target.strip():
            raise InputError("prompt pair fields must be non-empty")
        if self.word_type is not None and self.word_type not in WORD_TYPES:
            raise InputError(
                f"word_type must be one of {WORD_TYPES} or omitted, got "
                f"{self.word_type!r}"
            )


@dataclass(frozen=True)
class SmoothnessReport:
    alphas: tuple[float, ...]
    scores: tuple[float, ...]
    rho: float

    def __post_init__(self) -> None:
        if len(self.alphas) != len(self.scores):
            raise InputError("alphas and scores must have equal length")
        if len(self.alphas) < 3:
            raise InputError("a smoothness report needs at least 3 points")
        if any(b <= a for a, b in zip(self.alphas, self.alphas[1:])):
            raise InputError("alphas must be strictly ascending")


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation of two equal-length sequences (n >= 3)."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.ndim != 1 or ya.ndim != 1 or xa.shape != ya.shape:
        raise InputError("pearson needs two 1-D sequences of equal length")
    if len(xa) < 3:
        raise InputError(f"pearson needs at least 3 points, got {len(xa)}")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError(
            "correlation is undefined when either sequence has zero variance"
        )
    r = float(dx @ dy) / np.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


# -- spectral similarity surrogate --------------------------------------------


@lru_cache(maxsize=8)
def _mel_filterbank(sample_rate: int, n_fft: int) -> np.ndarray:
    def to_mel(f: np.ndarray) -> np.ndarray:
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def from_mel(m: np.ndarray) -> np.ndarray:
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    edges = from_mel(
        np.linspace(to_mel(np.array(BAND_FMIN)), to_mel(np.array(BAND_FMAX)), MEL_BANDS + 2)
    )
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    bank = np.zeros((MEL_BANDS, len(freqs)))
    for i in range(MEL_BANDS):
        lo, mid, hi = edges[i], edges[i + 1], edges[i + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        bank[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


def _spectral_features(clip: AudioClip) -> np.ndarray:
    frame = round(clip.sample_rate * FRAME_SECONDS)
    hop = round(clip.sample_rate * HOP_SECONDS)
    x = clip.samples
    if len(x) < frame:
        x = np.concatenate([x, np.zeros(frame - len(x))])
    n_frames = 1 + (len(x) - frame) // hop
    idx = np.arange(frame)[None, :] + hop * np.arange(n_frames)[:, None]
    window = np.hanning(frame)
    spectra = np.abs(np.fft.rfft(x[idx] * window, axis=1)) ** 2
    bands = np.log1p(spectra @ _mel_filterbank(clip.sample_rate, frame).T)
    return np.concatenate([bands.mean(axis=0), bands.std(axis=0)])


class SimilarityProvider(Protocol):
    """Anything that scores two clips in [-1, 1]; 1 means indistinguishable."""

    def similarity(self, a: AudioClip, b: AudioClip) -> float: ...


class SpectralSimilarity:
    """Cosine similarity over band-energy statistics; sign-invariant."""

    def similarity(self, a: AudioClip, b: AudioClip) -> float:
        if a.sample_rate != b.sample_rate:
            raise ConfigurationError(
                f"sample rates differ: {a.sample_rate} vs {b.sample_rate}"
            )
        fa = _spectral_features(a)
        fb = _spectral_features(b)
        na = float(np.linalg.norm(fa))
        nb = float(np.linalg.norm(fb))
        if na == 0.0 or nb == 0.0:
            raise DegenerateInputError(
                "cannot score a silent clip (zero spectral feature norm)"
            )
        if np.array_equal(fa, fb):
            return 1.0
        r = float(fa @ fb) / (na * nb)
        return float(min(1.0, max(-1.0, r)))


_DEFAULT_PROVIDER = SpectralSimilarity()


def similarity(a: AudioClip, b: AudioClip) -> float:
    """Score two clips with the default spectral provider."""
    return _DEFAULT_PROVIDER.similarity(a, b)


# -- sweeps and smoothness -----------------------------------------------------


def alpha_grid(alpha_step: float) -> tuple[float, ...]:
    """The ascending grid 0, step, ..., 1; the step must divide 1 evenly."""
    if not 0.0 < alpha_step <= 1.0:
        raise InputError(f"alpha_step must be in (0, 1], got {alpha_step}")
    n = round(1.0 / alpha_step)
    if n < 1 or abs(n * alpha_step - 1.0) > 1e-9:
        raise InputError(f"alpha_step {alpha_step} does not divide 1 evenly")
    return tuple(i / n for i in range(n + 1))


def sweep_sessions(
    source: CaptureSession,
    target: CaptureSession,
    backend: "DiffusionBackend",
    alpha_step: float = 0.1,
    mask: ComponentMask = FULL_MASK,
) -> list[tuple[float, AudioClip]]:
    """Morph an already-recorded pair across the alpha grid."""
    return [
        (a, run_morph(source, target, MorphConfig(alpha=a, mask=mask), backend))
        for a in alpha_grid(alpha_step)
    ]


def sweep_morph(
    pair: PromptPair,
    backend: "DiffusionBackend",
    seed: int = 0,
    steps: int = 20,
    alpha_step: float = 0.1,
    method: str = "ours",
    mask: ComponentMask = FULL_MASK,
) -> list[tuple[float, AudioClip]]:
    """Render one clip per grid alpha with the chosen morphing method.

    ``ours`` records the pair once and injects blended attention components;
    ``mix`` linearly mixes the two plain generations; ``prompt`` re-generates
    from the engineered interpolation prompt at each alpha.
    """
    if method not in METHODS:
        raise InputError(f"method must be one of {METHODS}, got {method!r}")
    grid = alpha_grid(alpha_step)
    if method == "ours":
        src, tgt = record_session_pair(backend, pair.source, pair.target, seed, steps)
        return sweep_sessions(src, tgt, backend, alpha_step=alpha_step, mask=mask)
    if method == "mix":
        src_clip, _ = backend.generate(pair.source, seed, steps)
        tgt_clip, _ = backend.generate(pair.target, seed, steps)
        return [(a, waveform_mix(src_clip, tgt_clip, a)) for a in grid]
    return [
        (a, prompt_morph(pair.source, pair.target, a, seed, steps, backend))
        for a in grid
    ]


def smoothness_of_sweep(
    sweep: Sequence[tuple[float, AudioClip]],
    provider: Optional[SimilarityProvider] = None,
) -> SmoothnessReport:
    """Score every clip against the target endpoint and correlate with alpha."""
    if len(sweep) < 3:
        raise InputError(f"smoothness needs at least 3 clips, got {len(sweep)}")
    ordered = sorted(sweep, key=lambda item: item[0])
    provider = provider or _DEFAULT_PROVIDER
    alphas = tuple(float(a) for a, _ in ordered)
    target = ordered[-1][1]
    scores = tuple(provider.similarity(clip, target) for _, clip in ordered)
    return SmoothnessReport(alphas=alphas, scores=scores, rho=pearson(alphas, scores))


@dataclass(frozen=True)
class AblationRow:
    label: str
    mask: ComponentMask
    mean_rho: float
    rhos: tuple[float, ...]


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[AblationRow, ...]
    pair_count: int
    seed: int
    steps: int


def ablation_report(
    pairs: Sequence[PromptPair],
    backend: "DiffusionBackend",
    seed: int = 0,
    steps: int = 20,
    alpha_step: float = 0.1,
    provider: Optional[SimilarityProvider] = None,
) -> AblationReport:
    """Mean sweep smoothness per component mask, one row per mask."""
    if not pairs:
        raise InputError("ablation needs at least one prompt pair")
    sessions = [
        record_session_pair(backend, pair.source, pair.target, seed, steps)
        for pair in pairs
    ]
    rows = []
    for label, mask in MASK_TABLE:
        rhos = []
        for src, tgt in sessions:
            sweep = sweep_sessions(src, tgt, backend, alpha_step=alpha_step, mask=mask)
            rhos.append(smoothness_of_sweep(sweep, provider).rho)
        rows.append(
            AblationRow(
                label=label,
                mask=mask,
                mean_rho=float(np.mean(rhos)),
                rhos=tuple(rhos),
            )
        )
    return AblationReport(
        rows=tuple(rows), pair_count=len(pairs), seed=int(seed), steps=int(steps)
    )


# -- corpus and report files ---------------------------------------------------


def load_prompt_pairs(path: str | Path) -> list[PromptPair]:
    """Read a line-delimited JSON corpus of {source, target, word_type}."""
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        if not isinstance(record, dict) or "source" not in record or "target" not in record:
            raise InputError(f"{path}:{lineno}: each line needs source and target fields")
        pairs.append(
            PromptPair(
                source=str(record["source"]),
                target=str(record["target"]),
                word_type=record.get("word_type"),
            )
        )
    if not pairs:
        raise InputError(f"{path}: corpus contains no pairs")
    return pairs


def builtin_prompt_pairs() -> list[PromptPair]:
    """The 20-pair sample corpus shipped with the package."""
    with resources.as_file(
        resources.files("morphfader").joinpath("data/prompt_pairs.jsonl")
    ) as path:
        return load_prompt_pairs(path)


def write_smoothness_report(
    path: str | Path,
    report: SmoothnessReport,
    method: Optional[str] = None,
    pair: Optional[PromptPair] = None,
) -> Path:
    payload = {
        "method": method,
        "pair": None
        if pair is None
        else {"source": pair.source, "target": pair.target, "word_type": pair.word_type},
        "alphas": list(report.alphas),
        "scores": list(report.scores),
        "rho": report.rho,
    }
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def write_ablation_report(path: str | Path, report: AblationReport) -> Path:
    payload = {
        "pairs": report.pair_count,
        "seed": report.seed,
        "steps": report.steps,
        "rows": [
            {
                "components": row.label,
                "smoothness": row.mean_rho,
                "per_pair": list(row.rhos),
            }
            for row in report.rows
        ],
    }
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def format_ablation_table(report: AblationReport) -> str:
    """Plain-text aligned table: one row per component set."""
    label_width = max(len("Components"), max(len(r.label) for r in report.rows))
    lines = [f"{'Components':<{label_width}}  Smoothness"]
    for row in report.rows:
        lines.append(f"{row.label:<{label_width}}  {row.mean_rho:10.4f}")
    return "\n".join(lines)
