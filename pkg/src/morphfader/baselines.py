"""Reference morphing baselines: raw waveform mixing and prompt engineering."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from .audio import AudioClip
from .errors import ConfigurationError, RangeError

if TYPE_CHECKING:
    from .backend import DiffusionBackend

PROMPT_TEMPLATE = (
    "A morph between {A} and {B} where the level of {A} is at {X}% "
    "and level of {B} is at {Y}%"
)


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"alpha must be in [0, 1], got {alpha}")
    return alpha


def waveform_mix(source: AudioClip, target: AudioClip, alpha: float) -> AudioClip:
    """Per-sample linear mix (1-alpha)*source + alpha*target, clamped to [-1, 1].

    Clips must share a sample rate; lengths are truncated to the shorter one.
    The endpoints return the inputs exactly.
    """
    if source.sample_rate != target.sample_rate:
        raise ConfigurationError(
            f"sample rates differ: {source.sample_rate} vs {target.sample_rate}"
        )
    alpha = _check_alpha(alpha)
    n = min(len(source.samples), len(target.samples))
    a = source.samples[:n]
    b = target.samples[:n]
    if alpha == 0.0:
        mixed = a.copy()
    elif alpha == 1.0:
        mixed = b.copy()
    else:
        mixed = (1.0 - alpha) * a + alpha * b
    return AudioClip(np.clip(mixed, -1.0, 1.0), source.sample_rate)


def engineered_prompt(source_text: str, target_text: str, alpha: float) -> str:
    """Fill the fixed morph-description template for one interpolation level.

    A is the target prompt, B the source; X = round(alpha*100) and Y = 100-X.
    """
    alpha = _check_alpha(alpha)
    x = round(alpha * 100)
    return PROMPT_TEMPLATE.format(A=target_text, B=source_text, X=x, Y=100 - x)


def prompt_morph(
    source_text: str,
    target_text: str,
    alpha: float,
    seed: int,
    steps: int,
    backend: "DiffusionBackend",
) -> AudioClip:
    """Generate from the engineered prompt alone; no attention interception."""
    clip, _ = backend.generate(engineered_prompt(source_text, target_text, alpha), seed, steps)
    return clip
