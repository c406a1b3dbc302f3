"""Blending captured attention components and re-injecting them.

A morph re-runs generation under the empty (unconditional) prompt while a hook
replaces each masked attention component with an interpolation between the
source and target captures at that site. Unmasked components pass through
natively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .audio import AudioClip
from .capture import AttentionCapture, CaptureSession
from .errors import (
    CompletenessError,
    ConfigurationError,
    InputError,
    RangeError,
    ShapeError,
    SiteMismatchError,
)
from .tensor_ops import as_tensor, scale_rows

if TYPE_CHECKING:
    from .backend import DiffusionBackend


@dataclass(frozen=True)
class ComponentMask:
    """Which of q/k/v get morphed; the rest stay native at the site."""

    use_q: bool = True
    use_k: bool = True
    use_v: bool = True

    COMPONENT_SETS = ("qkv", "kv", "qk", "qv", "q", "k", "v", "none")

    @classmethod
    def from_string(cls, text: str) -> "ComponentMask":
        key = text.strip().lower()
        if key not in cls.COMPONENT_SETS:
            raise InputError(
                f"unknown component set {text!r}; choose one of "
                f"{', '.join(cls.COMPONENT_SETS)}"
            )
        if key == "none":
            return cls(False, False, False)
        return cls("q" in key, "k" in key, "v" in key)

    def label(self) -> str:
        """Human label matching the ablation table rows ("Q,K,V" .. "V only")."""
        parts = [c for c, on in (("Q", self.use_q), ("K", self.use_k), ("V", self.use_v)) if on]
        if not parts:
            return "none"
        if len(parts) == 1:
            return f"{parts[0]} only"
        return ",".join(parts)


FULL_MASK = ComponentMask(True, True, True)
EMPTY_MASK = ComponentMask(False, False, False)


@dataclass(frozen=True, eq=False)
class MorphConfig:
    """Interpolation position, component mask, and optional per-token V weights."""

    alpha: float
    mask: ComponentMask = FULL_MASK
    source_weights: Optional[np.ndarray] = None
    target_weights: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= 1.0:
            raise RangeError(f"alpha must be in [0, 1], got {alpha}")
        object.__setattr__(self, "alpha", alpha)
        for name in ("source_weights", "target_weights"):
            w = getattr(self, name)
            if w is None:
                continue
            w = as_tensor(w, name)
            if w.ndim != 1:
                raise ShapeError(f"{name} must be 1-D, got shape {w.shape}")
            object.__setattr__(self, name, w)


def _blend(a: np.ndarray, b: np.ndarray, alpha: float) -> np.ndarray:
    # Coefficients are fl(1-alpha) on a and fl(1-fl(1-alpha)) on b. Because
    # fl(1-.) applied three times equals itself, calling with (b, a, 1-alpha)
    # produces the identical coefficient pair, which is what makes
    # run_morph(src, tgt, alpha) == run_morph(tgt, src, 1-alpha) bitwise.
    if alpha == 0.0:
        return a.copy()
    if alpha == 1.0:
        return b.copy()
    w_a = 1.0 - alpha
    w_b = 1.0 - w_a
    return w_a * a + w_b * b


def morph_components(
    source: AttentionCapture,
    target: AttentionCapture,
    config: MorphConfig,
) -> tuple[Optional[np.ndarray], Optional[np.ndarray], Optional[np.ndarray]]:
    """Interpolate the masked components of two same-site captures.

    Per-token weights scale each session's value rows before interpolation;
    weights touch V only. Unmasked positions come back as None ("use native").
    """
    if source.site != target.site:
        raise SiteMismatchError(
            f"cannot morph across sites: {source.site} vs {target.site}"
        )
    site = source.site
    for name, a, b in (
        ("q", source.q, target.q),
        ("k", source.k, target.k),
        ("v", source.v, target.v),
    ):
        if a.shape != b.shape:
            raise ShapeError(
                f"{name} shapes differ at {site}: {a.shape} vs {b.shape}; "
                "record the two prompts as an aligned pair"
            )
    alpha = config.alpha
    q = _blend(source.q, target.q, alpha) if config.mask.use_q else None
    k = _blend(source.k, target.k, alpha) if config.mask.use_k else None
    v: Optional[np.ndarray] = None
    if config.mask.use_v:
        v_src = source.v
        v_tgt = target.v
        if config.source_weights is not None:
            _check_weight_length(config.source_weights, source, "source_weights")
            v_src = scale_rows(v_src, config.source_weights)
        if config.target_weights is not None:
            _check_weight_length(config.target_weights, target, "target_weights")
            v_tgt = scale_rows(v_tgt, config.target_weights)
        v = _blend(v_src, v_tgt, alpha)
    return q, k, v


def _check_weight_length(w: np.ndarray, cap: AttentionCapture, name: str) -> None:
    if w.shape[0] != cap.token_count:
        raise ShapeError(
            f"{name} has {w.shape[0]} entries but the capture at {cap.site} "
            f"covers {cap.token_count} tokens"
        )


def run_morph(
    source: CaptureSession,
    target: CaptureSession,
    config: MorphConfig,
    backend: "DiffusionBackend",
) -> AudioClip:
    """Generate the morph: an empty-prompt run with blended components injected.

    The two sessions must share seed, step count and token count. At alpha=0
    with the full mask the result is bitwise the source audio; at alpha=1 the
    target audio; with an empty mask it equals plain empty-prompt generation.
    """
    if source.steps != target.steps:
        raise ConfigurationError(
            f"step counts differ: source {source.steps}, target {target.steps}"
        )
    if source.seed != target.seed:
        raise ConfigurationError(
            f"seeds differ: source {source.seed}, target {target.seed}"
        )
    if source.token_count != target.token_count:
        raise ShapeError(
            f"token counts differ: source {source.token_count}, target "
            f"{target.token_count}; record the prompts with record_session_pair"
        )
    for name, w, session in (
        ("source_weights", config.source_weights, source),
        ("target_weights", config.target_weights, target),
    ):
        if w is not None and w.shape[0] != session.token_count:
            raise ShapeError(
                f"{name} has {w.shape[0]} entries for {session.token_count} tokens"
            )

    def hook(site, q, k, v):
        try:
            src_cap = source.captures[site]
            tgt_cap = target.captures[site]
        except KeyError:
            raise CompletenessError(f"no capture recorded for site {site}") from None
        mq, mk, mv = morph_components(src_cap, tgt_cap, config)
        return (
            mq if mq is not None else q,
            mk if mk is not None else k,
            mv if mv is not None else v,
        )

    # With nothing injected the run must be exactly plain unconditional
    # generation; otherwise the carrier's native k/v are sized to the aligned
    # token count so partial masks stay shape-consistent with injected rows.
    mask = config.mask
    injecting = mask.use_q or mask.use_k or mask.use_v
    clip, _ = backend.generate(
        "",
        seed=source.seed,
        steps=source.steps,
        hook=hook,
        min_tokens=source.token_count if injecting else 1,
    )
    return clip


def run_weighted(
    session: CaptureSession,
    weights: np.ndarray,
    backend: "DiffusionBackend",
) -> AudioClip:
    """Re-render one session with per-token value-row weights applied.

    Equivalent to a source==target morph at alpha=0 with the full mask; unit
    weights reproduce the session's audio bitwise.
    """
    config = MorphConfig(alpha=0.0, mask=FULL_MASK, source_weights=weights)
    return run_morph(session, session, config, backend)
