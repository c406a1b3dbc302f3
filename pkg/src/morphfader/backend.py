"""Generation backends: the adapter contract and the deterministic toy model.

The toy backend is a tiny latent "denoiser" that exists so the interception,
interpolation and injection machinery can be verified end to end, bitwise, in
milliseconds. Its weights come from a fixed internal seed and never change;
the user seed only draws the initial latent. Real models plug in behind the
same ``DiffusionBackend`` contract.
"""

from __future__ import annotations

import hashlib
import importlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Protocol, runtime_checkable

import numpy as np

from .audio import AudioClip
from .capture import AttentionCapture, AttentionSite
from .errors import InputError, ShapeError
from .tensor_ops import cross_attention

MAX_PROMPT_CHARS = 256
UNCOND_TOKEN = "<uncond>"

# Toy geometry. The latent is LATENT_H x LATENT_W; its flattened entries are
# the attention query rows and, after the last step, the sinusoid amplitudes.
LATENT_H = 8
LATENT_W = 16
LATENT_SIZE = LATENT_H * LATENT_W
EMBED_DIM = 16
ATTN_DIM = 16
SAMPLE_RATE = 16000
SAMPLES_PER_LATENT_COLUMN = 1000

# A 256-character prompt cannot hold more whitespace tokens than this, so the
# per-position key/value patterns can be precomputed once.
MAX_TOKENS = 128

# Weights are a function of this constant only, never of the user seed.
_MODEL_SEED = 0x4D0F
_TOKEN_SALT = b"morphfader.token\x00"

# Convex scheduler coefficient: z <- (1-_SCHED)*z + _SCHED*block_output.
_SCHED = 0.5

HookResult = Optional[tuple[np.ndarray, np.ndarray, np.ndarray]]
AttentionHook = Callable[[AttentionSite, np.ndarray, np.ndarray, np.ndarray], HookResult]


@dataclass(frozen=True, eq=False)
class PromptEmbedding:
    """Tokenized prompt and its m x e embedding matrix (float64)."""

    tokens: tuple[str, ...]
    embedding: np.ndarray

    @property
    def token_count(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True, eq=False)
class LatentState:
    z: np.ndarray
    timestep: int


@runtime_checkable
class DiffusionBackend(Protocol):
    """What the morphing stack needs from any generation model.

    ``min_tokens`` pads the prompt embedding with unconditional rows up to the
    given count; adapters for models with fixed-length padded text encodings
    may ignore it.
    """

    sample_rate: int

    def encode_prompt(self, text: str, min_tokens: int = 1) -> PromptEmbedding: ...

    def generate(
        self,
        prompt: str,
        seed: int,
        steps: int,
        hook: AttentionHook | None = None,
        min_tokens: int = 1,
    ) -> tuple[AudioClip, list[AttentionCapture]]: ...

    def sites_per_step(self) -> list[tuple[str, int]]: ...


def _f32(arr: np.ndarray) -> np.ndarray:
    # Site/decoder boundary rule: values are rounded to float32-representable
    # doubles so in-memory tensors survive the 32-bit at-rest format bitwise.
    return arr.astype(np.float32).astype(np.float64)


@lru_cache(maxsize=None)
def _token_row(token: str) -> np.ndarray:
    digest = hashlib.sha256(_TOKEN_SALT + token.encode("utf-8")).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
    row = rng.standard_normal(EMBED_DIM)
    row.setflags(write=False)
    return row


@dataclass(frozen=True, eq=False)
class _Block:
    layer_id: str
    pos: np.ndarray  # LATENT_SIZE x (EMBED_DIM-1), fixed positional features
    wq: np.ndarray  # EMBED_DIM x ATTN_DIM
    wk: np.ndarray
    wv: np.ndarray
    pk: np.ndarray  # MAX_TOKENS x ATTN_DIM positional key patterns
    pv: np.ndarray  # MAX_TOKENS x ATTN_DIM positional value patterns
    wz: np.ndarray  # LATENT_SIZE x LATENT_SIZE
    wo: np.ndarray  # ATTN_DIM


@dataclass(frozen=True, eq=False)
class _ToyModel:
    blocks: tuple[_Block, ...]
    decoder: np.ndarray  # LATENT_SIZE x n_samples sinusoid bank


@lru_cache(maxsize=1)
def _toy_model() -> _ToyModel:
    rng = np.random.Generator(np.random.PCG64(_MODEL_SEED))
    blocks = []
    for i in range(2):
        blocks.append(
            _Block(
                layer_id=f"block{i}.xattn",
                pos=rng.standard_normal((LATENT_SIZE, EMBED_DIM - 1)),
                wq=rng.standard_normal((EMBED_DIM, ATTN_DIM)) / np.sqrt(ATTN_DIM),
                wk=rng.standard_normal((EMBED_DIM, ATTN_DIM)) / np.sqrt(ATTN_DIM),
                wv=rng.standard_normal((EMBED_DIM, ATTN_DIM)) / np.sqrt(ATTN_DIM),
                pk=rng.standard_normal((MAX_TOKENS, ATTN_DIM)),
                pv=rng.standard_normal((MAX_TOKENS, ATTN_DIM)),
                wz=rng.standard_normal((LATENT_SIZE, LATENT_SIZE)) / np.sqrt(LATENT_SIZE),
                wo=rng.standard_normal(ATTN_DIM) / np.sqrt(ATTN_DIM),
            )
        )
    n_samples = LATENT_W * SAMPLES_PER_LATENT_COLUMN
    freqs = 60.0 * (7500.0 / 60.0) ** (np.arange(LATENT_SIZE) / (LATENT_SIZE - 1))
    phases = rng.uniform(0.0, 2.0 * np.pi, LATENT_SIZE)
    t = np.arange(n_samples) / SAMPLE_RATE
    decoder = np.sin(2.0 * np.pi * freqs[:, None] * t[None, :] + phases[:, None])
    return _ToyModel(blocks=tuple(blocks), decoder=decoder)


class ToyBackend:
    """Deterministic miniature diffusion model over an 8 x 16 latent.

    Each step runs two stacked blocks; a block mixes the flattened latent
    linearly, adds one cross-attention read of the prompt embedding, and
    applies tanh. The key/value projections include fixed per-position
    patterns (as real text encoders do), so attention stays responsive to
    queries even under the all-zero unconditional embedding. The scheduler is
    a fixed convex combination, so the latent stays inside [-1, 1] and the
    decoded waveform (a normalized sum of sinusoids with latent entries as
    amplitudes) does too.
    """

    sample_rate = SAMPLE_RATE

    def __init__(self) -> None:
        self._model = _toy_model()

    def sites_per_step(self) -> list[tuple[str, int]]:
        return [(block.layer_id, 0) for block in self._model.blocks]

    def encode_prompt(self, text: str, min_tokens: int = 1) -> PromptEmbedding:
        """Whitespace-tokenize and map each token to a seeded-hash row.

        The empty prompt encodes to a single all-zero unconditional row.
        Identical tokens get identical rows; padding rows are unconditional.
        """
        if len(text) > MAX_PROMPT_CHARS:
            raise InputError(
                f"prompt is {len(text)} characters; the limit is {MAX_PROMPT_CHARS}"
            )
        if not 1 <= min_tokens <= MAX_TOKENS:
            raise InputError(
                f"min_tokens must be in [1, {MAX_TOKENS}], got {min_tokens}"
            )
        tokens = text.split() or [UNCOND_TOKEN]
        if len(tokens) < min_tokens:
            tokens = tokens + [UNCOND_TOKEN] * (min_tokens - len(tokens))
        rows = [
            np.zeros(EMBED_DIM) if tok == UNCOND_TOKEN else _token_row(tok)
            for tok in tokens
        ]
        emb = np.ascontiguousarray(np.vstack(rows))
        emb.setflags(write=False)
        return PromptEmbedding(tokens=tuple(tokens), embedding=emb)

    def generate(
        self,
        prompt: str,
        seed: int,
        steps: int,
        hook: AttentionHook | None = None,
        min_tokens: int = 1,
    ) -> tuple[AudioClip, list[AttentionCapture]]:
        """Denoise for ``steps`` timesteps and decode a 1 s waveform.

        The returned captures hold the q/k/v actually used at each site (the
        native ones, or the hook's replacements). Identical arguments produce
        bitwise-identical output.
        """
        if steps < 1:
            raise InputError(f"steps must be at least 1, got {steps}")
        emb = self.encode_prompt(prompt, min_tokens=min_tokens)
        rng = np.random.Generator(np.random.PCG64(int(seed)))
        z = rng.uniform(-1.0, 1.0, size=(LATENT_H, LATENT_W))
        captures: list[AttentionCapture] = []
        for t in range(steps - 1, -1, -1):
            h = z
            for block in self._model.blocks:
                h, cap = self._run_block(block, h, emb.embedding, hook, t)
                captures.append(cap)
            z = (1.0 - _SCHED) * z + _SCHED * h
        samples = _f32((z.reshape(-1) @ self._model.decoder) / LATENT_SIZE)
        return AudioClip(samples, self.sample_rate), captures

    def _run_block(
        self,
        block: _Block,
        h: np.ndarray,
        emb: np.ndarray,
        hook: AttentionHook | None,
        timestep: int,
    ) -> tuple[np.ndarray, AttentionCapture]:
        h_flat = h.reshape(-1)
        m = emb.shape[0]
        feats = np.concatenate([h_flat[:, None], block.pos], axis=1)
        q = _f32(feats @ block.wq)
        k = _f32(emb @ block.wk + block.pk[:m])
        v = _f32(emb @ block.wv + block.pv[:m])
        for arr in (q, k, v):
            arr.setflags(write=False)
        site = AttentionSite(block.layer_id, 0, timestep)
        if hook is not None:
            replacement = hook(site, q, k, v)
            if replacement is not None:
                q, k, v = self._validate_replacement(site, replacement, q, v)
        attn = cross_attention(q, k, v)
        out = np.tanh(h_flat @ block.wz + attn @ block.wo)
        cap = AttentionCapture(site=site, q=q, k=k, v=v)
        return out.reshape(LATENT_H, LATENT_W), cap

    def _validate_replacement(
        self,
        site: AttentionSite,
        replacement: tuple[np.ndarray, np.ndarray, np.ndarray],
        native_q: np.ndarray,
        native_v: np.ndarray,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        # Replacements must match native shapes except that the token count m
        # may differ (injected k/v carry the captured prompt's token count).
        try:
            q, k, v = replacement
        except (TypeError, ValueError) as exc:
            raise ShapeError(f"hook at {site} must return (q, k, v) or None") from exc
        arrays = []
        for name, arr in (("q", q), ("k", k), ("v", v)):
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            if arr.ndim != 2:
                raise ShapeError(f"hook {name} at {site} must be 2-D")
            arrays.append(_f32(arr))
        q, k, v = arrays
        if q.shape != native_q.shape:
            raise ShapeError(
                f"hook q at {site} has shape {q.shape}, expected {native_q.shape}"
            )
        if k.shape[1] != native_q.shape[1]:
            raise ShapeError(
                f"hook k at {site} has feature dim {k.shape[1]}, "
                f"expected {native_q.shape[1]}"
            )
        if v.shape[1] != native_v.shape[1]:
            raise ShapeError(
                f"hook v at {site} has feature dim {v.shape[1]}, "
                f"expected {native_v.shape[1]}"
            )
        if k.shape[0] != v.shape[0]:
            raise ShapeError(
                f"hook k/v at {site} disagree on token count: "
                f"{k.shape[0]} vs {v.shape[0]}"
            )
        for arr in (q, k, v):
            arr.setflags(write=False)
        return q, k, v


def load_backend(selector: str) -> DiffusionBackend:
    """Resolve a backend selector: ``toy`` or ``adapter:<module>:<factory>``."""
    if selector == "toy":
        return ToyBackend()
    if selector.startswith("adapter:"):
        spec = selector[len("adapter:"):]
        module_name, sep, attr = spec.partition(":")
        if not sep or not module_name or not attr:
            raise InputError(
                f"adapter selector {selector!r} must look like adapter:<module>:<factory>"
            )
        try:
            module = importlib.import_module(module_name)
        except ImportError as exc:
            raise InputError(f"cannot import adapter module {module_name!r}: {exc}") from exc
        try:
            factory = getattr(module, attr)
        except AttributeError as exc:
            raise InputError(
                f"adapter module {module_name!r} has no attribute {attr!r}"
            ) from exc
        return factory()
    raise InputError(f"unknown backend selector {selector!r}")
