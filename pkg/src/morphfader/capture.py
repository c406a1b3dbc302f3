"""Recording attention components during generation, and their disk format.

A capture directory holds one JSON manifest plus one raw blob per tensor:

    manifest.json
    <layer_id>__h<head>__t<timestep>__{q|k|v}.f32
    audio.f32

Blobs are raw little-endian IEEE-754 32-bit floats in row-major order; shapes
live only in the manifest. Sessions hold float64 in memory, so one
save -> load -> save cycle is bitwise stable at 32-bit precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .audio import AudioClip
from .errors import (
    CompletenessError,
    MissingFileError,
    ShapeError,
    TruncatedBlobError,
    VersionError,
)

if TYPE_CHECKING:
    from .backend import DiffusionBackend

MANIFEST_VERSION = "1"
MANIFEST_NAME = "manifest.json"
AUDIO_BLOB_NAME = "audio.f32"


@dataclass(frozen=True, order=True)
class AttentionSite:
    """One interception point: a named layer, a head, and a timestep."""

    layer_id: str
    head_index: int
    timestep: int

    def __str__(self) -> str:
        return f"{self.layer_id}/h{self.head_index}/t{self.timestep}"

    def blob_stem(self) -> str:
        return f"{self.layer_id}__h{self.head_index}__t{self.timestep}"


@dataclass(frozen=True, eq=False)
class AttentionCapture:
    """The q/k/v triple observed (or injected) at one site."""

    site: AttentionSite
    q: np.ndarray
    k: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        for name, arr in (("q", self.q), ("k", self.k), ("v", self.v)):
            if arr.ndim != 2:
                raise ShapeError(f"capture {name} at {self.site} must be 2-D")
        if self.q.shape[1] != self.k.shape[1]:
            raise ShapeError(f"q/k feature dims differ at {self.site}")
        if self.k.shape[0] != self.v.shape[0]:
            raise ShapeError(f"k/v row counts differ at {self.site}")

    @property
    def token_count(self) -> int:
        return self.k.shape[0]


@dataclass(eq=False)
class CaptureSession:
    """Everything one generation run produced: metadata, captures, audio."""

    prompt: str
    seed: int
    steps: int
    token_strings: tuple[str, ...]
    captures: dict[AttentionSite, AttentionCapture] = field(repr=False)
    audio: AudioClip = field(repr=False)

    @property
    def token_count(self) -> int:
        return len(self.token_strings)


def record_session(
    backend: "DiffusionBackend",
    prompt: str,
    seed: int,
    steps: int,
    min_tokens: int = 1,
) -> CaptureSession:
    """Run the backend once and keep every cross-attention component.

    Recording is observation-only: the returned audio is bitwise identical to
    a plain generate call with the same arguments.
    """
    tokens = backend.encode_prompt(prompt, min_tokens=min_tokens).tokens
    clip, captures = backend.generate(prompt, seed, steps, min_tokens=min_tokens)
    by_site = {cap.site: cap for cap in captures}
    expected = steps * len(backend.sites_per_step())
    if len(by_site) != expected:
        raise CompletenessError(
            f"expected {expected} captures, backend produced {len(by_site)}"
        )
    for cap in by_site.values():
        if cap.token_count != len(tokens):
            raise ShapeError(
                f"capture at {cap.site} has {cap.token_count} key rows "
                f"for {len(tokens)} prompt tokens"
            )
    return CaptureSession(
        prompt=prompt,
        seed=int(seed),
        steps=int(steps),
        token_strings=tokens,
        captures=by_site,
        audio=clip,
    )


def record_session_pair(
    backend: "DiffusionBackend",
    source_prompt: str,
    target_prompt: str,
    seed: int,
    steps: int,
) -> tuple[CaptureSession, CaptureSession]:
    """Record two sessions whose token counts are aligned for morphing.

    The shorter prompt's embedding is padded with unconditional rows, so every
    capture pair shares k/v shapes site by site.
    """
    m_src = len(backend.encode_prompt(source_prompt).tokens)
    m_tgt = len(backend.encode_prompt(target_prompt).tokens)
    m = max(m_src, m_tgt)
    src = record_session(backend, source_prompt, seed, steps, min_tokens=m)
    tgt = record_session(backend, target_prompt, seed, steps, min_tokens=m)
    return src, tgt


# -- persistence --------------------------------------------------------------


def write_tensor_f32(arr: np.ndarray, path: Path) -> None:
    path.write_bytes(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_tensor_f32(path: Path, shape: tuple[int, ...]) -> np.ndarray:
    if not path.exists():
        raise MissingFileError(f"missing tensor blob {path.name}")
    raw = path.read_bytes()
    expected = prod(shape) * 4
    if len(raw) != expected:
        raise TruncatedBlobError(
            f"{path.name}: expected {expected} bytes for shape {tuple(shape)}, "
            f"got {len(raw)}"
        )
    return np.frombuffer(raw, dtype="<f4").astype(np.float64).reshape(shape)


def save_session(session: CaptureSession, directory: str | Path) -> Path:
    """Write a session to a capture directory; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []
    for site in sorted(session.captures):
        cap = session.captures[site]
        entry: dict[str, object] = {
            "layer_id": site.layer_id,
            "head_index": site.head_index,
            "timestep": site.timestep,
        }
        for name, arr in (("q", cap.q), ("k", cap.k), ("v", cap.v)):
            blob = f"{site.blob_stem()}__{name}.f32"
            write_tensor_f32(arr, directory / blob)
            entry[name] = {"file": blob, "shape": list(arr.shape)}
        records.append(entry)
    write_tensor_f32(session.audio.samples, directory / AUDIO_BLOB_NAME)
    manifest = {
        "version": MANIFEST_VERSION,
        "prompt": session.prompt,
        "seed": session.seed,
        "steps": session.steps,
        "token_strings": list(session.token_strings),
        "audio": {
            "file": AUDIO_BLOB_NAME,
            "samples": len(session.audio.samples),
            "sample_rate": session.audio.sample_rate,
        },
        "captures": records,
    }
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_session(directory: str | Path) -> CaptureSession:
    """Reload a capture directory written by save_session."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise MissingFileError(f"no {MANIFEST_NAME} in {directory}")
    manifest: Mapping[str, object] = json.loads(manifest_path.read_text())
    version = manifest.get("version")
    if version != MANIFEST_VERSION:
        raise VersionError(
            f"manifest version {version!r} is not supported (reader is "
            f"{MANIFEST_VERSION!r})"
        )
    captures: dict[AttentionSite, AttentionCapture] = {}
    for entry in manifest["captures"]:  # type: ignore[index]
        site = AttentionSite(
            layer_id=str(entry["layer_id"]),
            head_index=int(entry["head_index"]),
            timestep=int(entry["timestep"]),
        )
        tensors = {}
        for name in ("q", "k", "v"):
            spec = entry[name]
            tensors[name] = read_tensor_f32(
                directory / str(spec["file"]), tuple(int(s) for s in spec["shape"])
            )
        captures[site] = AttentionCapture(site=site, **tensors)
    audio_spec = manifest["audio"]  # type: ignore[index]
    samples = read_tensor_f32(
        directory / str(audio_spec["file"]), (int(audio_spec["samples"]),)
    )
    clip = AudioClip(samples, int(audio_spec["sample_rate"]))
    return CaptureSession(
        prompt=str(manifest["prompt"]),
        seed=int(manifest["seed"]),  # type: ignore[arg-type]
        steps=int(manifest["steps"]),  # type: ignore[arg-type]
        token_strings=tuple(str(t) for t in manifest["token_strings"]),  # type: ignore[union-attr]
        captures=captures,
        audio=clip,
    )
