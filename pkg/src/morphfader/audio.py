"""Mono audio clips and 16-bit PCM WAV serialization."""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError

PCM_FULL_SCALE = 32767.0


@dataclass(frozen=True, eq=False)
class AudioClip:
    """A mono waveform: float64 samples (nominally in [-1, 1]) plus a rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.samples, dtype=np.float64)
        if arr.ndim != 1:
            raise InputError(f"audio samples must be 1-D, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InputError("audio samples contain non-finite values")
        if int(self.sample_rate) <= 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "samples", arr)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def to_wav_bytes(clip: AudioClip) -> bytes:
    """Encode as RIFF/WAVE, PCM 16-bit signed little-endian, single channel.

    Samples are clamped to [-1, 1] and scaled by 32767 (round-half-even).
    """
    pcm = np.rint(np.clip(clip.samples, -1.0, 1.0) * PCM_FULL_SCALE).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(clip.sample_rate)
        wav.writeframes(pcm.tobytes())
    return buf.getvalue()


def write_wav(clip: AudioClip, path: str | Path) -> Path:
    path = Path(path)
    path.write_bytes(to_wav_bytes(clip))
    return path


def read_wav(path: str | Path) -> AudioClip:
    """Read a mono PCM16 WAV back into float64 samples in [-1, 1]."""
    with wave.open(str(path), "rb") as wav:
        if wav.getnchannels() != 1 or wav.getsampwidth() != 2:
            raise InputError(
                f"{path}: expected mono 16-bit PCM, got "
                f"{wav.getnchannels()} channel(s) at width {wav.getsampwidth()}"
            )
        rate = wav.getframerate()
        raw = wav.readframes(wav.getnframes())
    pcm = np.frombuffer(raw, dtype="<i2")
    return AudioClip(pcm.astype(np.float64) / PCM_FULL_SCALE, rate)
