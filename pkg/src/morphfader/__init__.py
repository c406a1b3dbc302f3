"""morphfader: sound morphing by interpolating intercepted cross-attention.

Record a generation session per prompt, blend the captured attention
components of two sessions at a fader position alpha, inject the blend into an
unconditional re-run, and decode the morphed audio. Includes waveform-mix and
prompt-engineering baselines, a sweep smoothness metric, a CLI and an HTTP
service.
"""

from __future__ import annotations

from .audio import AudioClip, read_wav, to_wav_bytes, write_wav
from .backend import (
    AttentionHook,
    DiffusionBackend,
    PromptEmbedding,
    ToyBackend,
    load_backend,
)
from .baselines import PROMPT_TEMPLATE, engineered_prompt, prompt_morph, waveform_mix
from .capture import (
    AttentionCapture,
    AttentionSite,
    CaptureSession,
    load_session,
    record_session,
    record_session_pair,
    save_session,
)
from .errors import (
    CompletenessError,
    ConfigurationError,
    DegenerateInputError,
    InputError,
    MissingFileError,
    MorphFaderError,
    PersistenceError,
    RangeError,
    ShapeError,
    SiteMismatchError,
    TruncatedBlobError,
    UndefinedCorrelationError,
    VersionError,
)
from .evaluation import (
    MASK_TABLE,
    WEIGHT_GRID,
    AblationReport,
    AblationRow,
    PromptPair,
    SimilarityProvider,
    SmoothnessReport,
    SpectralSimilarity,
    ablation_report,
    alpha_grid,
    builtin_prompt_pairs,
    format_ablation_table,
    load_prompt_pairs,
    pearson,
    similarity,
    smoothness_of_sweep,
    sweep_morph,
    sweep_sessions,
    write_ablation_report,
    write_smoothness_report,
)
from .morph import (
    EMPTY_MASK,
    FULL_MASK,
    ComponentMask,
    MorphConfig,
    morph_components,
    run_morph,
    run_weighted,
)
from .tensor_ops import Tensor, cross_attention, lerp, scale_rows, softmax_rows

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "AblationRow",
    "AttentionCapture",
    "AttentionHook",
    "AttentionSite",
    "AudioClip",
    "CaptureSession",
    "CompletenessError",
    "ComponentMask",
    "ConfigurationError",
    "DegenerateInputError",
    "DiffusionBackend",
    "EMPTY_MASK",
    "FULL_MASK",
    "InputError",
    "MASK_TABLE",
    "MissingFileError",
    "MorphConfig",
    "MorphFaderError",
    "PersistenceError",
    "PromptEmbedding",
    "PromptPair",
    "PROMPT_TEMPLATE",
    "RangeError",
    "ShapeError",
    "SimilarityProvider",
    "SiteMismatchError",
    "SmoothnessReport",
    "SpectralSimilarity",
    "Tensor",
    "ToyBackend",
    "TruncatedBlobError",
    "UndefinedCorrelationError",
    "VersionError",
    "WEIGHT_GRID",
    "ablation_report",
    "alpha_grid",
    "builtin_prompt_pairs",
    "cross_attention",
    "engineered_prompt",
    "format_ablation_table",
    "lerp",
    "load_backend",
    "load_prompt_pairs",
    "load_session",
    "morph_components",
    "pearson",
    "prompt_morph",
    "read_wav",
    "record_session",
    "record_session_pair",
    "run_morph",
    "run_weighted",
    "save_session",
    "scale_rows",
    "similarity",
    "smoothness_of_sweep",
    "softmax_rows",
    "sweep_morph",
    "sweep_sessions",
    "to_wav_bytes",
    "waveform_mix",
    "write_ablation_report",
    "write_smoothness_report",
    "write_wav",
]
