"""Command-line interface.

Exit codes: 0 on success, 1 on a domain error (one ``code: message`` line on
stderr), 2 on usage errors such as unknown flags.
"""

from __future__ import annotations

import functools
import json
import re
import sys
from pathlib import Path

import click
import numpy as np

from .audio import read_wav, write_wav
from .backend import load_backend
from .capture import load_session, record_session, record_session_pair, save_session
from .errors import InputError, MorphFaderError
from .evaluation import (
    PromptPair,
    ablation_report,
    format_ablation_table,
    load_prompt_pairs,
    smoothness_of_sweep,
    sweep_morph,
    write_ablation_report,
    write_smoothness_report,
)
from .morph import ComponentMask, MorphConfig, run_morph, run_weighted

DEFAULT_SEED = 0
DEFAULT_STEPS = 20

_SWEEP_WAV = re.compile(r"^morph_(\d{3})\.wav$")

_common = dict(context_settings={"help_option_names": ["-h", "--help"], "show_default": True})


def _fail_on_domain_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except MorphFaderError as exc:
            click.echo(f"{exc.code}: {exc}", err=True)
            sys.exit(1)

    return wrapper


def backend_option(fn):
    return click.option(
        "--backend",
        "backend_selector",
        default="toy",
        envvar="MORPHFADER_BACKEND",
        show_envvar=True,
        help="Generation backend: 'toy' or 'adapter:<module>:<factory>'.",
    )(fn)


def seed_steps_options(fn):
    fn = click.option("--steps", default=DEFAULT_STEPS, type=int, help="Denoising steps.")(fn)
    fn = click.option("--seed", default=DEFAULT_SEED, type=int, help="Latent seed.")(fn)
    return fn


def parse_token_weights(spec: str, tokens: tuple[str, ...]) -> np.ndarray:
    """Turn "token=w,token=w" into a per-token weight vector (default 1.0)."""
    weights = np.ones(len(tokens))
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        token, sep, value = part.partition("=")
        token = token.strip()
        if not sep or not token:
            raise InputError(f"weight entry {part!r} must look like token=value")
        try:
            w = float(value)
        except ValueError:
            raise InputError(f"weight for {token!r} is not a number: {value!r}") from None
        indices = [i for i, t in enumerate(tokens) if t == token]
        if not indices:
            raise InputError(
                f"token {token!r} is not in this session; valid tokens: "
                f"{', '.join(tokens)}"
            )
        weights[indices] = w
    return weights


def _parse_weight_map(spec: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        token, sep, value = part.partition("=")
        token = token.strip()
        if not sep or not token:
            raise InputError(f"weight entry {part!r} must look like token=value")
        try:
            out[token] = float(value)
        except ValueError:
            raise InputError(f"weight for {token!r} is not a number: {value!r}") from None
    return out


@click.group(**_common)
@click.version_option(package_name="morphfader")
def main() -> None:
    """Morph sounds by blending intercepted attention between two prompts."""


@main.command(**_common)
@click.option("--prompt", required=True, help="Text prompt to generate from.")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output WAV path.")
@click.option(
    "--capture-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Also save the full attention capture session here.",
)
@seed_steps_options
@backend_option
@_fail_on_domain_errors
def generate(prompt: str, out: str, capture_dir: str | None, seed: int, steps: int, backend_selector: str) -> None:
    """Generate audio for one prompt, optionally recording captures."""
    backend = load_backend(backend_selector)
    if capture_dir is not None:
        session = record_session(backend, prompt, seed, steps)
        save_session(session, capture_dir)
        clip = session.audio
    else:
        clip, _ = backend.generate(prompt, seed, steps)
    write_wav(clip, out)
    click.echo(f"wrote {out}")


@main.command(**_common)
@click.option("--source-capture", required=True, type=click.Path(file_okay=False), help="Source capture directory.")
@click.option("--target-capture", required=True, type=click.Path(file_okay=False), help="Target capture directory.")
@click.option("--alpha", required=True, type=float, help="Fader position in [0, 1]; 1 is fully target.")
@click.option(
    "--components",
    default="qkv",
    type=click.Choice(ComponentMask.COMPONENT_SETS),
    help="Which attention components to morph.",
)
@click.option(
    "--weights",
    default=None,
    help='Per-token V weights, e.g. "dog=2,barking=-1"; matched against both sessions.',
)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output WAV path.")
@backend_option
@_fail_on_domain_errors
def morph(
    source_capture: str,
    target_capture: str,
    alpha: float,
    components: str,
    weights: str | None,
    out: str,
    backend_selector: str,
) -> None:
    """Morph two recorded sessions at one fader position."""
    backend = load_backend(backend_selector)
    source = load_session(source_capture)
    target = load_session(target_capture)
    source_weights = target_weights = None
    if weights:
        weight_map = _parse_weight_map(weights)
        matched = {
            tok
            for tok in weight_map
            if tok in source.token_strings or tok in target.token_strings
        }
        unmatched = set(weight_map) - matched
        if unmatched:
            valid = sorted(set(source.token_strings) | set(target.token_strings))
            raise InputError(
                f"token(s) {', '.join(sorted(unmatched))} not found in either "
                f"session; valid tokens: {', '.join(valid)}"
            )
        source_weights = np.array(
            [weight_map.get(t, 1.0) for t in source.token_strings]
        )
        target_weights = np.array(
            [weight_map.get(t, 1.0) for t in target.token_strings]
        )
    config = MorphConfig(
        alpha=alpha,
        mask=ComponentMask.from_string(components),
        source_weights=source_weights,
        target_weights=target_weights,
    )
    clip = run_morph(source, target, config, backend)
    write_wav(clip, out)
    click.echo(f"wrote {out}")


@main.command(**_common)
@click.option("--source-prompt", required=True, help="Source prompt (alpha=0 end).")
@click.option("--target-prompt", required=True, help="Target prompt (alpha=1 end).")
@click.option("--alpha-step", default=0.1, type=float, help="Grid step; must divide 1 evenly.")
@click.option(
    "--method",
    default="ours",
    type=click.Choice(["ours", "mix", "prompt"]),
    help="Morphing method for the sweep.",
)
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for morph_XXX.wav files.")
@seed_steps_options
@backend_option
@_fail_on_domain_errors
def sweep(
    source_prompt: str,
    target_prompt: str,
    alpha_step: float,
    method: str,
    out_dir: str,
    seed: int,
    steps: int,
    backend_selector: str,
) -> None:
    """Render a full alpha sweep; filenames sort in fader order."""
    backend = load_backend(backend_selector)
    pair = PromptPair(source=source_prompt, target=target_prompt)
    clips = sweep_morph(
        pair, backend, seed=seed, steps=steps, alpha_step=alpha_step, method=method
    )
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for alpha, clip in clips:
        write_wav(clip, directory / f"morph_{round(alpha * 100):03d}.wav")
    meta = {
        "method": method,
        "source": source_prompt,
        "target": target_prompt,
        "seed": seed,
        "steps": steps,
        "alphas": [a for a, _ in clips],
    }
    (directory / "sweep.json").write_text(json.dumps(meta, indent=2) + "\n")
    click.echo(f"wrote {len(clips)} clips to {out_dir}")


@main.command(**_common)
@click.option("--prompt", required=True, help="Prompt to render with weighted tokens.")
@click.option(
    "--token-weights",
    required=True,
    help='Per-token V weights, e.g. "dog=2" (unlisted tokens stay at 1).',
)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output WAV path.")
@seed_steps_options
@backend_option
@_fail_on_domain_errors
def weight(
    prompt: str, token_weights: str, out: str, seed: int, steps: int, backend_selector: str
) -> None:
    """Emphasize or attenuate single words of one prompt."""
    backend = load_backend(backend_selector)
    session = record_session(backend, prompt, seed, steps)
    weights = parse_token_weights(token_weights, session.token_strings)
    clip = run_weighted(session, weights, backend)
    write_wav(clip, out)
    click.echo(f"wrote {out}")


@main.command(**_common)
@click.option(
    "--pairs",
    required=True,
    type=click.Path(dir_okay=False, exists=False),
    help="JSON-lines corpus of {source, target, word_type} prompt pairs.",
)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output JSON report path.")
@click.option("--alpha-step", default=0.1, type=float, help="Sweep grid step.")
@seed_steps_options
@backend_option
@_fail_on_domain_errors
def ablate(
    pairs: str, out: str, alpha_step: float, seed: int, steps: int, backend_selector: str
) -> None:
    """Sweep every component mask over a pair corpus and tabulate smoothness."""
    backend = load_backend(backend_selector)
    corpus = load_prompt_pairs(pairs)
    report = ablation_report(corpus, backend, seed=seed, steps=steps, alpha_step=alpha_step)
    write_ablation_report(out, report)
    table = format_ablation_table(report)
    Path(out).with_suffix(".txt").write_text(table + "\n")
    click.echo(table)


@main.command("eval-smoothness", **_common)
@click.option(
    "--sweep-dir",
    required=True,
    type=click.Path(file_okay=False),
    help="Directory of morph_XXX.wav files from the sweep command.",
)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output JSON report path.")
@_fail_on_domain_errors
def eval_smoothness(sweep_dir: str, out: str) -> None:
    """Score an existing sweep directory for smoothness."""
    directory = Path(sweep_dir)
    entries = []
    for path in sorted(directory.glob("morph_*.wav")):
        match = _SWEEP_WAV.match(path.name)
        if match:
            entries.append((int(match.group(1)) / 100.0, read_wav(path)))
    if len(entries) < 3:
        raise InputError(
            f"{sweep_dir} holds {len(entries)} morph_XXX.wav clips; need at least 3"
        )
    report = smoothness_of_sweep(entries)
    method = None
    pair = None
    meta_path = directory / "sweep.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        method = meta.get("method")
        if "source" in meta and "target" in meta:
            pair = PromptPair(source=meta["source"], target=meta["target"])
    write_smoothness_report(out, report, method=method, pair=pair)
    click.echo(f"rho={report.rho:.4f} over {len(entries)} clips -> {out}")


@main.command(**_common)
@click.option("--host", default="127.0.0.1", envvar="MORPHFADER_HOST", show_envvar=True, help="Bind address.")
@click.option("--port", default=8765, type=int, envvar="MORPHFADER_PORT", show_envvar=True, help="Bind port.")
@click.option("--workers", default=1, type=int, help="Concurrent generation jobs.")
@click.option(
    "--static-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Optional directory of UI assets to serve at /.",
)
@backend_option
@_fail_on_domain_errors
def serve(host: str, port: int, workers: int, static_dir: str | None, backend_selector: str) -> None:
    """Run the HTTP morphing service."""
    import uvicorn

    from .service import create_app

    app = create_app(
        backend=load_backend(backend_selector), workers=workers, static_dir=static_dir
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
