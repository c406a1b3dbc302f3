"""Similarity surrogate, Pearson smoothness, sweeps, and ablation reports.

Pinned regression values in this file were computed once from the shipped
implementation (after cross-checking the clips against independent oracles)
and are frozen here to catch behavioral drift.
"""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from morphfader import (
    AudioClip,
    ConfigurationError,
    DegenerateInputError,
    InputError,
    MASK_TABLE,
    PromptPair,
    SmoothnessReport,
    SpectralSimilarity,
    UndefinedCorrelationError,
    WEIGHT_GRID,
    ablation_report,
    alpha_grid,
    builtin_prompt_pairs,
    format_ablation_table,
    load_prompt_pairs,
    pearson,
    run_weighted,
    similarity,
    smoothness_of_sweep,
    sweep_morph,
    sweep_sessions,
    waveform_mix,
    write_ablation_report,
    write_smoothness_report,
)

# Similarity of a seeded uniform-noise clip to a 440 Hz tone, computed once.
NOISE_VS_TONE_SIMILARITY = 0.16385728594797386

# Smoothness of the 11-point waveform-mix sweep between the two canonical toy
# clips ("a dog barking" / "a cat meowing", seed 0, 20 steps), computed once
# with the mix clips verified bitwise against a scalar-loop oracle.
MIX_SWEEP_RHO = 0.9318270017084999


def pearson_oracle(x, y):
    """Covariance over sigma_x * sigma_y, in pure Python."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def tone_clip(freq=440.0, rate=16000, n=16000, amp=0.5):
    t = np.arange(n) / rate
    return AudioClip(amp * np.sin(2.0 * np.pi * freq * t), rate)


def noise_clip(seed=7, rate=16000, n=16000):
    rng = np.random.Generator(np.random.PCG64(seed))
    return AudioClip(rng.uniform(-0.5, 0.5, n), rate)


class TestPearson:
    def test_perfect_positive_linearity(self):
        assert abs(pearson([0.0, 0.5, 1.0], [0.0, 0.5, 1.0]) - 1.0) < 1e-12

    def test_perfect_negative_linearity(self):
        assert abs(pearson([0.0, 0.5, 1.0], [1.0, 0.5, 0.0]) + 1.0) < 1e-12

    def test_hand_computed_example(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = [2.0, 1.0, 4.0, 3.0]
        # sxy = 3, sxx = syy = 5, so rho = 3/5.
        assert abs(pearson_oracle(x, y) - 0.6) < 1e-15
        assert abs(pearson(x, y) - 0.6) < 1e-12

    def test_matches_oracle_on_random_sequences(self):
        rng = np.random.Generator(np.random.PCG64(17))
        for _ in range(50):
            n = int(rng.integers(3, 12))
            x = list(rng.normal(size=n))
            y = list(rng.normal(size=n))
            assert abs(pearson(x, y) - pearson_oracle(x, y)) < 1e-12

    def test_scale_and_shift_invariance(self):
        rng = np.random.Generator(np.random.PCG64(19))
        x = list(rng.normal(size=9))
        y = list(rng.normal(size=9))
        base = pearson(x, y)
        for a, b in ((2.0, 3.0), (-1.5, 0.0), (0.25, -7.0)):
            scaled = [a * v + b for v in y]
            want = base if a > 0 else -base
            assert abs(pearson(x, scaled) - want) < 1e-12

    def test_symmetry(self):
        x = [1.0, 4.0, 2.0, 8.0]
        y = [3.0, 1.0, 5.0, 2.0]
        assert pearson(x, y) == pearson(y, x)

    def test_result_is_clamped_to_unit_interval(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [2.0, 4.0, 6.0, 8.0, 10.0]
        assert pearson(x, y) <= 1.0

    def test_zero_variance_raises(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_too_short_or_mismatched_raises(self):
        with pytest.raises(InputError):
            pearson([1.0, 2.0], [3.0, 4.0])
        with pytest.raises(InputError):
            pearson([1.0, 2.0, 3.0], [1.0, 2.0])


class TestSimilarity:
    def test_self_similarity_is_exactly_one(self):
        clip = noise_clip()
        assert similarity(clip, clip) == 1.0

    def test_sign_flip_is_exactly_one(self):
        clip = tone_clip()
        flipped = AudioClip(-clip.samples, clip.sample_rate)
        assert similarity(clip, flipped) == 1.0

    def test_symmetric(self):
        a, b = noise_clip(1), tone_clip()
        assert abs(similarity(a, b) - similarity(b, a)) < 1e-12

    def test_noise_vs_tone_pinned_regression(self):
        got = similarity(noise_clip(), tone_clip())
        assert got < 1.0
        assert abs(got - NOISE_VS_TONE_SIMILARITY) < 1e-9

    def test_range_is_unit_interval(self):
        clips = [noise_clip(s) for s in range(4)] + [tone_clip(f) for f in (100, 1000)]
        for a in clips:
            for b in clips:
                assert -1.0 <= similarity(a, b) <= 1.0

    def test_silent_clip_raises(self):
        silent = AudioClip(np.zeros(16000), 16000)
        with pytest.raises(DegenerateInputError):
            similarity(silent, tone_clip())

    def test_sample_rate_mismatch_raises(self):
        with pytest.raises(ConfigurationError):
            similarity(tone_clip(rate=16000), tone_clip(rate=8000))

    def test_provider_protocol_is_satisfied(self):
        provider = SpectralSimilarity()
        assert provider.similarity(tone_clip(), tone_clip()) == 1.0

    def test_short_clip_is_padded_not_rejected(self):
        # Clips shorter than one analysis frame still produce features.
        short = AudioClip(np.full(100, 0.25), 16000)
        assert similarity(short, short) == 1.0


class TestAlphaGrid:
    def test_step_0_1_gives_11_points(self):
        grid = alpha_grid(0.1)
        assert len(grid) == 11
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert all(b > a for a, b in zip(grid, grid[1:]))

    def test_step_0_5_gives_3_points(self):
        assert alpha_grid(0.5) == (0.0, 0.5, 1.0)

    def test_step_1_gives_endpoints_only(self):
        assert alpha_grid(1.0) == (0.0, 1.0)

    def test_non_divisor_raises(self):
        for step in (0.3, 0.15, 0.7):
            with pytest.raises(InputError):
                alpha_grid(step)

    def test_out_of_range_step_raises(self):
        for step in (0.0, -0.1, 1.5):
            with pytest.raises(InputError):
                alpha_grid(step)


class TestSweeps:
    def test_ours_sweep_yields_11_ascending_clips(self, backend):
        pair = PromptPair(source="a dog barking", target="a cat meowing")
        sweep = sweep_morph(pair, backend, seed=0, steps=2, alpha_step=0.1)
        assert len(sweep) == 11
        assert [a for a, _ in sweep] == [i / 10 for i in range(10 + 1)]

    def test_mix_and_ours_share_source_at_alpha_0(self, backend, session_pair):
        src, tgt = session_pair
        ours = sweep_sessions(src, tgt, backend, alpha_step=0.5)
        mix = [
            (a, waveform_mix(src.audio, tgt.audio, a)) for a in alpha_grid(0.5)
        ]
        assert np.array_equal(ours[0][1].samples, src.audio.samples)
        assert np.array_equal(mix[0][1].samples, src.audio.samples)
        assert np.array_equal(ours[-1][1].samples, tgt.audio.samples)
        assert np.array_equal(mix[-1][1].samples, tgt.audio.samples)

    def test_mix_method_matches_direct_mixing(self, backend):
        pair = PromptPair(source="rain", target="thunder")
        sweep = sweep_morph(pair, backend, seed=1, steps=2, alpha_step=0.5, method="mix")
        src, _ = backend.generate("rain", seed=1, steps=2)
        tgt, _ = backend.generate("thunder", seed=1, steps=2)
        assert np.array_equal(sweep[1][1].samples, waveform_mix(src, tgt, 0.5).samples)

    def test_prompt_method_regenerates_per_alpha(self, backend):
        pair = PromptPair(source="rain", target="thunder")
        sweep = sweep_morph(pair, backend, seed=1, steps=2, alpha_step=0.5, method="prompt")
        assert len(sweep) == 3
        assert not np.array_equal(sweep[0][1].samples, sweep[-1][1].samples)

    def test_unknown_method_raises(self, backend):
        with pytest.raises(InputError):
            sweep_morph(PromptPair(source="a", target="b"), backend, method="magic")

    def test_weight_grid_yields_6_clips_per_prompt(self, backend, session_pair):
        src, _ = session_pair
        assert WEIGHT_GRID == (-2.0, -1.0, 0.0, 1.0, 2.0, 3.0)
        clips = []
        for w in WEIGHT_GRID:
            wts = np.ones(src.token_count)
            wts[1] = w
            clips.append(run_weighted(src, wts, backend))
        assert len(clips) == 6
        # Distinct weights are audible: all 6 clips differ pairwise.
        for i in range(6):
            for j in range(i + 1, 6):
                assert not np.array_equal(clips[i].samples, clips[j].samples)


class TestSmoothness:
    def test_mix_sweep_rho_matches_pinned_value(self, session_pair):
        src, tgt = session_pair
        sweep = [
            (a, waveform_mix(src.audio, tgt.audio, a)) for a in alpha_grid(0.1)
        ]
        report = smoothness_of_sweep(sweep)
        assert abs(report.rho - MIX_SWEEP_RHO) < 1e-6

    def test_last_score_is_self_similarity_one(self, session_pair):
        src, tgt = session_pair
        sweep = [
            (a, waveform_mix(src.audio, tgt.audio, a)) for a in alpha_grid(0.5)
        ]
        report = smoothness_of_sweep(sweep)
        assert report.scores[-1] == 1.0

    def test_orders_entries_by_alpha(self, session_pair):
        src, tgt = session_pair
        grid = alpha_grid(0.5)
        sweep = [(a, waveform_mix(src.audio, tgt.audio, a)) for a in grid]
        report_sorted = smoothness_of_sweep(sweep)
        report_shuffled = smoothness_of_sweep(list(reversed(sweep)))
        assert report_sorted == report_shuffled

    def test_constant_sweep_surfaces_zero_variance_error(self, session_pair):
        src, _ = session_pair
        sweep = [(a, src.audio) for a in alpha_grid(0.5)]
        with pytest.raises(UndefinedCorrelationError):
            smoothness_of_sweep(sweep)

    def test_too_few_clips_raises(self, session_pair):
        src, tgt = session_pair
        sweep = [(0.0, src.audio), (1.0, tgt.audio)]
        with pytest.raises(InputError):
            smoothness_of_sweep(sweep)

    def test_report_validates_its_own_shape(self):
        with pytest.raises(InputError):
            SmoothnessReport(alphas=(0.0, 0.5, 1.0), scores=(0.1, 0.2), rho=0.5)
        with pytest.raises(InputError):
            SmoothnessReport(alphas=(0.0, 1.0, 0.5), scores=(0.1, 0.2, 0.3), rho=0.5)


class TestAblation:
    def test_report_has_7_rows_in_display_order(self, backend):
        pairs = [
            PromptPair(source="a dog barking", target="a dog howling"),
            PromptPair(source="light rain", target="heavy rain"),
        ]
        report = ablation_report(pairs, backend, seed=0, steps=4)
        labels = [row.label for row in report.rows]
        assert labels == ["Q,K,V", "K,V", "Q,K", "Q,V", "Q only", "K only", "V only"]
        assert report.pair_count == 2
        for row in report.rows:
            assert len(row.rhos) == 2
            assert all(math.isfinite(r) for r in row.rhos)
            assert -1.0 <= row.mean_rho <= 1.0

    def test_mask_table_matches_labels(self):
        assert [label for label, _ in MASK_TABLE] == [
            "Q,K,V", "K,V", "Q,K", "Q,V", "Q only", "K only", "V only",
        ]
        for label, mask in MASK_TABLE:
            assert mask.label() == label

    def test_q_only_and_qk_differ_only_in_k_injection(self):
        by_label = dict(MASK_TABLE)
        q_only = by_label["Q only"]
        qk = by_label["Q,K"]
        assert q_only.use_q and qk.use_q
        assert not q_only.use_v and not qk.use_v
        assert qk.use_k and not q_only.use_k

    def test_empty_pairs_raise(self, backend):
        with pytest.raises(InputError):
            ablation_report([], backend)

    def test_single_token_pairs_surface_degenerate_correlation(self, backend):
        # With one token, attention weights are identically 1 whatever Q and K
        # hold, so Q/K-only sweeps cannot vary and the error must propagate.
        with pytest.raises(UndefinedCorrelationError):
            ablation_report([PromptPair(source="rain", target="wind")], backend, steps=3)

    def test_formatted_table_is_aligned(self, backend):
        pairs = [PromptPair(source="light rain", target="heavy rain")]
        report = ablation_report(pairs, backend, seed=0, steps=3)
        text = format_ablation_table(report)
        lines = text.splitlines()
        assert len(lines) == 8
        assert lines[0].startswith("Components")
        assert lines[1].startswith("Q,K,V")
        header_col = lines[0].index("Smoothness")
        for line in lines[1:]:
            assert len(line) > header_col


class TestCorpus:
    def test_builtin_corpus_has_20_valid_pairs(self):
        pairs = builtin_prompt_pairs()
        assert len(pairs) == 20
        assert all(p.word_type in ("adjective", "verb") for p in pairs)

    def test_load_rejects_malformed_lines(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"source": "a", "target": "b"}\nnot json\n')
        with pytest.raises(InputError) as err:
            load_prompt_pairs(path)
        assert ":2:" in str(err.value)

    def test_load_rejects_missing_fields(self, tmp_path):
        path = tmp_path / "fields.jsonl"
        path.write_text('{"source": "a"}\n')
        with pytest.raises(InputError):
            load_prompt_pairs(path)

    def test_load_rejects_empty_corpus(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("\n\n")
        with pytest.raises(InputError):
            load_prompt_pairs(path)

    def test_pair_validation(self):
        with pytest.raises(InputError):
            PromptPair(source=" ", target="b")
        with pytest.raises(InputError):
            PromptPair(source="a", target="b", word_type="noun")


class TestReportFiles:
    def test_smoothness_report_json_fields(self, tmp_path, session_pair):
        src, tgt = session_pair
        sweep = [(a, waveform_mix(src.audio, tgt.audio, a)) for a in alpha_grid(0.5)]
        report = smoothness_of_sweep(sweep)
        pair = PromptPair(source=src.prompt, target=tgt.prompt)
        path = write_smoothness_report(tmp_path / "r.json", report, method="mix", pair=pair)
        doc = json.loads(path.read_text())
        assert doc["method"] == "mix"
        assert doc["pair"]["source"] == src.prompt
        assert doc["alphas"] == list(report.alphas)
        assert doc["scores"] == list(report.scores)
        assert doc["rho"] == report.rho

    def test_ablation_report_json_fields(self, tmp_path, backend):
        report = ablation_report(
            [PromptPair(source="light rain", target="heavy rain")], backend, steps=3
        )
        path = write_ablation_report(tmp_path / "a.json", report)
        doc = json.loads(path.read_text())
        assert doc["pairs"] == 1
        assert [row["components"] for row in doc["rows"]] == [
            "Q,K,V", "K,V", "Q,K", "Q,V", "Q only", "K only", "V only",
        ]
        for row in doc["rows"]:
            assert row["smoothness"] == pytest.approx(np.mean(row["per_pair"]))
