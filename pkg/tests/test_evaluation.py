"""Metrics: Fréchet suite, retrieval, matching scores, baselines, reports."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from facemotion.errors import (JudgeParseError, PipelineStageError,
                               RejectedInputError)
from facemotion.evaluation import (
    ClientJudge,
    DistributionStats,
    EmbeddingGaussian,
    EndToEndConfig,
    HashingTextEmbedder,
    HitAtKConfig,
    MetricReport,
    OracleJudge,
    RandomJudge,
    UserStudyTable,
    average_baseline,
    averaged_runs,
    concise_phrase,
    end_to_end_hit,
    filter_expression_content,
    frechet_distance,
    generated_motion_phrase,
    hit_at_k,
    match_score,
    msp_mse,
    naturalness_suite,
    parse_permutation,
    random_gen_baseline,
    random_gt_baseline,
    roundtrip_description,
    sqrtm_psd,
    temporal_variance,
    text_fid_pca,
    winning_rate,
)
from facemotion.evaluation.matching import EXPRESSION_ASPECT, POSE_ASPECT
from facemotion.evaluation.winning_rate import LITERAL_MODE
from facemotion.llm import MockClient
from facemotion.protocol import MotionTokenSequence
from facemotion.synthetic import make_motif_clip, motif_description
from facemotion.tokenizer import encode_clip

# --- Fréchet distance ----------------------------------------------------------


def _random_stats(rng, d=4):
    a = rng.normal(size=(d, d))
    return DistributionStats(mean=rng.normal(size=d), covariance=a @ a.T)


def test_frechet_identity_is_zero():
    stats = _random_stats(np.random.default_rng(0))
    assert frechet_distance(stats, stats) == 0.0


def test_frechet_closed_forms():
    # unit-variance Gaussians one apart: distance is exactly the mean term
    a = DistributionStats(mean=[0.0], covariance=[[1.0]])
    b = DistributionStats(mean=[1.0], covariance=[[1.0]])
    assert frechet_distance(a, b) == pytest.approx(1.0, abs=1e-12)
    # equal means, variances 4 and 1: 4 + 1 - 2*sqrt(4*1) = 1
    c = DistributionStats(mean=[0.0], covariance=[[4.0]])
    d = DistributionStats(mean=[0.0], covariance=[[1.0]])
    assert frechet_distance(c, d) == pytest.approx(1.0, abs=1e-12)


def test_frechet_symmetry_and_nonnegativity():
    rng = np.random.default_rng(1)
    for _ in range(5):
        a, b = _random_stats(rng), _random_stats(rng)
        ab, ba = frechet_distance(a, b), frechet_distance(b, a)
        assert ab >= 0.0 and ba >= 0.0
        assert ab == pytest.approx(ba, abs=1e-8)


def test_frechet_dimension_mismatch_rejected():
    a = DistributionStats(mean=[0.0], covariance=[[1.0]])
    b = DistributionStats(mean=[0.0, 0.0], covariance=np.eye(2))
    with pytest.raises(RejectedInputError, match="dimension"):
        frechet_distance(a, b)


def test_distribution_stats_validation():
    with pytest.raises(RejectedInputError, match="symmetric"):
        DistributionStats(mean=[0.0, 0.0], covariance=[[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(RejectedInputError, match="eigenvalue"):
        DistributionStats(mean=[0.0, 0.0],
                          covariance=[[1.0, 2.0], [2.0, 1.0]])  # eig -1
    with pytest.raises(RejectedInputError):
        DistributionStats(mean=[[0.0]], covariance=[[1.0]])


def test_from_samples_matches_numpy_moments():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(50, 3))
    stats = DistributionStats.from_samples(x)
    np.testing.assert_allclose(stats.mean, x.mean(axis=0))
    np.testing.assert_allclose(stats.covariance, np.cov(x, rowvar=False, ddof=1))
    ridged = DistributionStats.from_samples(x, ridge=0.5)
    np.testing.assert_allclose(ridged.covariance, stats.covariance + 0.5 * np.eye(3))
    with pytest.raises(RejectedInputError):
        DistributionStats.from_samples(x[:1])


def test_sqrtm_psd_squares_back():
    rng = np.random.default_rng(3)
    b = rng.normal(size=(5, 5))
    a = b @ b.T
    root = sqrtm_psd(a)
    np.testing.assert_allclose(root @ root, a, atol=1e-9)
    np.testing.assert_allclose(root, root.T, atol=1e-12)
    with pytest.raises(RejectedInputError):
        sqrtm_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))


# --- naturalness suite -----------------------------------------------------------


def _walks(rng, n=6, frames=30, d=4, scale=1.0):
    return [scale * np.cumsum(rng.normal(size=(frames, d)), axis=0) for _ in range(n)]


def test_naturalness_identity_is_zero_everywhere():
    seqs = _walks(np.random.default_rng(4))
    report = naturalness_suite(seqs, seqs)
    assert report.fid <= 1e-9
    assert report.fid_delta <= 1e-9
    assert report.snd == report.fid + report.fid_delta
    assert report.var == pytest.approx(temporal_variance(seqs))


def test_naturalness_detects_distribution_shift():
    rng = np.random.default_rng(5)
    ref = _walks(rng)
    shifted = [s + 10.0 for s in _walks(rng)]
    report = naturalness_suite(shifted, ref)
    assert report.fid > 1.0
    # the shift is constant, so frame differences barely move
    assert report.fid_delta < report.fid


def test_snd_is_the_exact_float_sum():
    rng = np.random.default_rng(6)
    report = naturalness_suite(_walks(rng), _walks(rng))
    assert report.snd == report.fid + report.fid_delta
    # regression guard for the reported-table arithmetic
    assert 7.08 + 0.10 == pytest.approx(7.18)


def test_naturalness_input_validation():
    good = _walks(np.random.default_rng(7))
    with pytest.raises(RejectedInputError):
        naturalness_suite(good[:1], good)
    with pytest.raises(RejectedInputError):
        naturalness_suite([np.zeros((1, 4)), np.zeros((1, 4))], good)


def test_temporal_variance_of_constant_is_zero():
    assert temporal_variance([np.ones((10, 3)), np.full((5, 3), 2.0)]) == 0.0


# --- hit@k -----------------------------------------------------------------------


def _pool(n=30):
    return [f"description number {i}" for i in range(n)]


def test_oracle_judge_always_hits_at_one():
    pool = _pool()
    samples = [(f"query {i}", pool[i]) for i in range(10)]
    judge = OracleJudge(truth=dict(samples))
    report = hit_at_k(samples, pool, judge, HitAtKConfig(m=9, k_values=(1, 2, 3)))
    assert report.rates == {1: 1.0, 2: 1.0, 3: 1.0}
    assert report.true_ranks == [1] * 10
    assert report.n_invalid == 0


def test_random_judge_calibration_coarse():
    # P(rank <= k) for a random permutation of m+1 items is k / (m+1)
    pool = _pool(40)
    samples = [("q", pool[i]) for i in range(30)] * 100  # 3000 trials
    report = hit_at_k(samples, pool, RandomJudge(seed=1),
                      HitAtKConfig(m=9, k_values=(1, 3), seed=1))
    assert report.rates[1] == pytest.approx(0.10, abs=0.025)
    assert report.rates[3] == pytest.approx(0.30, abs=0.025)


def test_unparsable_judge_output_is_counted_not_fatal():
    class BrokenJudge:
        def __init__(self):
            self.n = 0

        def rank(self, query, candidates):
            self.n += 1
            if self.n % 2 == 0:
                raise JudgeParseError("gibberish")
            return list(range(len(candidates)))

    pool = _pool()
    samples = [(f"q{i}", pool[i]) for i in range(10)]
    report = hit_at_k(samples, pool, BrokenJudge(), HitAtKConfig(m=4, k_values=(1,)))
    assert report.n_invalid == 5
    assert report.n_valid == 5


def test_hit_config_validation():
    with pytest.raises(RejectedInputError):
        HitAtKConfig(m=0)
    with pytest.raises(RejectedInputError):
        HitAtKConfig(m=5, k_values=(7,))
    pool = _pool(5)
    with pytest.raises(RejectedInputError, match="eligible"):
        hit_at_k([("q", pool[0])], pool, RandomJudge(),
                 HitAtKConfig(m=9, k_values=(1,)))


@settings(max_examples=50, deadline=None)
@given(st.permutations(list(range(1, 8))))
def test_parse_permutation_round_trip(perm):
    text = ", ".join(str(p) for p in perm)
    assert parse_permutation(text, len(perm)) == [p - 1 for p in perm]


def test_parse_permutation_rejects_malformed():
    with pytest.raises(JudgeParseError):
        parse_permutation("1, 2, 2", 3)
    with pytest.raises(JudgeParseError):
        parse_permutation("1, 2", 3)
    with pytest.raises(JudgeParseError):
        parse_permutation("1, 2, 4", 3)
    with pytest.raises(JudgeParseError):
        parse_permutation("no numbers here", 3)


def test_client_judge_uses_one_strict_reask():
    class MumblingClient(MockClient):
        def _complete_once(self, prompt):
            if "Rank the candidate" in prompt and "malformed" not in prompt:
                return "hmm, hard to say"
            return super()._complete_once(prompt)

    client = MumblingClient()
    order = ClientJudge(client).rank("a slow nod", ["a slow nod", "a wide smile"])
    assert order[0] == 0
    assert client.requests == 2  # original ask plus the strict re-ask

    class HopelessClient(MockClient):
        def _complete_once(self, prompt):
            return "still gibberish"

    with pytest.raises(JudgeParseError):
        ClientJudge(HopelessClient()).rank("q", ["a", "b"])


# --- leakage and phrase extraction -------------------------------------------------


def test_leakage_filter_api(uncached_client):
    mixed = "The other driver cuts in. The brows draw together sharply."
    out = filter_expression_content(mixed, uncached_client)
    assert "driver" not in out and "brows" in out
    with pytest.raises(RejectedInputError):
        filter_expression_content("   ", uncached_client)


def test_concise_phrase_api(uncached_client):
    out = concise_phrase("Rain falls outside. The jaw drops a little.", uncached_client)
    assert out == "the jaw drops a little"
    with pytest.raises(RejectedInputError):
        concise_phrase("", uncached_client)


# --- msp / mse round-trip scores ----------------------------------------------------


def _motif_motion(codecs, e1="gaze left", e2="gaze right",
                  p1="turns left", p2="turns right"):
    clip = make_motif_clip(e1, e2, p1, p2)
    expr, pose = encode_clip(clip, codecs)
    return MotionTokenSequence(expr_tokens=expr, pose_tokens=pose)


def test_roundtrip_description_is_deterministic(grammar_codecs, label_readout,
                                                uncached_client):
    motion = _motif_motion(grammar_codecs)
    a = roundtrip_description(motion, grammar_codecs, label_readout,
                              uncached_client, window_size=5)
    b = roundtrip_description(motion, grammar_codecs, label_readout,
                              uncached_client, window_size=5)
    assert a == b
    assert "left" in a.lower() and "right" in a.lower()


def test_msp_mse_perfect_match_anchor(grammar_codecs, label_readout, uncached_client):
    motion = _motif_motion(grammar_codecs)
    rt = roundtrip_description(motion, grammar_codecs, label_readout,
                               uncached_client, window_size=5)
    report = msp_mse([(rt, motion)], grammar_codecs, label_readout,
                     uncached_client, window_size=5)
    assert report.msp == 100.0
    assert report.mse == 100.0
    assert report.n_samples == 1


def test_msp_mse_unrelated_text_scores_zero(grammar_codecs, label_readout,
                                            uncached_client):
    motion = _motif_motion(grammar_codecs)
    report = msp_mse([("the quarterly report is overdue again", motion)],
                     grammar_codecs, label_readout, uncached_client, window_size=5)
    assert report.msp == 0.0
    assert report.mse == 0.0


def test_msp_mse_scores_aspects_independently(grammar_codecs, label_readout,
                                              uncached_client):
    motion = _motif_motion(grammar_codecs)
    # input text carries head-pose content only
    report = msp_mse([("head turns left then head turns right", motion)],
                     grammar_codecs, label_readout, uncached_client, window_size=5)
    assert report.msp > 0.0
    assert report.mse == 0.0


def test_match_score_parses_and_bounds(uncached_client):
    score = match_score("the eyes widen", "the eyes widen", EXPRESSION_ASPECT,
                        uncached_client)
    assert score == 100
    score = match_score("paperwork", "weather", POSE_ASPECT, uncached_client)
    assert score == 0


# --- end-to-end retrieval ------------------------------------------------------------


def _motif_outputs(codecs, n=12):
    combos = [
        ("gaze left", "gaze right", "turns left", "turns right"),
        ("gaze up", "gaze down", "head up", "head down"),
        ("eyes wide", "gaze ahead", "no pose", "turns left"),
        ("brows raised", "eyes closed", "half left", "half right"),
        ("gaze right", "gaze left", "head down", "no pose"),
        ("eyes closed", "eyes wide", "turns right", "slight left"),
        ("gaze ahead", "brows raised", "slight left", "head up"),
        ("gaze down", "gaze up", "half right", "turns left"),
        ("gaze left", "eyes wide", "head up", "half left"),
        ("brows raised", "gaze right", "no pose", "head down"),
        ("eyes wide", "gaze left", "turns left", "head up"),
        ("gaze right", "eyes closed", "half left", "turns right"),
    ][:n]
    outputs = []
    for e1, e2, p1, p2 in combos:
        clip = make_motif_clip(e1, e2, p1, p2)
        expr, pose = encode_clip(clip, codecs)
        outputs.append((motif_description(e1, e2, p1, p2),
                        MotionTokenSequence(expr_tokens=expr, pose_tokens=pose)))
    return outputs


def test_end_to_end_oracle_hits_everything(grammar_codecs, label_readout,
                                           uncached_client):
    # 8 outputs with pairwise-distinct opening motifs, so the concise phrases
    # (built from the first clause) are unique and can key the oracle
    outputs = _motif_outputs(grammar_codecs, n=8)
    cfg = EndToEndConfig(m=5, k_values=(1, 2, 3), window_size=5)
    truth = {}
    for desc, motion in outputs:
        phrase = generated_motion_phrase(motion, grammar_codecs, label_readout,
                                         uncached_client, cfg.window_size)
        truth[phrase] = desc
    report = end_to_end_hit(outputs, grammar_codecs, label_readout,
                            uncached_client, OracleJudge(truth), cfg)
    assert report.rates == {1: 1.0, 2: 1.0, 3: 1.0}
    assert report.n_valid == len(outputs)


def test_end_to_end_stage_failures_name_the_stage(grammar_codecs, label_readout,
                                                  uncached_client):
    broken_gaze = dataclasses.replace(label_readout.gaze_model)
    broken_gaze = type(label_readout.gaze_model)(
        weights=label_readout.gaze_model.weights,
        means=label_readout.gaze_model.means,
        covariances=label_readout.gaze_model.covariances,
        covariance_type=label_readout.gaze_model.covariance_type,
        label_map=None)
    broken = dataclasses.replace(label_readout, gaze_model=broken_gaze)
    outputs = _motif_outputs(grammar_codecs)
    with pytest.raises(PipelineStageError, match="describe") as err:
        end_to_end_hit(outputs, grammar_codecs, broken, uncached_client,
                       RandomJudge(), EndToEndConfig(window_size=5))
    assert err.value.stage == "describe"


# --- baselines ------------------------------------------------------------------------


def test_average_baseline_replays_the_pooled_mean():
    train = [np.arange(12.0).reshape(4, 3), np.ones((2, 3))]
    out = average_baseline(train, length=5)
    assert out.shape == (5, 3)
    pooled = np.vstack(train).mean(axis=0)
    for row in out:
        np.testing.assert_allclose(row, pooled)


def test_random_gen_baseline_matches_training_moments():
    rng = np.random.default_rng(8)
    train = [rng.normal(loc=3.0, scale=2.0, size=(500, 2)) for _ in range(4)]
    gaussian = EmbeddingGaussian.fit(train)
    sampled = random_gen_baseline(gaussian, [400] * 10, np.random.default_rng(9))
    frames = np.vstack(sampled)
    np.testing.assert_allclose(frames.mean(axis=0), gaussian.stats.mean, atol=0.1)
    np.testing.assert_allclose(np.cov(frames, rowvar=False),
                               gaussian.stats.covariance, atol=0.3)


def test_random_gt_baseline_never_returns_own_item():
    items = [np.full((3, 2), float(i)) for i in range(5)]
    for seed in range(10):
        swapped = random_gt_baseline(items, np.random.default_rng(seed))
        for own, got in zip(items, swapped):
            assert not np.array_equal(own, got)
            assert any(np.array_equal(got, item) for item in items)
    with pytest.raises(RejectedInputError):
        random_gt_baseline(items[:1], np.random.default_rng(0))


def test_averaged_runs_means_the_outputs():
    def run(rng):
        return {"x": float(rng.integers(0, 100)), "y": 1.0}

    out = averaged_runs(run, n_runs=5, seed=11)
    expected = np.mean([float(np.random.default_rng(11 + i).integers(0, 100))
                        for i in range(5)])
    assert out["x"] == pytest.approx(expected)
    assert out["y"] == 1.0
    assert averaged_runs(run, n_runs=5, seed=11) == out


# --- winning rate -----------------------------------------------------------------------


def test_winning_rate_fixture_modes():
    table = UserStudyTable(scores={"ours": [[3, 2]], "base": [[1, 2]]})
    assert winning_rate(table, ("ours", "base")) == 100.0
    # literal convention divides by subjects + items = 1 + 2
    assert winning_rate(table, ("ours", "base"),
                        mode=LITERAL_MODE) == pytest.approx(100.0 / 3.0)


def test_winning_rate_all_ties_is_not_applicable():
    table = UserStudyTable(scores={"a": [[2, 2]], "b": [[2, 2]]})
    assert winning_rate(table, ("a", "b")) is None
    assert winning_rate(table, ("a", "b"), mode=LITERAL_MODE) == 0.0


def test_winning_rates_of_a_tieless_table_are_complementary():
    rng = np.random.default_rng(12)
    a = rng.integers(0, 5, size=(6, 8))
    b = (a + 1 + rng.integers(0, 4, size=a.shape)) % 5  # never equal to a
    table = UserStudyTable(scores={"a": a, "b": b})
    ab = winning_rate(table, ("a", "b"))
    ba = winning_rate(table, ("b", "a"))
    assert ab == pytest.approx(100.0 - ba)


def test_user_study_table_validation():
    with pytest.raises(RejectedInputError):
        UserStudyTable(scores={})
    with pytest.raises(RejectedInputError, match="0..4"):
        UserStudyTable(scores={"a": [[5]]})
    with pytest.raises(RejectedInputError, match="mismatched"):
        UserStudyTable(scores={"a": [[1, 2]], "b": [[1]]})
    table = UserStudyTable(scores={"a": [[1]], "b": [[2]]})
    with pytest.raises(RejectedInputError):
        winning_rate(table, ("a", "zzz"))
    with pytest.raises(RejectedInputError):
        winning_rate(table, ("a", "b"), mode="fuzzy")


# --- text-space distance ----------------------------------------------------------------


def test_text_embedding_is_deterministic_and_normalized():
    embedder = HashingTextEmbedder()
    a = embedder.embed("the gaze drifts down")
    b = embedder.embed("the gaze drifts down")
    np.testing.assert_array_equal(a, b)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    assert embedder.embed_all(["x", "y z"]).shape == (2, embedder.dim)


def test_text_fid_identity_is_tiny():
    texts = [f"sentence {i} about motion" for i in range(30)]
    emb = HashingTextEmbedder().embed_all(texts)
    assert text_fid_pca(emb, emb, dims=5) <= 1e-9


def test_text_fid_exact_in_low_dimensional_subspace():
    # embeddings confined to a 6-d subspace: PCA projection is lossless, so
    # the distance equals the Fréchet distance in subspace coordinates
    rng = np.random.default_rng(13)
    basis, _ = np.linalg.qr(rng.normal(size=(64, 6)))
    za = rng.normal(size=(40, 6)) @ np.diag([3, 2, 2, 1, 1, 0.5])
    zb = rng.normal(size=(40, 6)) + 0.8
    direct = frechet_distance(DistributionStats.from_samples(za),
                              DistributionStats.from_samples(zb))
    projected = text_fid_pca(za @ basis.T, zb @ basis.T, dims=6)
    assert projected == pytest.approx(direct, rel=1e-9)


def test_text_fid_orders_near_before_far():
    def sentences(seed, vocabulary):
        rng = np.random.default_rng(seed)
        return [" ".join(rng.choice(vocabulary, size=6)) for _ in range(40)]

    facial = np.array("brow gaze blink lip jaw head smile frown eye cheek".split())
    office = np.array("invoice ledger quarterly printer stapler deadline".split())
    embedder = HashingTextEmbedder()
    ref = embedder.embed_all(sentences(0, facial))
    near = embedder.embed_all(sentences(1, facial))
    far = embedder.embed_all(sentences(2, office))
    assert text_fid_pca(near, ref, dims=8) < text_fid_pca(far, ref, dims=8)


def test_text_fid_warns_and_reduces_on_rank_deficiency(caplog):
    rng = np.random.default_rng(14)
    basis, _ = np.linalg.qr(rng.normal(size=(64, 3)))
    a = rng.normal(size=(30, 3)) @ basis.T  # rank 3 < requested 8
    b = rng.normal(size=(30, 3)) @ basis.T
    with caplog.at_level("WARNING"):
        value = text_fid_pca(a, b, dims=8)
    assert value >= 0.0
    assert any("reducing" in rec.message for rec in caplog.records)


def test_text_fid_input_validation():
    x = np.zeros((10, 4))
    with pytest.raises(RejectedInputError):
        text_fid_pca(x, np.zeros((10, 5)), dims=2)
    with pytest.raises(RejectedInputError, match="at least"):
        text_fid_pca(x, x, dims=10)


# --- metric report -----------------------------------------------------------------------


def _report():
    return MetricReport(
        spaces={"expression": {"var": 0.5, "fid": 7.08, "fid_delta": 0.10,
                               "snd": 7.08 + 0.10}},
        msp=88.0, mse=91.5,
        hit={"end_to_end": {"rates": {"1": 0.4, "3": 0.8}, "n_valid": 10,
                            "n_invalid": 0}},
        winning={"ours_vs_base": 75.0},
        extra={"truncated": 2},
        config_echo={"seed": 0},
        input_hashes={"tokenizer.npz": "ab" * 32})


def test_report_rejects_inconsistent_snd():
    with pytest.raises(RejectedInputError, match="snd"):
        MetricReport(spaces={"expression": {"var": 0.1, "fid": 1.0,
                                            "fid_delta": 0.5, "snd": 1.6}})


def test_report_round_trip_and_determinism(tmp_path):
    report = _report()
    path = tmp_path / "report.json"
    report.save(path)
    loaded = MetricReport.load(path)
    assert loaded.as_dict() == report.as_dict()
    assert loaded.to_json() == report.to_json()
    # no clocks anywhere in the payload
    assert "time" not in report.to_json().lower()


def test_report_render_text_summarizes():
    text = _report().render_text()
    assert "snd=7.18" in text
    assert "msp=88.00 mse=91.50" in text
    assert "hit@1=40.0%" in text and "hit@3=80.0%" in text
    assert "ours_vs_base: 75.0%" in text
    assert "truncated=2" in text
