"""Sanity checks for the synthetic motif world the tests and demo run on."""

import numpy as np
import pytest

from facemotion.curation.attributes import threshold_faus
from facemotion.errors import RejectedInputError
from facemotion.synthetic import (
    DESCRIPTION_TEMPLATE,
    EXPRESSION_MOTIFS,
    POSE_MOTIFS,
    SEGMENT_FRAMES,
    build_grammar_corpus,
    cluster_blobs,
    expression_target,
    fixture_fau_frames,
    grammar_combos,
    make_motif_clip,
    motif_description,
    pose_target,
    smooth_random_clips,
)
from facemotion.tokenizer import encode_clip


def test_motif_vocabulary_sizes():
    assert len(EXPRESSION_MOTIFS) == 8
    assert len(POSE_MOTIFS) == 8
    for phrase in list(EXPRESSION_MOTIFS) + list(POSE_MOTIFS):
        assert len(phrase.split()) == 2


def test_motif_targets_are_pairwise_distinct():
    expr_targets = [tuple(expression_target(p)) for p in EXPRESSION_MOTIFS]
    pose_targets = [tuple(pose_target(p)) for p in POSE_MOTIFS]
    assert len(set(expr_targets)) == len(expr_targets)
    assert len(set(pose_targets)) == len(pose_targets)


def test_unknown_motif_rejected():
    with pytest.raises(RejectedInputError):
        expression_target("gaze sideways")
    with pytest.raises(RejectedInputError):
        pose_target("moonwalk")


def test_description_has_fixed_word_count():
    desc = motif_description("gaze left", "gaze right", "turns left", "head up")
    assert desc == "face: gaze left then gaze right . head: turns left then head up ."
    assert len(desc.split()) == len(DESCRIPTION_TEMPLATE.split()) + 4


def test_motif_clip_geometry():
    clip = make_motif_clip("gaze left", "eyes wide", "turns left", "head down")
    assert clip.expression.shape == (2 * SEGMENT_FRAMES, 16)
    assert clip.pose.shape == (2 * SEGMENT_FRAMES, 16)
    # both segments are constant and equal to their motif targets
    for t in range(SEGMENT_FRAMES):
        np.testing.assert_array_equal(clip.expression[t],
                                      expression_target("gaze left"))
        np.testing.assert_array_equal(clip.expression[SEGMENT_FRAMES + t],
                                      expression_target("eyes wide"))
        np.testing.assert_array_equal(clip.pose[t], pose_target("turns left"))


def test_grammar_combo_space():
    combos = grammar_combos()
    assert len(combos) == (8 * 7) ** 2  # distinct within each stream
    assert len(set(combos)) == len(combos)
    for e1, e2, p1, p2 in combos:
        assert e1 != e2 and p1 != p2


def test_grammar_corpus_split_properties(grammar_codecs):
    split = build_grammar_corpus(grammar_codecs, n_train=30, n_heldout=10, seed=4)
    assert len(split.train) == 30 and len(split.heldout) == 10
    assert set(split.train_combos).isdisjoint(split.heldout_combos)
    ids = [p.pair_id for p in split.train + split.heldout]
    assert len(set(ids)) == len(ids)
    for pair, combo in zip(split.train, split.train_combos):
        assert pair.description == motif_description(*combo)
        assert len(pair.motion.expr_tokens) == 2 * SEGMENT_FRAMES  # stride 1


def test_grammar_corpus_rejects_oversubscription(grammar_codecs):
    with pytest.raises(RejectedInputError):
        build_grammar_corpus(grammar_codecs, n_train=3000, n_heldout=500)


def test_encoding_is_deterministic_per_combo(grammar_codecs):
    a = make_motif_clip("gaze up", "gaze down", "no pose", "head up", clip_id="a")
    b = make_motif_clip("gaze up", "gaze down", "no pose", "head up", clip_id="b")
    assert encode_clip(a, grammar_codecs) == encode_clip(b, grammar_codecs)


def test_label_readout_recovers_motif_labels(label_readout):
    clip = make_motif_clip("gaze left", "eyes closed", "turns right", "head down")
    records = label_readout.attributes(clip)
    assert [r.gaze_label for r in records[:5]] == ["G7"] * 5
    assert [r.gaze_label for r in records[5:]] == ["G6"] * 5
    assert [r.blink_label for r in records[5:]] == ["E3"] * 5
    assert [r.pose_label for r in records[:5]] == ["H8"] * 5
    assert [r.pose_label for r in records[5:]] == ["H6"] * 5
    assert all(r.active_faus == frozenset() for r in records)


def test_label_readout_reads_action_units(label_readout):
    clip = make_motif_clip("eyes wide", "brows raised", "no pose", "head up")
    records = label_readout.attributes(clip)
    assert all("AU5" in r.active_faus for r in records[:5])
    assert all("AU1" in r.active_faus for r in records[5:])


def test_smooth_random_clips_are_bounded_and_seeded():
    a = smooth_random_clips(4, n_frames=30, seed=9)
    b = smooth_random_clips(4, n_frames=30, seed=9)
    assert len(a) == 4
    for ca, cb in zip(a, b):
        np.testing.assert_array_equal(ca.expression, cb.expression)
        assert ca.expression.shape == (30, 16)
        assert np.abs(ca.expression).max() <= 1.0
        assert np.isfinite(ca.pose).all()


def test_cluster_blobs_layout():
    centers = {"A": (0.0, 0.0), "B": (4.0, 4.0)}
    feats, labels, idx = cluster_blobs(centers, n_per_cluster=50, sigma=0.05, seed=0)
    assert feats.shape == (100, 2)
    assert labels[:50] == ["A"] * 50 and labels[50:] == ["B"] * 50
    assert (idx[:50] == 0).all() and (idx[50:] == 1).all()
    np.testing.assert_allclose(feats[:50].mean(axis=0), [0, 0], atol=0.05)


def test_fixture_fau_frames_are_valid_probability_tables():
    frames = fixture_fau_frames(15, seed=3)
    for f in frames:
        values = np.array(list(f.probabilities.values()))
        assert ((0 <= values) & (values <= 1)).all()
        assert len(threshold_faus(f)) == 3
