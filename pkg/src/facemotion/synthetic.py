"""Deterministic synthetic motion data for tests, fixtures, and the demo.

Everything here is built from a small closed world:

* a 16-d expression embedding whose dims are assigned to action-unit
  intensities (0-5), a gaze subspace (6-10), and a blink subspace (11-15);
* a 16-d pose embedding whose first three dims carry the head-pose cluster
  geometry;
* eight two-word expression motifs and eight two-word pose motifs, each a
  constant embedding target held for a five-frame segment, phrased after the
  cluster-label vocabulary so the text and the labels speak the same words.

A grammar sentence names two expression motifs and two pose motifs; its
ground-truth tokens are whatever the trained codecs assign to the motif
trajectory, which makes the corpus an exact oracle for the driving model.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curation.attributes import AttributeRecord, FAUFrame
from .curation.gmm import GMMModel, fit_gmm, suggest_label_map
from .curation.taxonomy import BLINK_LABELS, FAU_LABELS, GAZE_LABELS, POSE_LABELS
from .driving.training import TrainingPair
from .errors import RejectedInputError
from .evaluation.matching import LabelReadout
from .protocol import MotionTokenSequence
from .tokenizer import CodecConfig, MotionClip, TokenizerPair, encode_clip, train_codec

EXPR_DIM = 16
POSE_DIM = 16
SEGMENT_FRAMES = 5

# expression-embedding layout
FAU_DIMS = {"AU1": 0, "AU4": 1, "AU12": 2, "AU15": 3, "AU26": 4, "AU5": 5}
GAZE_DIMS = (6, 7, 8, 9, 10)
BLINK_DIMS = (11, 12, 13, 14, 15)
# pose-embedding layout
POSE_CLUSTER_DIMS = (0, 1, 2)

GAZE_CENTERS = {
    "G3": (0.0, 0.0, 0.0, 0.0, 0.0),    # ahead
    "G7": (-3.0, 0.0, 0.0, 0.0, 0.0),   # left
    "G5": (3.0, 0.0, 0.0, 0.0, 0.0),    # right
    "G1": (0.0, 3.0, 0.0, 0.0, 0.0),    # up a little
    "G4": (0.0, -3.0, 0.0, 0.0, 0.0),   # down a little
    "G6": (0.0, 0.0, 3.0, 0.0, 0.0),    # eye closed
}

BLINK_CENTERS = {
    "E5": (0.0, 0.0, 0.0, 0.0, 0.0),    # open
    "E1": (0.0, 3.0, 0.0, 0.0, 0.0),    # open a lot
    "E3": (3.0, 0.0, 0.0, 0.0, 0.0),    # closed
}

POSE_CENTERS = {
    "H2": (0.0, 0.0, 0.0),      # no head pose
    "H1": (-3.0, 0.0, 0.0),     # turns left a lot
    "H8": (3.0, 0.0, 0.0),      # turns right a lot
    "H3": (-1.8, 0.0, 0.0),     # turns left half
    "H4": (1.8, 0.0, 0.0),      # turns right half
    "H7": (-0.8, 0.0, 0.0),     # turns left a little
    "H5": (0.0, 1.5, 0.0),      # up a little
    "H6": (0.0, -2.5, 0.0),     # down
}


@dataclass(frozen=True)
class ExpressionMotif:
    phrase: str                         # exactly two corpus words
    gaze: str = "G3"
    blink: str = "E5"
    fau_levels: tuple = ()              # (code, intensity) pairs


@dataclass(frozen=True)
class PoseMotif:
    phrase: str
    pose: str = "H2"


EXPRESSION_MOTIFS = {m.phrase: m for m in (
    ExpressionMotif("gaze ahead", gaze="G3"),
    ExpressionMotif("gaze left", gaze="G7"),
    ExpressionMotif("gaze right", gaze="G5"),
    ExpressionMotif("gaze up", gaze="G1"),
    ExpressionMotif("gaze down", gaze="G4"),
    ExpressionMotif("eyes closed", gaze="G6", blink="E3"),
    ExpressionMotif("eyes wide", blink="E1", fau_levels=(("AU5", 1.0),)),
    ExpressionMotif("brows raised", fau_levels=(("AU1", 1.0),)),
)}

POSE_MOTIFS = {m.phrase: m for m in (
    PoseMotif("no pose", pose="H2"),
    PoseMotif("turns left", pose="H1"),
    PoseMotif("turns right", pose="H8"),
    PoseMotif("half left", pose="H3"),
    PoseMotif("half right", pose="H4"),
    PoseMotif("slight left", pose="H7"),
    PoseMotif("head up", pose="H5"),
    PoseMotif("head down", pose="H6"),
)}

DESCRIPTION_TEMPLATE = "face: {e1} then {e2} . head: {p1} then {p2} ."


def expression_target(phrase: str) -> np.ndarray:
    """The constant 16-d expression vector a motif holds for its segment."""
    motif = EXPRESSION_MOTIFS.get(phrase)
    if motif is None:
        raise RejectedInputError(f"unknown expression motif {phrase!r}")
    vec = np.zeros(EXPR_DIM)
    for code, level in motif.fau_levels:
        vec[FAU_DIMS[code]] = level
    vec[list(GAZE_DIMS)] = GAZE_CENTERS[motif.gaze]
    vec[list(BLINK_DIMS)] = BLINK_CENTERS[motif.blink]
    return vec


def pose_target(phrase: str) -> np.ndarray:
    motif = POSE_MOTIFS.get(phrase)
    if motif is None:
        raise RejectedInputError(f"unknown pose motif {phrase!r}")
    vec = np.zeros(POSE_DIM)
    vec[list(POSE_CLUSTER_DIMS)] = POSE_CENTERS[motif.pose]
    return vec


def motif_description(e1: str, e2: str, p1: str, p2: str) -> str:
    return DESCRIPTION_TEMPLATE.format(e1=e1, e2=e2, p1=p1, p2=p2)


def make_motif_clip(e1: str, e2: str, p1: str, p2: str, clip_id: str = "",
                    segment_frames: int = SEGMENT_FRAMES) -> MotionClip:
    """Two constant segments per stream; zero noise, so tokens are exact."""
    expr = np.vstack([np.tile(expression_target(e1), (segment_frames, 1)),
                      np.tile(expression_target(e2), (segment_frames, 1))])
    pose = np.vstack([np.tile(pose_target(p1), (segment_frames, 1)),
                      np.tile(pose_target(p2), (segment_frames, 1))])
    cid = clip_id or f"motif-{e1}-{e2}-{p1}-{p2}".replace(" ", "_")
    return MotionClip(clip_id=cid, expression=expr, pose=pose)


def motif_codec_clips(segment_frames: int = SEGMENT_FRAMES) -> list[MotionClip]:
    """One clip per motif index: covers every motif target exactly once."""
    e_phrases = list(EXPRESSION_MOTIFS)
    p_phrases = list(POSE_MOTIFS)
    return [make_motif_clip(e, e, p, p, clip_id=f"codec-{i}",
                            segment_frames=segment_frames)
            for i, (e, p) in enumerate(zip(e_phrases, p_phrases))]


def train_grammar_codecs(config: CodecConfig | None = None) -> TokenizerPair:
    """Codecs trained on the motif targets themselves (the grammar's tokens).

    The default schedule is sized so decoding is near-exact on the motif
    targets, which downstream label-readout checks depend on.
    """
    cfg = config or CodecConfig(n_codes=512, epochs=60, batch_size=64,
                                stride=1, seed=0)
    return train_codec(motif_codec_clips(), cfg)


@dataclass
class GrammarSplit:
    """Seen/unseen recombinations of the same motif vocabulary."""

    train: list = field(default_factory=list)       # TrainingPair
    heldout: list = field(default_factory=list)
    train_combos: list = field(default_factory=list)
    heldout_combos: list = field(default_factory=list)

    @property
    def descriptions(self) -> list:
        return [p.description for p in self.train + self.heldout]


def grammar_combos() -> list[tuple]:
    """All (e1, e2, p1, p2) with distinct motifs within each stream."""
    e_pairs = [(a, b) for a, b in itertools.product(EXPRESSION_MOTIFS, repeat=2)
               if a != b]
    p_pairs = [(a, b) for a, b in itertools.product(POSE_MOTIFS, repeat=2)
               if a != b]
    return [(e1, e2, p1, p2) for (e1, e2), (p1, p2)
            in itertools.product(e_pairs, p_pairs)]


def build_grammar_corpus(codecs: TokenizerPair, n_train: int = 640,
                         n_heldout: int = 160, seed: int = 0,
                         segment_frames: int = SEGMENT_FRAMES) -> GrammarSplit:
    """Sample disjoint train/held-out combos and tokenize their clips.

    Held-out sentences recombine motifs the model has seen, in combinations
    it has not; ground truth comes from encoding the motif trajectory with
    the supplied codecs, so exact-match accuracy is well defined.
    """
    combos = grammar_combos()
    if n_train + n_heldout > len(combos):
        raise RejectedInputError(
            f"requested {n_train}+{n_heldout} combos, only {len(combos)} exist")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(combos))
    picked_train = [combos[i] for i in order[:n_train]]
    picked_held = [combos[i] for i in order[n_train:n_train + n_heldout]]

    def pairs_for(picked, tag):
        out = []
        for i, (e1, e2, p1, p2) in enumerate(picked):
            clip = make_motif_clip(e1, e2, p1, p2, clip_id=f"{tag}-{i}",
                                   segment_frames=segment_frames)
            expr, pose = encode_clip(clip, codecs)
            out.append(TrainingPair(
                description=motif_description(e1, e2, p1, p2),
                motion=MotionTokenSequence(expr_tokens=expr, pose_tokens=pose),
                pair_id=clip.clip_id))
        return out

    return GrammarSplit(train=pairs_for(picked_train, "train"),
                        heldout=pairs_for(picked_held, "heldout"),
                        train_combos=picked_train, heldout_combos=picked_held)


def smooth_random_clips(n_clips: int, n_frames: int = 50, d_e: int = EXPR_DIM,
                        d_p: int = POSE_DIM, seed: int = 0,
                        step_scale: float = 0.3) -> list[MotionClip]:
    """Random-walk clips with bounded amplitude; rich enough to need many codes."""
    rng = np.random.default_rng(seed)
    clips = []
    for i in range(n_clips):
        expr = np.tanh(np.cumsum(rng.normal(scale=step_scale, size=(n_frames, d_e)),
                                 axis=0))
        pose = np.tanh(np.cumsum(rng.normal(scale=step_scale, size=(n_frames, d_p)),
                                 axis=0))
        clips.append(MotionClip(clip_id=f"smooth-{i}", expression=expr, pose=pose))
    return clips


def cluster_blobs(centers: dict, n_per_cluster: int = 200, sigma: float = 0.08,
                  seed: int = 0) -> tuple[np.ndarray, list[str], np.ndarray]:
    """Isotropic Gaussian blobs around labeled centers.

    Returns (features, true label codes per row, integer cluster index per
    row); cluster order follows the dict order of ``centers``.
    """
    rng = np.random.default_rng(seed)
    codes = list(centers)
    feats, labels, idx = [], [], []
    for j, code in enumerate(codes):
        center = np.asarray(centers[code], dtype=np.float64)
        feats.append(center + rng.normal(scale=sigma, size=(n_per_cluster, len(center))))
        labels += [code] * n_per_cluster
        idx += [j] * n_per_cluster
    return np.vstack(feats), labels, np.asarray(idx)


def _fit_labeled_gmm(centers: dict, seed: int, n_per_cluster: int = 200,
                     sigma: float = 0.08) -> GMMModel:
    feats, _, _ = cluster_blobs(centers, n_per_cluster, sigma, seed)
    model = fit_gmm(feats, k=len(centers), seed=seed)
    model.label_map = suggest_label_map(
        model, {c: np.asarray(v, dtype=np.float64) for c, v in centers.items()})
    return model


def make_label_readout(seed: int = 0) -> LabelReadout:
    """A readout whose mixture models are fitted to this module's geometry."""
    return LabelReadout(
        fau_dims=dict(FAU_DIMS),
        gaze_model=_fit_labeled_gmm(GAZE_CENTERS, seed),
        pose_model=_fit_labeled_gmm(POSE_CENTERS, seed + 1),
        blink_model=_fit_labeled_gmm(BLINK_CENTERS, seed + 2),
        gaze_dims=GAZE_DIMS, blink_dims=BLINK_DIMS, pose_dims=POSE_CLUSTER_DIMS)


def fixture_fau_frames(n_frames: int, seed: int = 0,
                       active_per_frame: int = 3) -> list[FAUFrame]:
    """Probability frames with a few confidently active units per frame."""
    rng = np.random.default_rng(seed)
    codes = list(FAU_LABELS)
    frames = []
    for _ in range(n_frames):
        probs = {c: float(p) for c, p in zip(codes, rng.uniform(0.0, 0.4, len(codes)))}
        for c in rng.choice(codes, size=active_per_frame, replace=False):
            probs[c] = float(rng.uniform(0.7, 1.0))
        frames.append(FAUFrame(probabilities=probs))
    return frames


def fixture_attribute_records(n_frames: int, seed: int = 0) -> list[AttributeRecord]:
    """Attribute streams that change slowly, like a real labeled clip."""
    rng = np.random.default_rng(seed)
    fau_codes = list(FAU_LABELS)
    gaze_codes = list(GAZE_LABELS)
    pose_codes = list(POSE_LABELS)
    blink_codes = list(BLINK_LABELS)
    records = []
    active: frozenset = frozenset()
    gaze = pose = blink = ""
    for i in range(n_frames):
        if i % 5 == 0:  # resample attributes once per 5 frames
            active = frozenset(rng.choice(fau_codes, size=2, replace=False))
            gaze = gaze_codes[int(rng.integers(len(gaze_codes)))]
            pose = pose_codes[int(rng.integers(len(pose_codes)))]
            blink = blink_codes[int(rng.integers(len(blink_codes)))]
        records.append(AttributeRecord(frame_index=i, active_faus=active,
                                       gaze_label=gaze, pose_label=pose,
                                       blink_label=blink))
    return records
