"""Metrics and judge pipelines for the motion system."""

from .baselines import (DEFAULT_BASELINE_RUNS, EmbeddingGaussian, average_baseline,
                        averaged_runs, random_gen_baseline, random_gt_baseline)
from .end_to_end import EndToEndConfig, end_to_end_hit, generated_motion_phrase
from .frechet import (EIGENVALUE_CLAMP, DistributionStats, NaturalnessReport,
                      frechet_distance, naturalness_suite, sqrtm_psd,
                      temporal_variance)
from .hit import (DEFAULT_K_VALUES, DEFAULT_M, END_TO_END_K_VALUES, END_TO_END_M,
                  HitAtKConfig, HitReport, hit_at_k)
from .judges import ClientJudge, Judge, OracleJudge, RandomJudge, parse_permutation
from .leakage import concise_phrase, filter_expression_content
from .matching import (EXPRESSION_ASPECT, POSE_ASPECT, LabelReadout, MatchReport,
                       clip01, match_score, msp_mse, roundtrip_description)
from .report import MetricReport, content_hash
from .textspace import PCA_DIMS, HashingTextEmbedder, pca_fit, text_fid_pca
from .winning_rate import LITERAL_MODE, STRICT_MODE, UserStudyTable, winning_rate

__all__ = [
    "DEFAULT_BASELINE_RUNS", "EmbeddingGaussian", "average_baseline",
    "averaged_runs", "random_gen_baseline", "random_gt_baseline",
    "EndToEndConfig", "end_to_end_hit", "generated_motion_phrase",
    "EIGENVALUE_CLAMP", "DistributionStats", "NaturalnessReport",
    "frechet_distance", "naturalness_suite", "sqrtm_psd", "temporal_variance",
    "DEFAULT_K_VALUES", "DEFAULT_M", "END_TO_END_K_VALUES", "END_TO_END_M",
    "HitAtKConfig", "HitReport", "hit_at_k",
    "ClientJudge", "Judge", "OracleJudge", "RandomJudge", "parse_permutation",
    "concise_phrase", "filter_expression_content",
    "EXPRESSION_ASPECT", "POSE_ASPECT", "LabelReadout", "MatchReport", "clip01",
    "match_score", "msp_mse", "roundtrip_description",
    "MetricReport", "content_hash",
    "PCA_DIMS", "HashingTextEmbedder", "pca_fit", "text_fid_pca",
    "LITERAL_MODE", "STRICT_MODE", "UserStudyTable", "winning_rate",
]
