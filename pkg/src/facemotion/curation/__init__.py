from .attributes import (
    FAU_THRESHOLD,
    AttributeRecord,
    FAUFrame,
    read_attribute_records,
    read_fau_frames,
    threshold_faus,
    write_attribute_records,
    write_fau_frames,
)
from .dataset import (
    FULL_SCALE_REFERENCE,
    SkipRecord,
    SplitManifest,
    build_pairs,
    split_pairs,
)
from .describe import (
    WINDOW_SIZE_FRAMES,
    ClipDescription,
    WindowPartition,
    aggregate_windows,
    describe_clip,
    describe_window,
    partition_windows,
    read_descriptions,
    write_descriptions,
)
from .gmm import (
    GMMModel,
    assign_components,
    assign_labels,
    fit_gmm,
    log_likelihood,
    responsibilities,
    suggest_label_map,
)
from .taxonomy import (
    BLINK_LABELS,
    CLUSTER_FAMILIES,
    FAU_LABELS,
    GAZE_LABELS,
    N_FAUS,
    POSE_LABELS,
    family_of,
    label_text,
)

__all__ = [
    "BLINK_LABELS",
    "CLUSTER_FAMILIES",
    "FAU_LABELS",
    "FAU_THRESHOLD",
    "FULL_SCALE_REFERENCE",
    "GAZE_LABELS",
    "N_FAUS",
    "POSE_LABELS",
    "WINDOW_SIZE_FRAMES",
    "AttributeRecord",
    "ClipDescription",
    "FAUFrame",
    "GMMModel",
    "SkipRecord",
    "SplitManifest",
    "WindowPartition",
    "aggregate_windows",
    "assign_components",
    "assign_labels",
    "build_pairs",
    "describe_clip",
    "describe_window",
    "family_of",
    "fit_gmm",
    "label_text",
    "log_likelihood",
    "partition_windows",
    "read_attribute_records",
    "read_descriptions",
    "read_fau_frames",
    "responsibilities",
    "split_pairs",
    "suggest_label_map",
    "threshold_faus",
    "write_attribute_records",
    "write_descriptions",
    "write_fau_frames",
]
