"""Motion-capture parsing and preprocessing."""

from .preprocess import (
    MIN_SMOOTH_FRAMES,
    DatasetSplit,
    NormStats,
    TrainingWindow,
    bone_lengths,
    butterworth_smooth,
    center_on_root,
    downsample,
    make_windows,
    mean_segment_lengths,
    minmax_apply,
    minmax_fit,
    minmax_invert,
    preprocess_recording,
    reduce_markers,
    retarget_segment_lengths,
    root_trajectory,
    split_dataset,
    window_count,
)
from .sequence import MotionSequence
from .skeleton import (
    DEFAULT_ROOT,
    HAND_TOE_JOINTS,
    MOTION_DIM,
    N_JOINTS,
    N_MARKERS,
    RootSpec,
    SkeletonMap,
    format_skeleton_map,
    load_skeleton_map,
    parse_skeleton_map,
)
from .tsv import format_mocap_tsv, parse_mocap_tsv, write_mocap_tsv
