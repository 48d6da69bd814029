"""patchmix: dataset engineering for detection under noisy annotations.

The toolkit manipulates COCO-format datasets three ways: same-label
patch-mix augmentation of the image tree, controlled injection of category
and bounding-box noise, and partitioning of detector predictions for
loss-suppression training. Everything is deterministic under a single seed.
"""

from .dataset import (
    Annotation,
    BBoxXYWH,
    Category,
    CategoryIndex,
    Dataset,
    ImageRecord,
    PeerRef,
    Violation,
    dataset_to_dict,
    index_by_category,
    load_dataset,
    save_dataset,
    validate,
)
from .errors import DataFormatError, PatchmixError
from .estimators import AnnotationNoiser, MixPasteAugmenter
from .lls import (
    BACKGROUND,
    Detection,
    LossBreakdown,
    OutcomePartition,
    Prediction,
    iou,
    keep_fraction_schedule,
    load_detections,
    masked_loss,
    partition_outcomes,
    small_loss_select,
    small_loss_select_grouped,
)
from .mix_paste import (
    AugmentReport,
    MixConfig,
    MixRecord,
    Skip,
    apply_to_image,
    augment_dataset,
    edge_mask,
    mix_patches,
    mix_weight_fields,
    presence_probability,
    sample_peers,
    select_images,
)
from .noise import (
    BoxChange,
    CategoryChange,
    GaussianBoxNoise,
    NoiseSpec,
    UniformBoxNoise,
    changes_to_json,
    clamp_box,
    corrupt_labels,
    perturb_boxes,
    shift_scale_box,
)
from .probe import (
    PresenceEstimate,
    SuspectBox,
    SuspectReport,
    monte_carlo_presence,
    suspect_boxes,
)
from .raster import (
    EmptyCropError,
    Patch,
    Raster,
    WeightField,
    blend,
    box_to_rect,
    crop,
    load_image,
    paste,
    resize,
    save_image,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "AnnotationNoiser",
    "AugmentReport",
    "BACKGROUND",
    "BBoxXYWH",
    "BoxChange",
    "Category",
    "CategoryChange",
    "CategoryIndex",
    "DataFormatError",
    "Dataset",
    "Detection",
    "EmptyCropError",
    "GaussianBoxNoise",
    "ImageRecord",
    "LossBreakdown",
    "MixConfig",
    "MixPasteAugmenter",
    "MixRecord",
    "NoiseSpec",
    "OutcomePartition",
    "Patch",
    "PatchmixError",
    "PeerRef",
    "Prediction",
    "PresenceEstimate",
    "Raster",
    "Skip",
    "SuspectBox",
    "SuspectReport",
    "UniformBoxNoise",
    "Violation",
    "WeightField",
    "apply_to_image",
    "augment_dataset",
    "blend",
    "box_to_rect",
    "changes_to_json",
    "clamp_box",
    "corrupt_labels",
    "crop",
    "dataset_to_dict",
    "edge_mask",
    "index_by_category",
    "iou",
    "keep_fraction_schedule",
    "load_dataset",
    "load_detections",
    "load_image",
    "masked_loss",
    "mix_patches",
    "mix_weight_fields",
    "monte_carlo_presence",
    "partition_outcomes",
    "paste",
    "perturb_boxes",
    "presence_probability",
    "resize",
    "sample_peers",
    "save_dataset",
    "save_image",
    "select_images",
    "shift_scale_box",
    "small_loss_select",
    "small_loss_select_grouped",
    "suspect_boxes",
    "validate",
]
