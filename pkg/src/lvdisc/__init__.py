"""Left-ventricle localization and elliptical-active-disc segmentation.

The pipeline is two steps: multiscale normalized cross-correlation finds
the ventricle, then a five-parameter elliptical disc descends a contrast
energy to delineate the endocardium.  Volumes at end-diastole/end-systole
integrate into the ejection fraction.
"""

__version__ = "0.1.0"

from .ead import (
    ContrastField,
    DiscParams,
    DiscTemplate,
    EnergyBreakdown,
    FitConfig,
    FitTrace,
    boundary_points,
    contour,
    default_n_samples,
    energy,
    energy_pixelsum,
    fit,
    gradient,
    rasterize,
)
from .cardiac import (
    EFResult,
    PipelineConfig,
    SliceResult,
    StudyReport,
    apex_base_policy,
    assemble_report,
    ejection_fraction,
    segment_slice,
    segment_study,
    slice_volume_stack,
)
from .errors import (
    DegenerateDiscError,
    DimensionError,
    FitNumericError,
    FormatError,
    LvDiscError,
    ScaleError,
    SizeError,
    UndefinedEFError,
    UnsupportedFormatError,
)
from .imaging import BinaryMask, CineStudy, GrayImage, normalize, rescale, sample_bilinear
from .imgio import load_image, load_labels, load_study, read_nifti, save_pgm, save_png
from .locate import (
    LOW_CONFIDENCE_ZETA,
    MatchResult,
    Template,
    localization_hit,
    match_multiscale,
    ncc_map,
)
from .metrics import AggregateMetrics, ConfusionCounts, MetricSet, aggregate, confusion, metric_set

__all__ = [name for name in dir() if not name.startswith("_")]
