"""Blind visible watermark removal toolkit.

Pipeline: segment an initial mask, grow it by morphological dilation so it
covers the whole mark, inpaint the hole (built-in harmonic solver or a
remote generative service), then restore the untouched background around
the synthesized region. Ships with blind removal/preservation metrics,
synthetic dataset recipes with exact ground-truth masks, and a batch CLI
(``morphomod --help``).
"""

from .errors import (
    ConvergenceWarning,
    CoverageError,
    DegenerateMaskWarning,
    DegenerateRegionError,
    EmptyMaskWarning,
    MorphoModError,
    MorphoModWarning,
    PipelineStageError,
    PngFormatError,
    RemoteBackendError,
    RemoteConnectionError,
    RemoteDimensionError,
    RemotePayloadError,
    RemoteStatusError,
    UnknownBackendError,
    UnsupportedPngError,
)
from .inpaint import (
    DEFAULT_PROMPT,
    PROMPT_CATALOG,
    HarmonicBackend,
    InpaintOptions,
    InpaintRequest,
    RemoteBackend,
    inpaint_harmonic,
    inpaint_remote,
    select_backend,
    verify_backend_contract,
)
from .metrics import (
    MetricsReport,
    background_of,
    dice_bce,
    f1,
    iou,
    report,
    rmse_region,
    ssim_map,
    ssim_region,
)
from .morphology import (
    KernelShape,
    StructuringElement,
    binarize,
    dilate,
    erode,
    invert,
    make_kernel,
)
from .pipeline import (
    ChromaSource,
    FileSource,
    PipelineConfig,
    ProvidedSource,
    SegmentSource,
    morphomod,
    restore,
    segment,
)
from .raster import (
    FillStrategy,
    composite,
    decode_png,
    encode_png,
    load_mask,
    load_png,
    prefill,
    save_png,
)

__version__ = "0.1.0"
