"""Physics-based underwater image formation, restoration and evaluation.

The package is organised around five areas:

* :mod:`uwrestore.spectra` - diffuse attenuation from irradiance profiles
  and sensor-response-weighted per-channel attenuation coefficients.
* :mod:`uwrestore.imaging` - the forward degradation model and its
  inverse, with the pixel-range mapping and contrast-rescale heuristics.
* :mod:`uwrestore.metrics` - MSE/PSNR/SSIM and the UIQM family, plus
  report writing; :mod:`uwrestore.features` for feature-space distances.
* :mod:`uwrestore.losses` - contrastive (InfoNCE/patchwise), adversarial
  and identity loss kernels as pure functions.
* :mod:`uwrestore.dataset` - site manifests, deterministic split
  construction, and 8/16-bit PNG IO.

The ``uwrestore`` console script exposes the pipeline end to end.
"""

from .dataset import (
    ImageRecord,
    Manifest,
    SiteRecord,
    SplitSpec,
    build_splits,
    load_canonical_splits,
    load_image,
    load_manifest,
    load_site_table_fixture,
    save_image,
)
from .features import (
    GaussianStats,
    embed_images,
    fid,
    fid_from_features,
    gaussian_stats,
    load_features,
    save_features,
    toy_patch_features,
)
from .imaging import (
    LinearImage,
    RestorationParams,
    airlight,
    contrast_rescale,
    degrade,
    map_pixel_range,
    restore,
    transmission,
)
from .losses import (
    FeatureStack,
    ObjectiveWeights,
    full_objective,
    gan_loss_d,
    gan_loss_g,
    gan_objective_d,
    identity_l1,
    info_nce,
    load_feature_stack,
    patch_nce,
    patch_nce_batch,
    save_feature_stack,
)
from .metrics import (
    ImageMetrics,
    MetricReport,
    evaluate_pair,
    mse,
    psnr,
    ssim,
    uicm,
    uiconm,
    uiqm,
    uism,
)
from .spectra import (
    ChannelCoefficients,
    IrradianceProfile,
    SpectralCurve,
    channel_attenuation,
    channel_coefficients,
    kd_depth_average,
    kd_from_profile,
    load_camera_response_csv,
    load_curve_csv,
    resample_curve,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelCoefficients",
    "FeatureStack",
    "GaussianStats",
    "ImageMetrics",
    "ImageRecord",
    "IrradianceProfile",
    "LinearImage",
    "Manifest",
    "MetricReport",
    "ObjectiveWeights",
    "RestorationParams",
    "SiteRecord",
    "SpectralCurve",
    "SplitSpec",
    "airlight",
    "build_splits",
    "channel_attenuation",
    "channel_coefficients",
    "contrast_rescale",
    "degrade",
    "embed_images",
    "evaluate_pair",
    "fid",
    "fid_from_features",
    "full_objective",
    "gan_loss_d",
    "gan_loss_g",
    "gan_objective_d",
    "gaussian_stats",
    "identity_l1",
    "info_nce",
    "kd_depth_average",
    "kd_from_profile",
    "load_camera_response_csv",
    "load_canonical_splits",
    "load_curve_csv",
    "load_feature_stack",
    "load_features",
    "load_image",
    "load_manifest",
    "load_site_table_fixture",
    "map_pixel_range",
    "mse",
    "patch_nce",
    "patch_nce_batch",
    "psnr",
    "resample_curve",
    "restore",
    "save_feature_stack",
    "save_features",
    "save_image",
    "ssim",
    "toy_patch_features",
    "transmission",
    "uicm",
    "uiconm",
    "uiqm",
    "uism",
]
