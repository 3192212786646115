"""Taxonomy-annotated image degradation, severity calibration and benchmark generation.

Typical use::

    import imdeg
    y = imdeg.apply_degradation(x, backend="hendrycks", term="gaussian_noise", severity=3)
    cal = imdeg.calibrate_distortion(images, backend="arniqa", term="gaublur", metric="1-ssim")
    z = imdeg.apply_degradation(x, backend="arniqa", term="gaublur", severity=3,
                                mode="canonical", calibration=cal)
"""

__version__ = "0.1.0"

from imdeg.api import SaturationWarning, apply_degradation, degrade  # noqa: E402
from imdeg.calibration import Calibration, calibrate_distortion, load_calibration  # noqa: E402
from imdeg.degradations import (  # noqa: E402
    ChainSpec,
    DegradationSpec,
    apply_chain,
    list_operators,
)
from imdeg.image import load_image, save_image  # noqa: E402
from imdeg.metrics import one_minus_ssim, psnr, ssim  # noqa: E402
from imdeg.taxonomy import lookup  # noqa: E402

__all__ = [
    "Calibration",
    "ChainSpec",
    "DegradationSpec",
    "SaturationWarning",
    "apply_chain",
    "apply_degradation",
    "calibrate_distortion",
    "degrade",
    "list_operators",
    "load_calibration",
    "load_image",
    "lookup",
    "one_minus_ssim",
    "psnr",
    "save_image",
    "ssim",
]
