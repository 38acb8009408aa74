"""ECG stress-level imaging, transforms and decision fusion."""

from ._ecgf import (
    CLASS_COUNT,
    IMAGE_SIZE,
    Error,
    detect_r_peaks,
    dft2,
    dft_image,
    fuse,
    gabor_image,
    gabor_kernel,
    rmssd,
    rr_intervals,
    sdnn,
    signal_image,
    synthesize,
)

__all__ = [
    "CLASS_COUNT",
    "IMAGE_SIZE",
    "Error",
    "detect_r_peaks",
    "dft2",
    "dft_image",
    "fuse",
    "gabor_image",
    "gabor_kernel",
    "rmssd",
    "rr_intervals",
    "sdnn",
    "signal_image",
    "synthesize",
]
