"""Unbiased risk estimators and a small residual denoiser."""

from ._rden import (
    ConfigError,
    DataError,
    Denoiser,
    NumericalError,
    SeededStream,
    box,
    constant,
    corrupt,
    epure,
    identity,
    mc_divergence,
    mse,
    phantom,
    psnr,
    pure,
    run_command,
    soft_threshold,
    ssim,
    sure,
    unbiasedness_study,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Denoiser",
    "NumericalError",
    "SeededStream",
    "box",
    "constant",
    "corrupt",
    "epure",
    "identity",
    "mc_divergence",
    "mse",
    "phantom",
    "psnr",
    "pure",
    "run_command",
    "soft_threshold",
    "ssim",
    "sure",
    "unbiasedness_study",
]
