"""Residual CNN single-image super-resolution: model, baselines, metrics."""

from ._srres import (
    CheckpointError,
    DecodeError,
    EmptyDataset,
    InvalidConfig,
    InvalidShape,
    InvalidState,
    IoError,
    Model,
    NonFiniteLoss,
    ShapeMismatch,
    SrresError,
    UnknownMethod,
    bench,
    bench_means,
    bicubic_upscale,
    build_manifest,
    config_keys,
    degrade,
    degrade_dir,
    evaluate_pair,
    expected_num_params,
    infer_png,
    load_image,
    psnr,
    resample,
    save_image,
    ssim,
    to_luma,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
