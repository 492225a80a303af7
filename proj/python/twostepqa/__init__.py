# Copyright 2026 The twostepqa Authors
# SPDX-License-Identifier: Apache-2.0
"""Two-step image quality assessment.

Full-reference fidelity (MS-SSIM) against a reference of unknown quality,
weighted by the no-reference quality (NIQE) of that reference.
"""

import os
import pathlib

from ._core import (
    DEFAULT_ALPHA,
    Error,
    NiqeModel,
    RescaleParams,
    alpha_sweep,
    basic_2step,
    benchmark,
    decode_luma,
    derive_rescale,
    encode_jpeg,
    general_2step,
    load_luma,
    mapped_pcc,
    ms_ssim,
    pcc,
    psnr,
    score_files,
    srocc,
    ssim,
    train_niqe,
)
from . import _core

__all__ = [
    "DEFAULT_ALPHA",
    "Error",
    "NiqeModel",
    "RescaleParams",
    "alpha_sweep",
    "basic_2step",
    "benchmark",
    "decode_luma",
    "default_model_path",
    "derive_rescale",
    "encode_jpeg",
    "general_2step",
    "load_luma",
    "mapped_pcc",
    "ms_ssim",
    "pcc",
    "psnr",
    "score_files",
    "srocc",
    "ssim",
    "train_niqe",
]

MODEL_ENV_VAR = "TWOSTEPQA_NIQE_MODEL"


def default_model_path():
    """$TWOSTEPQA_NIQE_MODEL, else the model shipped with the package."""
    env = os.environ.get(MODEL_ENV_VAR)
    if env:
        return pathlib.Path(env)
    packaged = pathlib.Path(__file__).with_name("niqe_pristine.model")
    if packaged.is_file():
        return packaged
    return pathlib.Path(_core.SOURCE_MODEL_PATH)
