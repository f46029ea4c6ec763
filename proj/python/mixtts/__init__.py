# SPDX-License-Identifier: Apache-2.0
# Copyright 2026 The mixtts Authors
"""Python access to the mixtts text frontend, features and inversion."""

from ._core import (
    N_MELS,
    SAMPLE_RATE,
    MixttsError,
    encode,
    invert,
    logmel,
    mel_matrix,
    normalize_text,
    run_cli,
    stft_mag,
    strtf,
)

__all__ = [
    "N_MELS",
    "SAMPLE_RATE",
    "MixttsError",
    "encode",
    "invert",
    "logmel",
    "mel_matrix",
    "normalize_text",
    "run_cli",
    "stft_mag",
    "strtf",
]
