"""Supervised learning with one-clean-qubit (DQC1) kernel estimation."""

__version__ = "0.1.0"

from .engine import Dqc1Config, estimate_kernel_raw, estimate_trace, run_exact
from .feature_map import FeatureMapConfig, encoding_unitary, kernel_unitary
from .resources import coherence_consumption, geometric_discord_closed_form, resource_map
from .svm import (
    KernelMatrix,
    SvmModel,
    accuracy,
    build_kernel_matrix,
    predict,
    psd_repair,
    svm_decision,
    svm_train,
)

__all__ = [
    "Dqc1Config",
    "FeatureMapConfig",
    "KernelMatrix",
    "SvmModel",
    "accuracy",
    "build_kernel_matrix",
    "coherence_consumption",
    "encoding_unitary",
    "estimate_kernel_raw",
    "estimate_trace",
    "geometric_discord_closed_form",
    "kernel_unitary",
    "predict",
    "psd_repair",
    "resource_map",
    "run_exact",
    "svm_decision",
    "svm_train",
]
