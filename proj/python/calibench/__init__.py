"""Calibration-aware benchmarking of binary-decision models.

Thin Python layer over the C++ library. Calibrators and protocol runs are
returned in their JSON form (plain dicts).
"""

from ._calibench import (
    CalibenchError,
    Corpus,
    accuracy,
    auc,
    auc_trapezoid,
    confusion_at,
    decide,
    fit,
    histogram,
    kappa,
    load_corpus,
    make_fixture,
    pava,
    predict,
    rank_models,
    roc_curve,
    run_protocol,
    score_variance,
)

__all__ = [
    "CalibenchError",
    "Corpus",
    "accuracy",
    "auc",
    "auc_trapezoid",
    "confusion_at",
    "decide",
    "fit",
    "histogram",
    "kappa",
    "load_corpus",
    "make_fixture",
    "pava",
    "predict",
    "rank_models",
    "roc_curve",
    "run_protocol",
    "score_variance",
]
