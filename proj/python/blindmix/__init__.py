"""EC blind signatures, a simulated mixing bank and its anonymity analysis."""

from ._blindmix import (
    Signer,
    anonymity_probability,
    blind,
    run_comparison,
    run_experiment,
    unblind,
    verify,
)

__all__ = [
    "Signer",
    "anonymity_probability",
    "blind",
    "run_comparison",
    "run_experiment",
    "unblind",
    "verify",
]
