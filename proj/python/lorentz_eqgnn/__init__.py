"""Hybrid quantum-classical Lorentz-equivariant graph network engine."""

from ._core import (
    DressedCircuit,
    Model,
    background_rejection,
    expect_z,
    invariant_mass2,
    lr_at,
    mink_inner,
    mink_norm2_diff,
    random_lorentz,
    roc_auc,
    run_program,
    signed_log1p,
    synth_jets,
)

__all__ = [
    "DressedCircuit",
    "Model",
    "background_rejection",
    "expect_z",
    "invariant_mass2",
    "lr_at",
    "mink_inner",
    "mink_norm2_diff",
    "random_lorentz",
    "roc_auc",
    "run_program",
    "signed_log1p",
    "synth_jets",
]
