"""Distortion observables and distortion evaluation.

A distortion observable is a block operator sum_x Delta_x (x) |x><x| whose
expectation on the joint (reference, outcome) state measures reconstruction
error.  Blocks act on the reference (plain setting) or on reference (x) side
information (QSI setting); the classical register is always the last factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    PSD_ATOL,
    DimensionMismatch,
    NotPositiveSemidefinite,
    as_hermitian,
    eig_hermitian,
)
from .states import DensityOperator, Povm, Purification, _checked_basis, _freeze


@dataclass(frozen=True)
class DistortionObservable:
    """PSD blocks Delta_x indexed by outcome label, with the largest block
    eigenvalue cached as ``d_max``."""

    blocks: tuple[np.ndarray, ...]
    d_max: float = field(init=False)

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("a distortion observable needs at least one block")
        mats = [as_hermitian(b, f"block {i}") for i, b in enumerate(self.blocks)]
        dim = mats[0].shape[0]
        top = 0.0
        for i, b in enumerate(mats):
            if b.shape[0] != dim:
                raise DimensionMismatch(f"block {i} has dimension {b.shape[0]}, expected {dim}")
            w = np.linalg.eigvalsh(b)
            if float(w.min()) < -PSD_ATOL:
                raise NotPositiveSemidefinite(f"block {i} eigenvalue {w.min():.3e} < -{PSD_ATOL:.0e}")
            top = max(top, float(w.max()))
        object.__setattr__(self, "blocks", tuple(_freeze(b) for b in mats))
        object.__setattr__(self, "d_max", top)

    @property
    def outcome_count(self) -> int:
        return len(self.blocks)

    @property
    def dim(self) -> int:
        return self.blocks[0].shape[0]


def _check_alphabets(povm: Povm, delta: DistortionObservable) -> None:
    if povm.outcomes != delta.outcome_count:
        raise DimensionMismatch(
            f"POVM has {povm.outcomes} outcomes but the observable has {delta.outcome_count} blocks"
        )


def distortion(psi: Purification, povm: Povm, delta: DistortionObservable) -> float:
    """Average distortion Tr{sum_x (Delta_x (x) effect_x) psi}.

    Evaluated through the conditional blocks sigma_x = W effect_x^T W^dag,
    which is algebraically identical to the bilinear form above.
    """
    if len(psi.system_dims) != 1:
        raise DimensionMismatch("expected a bipartite (reference, system) purification")
    if povm.dim != psi.system_dims[0]:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != system dimension {psi.system_dims[0]}")
    if delta.dim != psi.reference_dim:
        raise DimensionMismatch(f"block dimension {delta.dim} != reference dimension {psi.reference_dim}")
    _check_alphabets(povm, delta)
    w = psi.as_matrix()
    blk = np.stack(delta.blocks)
    lam = np.stack(povm.effects)
    val = float(np.einsum("xrs,sa,xba,rb->", blk, w, lam, w.conj()).real)
    return 0.0 if -1e-12 < val < 0.0 else val


def distortion_qsi(psi: Purification, povm: Povm, delta: DistortionObservable) -> float:
    """Average distortion with side information: blocks act on R (x) B."""
    if len(psi.system_dims) != 2:
        raise DimensionMismatch("expected a tripartite (reference, system, side) purification")
    d_a, d_b = psi.system_dims
    d_r = psi.reference_dim
    if povm.dim != d_a:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != system dimension {d_a}")
    if delta.dim != d_r * d_b:
        raise DimensionMismatch(f"block dimension {delta.dim} != reference*side dimension {d_r * d_b}")
    _check_alphabets(povm, delta)
    t = psi.as_tensor()
    blk = np.stack(delta.blocks).reshape(delta.outcome_count, d_r, d_b, d_r, d_b)
    lam = np.stack(povm.effects)
    val = float(np.einsum("xsdrb,xac,rcb,sad->", blk, lam, t, t.conj()).real)
    return 0.0 if -1e-12 < val < 0.0 else val


def eigenbasis_observable(rho: DensityOperator) -> DistortionObservable:
    """Blocks I - |x><x| in the eigenbasis of ``rho`` (descending order).

    Outcome x then means "the source was in its x-th eigenstate", so ideal
    eigenbasis readout has zero distortion.
    """
    eig = eig_hermitian(rho.mat)
    eye = np.eye(rho.dim, dtype=complex)
    blocks = tuple(eye - np.outer(eig.eigenvectors[:, x], eig.eigenvectors[:, x].conj()) for x in range(rho.dim))
    return DistortionObservable(blocks)


def classical_cost_observable(costs, basis) -> DistortionObservable:
    """Lift a classical cost matrix d(z, x) into block form.

    Block x is sum_z d(z, x) |v_z><v_z| over the given orthonormal basis
    (columns), so measuring in that basis and reading outcome x off a source
    letter z incurs cost d(z, x).  Rows index source letters, columns index
    outcome labels.
    """
    c = np.asarray(costs, dtype=float)
    if c.ndim != 2 or c.size == 0:
        raise ValueError(f"cost matrix must be 2-D and nonempty, got shape {c.shape}")
    if float(c.min()) < 0.0:
        raise ValueError(f"negative cost entry {c.min()!r}")
    v = _checked_basis(basis, c.shape[0])
    blocks = tuple((v * c[:, x]) @ v.conj().T for x in range(c.shape[1]))
    return DistortionObservable(blocks)


def example_observable() -> DistortionObservable:
    """Qubit observable with blocks (I - |+><+|) for outcome 0 and
    (I - |0><0|) for outcome 1: outcome 0 claims the source emitted |+>,
    outcome 1 claims |0>."""
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    zero = np.array([1.0, 0.0])
    eye = np.eye(2)
    return DistortionObservable((eye - np.outer(plus, plus), eye - np.outer(zero, zero)))
