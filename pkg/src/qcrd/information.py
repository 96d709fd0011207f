"""Entropic quantities in bits: von Neumann entropy, Shannon entropy, and
(conditional) quantum mutual information of classical-quantum states."""

from __future__ import annotations

import numpy as np

from .states import CqState, DensityOperator

#: Eigenvalues and probabilities at or below this floor are treated as exact
#: zeros inside log terms, so rank-deficient operators never produce -inf.
EIG_FLOOR = 1e-14


class InvalidDistribution(ValueError):
    """Input is not a probability distribution within tolerance."""


def entropy_terms(w) -> float:
    """-sum w log2 w over nonnegative weights, with 0 log 0 := 0.

    The weights need not be normalized; this is the building block shared by
    the entropy functions below.
    """
    w = np.asarray(w, dtype=float)
    mask = w > EIG_FLOOR
    return float(-(w[mask] * np.log2(w[mask])).sum())


def shannon_entropy(p) -> float:
    """Shannon entropy of a probability distribution, in bits."""
    a = np.asarray(p, dtype=float).reshape(-1)
    if a.size == 0:
        raise InvalidDistribution("empty distribution")
    if not np.isfinite(a).all():
        raise InvalidDistribution("distribution contains non-finite entries")
    if float(a.min()) < -1e-12:
        raise InvalidDistribution(f"negative probability {a.min()!r}")
    if abs(float(a.sum()) - 1.0) > 1e-9:
        raise InvalidDistribution(f"probabilities sum to {a.sum()!r}, expected 1")
    return entropy_terms(np.clip(a, 0.0, None))


def von_neumann_entropy(rho: DensityOperator) -> float:
    """H(rho) = -Tr(rho log2 rho) in bits."""
    return entropy_terms(np.clip(np.linalg.eigvalsh(rho.mat), 0.0, None))


def mutual_information_cq(sigma: CqState) -> float:
    """I(X;R) of a cq state, in bits.

    Uses I(X;R) = H(rho_R) - sum_x p(x) H(sigma_x / p(x)); outcomes with
    p(x) below the eigenvalue floor contribute nothing.
    """
    marg = sigma.marginal_quantum()
    total = entropy_terms(np.clip(np.linalg.eigvalsh(marg), 0.0, None))
    for p, op in zip(sigma.probs, sigma.conditional_ops):
        if p <= EIG_FLOOR:
            continue
        w = np.clip(np.linalg.eigvalsh(op), 0.0, None)
        # p H(sigma/p) expanded so the unnormalized eigenvalues are used directly
        total -= entropy_terms(w) + float(p) * np.log2(p)
    return total


def conditional_mutual_information_cq(sigma: CqState) -> float:
    """I(X;R|B) of a cq state whose blocks live on R (x) B, in bits.

    Computed as I(X;RB) - I(X;B); this difference form is numerically
    gentler than four separate entropies when B is nearly product.
    """
    if len(sigma.factor_dims) != 2:
        raise ValueError("conditional mutual information needs (reference, side) factor dims")
    d_r, d_b = sigma.factor_dims
    ops_b = tuple(
        np.einsum("rbrd->bd", op.reshape(d_r, d_b, d_r, d_b)) for op in sigma.conditional_ops
    )
    marginal_b = CqState(sigma.probs, ops_b, (d_b,))
    return mutual_information_cq(sigma) - mutual_information_cq(marginal_b)
