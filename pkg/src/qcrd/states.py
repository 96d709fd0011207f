"""Density operators, Schmidt purifications, POVMs, and induced cq states."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .operators import (
    MAX_DIM,
    PSD_ATOL,
    DimensionMismatch,
    NotPositiveSemidefinite,
    as_hermitian,
    eig_hermitian,
)

#: Tolerance on unit trace / unit norm at construction.
TRACE_ATOL = 1e-10

#: Tolerance on max-entry deviation of a POVM's effect sum from the identity.
COMPLETENESS_ATOL = 1e-9

#: Tolerance on the Gram matrix when a caller supplies an orthonormal basis.
BASIS_ATOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityOperator:
    """Unit-trace PSD operator."""

    mat: np.ndarray

    def __post_init__(self):
        a = as_hermitian(self.mat, "density operator")
        tr = float(a.trace().real)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density operator trace {tr!r} differs from 1")
        low = float(np.linalg.eigvalsh(a).min())
        if low < -PSD_ATOL:
            raise NotPositiveSemidefinite(f"density operator eigenvalue {low:.3e} < -{PSD_ATOL:.0e}")
        object.__setattr__(self, "mat", _freeze(a))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]


@dataclass(frozen=True)
class Povm:
    """Finite measurement: PSD effects summing to the identity.

    Outcome labels are the indices ``0..len(effects)-1``.
    """

    effects: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not self.effects:
            raise ValueError("a POVM needs at least one effect")
        mats = [as_hermitian(e, f"effect {i}") for i, e in enumerate(self.effects)]
        dim = mats[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for i, e in enumerate(mats):
            if e.shape[0] != dim:
                raise DimensionMismatch(f"effect {i} has dimension {e.shape[0]}, expected {dim}")
            low = float(np.linalg.eigvalsh(e).min())
            if low < -PSD_ATOL:
                raise NotPositiveSemidefinite(f"effect {i} eigenvalue {low:.3e} < -{PSD_ATOL:.0e}")
            total += e
        dev = float(np.abs(total - np.eye(dim)).max())
        if dev > COMPLETENESS_ATOL:
            raise ValueError(f"effects do not sum to the identity: max deviation {dev:.3e}")
        object.__setattr__(self, "effects", tuple(_freeze(e) for e in mats))

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.effects)


@dataclass(frozen=True)
class Purification:
    """Pure state on (reference, system factors...) with the reference slowest.

    ``vector`` holds the amplitudes in row-major order over
    ``(reference_dim, *system_dims)``.  For Schmidt-form purifications
    produced by :func:`purify`, ``schmidt_coeffs`` are the square roots of
    the source eigenvalues (descending, zero-padded for rank-deficient
    sources).
    """

    vector: np.ndarray
    reference_dim: int
    system_dims: tuple[int, ...]
    schmidt_coeffs: np.ndarray | None = None

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        dims = (int(self.reference_dim),) + tuple(int(d) for d in self.system_dims)
        if any(d < 1 for d in dims):
            raise DimensionMismatch("all factor dimensions must be positive")
        if len(self.system_dims) not in (1, 2):
            raise DimensionMismatch("purification supports one system factor plus optional side factor")
        if prod(dims) != v.size:
            raise DimensionMismatch(f"vector length {v.size} does not match dims {dims}")
        if not np.isfinite(v).all():
            raise ValueError("state vector contains non-finite entries")
        norm = float(np.linalg.norm(v))
        if abs(norm - 1.0) > TRACE_ATOL:
            raise ValueError(f"state vector norm {norm!r} differs from 1")
        object.__setattr__(self, "vector", _freeze(v))
        object.__setattr__(self, "reference_dim", dims[0])
        object.__setattr__(self, "system_dims", dims[1:])
        if self.schmidt_coeffs is not None:
            object.__setattr__(self, "schmidt_coeffs", _freeze(np.asarray(self.schmidt_coeffs, float)))

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.reference_dim,) + self.system_dims

    def as_matrix(self) -> np.ndarray:
        """Amplitudes as a (reference, joint-system) matrix."""
        return self.vector.reshape(self.reference_dim, -1)

    def as_tensor(self) -> np.ndarray:
        """Amplitudes as an array indexed by every factor."""
        return self.vector.reshape(self.dims)

    def reduced_reference_state(self) -> np.ndarray:
        """Reduced state on the reference system."""
        w = self.as_matrix()
        return w @ w.conj().T

    def reduced_system_state(self) -> np.ndarray:
        """Reduced state on the (joint) system factors, tracing out the reference."""
        w = self.as_matrix()
        return np.einsum("ra,rb->ab", w, w.conj())


def purify(rho: DensityOperator) -> Purification:
    """Schmidt-form purification sum_i sqrt(lambda_i) |v_i>_R |v_i>_A.

    The reference copies the system dimension and both Schmidt bases equal
    the eigenbasis of ``rho`` (descending eigenvalue order), so tracing out
    either side returns ``rho``.
    """
    eig = eig_hermitian(rho.mat)
    coeffs = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    w = (eig.eigenvectors * coeffs) @ eig.eigenvectors.T
    return Purification(w.reshape(-1), rho.dim, (rho.dim,), schmidt_coeffs=coeffs)


def purify_joint(rho_ab: DensityOperator, system_dims: tuple[int, int]) -> Purification:
    """Schmidt-form purification of a joint state over factors (R, A, B).

    The reference has dimension ``dim(A) * dim(B)`` and mirrors the joint
    eigenbasis, exactly as :func:`purify` does for a single system.
    """
    d_a, d_b = (int(d) for d in system_dims)
    if d_a * d_b != rho_ab.dim:
        raise DimensionMismatch(f"system dims {system_dims} do not multiply to {rho_ab.dim}")
    eig = eig_hermitian(rho_ab.mat)
    coeffs = np.sqrt(np.clip(eig.eigenvalues, 0.0, None))
    w = (eig.eigenvectors * coeffs) @ eig.eigenvectors.T
    return Purification(w.reshape(-1), rho_ab.dim, (d_a, d_b), schmidt_coeffs=coeffs)


def apply_measurement_map(povm: Povm, state: DensityOperator) -> np.ndarray:
    """Outcome probabilities p(x) = Tr(effect_x rho)."""
    if povm.dim != state.dim:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != state dimension {state.dim}")
    return np.array([float(np.einsum("ij,ji->", e, state.mat).real) for e in povm.effects])


@dataclass(frozen=True)
class CqState:
    """Classical-quantum block state sum_x sigma_x (x) |x><x|.

    ``conditional_ops[x]`` is unnormalized with trace ``probs[x]``;
    ``factor_dims`` records the tensor factors of the quantum side,
    e.g. ``(dR,)`` or ``(dR, dB)``.  Producers guarantee positivity of the
    blocks; it is not re-verified here.
    """

    probs: np.ndarray
    conditional_ops: tuple[np.ndarray, ...]
    factor_dims: tuple[int, ...]

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size != len(self.conditional_ops):
            raise DimensionMismatch("one conditional operator per outcome is required")
        if abs(float(p.sum()) - 1.0) > TRACE_ATOL:
            raise ValueError(f"outcome probabilities sum to {p.sum()!r}, expected 1")
        dims = tuple(int(d) for d in self.factor_dims)
        d = prod(dims)
        ops = []
        for i, op in enumerate(self.conditional_ops):
            a = np.asarray(op, dtype=complex)
            if a.shape != (d, d):
                raise DimensionMismatch(f"conditional operator {i} has shape {a.shape}, expected ({d}, {d})")
            ops.append(_freeze(a))
        object.__setattr__(self, "probs", _freeze(p))
        object.__setattr__(self, "conditional_ops", tuple(ops))
        object.__setattr__(self, "factor_dims", dims)

    @property
    def outcome_count(self) -> int:
        return len(self.conditional_ops)

    @property
    def quantum_dim(self) -> int:
        return prod(self.factor_dims)

    def marginal_quantum(self) -> np.ndarray:
        """Reduced state on the quantum factor(s): sum_x sigma_x."""
        total = np.zeros((self.quantum_dim, self.quantum_dim), dtype=complex)
        for op in self.conditional_ops:
            total += op
        return total


def induced_cq_state(psi: Purification, povm: Povm) -> CqState:
    """State of (reference, outcome register) after measuring the system.

    Block x is Tr_A{(I_R (x) effect_x) psi}; written with the amplitude
    matrix W this is W effect_x^T W^dagger, which for Schmidt-form
    purifications is exactly sqrt(rho) effect_x^T sqrt(rho) in the Schmidt
    basis.
    """
    if len(psi.system_dims) != 1:
        raise DimensionMismatch("expected a bipartite (reference, system) purification")
    if povm.dim != psi.system_dims[0]:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != system dimension {psi.system_dims[0]}")
    w = psi.as_matrix()
    ops = tuple(w @ e.T @ w.conj().T for e in povm.effects)
    probs = np.array([float(op.trace().real) for op in ops])
    return CqState(probs, ops, (psi.reference_dim,))


def induced_cq_state_qsi(psi: Purification, povm: Povm) -> CqState:
    """State of (reference, side information, outcome register) after measuring A.

    Block x is Tr_A{(I_R (x) effect_x (x) I_B) psi}, an operator on R (x) B.
    """
    if len(psi.system_dims) != 2:
        raise DimensionMismatch("expected a tripartite (reference, system, side) purification")
    d_a, d_b = psi.system_dims
    d_r = psi.reference_dim
    if povm.dim != d_a:
        raise DimensionMismatch(f"POVM dimension {povm.dim} != system dimension {d_a}")
    t = psi.as_tensor()
    ops = tuple(
        np.einsum("ac,rcb,sad->rbsd", e, t, t.conj()).reshape(d_r * d_b, d_r * d_b)
        for e in povm.effects
    )
    probs = np.array([float(op.trace().real) for op in ops])
    return CqState(probs, ops, (d_r, d_b))


def _checked_basis(basis, dim: int) -> np.ndarray:
    v = np.asarray(basis, dtype=complex)
    if v.ndim != 2 or v.shape != (dim, dim):
        raise DimensionMismatch(f"basis must be a ({dim}, {dim}) matrix of column vectors")
    dev = float(np.abs(v.conj().T @ v - np.eye(dim)).max())
    if dev > BASIS_ATOL:
        raise ValueError(f"basis is not orthonormal: Gram deviation {dev:.3e} > {BASIS_ATOL:.0e}")
    return v


def dephase(m, basis) -> np.ndarray:
    """Remove off-diagonal elements of ``m`` in the given basis (columns)."""
    a = as_hermitian(m)
    v = _checked_basis(basis, a.shape[0])
    diag = np.einsum("iz,ij,jz->z", v.conj(), a, v).real
    return (v * diag) @ v.conj().T


def pinch_povm(povm: Povm, basis) -> Povm:
    """Replace every effect by its diagonal part in the given basis."""
    v = _checked_basis(basis, povm.dim)
    return Povm(tuple(dephase(e, v) for e in povm.effects))


def povm_effects_from_ginibre(g: np.ndarray) -> np.ndarray:
    """Map stacked Ginibre matrices (..., k, d, d) to POVM effects.

    effect_x = M^{-1/2} G_x^dag G_x M^{-1/2} with M = sum_x G_x^dag G_x, so
    completeness holds by construction.
    """
    a = g.conj().swapaxes(-1, -2) @ g
    m = a.sum(axis=-3)
    w, v = np.linalg.eigh(m)
    s = (v * (1.0 / np.sqrt(w))[..., None, :]) @ v.conj().swapaxes(-1, -2)
    return s[..., None, :, :] @ a @ s[..., None, :, :]


def sample_random_povm(dim: int, outcomes: int, rng_seed) -> Povm:
    """Random POVM from the Ginibre-square construction, deterministic per seed."""
    if outcomes < 1:
        raise ValueError("a POVM needs at least one outcome")
    if not 1 <= dim <= MAX_DIM:
        raise DimensionMismatch(f"dimension {dim} outside supported range 1..{MAX_DIM}")
    rng = np.random.default_rng(rng_seed)
    g = rng.standard_normal((outcomes, dim, dim)) + 1j * rng.standard_normal((outcomes, dim, dim))
    return Povm(tuple(povm_effects_from_ginibre(g)))


def example_source() -> DensityOperator:
    """Qubit source emitting |+> and |0> with probability 1/2 each."""
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    zero = np.array([1.0, 0.0])
    return DensityOperator((np.outer(plus, plus) + np.outer(zero, zero)) / 2.0)
