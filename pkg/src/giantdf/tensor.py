"""Dense linear algebra on small multipartite Hilbert spaces.

Operators are plain square ``numpy`` arrays of complex dtype. Tensor factors
are always ordered left to right, so for ``dims = [d0, d1, d2]`` the flat
index is ``i0 * d1 * d2 + i1 * d2 + i2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .constants import DENSITY_TOL, MAX_DIM, STRUCTURAL_TOL, UNITARY_TOL


class DimensionError(ValueError):
    """Raised when operator shapes disagree or exceed the dimension cap."""


class ContractError(ValueError):
    """Raised when an operator violates a Hermitian/unitary/density contract."""


def as_operator(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def kron(a, b, max_dim: int = MAX_DIM) -> np.ndarray:
    """Kronecker product ``a (x) b`` with a guard on the resulting dimension."""
    a = as_operator(a)
    b = as_operator(b)
    dim = a.shape[0] * b.shape[0]
    if dim > max_dim:
        raise DimensionError(f"dimension {dim} exceeds the cap of {max_dim}")
    return np.kron(a, b)


def kron_all(ops: Iterable, max_dim: int = MAX_DIM) -> np.ndarray:
    ops = list(ops)
    if not ops:
        return np.eye(1, dtype=complex)
    return reduce(lambda x, y: kron(x, y, max_dim=max_dim), ops)


def embed(op, site: int, dims: Sequence[int], max_dim: int = MAX_DIM) -> np.ndarray:
    """Place a local operator on factor ``site`` of a product space."""
    op = as_operator(op)
    if op.shape[0] != dims[site]:
        raise DimensionError(
            f"operator of size {op.shape[0]} does not fit factor {site} of size {dims[site]}"
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[site] = op
    return kron_all(factors, max_dim=max_dim)


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - dagger(a)))) if a.size else 0.0


def is_hermitian(a, tol: float = STRUCTURAL_TOL) -> bool:
    a = as_operator(a)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return hermiticity_defect(a) <= tol * scale


def unitarity_defect(u: np.ndarray) -> float:
    u = as_operator(u)
    return float(np.max(np.abs(dagger(u) @ u - np.eye(u.shape[0]))))


def is_unitary(u, tol: float = UNITARY_TOL) -> bool:
    return unitarity_defect(u) <= tol


def expm_generator(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition.

    The spectral route keeps the result unitary to roundoff, which the exact
    operator identities tested elsewhere rely on.
    """
    h = as_operator(h)
    if not is_hermitian(h):
        raise ContractError(
            f"generator is not Hermitian (defect {hermiticity_defect(h):.3e})"
        )
    h = 0.5 * (h + dagger(h))
    w, q = np.linalg.eigh(h)
    return (q * np.exp(-1j * w * t)) @ dagger(q)


def _check_dims(dim: int, dims: Sequence[int]) -> None:
    if any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be positive: {list(dims)}")
    if int(np.prod(dims)) != dim:
        raise DimensionError(f"dims {list(dims)} do not multiply to {dim}")


def partial_trace(rho, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    Kept factors stay in their original relative order.
    """
    rho = as_operator(rho)
    dims = [int(d) for d in dims]
    _check_dims(rho.shape[0], dims)
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise DimensionError("keep must name at least one factor")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise DimensionError(f"keep {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = rho.reshape(dims + dims)
    # einsum labels: row indices 0..n-1, column indices n..2n-1
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = list(keep) + [i + n for i in keep]
    reduced = np.einsum(t, row + col, out)
    dk = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(dk, dk)


def check_density(rho, tol: float = DENSITY_TOL) -> None:
    """Raise :class:`ContractError` unless ``rho`` is a valid density matrix."""
    rho = as_operator(rho)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise ContractError(f"trace {tr.real:.6g} differs from 1")
    if not is_hermitian(rho, tol):
        raise ContractError("density matrix is not Hermitian")
    lo = float(np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0])
    if lo < -tol:
        raise ContractError(f"negative eigenvalue {lo:.3e}")


def pure(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def basis_state(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def purity(rho) -> float:
    rho = as_operator(rho)
    return float(np.real(np.trace(rho @ rho)))


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh(0.5 * (rho + dagger(rho)))
    return (q * np.sqrt(np.clip(w, 0.0, None))) @ dagger(q)


def trace_distance(rho, sigma) -> float:
    rho, sigma = as_operator(rho), as_operator(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    diff = rho - sigma
    w = np.linalg.eigvalsh(0.5 * (diff + dagger(diff)))
    return float(min(1.0, 0.5 * np.sum(np.abs(w))))


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``."""
    rho, sigma = as_operator(rho), as_operator(sigma)
    if rho.shape != sigma.shape:
        raise DimensionError(f"shape mismatch {rho.shape} vs {sigma.shape}")
    s = _psd_sqrt(rho)
    m = s @ sigma @ s
    w = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
    f = float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)
    return min(1.0, max(0.0, f))


@dataclass(frozen=True)
class StateMetrics:
    trace_distance: float
    fidelity: float


def metrics(rho, sigma) -> StateMetrics:
    return StateMetrics(trace_distance(rho, sigma), fidelity(rho, sigma))


def phase_aligned_distance(u, v) -> float:
    """``max|u - e^{ia} v|`` with the global phase ``a`` maximising ``|Tr(u^dag v)|``."""
    u, v = as_operator(u), as_operator(v)
    overlap = np.trace(dagger(v) @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(u - phase * v)))
