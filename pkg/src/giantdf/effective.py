"""Averaged interaction, second-order Hamiltonian and the coupling matrix J.

For coupling point ``nu`` belonging to atom ``j`` with phase ``phi``, the
point operators are ``S_nu = exp(-i phi) sigma_j`` (right-going) and
``S'_nu = exp(+i phi) sigma_j`` (left-going). Everything here is built from
those and the layout order; no gauge phases are absorbed into the atomic
operators, so J is reported in the raw gauge of the layout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import DF_TOL
from .registers import AtomRegister, BinRegister, JointSpace
from .tensor import dagger
from .topology import Layout, LayoutError, df_residual


def point_operators(layout: Layout, atoms: AtomRegister) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Lists ``[S_nu]`` and ``[S'_nu]`` over all coupling points, left to right."""
    _check_register(layout, atoms)
    sig = [atoms.sigma(j) for j in range(layout.n_atoms)]
    s = [np.exp(-1j * p.phase) * sig[p.atom] for p in layout.points]
    sp = [np.exp(1j * p.phase) * sig[p.atom] for p in layout.points]
    return s, sp


def _check_register(layout: Layout, atoms: AtomRegister) -> None:
    if atoms.n_atoms != layout.n_atoms:
        raise LayoutError(
            f"register holds {atoms.n_atoms} atoms but the layout has {layout.n_atoms}"
        )


def collective_ops(layout: Layout, atoms: AtomRegister) -> tuple[np.ndarray, np.ndarray]:
    """Collective operators ``S = sum_nu S_nu`` and ``S' = sum_nu S'_nu``."""
    s, sp = point_operators(layout, atoms)
    return sum(s), sum(sp)


def check_bins(layout: Layout, bins: BinRegister) -> None:
    if layout.gamma_left > 0 and not bins.bidirectional:
        raise LayoutError("gamma_left > 0 requires a left-going bin (d_left >= 2)")


def averaged_interaction(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> np.ndarray:
    """Time-bin averaged interaction on atoms (x) bins.

    ``(sqrt(gamma) S b^dag + sqrt(gamma') S' b'^dag + h.c.) / sqrt(dt)``
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    check_bins(layout, bins)
    space = JointSpace(atoms, bins)
    s, sp = collective_ops(layout, atoms)
    b = space.b_right
    a = math.sqrt(layout.gamma_right) * space.on_atoms(s) @ dagger(b)
    if bins.bidirectional:
        bl = space.b_left
        a = a + math.sqrt(layout.gamma_left) * space.on_atoms(sp) @ dagger(bl)
    return (a + dagger(a)) / math.sqrt(dt)


def second_order_H(
    layout: Layout, atoms: AtomRegister, bins: BinRegister | None = None
) -> np.ndarray:
    """Second-order Hamiltonian generated by cascaded emission and reabsorption.

    ``(i/2) sum_{nu > nu'} (gamma S_nu'^dag S_nu + gamma' S'_nu^dag S'_nu' - h.c.)``

    It contains atomic operators only. With ``bins`` given it is returned as
    ``H (x) 1_bins``; otherwise on the atom register alone. For layouts that
    do not satisfy the interference condition the operator is still
    returned, but it no longer generates the reduced atomic dynamics.
    """
    s, sp = point_operators(layout, atoms)
    g, gl = layout.gamma_right, layout.gamma_left
    acc = np.zeros((atoms.dim, atoms.dim), dtype=complex)
    for nu in range(layout.n_points):
        for mu in range(nu):
            acc += g * dagger(s[mu]) @ s[nu]
            if gl:
                acc += gl * dagger(sp[nu]) @ sp[mu]
    h = 0.5j * (acc - dagger(acc))
    if bins is None:
        return h
    return JointSpace(atoms, bins).on_atoms(h)


@dataclass(frozen=True)
class CouplingMatrix:
    """``H_eff = sum_{jj'} J[j, j'] sigma_j^dag sigma_j' + h.c.``

    ``K`` is the geometric part with ``J = gamma K + gamma' conj(K)``.
    """

    J: np.ndarray
    K: np.ndarray
    gamma_right: float
    gamma_left: float

    def heff(self, atoms: AtomRegister) -> np.ndarray:
        return heff_from_coupling(self.J, atoms)

    @property
    def reduced(self) -> np.ndarray:
        """Hermitian part ``(J + J^dag) / 2``.

        ``H_eff`` depends on J only through this combination; the
        anti-Hermitian remainder (for instance ``-i (g - g') / 2`` on the
        diagonal of every two-point atom) drops out.
        """
        return 0.5 * (self.J + self.J.conj().T)

    def sigma_z_shifts(self) -> np.ndarray:
        """Coefficient of ``sigma_z = |e><e| - |g><g|`` per atom (``Re J_jj``).

        ``J_jj sigma^dag sigma + h.c. = 2 Re(J_jj) sigma^dag sigma``, which
        equals ``Re(J_jj) sigma_z`` up to a constant.
        """
        return np.real(np.diag(self.J)).copy()


def coupling_matrix(layout: Layout) -> CouplingMatrix:
    """Closed-form J summed over ordered pairs of coupling points.

    Every pair (earlier point of atom j, later point of atom j') contributes
    ``(g+g')/2 sin(dphi) + i (g-g')/2 cos(dphi)`` with
    ``dphi = phi_later - phi_earlier`` to ``J[j, j']``.
    """
    n = layout.n_atoms
    g, gl = layout.gamma_right, layout.gamma_left
    J = np.zeros((n, n), dtype=complex)
    K = np.zeros((n, n), dtype=complex)
    pts = layout.points
    for nu in range(layout.n_points):
        for mu in range(nu):
            early, late = pts[mu], pts[nu]
            d = late.phase - early.phase
            J[early.atom, late.atom] += 0.5 * (g + gl) * math.sin(d) + 0.5j * (g - gl) * math.cos(d)
            K[early.atom, late.atom] += 0.5 * np.exp(1j * (early.phase - late.phase + math.pi / 2))
    return CouplingMatrix(J, K, g, gl)


def heff_from_coupling(J: np.ndarray, atoms: AtomRegister) -> np.ndarray:
    n = atoms.n_atoms
    if J.shape != (n, n):
        raise ValueError(f"J has shape {J.shape}, expected {(n, n)}")
    sig = [atoms.sigma(j) for j in range(n)]
    acc = np.zeros((atoms.dim, atoms.dim), dtype=complex)
    for j in range(n):
        for k in range(n):
            if J[j, k] != 0:
                acc += J[j, k] * dagger(sig[j]) @ sig[k]
    return acc + dagger(acc)


def single_excitation_block(op: np.ndarray, atoms: AtomRegister) -> np.ndarray:
    """Restriction of an atom-register operator to one-excitation states,
    ordered by excited atom index."""
    idx = [atoms.basis_index(b == j for b in range(atoms.n_atoms)) for j in range(atoms.n_atoms)]
    return op[np.ix_(idx, idx)]


def lamb_shift_check(layout: Layout, tol: float = DF_TOL) -> float:
    """Coefficient of ``sigma_z`` in the effective Hamiltonian of one atom.

    The value is read off the operator built by :func:`second_order_H`
    (``Tr(H sigma_z) / 2``), not from the closed-form J. It is non-zero
    when an atom with more than two legs satisfies the interference
    condition.
    """
    if layout.n_atoms != 1:
        raise LayoutError("lamb_shift_check needs a single atom")
    if layout.gamma_left != 0:
        raise LayoutError("lamb_shift_check needs a unidirectional waveguide")
    if not df_residual(layout, tol).is_df:
        raise LayoutError("atom does not satisfy the interference condition")
    atoms = AtomRegister(1)
    h = second_order_H(layout, atoms)
    return float(np.real(np.trace(h @ atoms.sigma_z(0)))) / 2.0


def sine_sum(layout: Layout) -> float:
    """``2 * shift / gamma``: the sum of ``sin(phi_later - phi_earlier)``."""
    return 2.0 * lamb_shift_check(layout) / layout.gamma_right


def magnus_step_unitary(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> np.ndarray:
    """Second-order truncation ``1 - i(V + H) dt - V^2 dt^2 / 2``.

    Not unitary; used to study convergence of the collision step.
    """
    v = averaged_interaction(layout, atoms, bins, dt)
    h = second_order_H(layout, atoms, bins)
    eye = np.eye(v.shape[0], dtype=complex)
    return eye - 1j * (v + h) * dt - 0.5 * (v @ v) * dt**2
