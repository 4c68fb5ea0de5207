"""Dispersive coupling to a few discrete, far-detuned field modes.

Atoms couple to modes ``k`` with detunings ``Delta_k = omega_k - omega_0``
through ``V_t = sum_jk g_jk sigma_j b_k^dag exp(i Delta_k t) + h.c.`` (frame
rotating at the atomic frequency). Far off resonance, ``V_t`` averages to
zero over a window much longer than ``1/|Delta|`` and the atoms are left with
a second-order exchange Hamiltonian. This is the conventional route to a
decoherence-free coupling and serves as a contrast to giant atoms.

Operators act on ``atoms (x) mode_0 (x) ... (x) mode_{K-1}``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .collision import Trajectory, atom_populations
from .registers import AtomRegister, lowering
from .tensor import dagger, embed, partial_trace, purity, trace_distance

#: ``min|Delta| >= DISPERSIVE_RATIO * max|g|`` sets the dispersive flag.
DISPERSIVE_RATIO = 20.0
#: factor standing in for "much less than" in the window separation check.
SEPARATION_FACTOR = 10.0
MAX_MODES = 3
MAX_LEVELS = 5


class SingularDetuningError(ValueError):
    """A mode is resonant with the atoms (zero detuning)."""


class WindowSeparationWarning(UserWarning):
    """The averaging window does not separate the fast and slow time scales."""


@dataclass(frozen=True)
class ModeSet:
    """Detunings ``(K,)``, couplings ``(n_atoms, K)`` and Fock truncation ``d``."""

    detunings: np.ndarray
    couplings: np.ndarray
    d: int = 2

    def __post_init__(self):
        det = np.atleast_1d(np.asarray(self.detunings, dtype=float))
        g = np.atleast_2d(np.asarray(self.couplings, dtype=complex))
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "couplings", g)
        if det.ndim != 1 or not 1 <= det.size <= MAX_MODES:
            raise ValueError(f"need between 1 and {MAX_MODES} modes")
        if g.shape[1] != det.size:
            raise ValueError(f"couplings shape {g.shape} does not match {det.size} modes")
        if not 2 <= self.d <= MAX_LEVELS:
            raise ValueError(f"mode truncation d must be in [2, {MAX_LEVELS}]")
        if np.any(det == 0):
            raise SingularDetuningError("zero detuning: the dispersive expansion is singular")

    @property
    def n_modes(self) -> int:
        return self.detunings.size

    @property
    def n_atoms(self) -> int:
        return self.couplings.shape[0]

    @property
    def is_dispersive(self) -> bool:
        gmax = float(np.max(np.abs(self.couplings)))
        return float(np.min(np.abs(self.detunings))) >= DISPERSIVE_RATIO * gmax

    @property
    def dims(self) -> list[int]:
        return [2] * self.n_atoms + [self.d] * self.n_modes

    def scaled(self, factor: float) -> "ModeSet":
        """Same couplings with every detuning multiplied by ``factor``."""
        return ModeSet(self.detunings * factor, self.couplings, self.d)


def _check_atoms(modes: ModeSet, atoms: AtomRegister) -> None:
    if atoms.n_atoms != modes.n_atoms:
        raise ValueError(f"register has {atoms.n_atoms} atoms, couplings have {modes.n_atoms}")


def _ladders(modes: ModeSet) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Lowering operators of atoms and modes on the joint space."""
    dims = modes.dims
    na = modes.n_atoms
    sig = [embed(np.array([[0, 1], [0, 0]]), j, dims) for j in range(na)]
    b = [embed(lowering(modes.d), na + k, dims) for k in range(modes.n_modes)]
    return sig, b


def _interaction(modes: ModeSet, phases: np.ndarray) -> np.ndarray:
    """``sum_jk g_jk f_k sigma_j b_k^dag + h.c.`` for per-mode factors ``f_k``."""
    sig, b = _ladders(modes)
    a = sum(
        modes.couplings[j, k] * phases[k] * sig[j] @ dagger(b[k])
        for j in range(modes.n_atoms)
        for k in range(modes.n_modes)
    )
    return a + dagger(a)


def interaction_at(modes: ModeSet, atoms: AtomRegister, t: float) -> np.ndarray:
    """Interaction-picture coupling ``V_t``."""
    _check_atoms(modes, atoms)
    return _interaction(modes, np.exp(1j * modes.detunings * t))


def window_separation_ok(modes: ModeSet, dt: float) -> bool:
    """``1/min|Delta| << dt << 1/max|g|`` with a margin of ``SEPARATION_FACTOR``."""
    fast = 1.0 / float(np.min(np.abs(modes.detunings)))
    gmax = float(np.max(np.abs(modes.couplings)))
    slow = math.inf if gmax == 0 else 1.0 / gmax
    return SEPARATION_FACTOR * fast <= dt <= slow / SEPARATION_FACTOR


def windowed_average(
    modes: ModeSet, atoms: AtomRegister, t0: float, dt: float, warn: bool = True
) -> np.ndarray:
    """``(1/dt) int_{t0}^{t0+dt} V_s ds`` from the analytic antiderivative."""
    _check_atoms(modes, atoms)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if warn and not window_separation_ok(modes, dt):
        warnings.warn(
            "averaging window does not separate 1/|Delta| from 1/|g|",
            WindowSeparationWarning,
            stacklevel=2,
        )
    det = modes.detunings
    f = (np.exp(1j * det * (t0 + dt)) - np.exp(1j * det * t0)) / (1j * det * dt)
    return _interaction(modes, f)


def window_norm(modes: ModeSet, atoms: AtomRegister, t0: float, dt: float) -> float:
    """Spectral norm of the windowed average."""
    return float(np.linalg.norm(windowed_average(modes, atoms, t0, dt, warn=False), 2))


def rms_window_norm(
    modes: ModeSet, atoms: AtomRegister, t0: float, dt: float, n_windows: int = 257
) -> float:
    """Root-mean-square window norm over window lengths in ``[dt, 2 dt]``.

    A single window length can sit near a node of the oscillating integral;
    averaging over a range of lengths exposes the ``1/(|Delta| dt)`` envelope.
    """
    lengths = np.linspace(dt, 2 * dt, n_windows)
    vals = np.array([window_norm(modes, atoms, t0, w) for w in lengths])
    return float(np.sqrt(np.mean(vals**2)))


def detuning_scaling_ratio(
    modes: ModeSet, atoms: AtomRegister, t0: float, dt: float, factor: float = 2.0
) -> float:
    """RMS window norm after scaling all detunings by ``factor``, relative to before."""
    return rms_window_norm(modes.scaled(factor), atoms, t0, dt) / rms_window_norm(
        modes, atoms, t0, dt
    )


def _atom_exchange_matrix(modes: ModeSet) -> np.ndarray:
    """``A[j, j'] = sum_k g_jk conj(g_j'k) / (2 Delta_k)``."""
    g = modes.couplings
    return np.einsum("ak,bk,k->ab", g, g.conj(), 1.0 / (2.0 * modes.detunings))


def dispersive_heff(modes: ModeSet, atoms: AtomRegister, check_regime: bool = True) -> np.ndarray:
    """Atom-only dispersive Hamiltonian for the field in its vacuum.

    ``-sum_{jj'} A[j, j'] sigma_j'^dag sigma_j + h.c.``; a single atom gets
    ``-(g^2/Delta) sigma^dag sigma``.
    """
    _check_atoms(modes, atoms)
    if check_regime and not modes.is_dispersive:
        raise ValueError(
            f"not dispersive: need min|Delta| >= {DISPERSIVE_RATIO:g} max|g|"
        )
    a = _atom_exchange_matrix(modes)
    acc = np.zeros((atoms.dim, atoms.dim), dtype=complex)
    for j in range(atoms.n_atoms):
        for jp in range(atoms.n_atoms):
            acc -= a[j, jp] * dagger(atoms.sigma(jp)) @ atoms.sigma(j)
    return acc + dagger(acc)


def dispersive_second_order(modes: ModeSet) -> np.ndarray:
    """Full second-order Hamiltonian on atoms (x) modes, photon-number terms included.

    Adds ``sum_j sum'_{kk'} (g_jk conj(g_jk') / Delta_k) [sigma_j, sigma_j^dag] b_k^dag b_k'``
    over mode pairs with identical stored detunings. ``[sigma, sigma^dag]``
    is ``+1`` on the ground state: an excited atom with ``n`` photons shifts
    by ``-(n + 1) g^2 / Delta``, a ground-state atom by ``+n g^2 / Delta``.
    """
    atoms = AtomRegister(modes.n_atoms)
    nb = int(np.prod([modes.d] * modes.n_modes))
    h = np.kron(dispersive_heff(modes, atoms, check_regime=False), np.eye(nb))
    sig, b = _ladders(modes)
    g, det = modes.couplings, modes.detunings
    for j in range(modes.n_atoms):
        sz = sig[j] @ dagger(sig[j]) - dagger(sig[j]) @ sig[j]
        for k in range(modes.n_modes):
            for kp in range(modes.n_modes):
                if det[k] != det[kp]:
                    continue
                h = h + g[j, k] * np.conj(g[j, kp]) / det[k] * sz @ dagger(b[k]) @ b[kp]
    return h


def full_hamiltonian(modes: ModeSet) -> np.ndarray:
    """``sum_k Delta_k b_k^dag b_k + V`` in the frame rotating at the atomic frequency."""
    sig, b = _ladders(modes)
    h = _interaction(modes, np.ones(modes.n_modes))
    for k in range(modes.n_modes):
        h = h + modes.detunings[k] * dagger(b[k]) @ b[k]
    return h


def _evolve(h: np.ndarray, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """States ``exp(-i h t) psi0`` for every ``t``; shape ``(len(times), dim)``."""
    w, q = np.linalg.eigh(h)
    c = dagger(q) @ psi0
    return (np.exp(-1j * np.outer(times, w)) * c) @ q.T


@dataclass(frozen=True)
class DispersiveComparison:
    trajectory: Trajectory
    effective_populations: np.ndarray
    max_population_deviation: float
    bound: float


def exact_vs_effective(
    modes: ModeSet, initial_atoms: str, t_max: float, n_times: int = 20001
) -> DispersiveComparison:
    """Evolve atoms (label such as ``"e"``) with all modes in vacuum.

    The exact run uses :func:`full_hamiltonian`; the reference uses
    :func:`dispersive_heff` on the atoms alone. ``bound`` is
    ``5 (max|g| / min|Delta|)^2``.
    """
    atoms = AtomRegister(modes.n_atoms)
    times = np.linspace(0.0, t_max, n_times)
    rho_a = atoms.product_state(initial_atoms)
    i0 = int(np.argmax(np.diag(rho_a).real))
    nb = int(np.prod([modes.d] * modes.n_modes))
    psi0 = np.zeros(atoms.dim * nb, dtype=complex)
    psi0[i0 * nb] = 1.0
    psi = _evolve(full_hamiltonian(modes), psi0, times)
    eff = _evolve(dispersive_heff(modes, atoms), np.eye(atoms.dim)[i0].astype(complex), times)

    dims = modes.dims
    keep = range(modes.n_atoms)
    states = [partial_trace(np.outer(p, p.conj()), dims, keep) for p in psi]
    eff_states = [np.outer(p, p.conj()) for p in eff]
    pops = np.array([atom_populations(r, atoms) for r in states])
    eff_pops = np.array([atom_populations(r, atoms) for r in eff_states])
    traj = Trajectory(
        times=times,
        states=states,
        populations=pops,
        purity=np.array([purity(r) for r in states]),
        reference_distance=np.array([trace_distance(a, b) for a, b in zip(states, eff_states)]),
    )
    ratio = float(np.max(np.abs(modes.couplings))) / float(np.min(np.abs(modes.detunings)))
    return DispersiveComparison(
        traj, eff_pops, float(np.max(np.abs(pops - eff_pops))), 5.0 * ratio**2
    )


@dataclass(frozen=True)
class ExchangeSplitting:
    exact: float
    effective: float
    #: ``g^2 / Delta`` for a single shared mode with equal couplings
    expected_coupling: float

    @property
    def exact_coupling(self) -> float:
        return self.exact / 2.0

    @property
    def relative_error(self) -> float:
        return abs(self.exact_coupling - self.expected_coupling) / abs(self.expected_coupling)


def exchange_splitting(g: float, delta: float, d: int = 2) -> ExchangeSplitting:
    """Splitting of the two atom-like one-excitation levels of two atoms
    sharing one mode, exactly and from :func:`dispersive_heff`."""
    modes = ModeSet(np.array([delta]), np.array([[g], [g]]), d)
    h = full_hamiltonian(modes)
    # one-excitation sector: |eg,0>, |ge,0>, |gg,1>
    atoms = AtomRegister(2)
    nb = d
    idx = [atoms.basis_index([1, 0]) * nb, atoms.basis_index([0, 1]) * nb, 1]
    w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
    atomic_weight = np.sum(np.abs(v[:2, :]) ** 2, axis=0)
    levels = np.sort(w[np.argsort(atomic_weight)[-2:]])
    heff = dispersive_heff(modes, atoms)
    one = [atoms.basis_index([1, 0]), atoms.basis_index([0, 1])]
    we = np.linalg.eigvalsh(heff[np.ix_(one, one)])
    return ExchangeSplitting(
        exact=float(levels[1] - levels[0]),
        effective=float(we[1] - we[0]),
        expected_coupling=abs(g) ** 2 / abs(delta),
    )
