"""Bundled invariant checks, runnable as one pass/fail suite.

Every check returns a :class:`CheckResult`; :func:`run_all` runs them in a
fixed order with a seeded generator so the report is reproducible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circuit import cascaded_in_circuit_frame, circuit_unitary, compile_braided
from .collision import (
    cascaded_unitary,
    commutator_sum,
    fitted_order,
    simultaneous_unitary,
    vacuum_block_error,
)
from .effective import (
    averaged_interaction,
    coupling_matrix,
    second_order_H,
    sine_sum,
    single_excitation_block,
)
from .registers import AtomRegister, BinRegister, JointSpace, bins_for
from .tensor import phase_aligned_distance
from .topology import (
    Layout,
    braided,
    equally_spaced,
    is_interleaved,
    layout_from_phases,
    nested,
    random_df_layout,
    serial,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float
    passed: bool
    #: "le" when ``value <= tol`` passes, "ge" when ``value >= tol`` passes
    sense: str = "le"

    def line(self) -> str:
        op = "<=" if self.sense == "le" else ">="
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} {op} {self.tol:.1e}"


def _le(name: str, value: float, tol: float) -> CheckResult:
    return CheckResult(name, float(value), tol, bool(value <= tol), "le")


def _ge(name: str, value: float, tol: float) -> CheckResult:
    return CheckResult(name, float(value), tol, bool(value >= tol), "ge")


def _max_dev_from_identity(u: np.ndarray) -> float:
    return float(np.max(np.abs(u - np.eye(u.shape[0]))))


def single_df_atom() -> Layout:
    return layout_from_phases([0, 0], [0.0, math.pi])


def trivial_identity_error() -> float:
    """Largest deviation of the cascaded collision from identity for the
    serial, nested and single-atom layouts."""
    worst = 0.0
    for lay in (serial(), nested(), single_df_atom()):
        atoms = AtomRegister(lay.n_atoms)
        for dt in (0.01, 0.1):
            u = cascaded_unitary(lay, atoms, BinRegister(2), dt, warn=False)
            worst = max(worst, _max_dev_from_identity(u))
    return worst


def braided_spectrum_error(gamma_right: float = 1.0, gamma_left: float = 0.0) -> float:
    """Distance of the one-excitation spectrum of the braided Hamiltonian
    from ``+-(gamma_right + gamma_left)``."""
    lay = braided(gamma_right=gamma_right, gamma_left=gamma_left)
    atoms = AtomRegister(2)
    block = single_excitation_block(second_order_H(lay, atoms), atoms)
    w = np.linalg.eigvalsh(block)
    g = gamma_right + gamma_left
    return float(np.max(np.abs(w - np.array([-g, g]))))


def isolated_atom_layout(
    rng: np.random.Generator, gamma_right: float = 1.0, gamma_left: float = 0.0
) -> tuple[Layout, int]:
    """Random three-atom DF layout where one atom's two points are adjacent.

    Returns the layout and the index of the non-interleaved atom.
    """
    base = random_df_layout(rng, 2, gamma_right=gamma_right, gamma_left=gamma_left)
    pat = list(base.atom_pattern)
    ph = list(base.phases)
    pos = int(rng.integers(0, len(pat) + 1))
    a = rng.uniform(0.0, 2 * math.pi)
    k = int(rng.integers(-2, 3))
    pat[pos:pos] = [2, 2]
    ph[pos:pos] = [a, a + (2 * k + 1) * math.pi]
    order: dict[int, int] = {}
    for j in pat:
        order.setdefault(j, len(order))
    lay = layout_from_phases([order[j] for j in pat], ph, gamma_right, gamma_left)
    iso = order[2]
    assert not is_interleaved(lay, iso)
    return lay, iso


def decoupling_errors(layout: Layout, atom: int) -> tuple[float, float, float]:
    """``(max |off-diagonal J row/col|, |Re J_aa|, max |J - (g K + g' K*)|)``."""
    cm = coupling_matrix(layout)
    J = cm.J
    mask = np.ones(J.shape[0], dtype=bool)
    mask[atom] = False
    off = max(np.max(np.abs(J[atom, mask])), np.max(np.abs(J[mask, atom])))
    recon = cm.gamma_right * cm.K + cm.gamma_left * np.conj(cm.K)
    return float(off), float(abs(J[atom, atom].real)), float(np.max(np.abs(J - recon)))


def commutator_identity_error(layout: Layout, dt: float = 0.01, d: int = 2) -> float:
    """``max |(commutator sum - H) P_vac|`` over fresh-bin inputs."""
    atoms = AtomRegister(layout.n_atoms)
    bins = bins_for(layout, d)
    space = JointSpace(atoms, bins)
    diff = commutator_sum(layout, atoms, bins, dt) - second_order_H(layout, atoms, bins)
    return float(np.max(np.abs(diff[:, space.vacuum_columns()])))


def averaged_interaction_norm(layout: Layout, dt: float = 0.01) -> float:
    atoms = AtomRegister(layout.n_atoms)
    return float(np.max(np.abs(averaged_interaction(layout, atoms, bins_for(layout), dt))))


MAGNUS_DTS = (1e-2, 5e-3, 2.5e-3)


def magnus_errors(layout: Layout | None = None, dts=MAGNUS_DTS, d: int = 2) -> list[float]:
    layout = layout or braided()
    atoms = AtomRegister(layout.n_atoms)
    g = layout.gamma_right
    return [vacuum_block_error(layout, atoms, BinRegister(d), x / g) for x in dts]


def circuit_identity_error(gamma_dt: float) -> float:
    lay = braided()
    return phase_aligned_distance(
        circuit_unitary(compile_braided(1.0, gamma_dt)), cascaded_in_circuit_frame(lay, gamma_dt)
    )


def three_point_layout() -> Layout:
    return equally_spaced([0, 0, 0], 2 * math.pi / 3)


def run_all(seed: int = 0, tol: float | None = None, n_random: int = 20) -> list[CheckResult]:
    """Run the invariant suite. ``tol`` overrides every identity tolerance."""
    rng = np.random.default_rng(seed)
    t12 = tol if tol is not None else 1e-12
    t13 = tol if tol is not None else 1e-13
    out: list[CheckResult] = []
    add: Callable[[CheckResult], None] = out.append

    add(_le("trivial topologies give the identity collision", trivial_identity_error(), t12))
    add(_le("braided spectrum is +-gamma", braided_spectrum_error(), t12))
    add(_le("isotropic braided spectrum is +-Gamma", braided_spectrum_error(0.5, 0.5), t12))

    lays = [random_df_layout(rng, int(rng.integers(2, 4))) for _ in range(n_random)]
    lays += [
        random_df_layout(rng, 2, gamma_right=1.0, gamma_left=float(rng.uniform(0.1, 1.0)))
        for _ in range(n_random)
    ]
    add(_le("averaged interaction vanishes for DF layouts",
            max(averaged_interaction_norm(l) for l in lays), t12))
    worst_sim = 0.0
    for l in lays[:5]:
        atoms = AtomRegister(l.n_atoms)
        u = simultaneous_unitary(l, atoms, bins_for(l), 0.01)
        worst_sim = max(worst_sim, _max_dev_from_identity(u))
    add(_le("simultaneous collision is the identity for DF layouts", worst_sim, t12))
    add(_le("commutator sum equals the second-order Hamiltonian",
            max(commutator_identity_error(l) for l in lays), t12))

    off = re_diag = recon = 0.0
    for _ in range(10):
        gr, gl = rng.uniform(0.2, 1.5, size=2)
        lay, iso = isolated_atom_layout(rng, float(gr), float(gl))
        a, b, c = decoupling_errors(lay, iso)
        off, re_diag, recon = max(off, a), max(re_diag, b), max(recon, c)
    add(_le("non-interleaved atom decouples", max(off, re_diag), t13))
    add(_le("J = gamma K + gamma' conj(K)", recon, t13))

    errs = magnus_errors()
    add(_ge("cascaded vs second-order order", fitted_order(MAGNUS_DTS, errs), 1.5))
    add(_le("three-point sine sum equals sqrt(3)/2",
            abs(sine_sum(three_point_layout()) - math.sqrt(3) / 2), t12))
    add(_le("circuit equals cascaded collision",
            max(circuit_identity_error(x) for x in (0.25, 0.01, 1e-4)), t12))
    return out
