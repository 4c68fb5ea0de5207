"""Coupling-point layouts of giant atoms along a waveguide.

Only the phases of the coupling points and their left-to-right order enter
the dynamics (time delays between points are assumed negligible), so a
:class:`Layout` stores exactly that: an ordered tuple of points, each tagged
with its atom, its leg index within the atom and its phase ``k0 * x``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .constants import COUPLING_TOL, DF_TOL

TWO_PI = 2.0 * math.pi


class LayoutError(ValueError):
    """Invalid or degenerate layout input."""


class ClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class CouplingPoint:
    atom: int
    leg: int
    phase: float

    @property
    def reduced_phase(self) -> float:
        """Phase folded into ``[0, 2*pi)``."""
        r = math.fmod(self.phase, TWO_PI)
        if r < 0:
            r += TWO_PI
        # fmod can return 2*pi - eps that rounds to 2*pi
        return 0.0 if r >= TWO_PI else r


@dataclass(frozen=True)
class Layout:
    """Ordered coupling points (index ``nu`` runs left to right).

    ``gamma_right`` and ``gamma_left`` are the emission rates into right- and
    left-going modes; the waveguide is unidirectional when ``gamma_left == 0``.
    """

    points: tuple[CouplingPoint, ...]
    n_atoms: int
    gamma_right: float = 1.0
    gamma_left: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if self.n_atoms < 1:
            raise LayoutError("n_atoms must be positive")
        if self.gamma_right < 0 or self.gamma_left < 0:
            raise LayoutError("decay rates must be non-negative")
        next_leg = [0] * self.n_atoms
        for p in self.points:
            if not 0 <= p.atom < self.n_atoms:
                raise LayoutError(f"atom index {p.atom} outside [0, {self.n_atoms})")
            if p.leg != next_leg[p.atom]:
                raise LayoutError(
                    f"atom {p.atom}: leg {p.leg} out of order (expected {next_leg[p.atom]})"
                )
            next_leg[p.atom] += 1
        missing = [j for j, n in enumerate(next_leg) if n == 0]
        if missing:
            raise LayoutError(f"atoms without coupling points: {missing}")

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def unidirectional(self) -> bool:
        return self.gamma_left == 0.0

    @property
    def atom_pattern(self) -> tuple[int, ...]:
        return tuple(p.atom for p in self.points)

    @property
    def phases(self) -> np.ndarray:
        return np.array([p.phase for p in self.points], dtype=float)

    def points_of(self, j: int) -> list[int]:
        """Global indices ``nu`` of the coupling points of atom ``j``."""
        return [nu for nu, p in enumerate(self.points) if p.atom == j]

    def legs_per_atom(self) -> list[int]:
        return [len(self.points_of(j)) for j in range(self.n_atoms)]

    def with_rates(self, gamma_right: float, gamma_left: float) -> "Layout":
        return Layout(self.points, self.n_atoms, gamma_right, gamma_left)


def layout_from_phases(
    atoms: Sequence[int],
    phases: Sequence[float],
    gamma_right: float = 1.0,
    gamma_left: float = 0.0,
) -> Layout:
    """Build a layout from the left-to-right atom pattern and point phases."""
    if len(atoms) != len(phases):
        raise LayoutError("atoms and phases must have equal length")
    if not atoms:
        raise LayoutError("layout needs at least one coupling point")
    n_atoms = max(atoms) + 1
    legs = [0] * n_atoms
    pts = []
    for a, ph in zip(atoms, phases):
        if a < 0:
            raise LayoutError(f"negative atom index {a}")
        pts.append(CouplingPoint(int(a), legs[a], float(ph)))
        legs[a] += 1
    return Layout(tuple(pts), n_atoms, float(gamma_right), float(gamma_left))


def phases_from_positions(
    k0: float,
    positions: Iterable[tuple[int, float]],
    gamma_right: float = 1.0,
    gamma_left: float = 0.0,
) -> Layout:
    """Layout from physical positions: each point gets phase ``k0 * x``.

    ``positions`` is an iterable of ``(atom, x)``; points are sorted by ``x``.
    """
    if not k0 > 0:
        raise LayoutError("k0 must be positive")
    pos = sorted((float(x), int(a)) for a, x in positions)
    if not pos:
        raise LayoutError("layout needs at least one coupling point")
    xs = [x for x, _ in pos]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise LayoutError("duplicate coupling-point positions")
    atoms = [a for _, a in pos]
    present = sorted(set(atoms))
    if present != list(range(len(present))):
        raise LayoutError(f"atom indices must be 0..n-1 without gaps, got {present}")
    return layout_from_phases(atoms, [k0 * x for x in xs], gamma_right, gamma_left)


@dataclass(frozen=True)
class DfReport:
    per_atom_residual: tuple[float, ...]
    is_df: bool
    tolerance: float
    conjugate_mismatch: float = field(default=0.0)


def interference_sums(layout: Layout, sign: int = -1) -> np.ndarray:
    """Per-atom sums ``sum_l exp(sign * i * phi_jl)``."""
    out = np.zeros(layout.n_atoms, dtype=complex)
    for p in layout.points:
        out[p.atom] += np.exp(sign * 1j * p.phase)
    return out


def df_residual(layout: Layout, tol: float = DF_TOL) -> DfReport:
    """Magnitude of the per-atom interference sum; zero for every atom means
    the averaged interaction vanishes.

    Single-point atoms can never interfere away and are always flagged.
    """
    res = np.abs(interference_sums(layout, -1))
    res_conj = np.abs(interference_sums(layout, +1))
    mismatch = float(np.max(np.abs(res - res_conj)))
    if mismatch > COUPLING_TOL:
        raise AssertionError(f"conjugate residuals disagree by {mismatch:.3e}")
    single = [j for j, n in enumerate(layout.legs_per_atom()) if n < 2]
    is_df = bool(np.all(res <= tol)) and not single
    return DfReport(tuple(float(r) for r in res), is_df, tol, mismatch)


def is_df(layout: Layout, tol: float = DF_TOL) -> bool:
    return df_residual(layout, tol).is_df


class Topology(enum.Enum):
    SERIAL = "serial"
    NESTED = "nested"
    BRAIDED = "braided"
    OTHER = "other"


def classify_two_atom(layout: Layout) -> Topology:
    """Serial (0011), nested (0110) or braided (0101) ordering of two
    two-point atoms; ``OTHER`` when the point counts differ from 2+2."""
    if layout.n_atoms != 2:
        raise ClassificationError(f"expected 2 atoms, got {layout.n_atoms}")
    if layout.legs_per_atom() != [2, 2]:
        return Topology.OTHER
    pat = layout.atom_pattern
    # relabel so the first point belongs to atom "0"
    canon = tuple(0 if a == pat[0] else 1 for a in pat)
    return {
        (0, 0, 1, 1): Topology.SERIAL,
        (0, 1, 1, 0): Topology.NESTED,
        (0, 1, 0, 1): Topology.BRAIDED,
    }[canon]


def require_topology(layout: Layout, *allowed: Topology) -> Topology:
    topo = classify_two_atom(layout)
    if topo not in allowed:
        raise ClassificationError(
            f"layout is {topo.value}; expected one of {[t.value for t in allowed]}"
        )
    return topo


def is_interleaved(layout: Layout, j: int) -> bool:
    """True if a point of another atom lies strictly between the outermost
    points of atom ``j``."""
    nus = layout.points_of(j)
    if not nus:
        raise LayoutError(f"atom {j} has no coupling points")
    lo, hi = nus[0], nus[-1]
    return any(layout.points[nu].atom != j for nu in range(lo + 1, hi))


def equally_spaced(atoms: Sequence[int], step: float, **rates) -> Layout:
    """Points at phases ``0, step, 2*step, ...`` for the given atom pattern."""
    return layout_from_phases(atoms, [nu * step for nu in range(len(atoms))], **rates)


def serial(step: float = math.pi, **rates) -> Layout:
    return equally_spaced([0, 0, 1, 1], step, **rates)


def nested(step: float = math.pi, **rates) -> Layout:
    return equally_spaced([0, 1, 1, 0], step, **rates)


def braided(step: float = math.pi / 2, **rates) -> Layout:
    return equally_spaced([0, 1, 0, 1], step, **rates)


def random_df_layout(
    rng: np.random.Generator,
    n_atoms: int,
    legs: Sequence[int] | None = None,
    gamma_right: float = 1.0,
    gamma_left: float = 0.0,
    max_winding: int = 2,
) -> Layout:
    """Random layout satisfying the interference condition.

    Two-point atoms get an odd multiple of pi between their legs; three-point
    atoms get the cube roots of unity, each shifted by random multiples of
    2*pi. The interleaving pattern is a random shuffle.
    """
    legs = list(legs) if legs is not None else [2] * n_atoms
    atom_phases = []
    for n in legs:
        base = rng.uniform(0.0, TWO_PI)
        if n == 2:
            k = int(rng.integers(-max_winding, max_winding + 1))
            rel = [0.0, (2 * k + 1) * math.pi]
        elif n == 3:
            wind = rng.integers(-max_winding, max_winding + 1, size=2)
            rel = [0.0, TWO_PI / 3 + TWO_PI * wind[0], 2 * TWO_PI / 3 + TWO_PI * wind[1]]
        else:
            raise LayoutError("random_df_layout supports 2 or 3 legs per atom")
        atom_phases.append([base + r for r in rel])
    pattern = [j for j, n in enumerate(legs) for _ in range(n)]
    rng.shuffle(pattern)
    taken = [0] * n_atoms
    phases = []
    for a in pattern:
        phases.append(atom_phases[a][taken[a]])
        taken[a] += 1
    # relabel atoms by first appearance so indices follow the layout order
    order: dict[int, int] = {}
    for a in pattern:
        order.setdefault(a, len(order))
    return layout_from_phases(
        [order[a] for a in pattern], phases, gamma_right=gamma_right, gamma_left=gamma_left
    )
