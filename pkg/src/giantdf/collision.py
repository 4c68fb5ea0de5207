"""Cascaded collision model of giant atoms and a stream of field time bins.

Each time step a fresh bin (right-going, plus left-going in bidirectional
mode) enters in the vacuum, collides with the atoms, and is traced out. The
collision unitary can be built in several ways:

``CASCADED``
    ordered product of exact sub-collision exponentials, one slot per
    coupling point (rightmost factor = first slot);
``SIMULTANEOUS``
    ``exp(-i V dt)`` with the averaged interaction ``V``;
``MAGNUS``
    the second-order truncation ``1 - i(V + H)dt - V^2 dt^2/2``;
``EFFECTIVE``
    ``exp(-i H_eff dt)`` acting on the atoms alone.
"""
from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import GAMMA_DT_WARN, MAX_DIM, STRUCTURAL_TOL
from .effective import (
    check_bins,
    averaged_interaction,
    magnus_step_unitary,
    point_operators,
    second_order_H,
)
from .registers import AtomRegister, BinRegister, JointSpace
from .tensor import (
    DimensionError,
    check_density,
    commutator,
    dagger,
    expm_generator,
    partial_trace,
    purity,
    trace_distance,
)
from .topology import Layout, df_residual


class ConfigError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class NonDFWarning(UserWarning):
    """The layout does not cancel the averaged interaction."""


class CoarseGrainingWarning(UserWarning):
    """gamma * dt is too large for the second-order description."""


class Direction(enum.Enum):
    RIGHT = "right"
    LEFT = "left"
    BOTH = "both"


@dataclass(frozen=True)
class SubcollisionGen:
    """Generator of one cascaded slot.

    In bidirectional mode slot ``nu`` pairs right-going point ``nu`` with
    left-going point ``N - 1 - nu`` (0-based), stored in ``left_nu``.
    """

    nu: int
    direction: Direction
    generator: np.ndarray
    left_nu: int | None = None


def point_generators(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Single-point generators ``V_nu`` (right) and ``V'_nu`` (left; empty if
    unidirectional) on the joint space."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    check_bins(layout, bins)
    space = JointSpace(atoms, bins)
    s, sp = point_operators(layout, atoms)
    b = space.b_right
    c = math.sqrt(layout.gamma_right / dt)
    right = []
    for op in s:
        a = space.on_atoms(op) @ dagger(b)
        right.append(c * (a + dagger(a)))
    left = []
    if bins.bidirectional:
        bl = space.b_left
        cl = math.sqrt(layout.gamma_left / dt)
        for op in sp:
            a = space.on_atoms(op) @ dagger(bl)
            left.append(cl * (a + dagger(a)))
    return right, left


def subcollision_generators(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> list[SubcollisionGen]:
    right, left = point_generators(layout, atoms, bins, dt)
    n = layout.n_points
    if not left:
        return [SubcollisionGen(nu, Direction.RIGHT, right[nu]) for nu in range(n)]
    return [
        SubcollisionGen(nu, Direction.BOTH, right[nu] + left[n - 1 - nu], left_nu=n - 1 - nu)
        for nu in range(n)
    ]


def _warn_if_not_df(layout: Layout, what: str) -> None:
    if not df_residual(layout).is_df:
        warnings.warn(
            f"{what}: layout does not satisfy the interference condition", NonDFWarning, stacklevel=3
        )


def cascaded_unitary(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float, warn: bool = True
) -> np.ndarray:
    """Ordered product of slot exponentials, first slot acting first."""
    if warn:
        _warn_if_not_df(layout, "cascaded_unitary")
    gens = subcollision_generators(layout, atoms, bins, dt)
    u = np.eye(gens[0].generator.shape[0], dtype=complex)
    for g in gens:
        u = expm_generator(g.generator, dt) @ u
    return u


def simultaneous_unitary(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> np.ndarray:
    return expm_generator(averaged_interaction(layout, atoms, bins, dt), dt)


def commutator_sum(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> np.ndarray:
    """``(i dt / 2) sum_{nu > nu'} [W_nu', W_nu]`` over the slot generators.

    This is the second-order term produced by expanding the cascaded product.
    """
    w = [g.generator for g in subcollision_generators(layout, atoms, bins, dt)]
    acc = np.zeros_like(w[0])
    for nu in range(len(w)):
        for mu in range(nu):
            acc += commutator(w[mu], w[nu])
    return 0.5j * dt * acc


def vacuum_block_error(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> float:
    """``max|(U_cascaded - exp(-i H dt)) P_vac|`` on fresh-bin inputs.

    Only columns with all bins in the vacuum are compared: those are the
    inputs the stream ever feeds to a collision, and they are free of the
    Fock-truncation defect at the top bin level.
    """
    space = JointSpace(atoms, bins)
    u = cascaded_unitary(layout, atoms, bins, dt, warn=False)
    e = expm_generator(second_order_H(layout, atoms, bins), dt)
    cols = space.vacuum_columns()
    return float(np.max(np.abs((u - e)[:, cols])))


@dataclass(frozen=True)
class MagnusReport:
    err2: float
    err2_half: float
    order: float


def magnus_consistency(
    layout: Layout, atoms: AtomRegister, bins: BinRegister, dt: float
) -> MagnusReport:
    """Error of the cascaded product against ``exp(-i H dt)`` at ``dt`` and
    ``dt/2`` with the empirical order ``log2(err(dt) / err(dt/2))``.

    ``order`` is NaN when both errors sit at roundoff (trivial topologies).
    """
    if not df_residual(layout).is_df:
        raise PreconditionError("magnus_consistency requires a decoherence-free layout")
    e1 = vacuum_block_error(layout, atoms, bins, dt)
    e2 = vacuum_block_error(layout, atoms, bins, dt / 2)
    if e1 <= STRUCTURAL_TOL or e2 <= STRUCTURAL_TOL:
        order = float("nan")
    else:
        order = math.log2(e1 / e2)
    return MagnusReport(e1, e2, order)


def fitted_order(dts: Sequence[float], errs: Sequence[float]) -> float:
    """Least-squares slope of ``log err`` against ``log dt``."""
    return float(np.polyfit(np.log(dts), np.log(errs), 1)[0])


class Engine(enum.Enum):
    CASCADED = "cascaded"
    SIMULTANEOUS = "simultaneous"
    MAGNUS = "magnus"
    EFFECTIVE = "effective"


@dataclass(frozen=True)
class SimConfig:
    layout: Layout
    dt: float
    steps: int
    initial_atom_state: np.ndarray
    bins: BinRegister = field(default_factory=BinRegister)
    engine: Engine = Engine.CASCADED
    #: Input state of each fresh bin; vacuum when ``None``.
    bin_state: np.ndarray | None = None
    max_dim: int = MAX_DIM

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.steps < 1:
            raise ConfigError("steps must be positive")
        if self.layout.gamma_left > 0 and not self.bins.bidirectional:
            raise ConfigError("gamma_left > 0 requires d_left >= 2")
        n = self.layout.n_atoms
        if np.shape(self.initial_atom_state) != (2**n, 2**n):
            raise ConfigError(f"initial state must be {2**n}x{2**n}")
        if self.atoms.dim * self.bins.dim > self.max_dim:
            raise ConfigError(
                f"joint dimension {self.atoms.dim * self.bins.dim} exceeds the cap of {self.max_dim}"
            )

    @property
    def atoms(self) -> AtomRegister:
        return AtomRegister(self.layout.n_atoms)

    @property
    def gamma_dt(self) -> float:
        return max(self.layout.gamma_right, self.layout.gamma_left) * self.dt


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[np.ndarray]
    populations: np.ndarray
    purity: np.ndarray
    reference_distance: np.ndarray | None = None

    @property
    def n_atoms(self) -> int:
        return self.populations.shape[1]

    def check(self, tol: float = 1e-9) -> None:
        for rho in self.states:
            check_density(rho, tol)
        steps = np.diff(self.times)
        if np.any(steps <= 0):
            raise AssertionError("times are not strictly increasing")


def atom_populations(rho: np.ndarray, atoms: AtomRegister) -> np.ndarray:
    return np.array([np.real(np.trace(atoms.number(j) @ rho)) for j in range(atoms.n_atoms)])


def step_unitary(config: SimConfig) -> np.ndarray:
    """Collision unitary of one step for the configured engine.

    ``EFFECTIVE`` returns an atom-only operator, every other engine an
    operator on atoms (x) bins.
    """
    layout, atoms, bins, dt = config.layout, config.atoms, config.bins, config.dt
    eng = config.engine
    if eng in (Engine.CASCADED, Engine.EFFECTIVE, Engine.MAGNUS):
        _warn_if_not_df(layout, f"engine {eng.value}")
    if eng is Engine.CASCADED:
        return cascaded_unitary(layout, atoms, bins, dt, warn=False)
    if eng is Engine.SIMULTANEOUS:
        return simultaneous_unitary(layout, atoms, bins, dt)
    if eng is Engine.MAGNUS:
        return magnus_step_unitary(layout, atoms, bins, dt)
    return expm_generator(second_order_H(layout, atoms), dt)


def bin_marginal(joint: np.ndarray, atoms: AtomRegister, bins: BinRegister) -> np.ndarray:
    dims = atoms.dims + bins.dims
    n = atoms.n_atoms
    return partial_trace(joint, dims, range(n, len(dims)))


def run_stream(
    config: SimConfig,
    reference: Engine | None = None,
    on_joint: Callable[[int, np.ndarray], None] | None = None,
) -> Trajectory:
    """Stream fresh time bins through the atoms for ``config.steps`` steps.

    The returned trajectory includes the initial state at ``t = 0``.
    ``on_joint(step, sigma)`` receives the joint atoms-bins state after each
    collision and before the bins are traced out (not called for the
    ``EFFECTIVE`` engine). With ``reference`` set, a second trajectory is run
    with that engine and the per-step trace distance is stored.
    """
    if config.gamma_dt > GAMMA_DT_WARN:
        warnings.warn(
            f"gamma*dt = {config.gamma_dt:.3g} exceeds {GAMMA_DT_WARN}", CoarseGrainingWarning,
            stacklevel=2,
        )
    atoms, bins = config.atoms, config.bins
    rho = np.asarray(config.initial_atom_state, dtype=complex)
    check_density(rho)
    u = step_unitary(config)
    ud = dagger(u)
    env = bins.vacuum() if config.bin_state is None else np.asarray(config.bin_state, complex)
    renormalize = config.engine is Engine.MAGNUS
    dims = atoms.dims + bins.dims
    keep = range(atoms.n_atoms)

    states = [rho]
    for n in range(1, config.steps + 1):
        if config.engine is Engine.EFFECTIVE:
            rho = u @ rho @ ud
        else:
            joint = u @ np.kron(rho, env) @ ud
            if renormalize:
                joint = joint / np.trace(joint)
            if on_joint is not None:
                on_joint(n, joint)
            rho = partial_trace(joint, dims, keep)
        rho = 0.5 * (rho + dagger(rho))
        states.append(rho)

    times = config.dt * np.arange(config.steps + 1)
    traj = Trajectory(
        times=times,
        states=states,
        populations=np.array([atom_populations(r, atoms) for r in states]),
        purity=np.array([purity(r) for r in states]),
    )
    if reference is not None:
        ref_cfg = SimConfig(
            config.layout, config.dt, config.steps, config.initial_atom_state,
            config.bins, reference, config.bin_state, config.max_dim,
        )
        ref = run_stream(ref_cfg)
        traj.reference_distance = np.array(
            [trace_distance(a, b) for a, b in zip(traj.states, ref.states)]
        )
    return traj


def run_sweep(
    configs: Sequence[SimConfig],
    reference: Engine | None = None,
    max_workers: int | None = None,
) -> list[Trajectory]:
    """Run independent configurations concurrently; results keep input order."""
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(lambda c: run_stream(c, reference), configs))


__all__ = [
    "ConfigError",
    "CoarseGrainingWarning",
    "DimensionError",
    "Direction",
    "Engine",
    "MagnusReport",
    "NonDFWarning",
    "PreconditionError",
    "SimConfig",
    "SubcollisionGen",
    "Trajectory",
    "bin_marginal",
    "cascaded_unitary",
    "commutator_sum",
    "fitted_order",
    "magnus_consistency",
    "point_generators",
    "run_stream",
    "run_sweep",
    "simultaneous_unitary",
    "step_unitary",
    "subcollision_generators",
    "vacuum_block_error",
]
