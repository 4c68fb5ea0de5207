"""Gate-circuit form of the braided collision.

In the braided two-atom scheme a qubit mediator ``M`` (the right-going time
bin truncated to one photon) alternately exchanges with atom 0 and atom 1;
two rounds separated by a pi phase kick on ``M`` reproduce the cascaded
collision exactly. Qubit ``0`` is always ``M`` and qubit ``j + 1`` is atom
``j``; tensor factors follow the qubit index, so the 3-qubit flat index is
``m * 4 + a0 * 2 + a1``.

The phase gate is ``diag(1, exp(i theta))``; it differs from the traceless
``rz`` rotation by a global phase, so unitaries are compared up to global
phase throughout.
"""
from __future__ import annotations

import enum
import math
import re
import warnings
from dataclasses import dataclass

import numpy as np

from .collision import (
    CoarseGrainingWarning,
    ConfigError,
    SimConfig,
    Trajectory,
    atom_populations,
    cascaded_unitary,
)
from .constants import GAMMA_DT_COMPILE_MAX, GAMMA_DT_WARN, MAX_DIM
from .registers import SIGMA, AtomRegister, BinRegister
from .tensor import (
    check_density,
    dagger,
    expm_generator,
    kron_all,
    partial_trace,
    purity,
)
from .topology import Layout, Topology, classify_two_atom, df_residual


class CompileError(ValueError):
    pass


class CircuitError(ValueError):
    pass


class GateKind(enum.Enum):
    XY = "xy"
    PHASEZ = "rz"
    U4 = "u4"


@dataclass(frozen=True)
class Gate:
    """One gate; ``param`` is ``delta`` for XY and the angle for PhaseZ.

    ``U4`` gates carry an explicit two-qubit matrix (row-major, as a tuple)
    and are only produced by :func:`compile_general`.
    """

    kind: GateKind
    targets: tuple[int, ...]
    param: float = 0.0
    matrix: tuple[complex, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        t = self.targets
        if self.kind is GateKind.PHASEZ:
            if len(t) != 1:
                raise CircuitError("PhaseZ takes exactly one target")
        else:
            if len(t) != 2 or 0 not in t or t[0] == t[1]:
                raise CircuitError(f"{self.kind.value} needs two distinct targets including M (q[0])")
        if self.kind is GateKind.U4:
            if self.matrix is None or len(self.matrix) != 16:
                raise CircuitError("u4 gate needs 16 matrix entries")
            object.__setattr__(self, "matrix", tuple(complex(z) for z in self.matrix))
        elif self.matrix is not None:
            raise CircuitError(f"{self.kind.value} gate takes no explicit matrix")
        object.__setattr__(self, "param", float(self.param))

    def local_matrix(self) -> np.ndarray:
        if self.kind is GateKind.XY:
            return xy_matrix(self.param)
        if self.kind is GateKind.PHASEZ:
            return phase_matrix(self.param)
        return np.array(self.matrix, dtype=complex).reshape(4, 4)


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...] = ()
    n_qubits: int = 3

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n_qubits < 2:
            raise CircuitError("a circuit needs the mediator and at least one atom")
        for g in self.gates:
            if any(not 0 <= q < self.n_qubits for q in g.targets):
                raise CircuitError(f"gate targets {g.targets} outside 0..{self.n_qubits - 1}")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def labels(self) -> list[str]:
        return ["M"] + [f"A{j}" for j in range(self.n_qubits - 1)]


def xy_matrix(delta: float) -> np.ndarray:
    """Parametric exchange gate with inner block
    ``[[cos pi d, -i sin pi d], [-i sin pi d, cos pi d]]``."""
    c, s = math.cos(math.pi * delta), math.sin(math.pi * delta)
    return np.array(
        [[1, 0, 0, 0], [0, c, -1j * s, 0], [0, -1j * s, c, 0], [0, 0, 0, 1]], dtype=complex
    )


def phase_matrix(theta: float) -> np.ndarray:
    return np.diag([1.0, np.exp(1j * theta)]).astype(complex)


def _full_operator(local: np.ndarray, targets: tuple[int, ...], n: int) -> np.ndarray:
    """Embed a gate acting on ``targets`` (in that order) into ``n`` qubits."""
    rest = [q for q in range(n) if q not in targets]
    op = np.kron(local, np.eye(2 ** len(rest))).reshape([2] * (2 * n))
    # axes of ``op`` are ordered (targets, rest) for rows then columns
    order = list(targets) + rest
    perm = [order.index(q) for q in range(n)]
    op = op.transpose(perm + [n + p for p in perm])
    return op.reshape(2**n, 2**n)


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Ordered product of the gates, first gate acting first."""
    u = np.eye(2**c.n_qubits, dtype=complex)
    for g in c.gates:
        u = _full_operator(g.local_matrix(), g.targets, c.n_qubits) @ u
    return u


def _check_gamma_dt(gamma: float, dt: float, allow_large: bool) -> float:
    x = gamma * dt
    if not x > 0:
        raise CompileError("gamma * dt must be positive")
    if x > GAMMA_DT_COMPILE_MAX and not allow_large:
        raise CompileError(
            f"gamma * dt = {x:.6g} exceeds {GAMMA_DT_COMPILE_MAX}; pass an explicit override"
        )
    return x


def braided_delta(gamma: float, dt: float) -> float:
    return math.sqrt(gamma * dt) / math.pi


def compile_braided(gamma: float, dt: float, allow_large: bool = False) -> Circuit:
    """Six-gate circuit: two exchange rounds M-A0, M-A1, each followed by a
    pi phase kick on the mediator."""
    _check_gamma_dt(gamma, dt, allow_large)
    return braided_circuit(braided_delta(gamma, dt), math.pi)


def braided_circuit(delta: float, phi_m: float = math.pi) -> Circuit:
    """The braided gate sequence with an arbitrary mediator kick angle."""
    rnd = [
        Gate(GateKind.XY, (0, 1), delta),
        Gate(GateKind.XY, (0, 2), delta),
        Gate(GateKind.PHASEZ, (0,), phi_m),
    ]
    return Circuit(tuple(rnd + rnd), 3)


def iswap_iterations(gamma: float, dt: float) -> int:
    """``floor(1 / (gamma dt))`` iterations build the full exchange."""
    x = gamma * dt
    if not x > 0:
        raise ValueError("gamma * dt must be positive")
    # guard against 1/x landing a hair below an integer
    return max(1, int(math.floor(1.0 / x + 1e-9)))


# -- alignment with the collision engine ---------------------------------

def to_mediator_order(u: np.ndarray, n_atoms: int) -> np.ndarray:
    """Reorder a unitary on (atoms..., bin) with a qubit bin to (M, atoms...)."""
    n = n_atoms + 1
    if u.shape != (2**n, 2**n):
        raise CircuitError(f"expected a {2**n}x{2**n} operator with a qubit bin")
    t = u.reshape([2] * (2 * n))
    perm = [n_atoms] + list(range(n_atoms))
    return t.transpose(perm + [n + p for p in perm]).reshape(2**n, 2**n)


def gauge_unitary(layout: Layout) -> np.ndarray:
    """Atom phase rotation ``(x)_j diag(1, exp(i phi_j0))``.

    Conjugating by it removes the phase of each atom's first coupling point
    from the lowering operators, mapping the layout's slot generators onto
    the plain exchange generators used by the circuit.
    """
    first = [layout.points[layout.points_of(j)[0]].phase for j in range(layout.n_atoms)]
    return kron_all([phase_matrix(p) for p in first])


def cascaded_in_circuit_frame(layout: Layout, dt: float) -> np.ndarray:
    """Braided cascaded unitary (qubit bin) in the circuit's tensor order
    and gauge, ready to compare with :func:`circuit_unitary`."""
    if layout.n_atoms != 2 or classify_two_atom(layout) is not Topology.BRAIDED:
        raise CompileError("circuit frame is defined for braided two-atom layouts")
    if not layout.unidirectional:
        raise CompileError("circuit frame needs a unidirectional layout")
    u = cascaded_unitary(layout, AtomRegister(2), BinRegister(2), dt, warn=False)
    u = to_mediator_order(u, 2)
    g = np.kron(np.eye(2), gauge_unitary(layout))
    return dagger(g) @ u @ g


def mediator_blocks(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Split an (M, atoms) unitary into the M-preserving blocks.

    Returns ``(W0, W1, flip)`` with ``W_m = <m|U|m>`` on the atoms and
    ``flip`` the largest M-changing matrix element.
    """
    h = u.shape[0] // 2
    w0, w1 = u[:h, :h], u[h:, h:]
    flip = float(max(np.max(np.abs(u[:h, h:])), np.max(np.abs(u[h:, :h]))))
    return w0, w1, flip


def m_flip_amplitude(u: np.ndarray) -> float:
    return mediator_blocks(u)[2]


def block_diagonality_defect(u: np.ndarray) -> float:
    """Distance of an (M, atoms) unitary from ``1_M (x) W``."""
    w0, w1, flip = mediator_blocks(u)
    return max(flip, float(np.max(np.abs(w0 - w1))))


def iterate_circuit(
    c: Circuit, rho_atoms: np.ndarray, n: int, record: bool = False
) -> np.ndarray | list[np.ndarray]:
    """Apply ``c`` ``n`` times with a fresh mediator in ``|0>`` each time."""
    check_density(rho_atoms)
    u = circuit_unitary(c)
    ud = dagger(u)
    m0 = np.zeros((2, 2), dtype=complex)
    m0[0, 0] = 1.0
    dims = [2] * c.n_qubits
    keep = range(1, c.n_qubits)
    rho = np.asarray(rho_atoms, dtype=complex)
    out = [rho]
    for _ in range(n):
        rho = partial_trace(u @ np.kron(m0, rho) @ ud, dims, keep)
        rho = 0.5 * (rho + dagger(rho))
        out.append(rho)
    return out if record else rho


def purity_probe(config: SimConfig, phi_m: float) -> Trajectory:
    """Stream the braided circuit with mediator kick angle ``phi_m``.

    With ``phi_m`` an odd multiple of pi the mediator is returned to its
    input state and the atoms stay pure; other angles leave atom-mediator
    entanglement behind each step.
    """
    layout = config.layout
    if layout.n_atoms != 2 or classify_two_atom(layout) is not Topology.BRAIDED:
        raise ConfigError("purity_probe needs a braided two-atom layout")
    if not layout.unidirectional:
        raise ConfigError("purity_probe needs a unidirectional layout")
    if not df_residual(layout).is_df:
        raise ConfigError("purity_probe needs a layout satisfying the interference condition")
    if config.gamma_dt > GAMMA_DT_WARN:
        warnings.warn(
            f"gamma*dt = {config.gamma_dt:.3g} exceeds {GAMMA_DT_WARN}", CoarseGrainingWarning,
            stacklevel=2,
        )
    c = braided_circuit(braided_delta(layout.gamma_right, config.dt), phi_m)
    g = gauge_unitary(layout)
    # the circuit acts in the gauge where the first point of each atom has phase 0
    rho0 = dagger(g) @ np.asarray(config.initial_atom_state, dtype=complex) @ g
    states = [g @ r @ dagger(g) for r in iterate_circuit(c, rho0, config.steps, record=True)]
    atoms = config.atoms
    return Trajectory(
        times=config.dt * np.arange(config.steps + 1),
        states=states,
        populations=np.array([atom_populations(r, atoms) for r in states]),
        purity=np.array([purity(r) for r in states]),
    )


# -- general layouts -------------------------------------------------------

def compile_general(layout: Layout, dt: float, max_dim: int = MAX_DIM) -> Circuit:
    """One exact two-qubit ``u4`` gate per coupling point, in slot order.

    Qubit 0 is the right-going bin truncated to one photon. No phase-kick
    simplification is attempted.
    """
    if not dt > 0:
        raise CompileError("dt must be positive")
    if not layout.unidirectional:
        raise CompileError("general compilation supports unidirectional layouts only")
    if 2 ** (layout.n_atoms + 1) > max_dim:
        raise CompileError("circuit dimension exceeds the cap")
    c = math.sqrt(layout.gamma_right / dt)
    bdag = dagger(SIGMA)  # photon creation on the qubit mediator
    gates = []
    for p in layout.points:
        a = np.exp(-1j * p.phase) * np.kron(bdag, SIGMA)
        u = expm_generator(c * (a + dagger(a)), dt)
        gates.append(Gate(GateKind.U4, (0, p.atom + 1), matrix=tuple(u.ravel())))
    return Circuit(tuple(gates), layout.n_atoms + 1)


# -- text format -----------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_text(c: Circuit) -> str:
    lines = [f"qubits {c.n_qubits}", "# " + " ".join(f"q[{i}]={l}" for i, l in enumerate(c.labels))]
    for g in c.gates:
        q = ",".join(f"q[{t}]" for t in g.targets)
        if g.kind is GateKind.XY:
            lines.append(f"xy {q} delta={_fmt(g.param)}")
        elif g.kind is GateKind.PHASEZ:
            lines.append(f"rz {q} theta={_fmt(g.param)}")
        else:
            vals = ",".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in g.matrix)
            lines.append(f"u4 {q} m={vals}")
    return "\n".join(lines) + "\n"


_GATE_RE = re.compile(r"^(xy|rz|u4)\s+((?:q\[\d+\],?)+)\s+(delta|theta|m)=(\S+)$")


def parse_text(text: str) -> Circuit:
    """Inverse of :func:`emit_text`; errors name the offending line."""
    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("qubits"):
            try:
                n_qubits = int(line.split()[1])
            except (IndexError, ValueError):
                raise CircuitError(f"line {lineno}: bad qubit count: {raw!r}") from None
            continue
        m = _GATE_RE.match(line)
        if not m:
            raise CircuitError(f"line {lineno}: cannot parse gate: {raw!r}")
        name, qs, key, val = m.groups()
        targets = tuple(int(t) for t in re.findall(r"q\[(\d+)\]", qs))
        kind = GateKind(name)
        expected = {GateKind.XY: "delta", GateKind.PHASEZ: "theta", GateKind.U4: "m"}[kind]
        if key != expected:
            raise CircuitError(f"line {lineno}: {name} expects {expected}=")
        try:
            if kind is GateKind.U4:
                f = [float(v) for v in val.split(",")]
                if len(f) != 32:
                    raise ValueError
                gates.append(Gate(kind, targets, matrix=tuple(complex(a, b) for a, b in zip(f[::2], f[1::2]))))
            else:
                gates.append(Gate(kind, targets, float(val)))
        except ValueError as e:
            raise CircuitError(f"line {lineno}: bad parameter: {e or val}") from None
    if n_qubits is None:
        raise CircuitError("missing 'qubits' header")
    return Circuit(tuple(gates), n_qubits)
