"""Command-line front end.

Exit codes: 0 success, 1 input or parse error, 2 analysis negative (layout
not decoherence-free), 3 tolerance failure.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuit import (
    CircuitError,
    CompileError,
    braided_delta,
    cascaded_in_circuit_frame,
    circuit_unitary,
    compile_braided,
    compile_general,
    emit_text,
    iswap_iterations,
    m_flip_amplitude,
)
from .collision import ConfigError, Engine, SimConfig, run_stream, run_sweep
from .dispersive import (
    ModeSet,
    SingularDetuningError,
    detuning_scaling_ratio,
    exact_vs_effective,
    exchange_splitting,
)
from .effective import coupling_matrix, heff_from_coupling, lamb_shift_check, single_excitation_block
from .formats import (
    FormatError,
    RunConfig,
    complex_matrix_csv,
    manifest_json,
    parse_engine,
    parse_reference,
    read_config,
    read_layout,
    trajectory_csv,
)
from .registers import AtomRegister
from .tensor import DimensionError, phase_aligned_distance
from .topology import ClassificationError, LayoutError, braided, classify_two_atom, df_residual
from .verify import run_all

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_TOLERANCE = 0, 1, 2, 3
INPUT_ERRORS = (
    FormatError, ConfigError, LayoutError, CompileError, CircuitError, DimensionError,
    ClassificationError, SingularDetuningError, OSError, ValueError,
)


class OutputExistsError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class Outputs:
    """Collects output files and writes them only if none would be clobbered
    (unless ``force``)."""

    def __init__(self, force: bool):
        self.force = force
        self.files: dict[Path, str] = {}

    def add(self, path: Path, text: str) -> None:
        self.files[Path(path)] = text

    def commit(self) -> list[str]:
        if not self.force:
            clash = sorted(str(p) for p in self.files if p.exists())
            if clash:
                raise OutputExistsError(
                    f"refusing to overwrite {', '.join(clash)} (use --force)"
                )
        for p, text in self.files.items():
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        return sorted(p.name for p in self.files)


def _manifest(args: argparse.Namespace, outputs: Outputs, out_dir: Path, **extra) -> None:
    inputs = {k: str(getattr(args, k)) for k in ("layout", "config") if getattr(args, k, None)}
    names = sorted([p.name for p in outputs.files] + ["manifest.json"])
    m = {
        "command": args.command,
        "inputs": inputs,
        "output_dir": str(out_dir),
        "files": names,
        "seed": getattr(args, "seed", None),
        "tol": getattr(args, "tol", None),
    }
    m.update(extra)
    outputs.add(out_dir / "manifest.json", manifest_json(m))


def _fmt_c(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}i"


# -- subcommands -----------------------------------------------------------

def cmd_check_df(args) -> int:
    layout = read_layout(args.layout)
    rep = df_residual(layout, args.tol) if args.tol is not None else df_residual(layout)
    for j, r in enumerate(rep.per_atom_residual):
        print(f"atom {j}: residual {r:.3e}")
    line = f"DF: {'yes' if rep.is_df else 'no'}"
    if layout.n_atoms == 2:
        line += f", class: {classify_two_atom(layout).value}"
    print(line)
    return EXIT_OK if rep.is_df else EXIT_NEGATIVE


def cmd_heff(args) -> int:
    layout = read_layout(args.layout)
    rep = df_residual(layout)
    if not rep.is_df:
        print("DF: no -- diagnostic only: without the interference condition the "
              "reduced dynamics need not be unitary and H_eff is not guaranteed")
    cm = coupling_matrix(layout)
    atoms = AtomRegister(layout.n_atoms)
    h = heff_from_coupling(cm.J, atoms)
    print("J (pair sum) =")
    for row in cm.J:
        print("  " + "  ".join(_fmt_c(z) for z in row))
    w = np.linalg.eigvalsh(single_excitation_block(h, atoms))
    print("H_eff single-excitation spectrum: " + ", ".join(f"{x:+.12f}" for x in w))
    shifts = cm.sigma_z_shifts()
    print("sigma_z shifts (Re J_jj): " + ", ".join(f"{x:+.12f}" for x in shifts))
    if rep.is_df and layout.n_atoms == 1 and layout.unidirectional:
        s = lamb_shift_check(layout)
        print(f"single-atom sigma_z coefficient: {s:+.15f} (sine sum {2 * s / layout.gamma_right:.15f})")
    if args.out:
        out = Path(args.out)
        outputs = Outputs(args.force)
        outputs.add(out / "J.csv", complex_matrix_csv(cm.reduced))
        outputs.add(out / "J_pairsum.csv", complex_matrix_csv(cm.J))
        outputs.add(out / "H_eff.csv", complex_matrix_csv(h))
        _manifest(args, outputs, out)
        outputs.commit()
    return EXIT_OK if rep.is_df else EXIT_NEGATIVE


def _sim_config(rc: RunConfig, dt: float, steps: int, engine: Engine) -> SimConfig:
    atoms = AtomRegister(rc.layout.n_atoms)
    return SimConfig(rc.layout, dt, steps, atoms.product_state(rc.initial), rc.bins, engine)


def _overrides(args, rc: RunConfig) -> tuple[Engine, Engine | None]:
    engine = parse_engine(args.engine) if args.engine else rc.engine
    reference = parse_reference(args.reference) if args.reference else rc.reference
    return engine, reference


def cmd_simulate(args) -> int:
    rc = read_config(args.config)
    engine, reference = _overrides(args, rc)
    cfg = _sim_config(rc, rc.dt, rc.steps, engine)
    traj = run_stream(cfg, reference=reference)
    out = Path(args.out)
    outputs = Outputs(args.force)
    outputs.add(out / "trajectory.csv", trajectory_csv(traj))
    _manifest(args, outputs, out, engine=engine.value,
              reference=reference.value if reference else "none")
    outputs.commit()
    print(f"steps: {rc.steps}, dt: {rc.dt:g}, engine: {engine.value}")
    print("final populations: " + ", ".join(f"{p:.6f}" for p in traj.populations[-1]))
    print(f"min purity: {np.min(traj.purity):.12f}")
    if traj.reference_distance is not None:
        worst = float(np.max(traj.reference_distance))
        print(f"max trace distance to {reference.value}: {worst:.6e}")
        if args.tol is not None and worst > args.tol:
            print(f"FAIL: exceeds tolerance {args.tol:g}")
            return EXIT_TOLERANCE
    return EXIT_OK


def cmd_sweep(args) -> int:
    rc = read_config(args.config)
    engine, reference = _overrides(args, rc)
    dts = rc.sweep_dt or (rc.dt,)
    t_end = rc.dt * rc.steps
    # every run covers the same physical time span as the base configuration
    cfgs = [_sim_config(rc, dt, max(1, round(t_end / dt)), engine) for dt in dts]
    trajs = run_sweep(cfgs, reference=reference)
    out = Path(args.out)
    outputs = Outputs(args.force)
    for i, (dt, tr) in enumerate(zip(dts, trajs)):
        outputs.add(out / f"sweep_{i:03d}.csv", trajectory_csv(tr))
        ref = f", max ref distance {np.max(tr.reference_distance):.6e}" if reference else ""
        print(f"run {i:03d}: dt={dt:g}, steps={len(tr.times) - 1}{ref}")
    _manifest(args, outputs, out, sweep_dt=list(dts), engine=engine.value)
    outputs.commit()
    return EXIT_OK


def cmd_compile_circuit(args) -> int:
    gamma = args.gamma
    dt = args.gamma_dt / gamma
    circ = compile_braided(gamma, dt, allow_large=args.allow_large)
    tol = args.tol if args.tol is not None else 1e-12
    u = circuit_unitary(circ)
    resid = phase_aligned_distance(u, cascaded_in_circuit_frame(braided(gamma_right=gamma), dt))
    n_iter = iswap_iterations(gamma, dt)
    if args.out:
        outputs = Outputs(args.force)
        outputs.add(Path(args.out), emit_text(circ))
        outputs.commit()
    else:
        sys.stdout.write(emit_text(circ))
    print(f"gates: {len(circ)}")
    print(f"delta: {braided_delta(gamma, dt):.17g}")
    print(f"iSWAP iterations N: {n_iter}")
    print(f"operator identity residual: {resid:.3e}")
    print(f"mediator flip amplitude: {m_flip_amplitude(u):.3e}")
    if resid > tol:
        print(f"FAIL: residual exceeds {tol:g}")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_compile_general(args) -> int:
    layout = read_layout(args.layout)
    circ = compile_general(layout, args.dt)
    text = emit_text(circ)
    if args.out:
        outputs = Outputs(args.force)
        outputs.add(Path(args.out), text)
        outputs.commit()
    else:
        sys.stdout.write(text)
    print(f"gates: {len(circ)}, qubits: {circ.n_qubits}")
    return EXIT_OK


def cmd_dispersive_demo(args) -> int:
    if args.delta == 0:
        raise SingularDetuningError("zero detuning: the dispersive expansion is singular")
    modes = ModeSet(np.array([args.delta]), np.array([[args.g]]), args.d)
    cmp_ = exact_vs_effective(modes, "e", args.t_max / abs(args.delta), args.n_times)
    split = exchange_splitting(args.g, args.delta, 2)
    window = 137.4 / abs(args.delta)
    ratio = detuning_scaling_ratio(modes, AtomRegister(1), 0.0, window)
    print(f"g/Delta: {args.g / args.delta:g}")
    print(f"max population deviation: {cmp_.max_population_deviation:.6e} (bound {cmp_.bound:.6e})")
    print(f"two-atom exchange coupling: exact {split.exact_coupling:.9e}, "
          f"g^2/Delta {split.expected_coupling:.9e}, relative error {split.relative_error:.3e}")
    print(f"window-norm ratio for doubled detunings: {ratio:.6f}")
    if args.out:
        out = Path(args.out)
        outputs = Outputs(args.force)
        outputs.add(out / "trajectory.csv", trajectory_csv(cmp_.trajectory))
        _manifest(args, outputs, out, g=args.g, delta=args.delta, d=args.d, t_max=args.t_max)
        outputs.commit()
    ok = (
        cmp_.max_population_deviation <= cmp_.bound
        and split.relative_error <= 0.01
        and abs(ratio - 0.5) <= 0.1
    )
    if not ok:
        print("FAIL: dispersive checks outside tolerance")
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_all(seed=args.seed, tol=args.tol)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_TOLERANCE


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="giantdf",
        description="Decoherence-free interactions between giant atoms: analysis and simulation.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, out_help="output directory"):
        sp.add_argument("--out", help=out_help)
        sp.add_argument("--force", action="store_true", help="overwrite existing output files")
        sp.add_argument("--tol", type=float, default=None, help="tolerance override")
        sp.add_argument("--seed", type=int, default=0, help="random seed")

    s = sub.add_parser("check-df", help="check the interference condition of a layout")
    s.add_argument("--layout", required=True)
    s.add_argument("--tol", type=float, default=None, help="residual tolerance")
    s.set_defaults(func=cmd_check_df)

    s = sub.add_parser("heff", help="coupling matrix J and effective Hamiltonian")
    s.add_argument("--layout", required=True)
    common(s)
    s.set_defaults(func=cmd_heff)

    engines = [e.value for e in Engine]
    for name, fn, hlp in (
        ("simulate", cmd_simulate, "stream time bins through the atoms"),
        ("sweep", cmd_sweep, "run the [sweep] dt values of a config"),
    ):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--config", required=True)
        s.add_argument("--engine", choices=engines)
        s.add_argument("--reference", choices=["none", "effective"])
        common(s)
        s.set_defaults(func=fn)
        s.set_defaults(out_required=True)

    s = sub.add_parser("compile-circuit", help="braided collision as a gate circuit")
    s.add_argument("--gamma-dt", type=float, required=True, help="gamma * dt")
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--allow-large", action="store_true", help="permit gamma*dt above 0.25")
    common(s, out_help="gate-list file (stdout if omitted)")
    s.set_defaults(func=cmd_compile_circuit)

    s = sub.add_parser("compile-general", help="one exact two-qubit gate per coupling point")
    s.add_argument("--layout", required=True)
    s.add_argument("--dt", type=float, required=True)
    common(s, out_help="gate-list file (stdout if omitted)")
    s.set_defaults(func=cmd_compile_general)

    s = sub.add_parser("dispersive-demo", help="far-detuned single-mode contrast")
    s.add_argument("--g", type=float, default=0.01)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--d", type=int, default=5, help="Fock levels of the mode")
    s.add_argument("--t-max", type=float, default=1e4, help="final Delta * t")
    s.add_argument("--n-times", type=int, default=20001)
    common(s)
    s.set_defaults(func=cmd_dispersive_demo)

    s = sub.add_parser("verify", help="run the bundled invariant suite")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=None)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out_required", False) and not args.out:
        parser.error(f"{args.command} requires --out")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except OutputExistsError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
