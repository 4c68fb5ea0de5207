"""Plain-text input formats and CSV/JSON outputs.

Layout files
------------
``key=value`` header lines and one coupling point per line::

    # braided pair
    gamma_right=1.0
    gamma_left=0.0
    point atom=0 phase=0
    point atom=1 phase=1.5707963267948966
    point atom=0 phase=3.141592653589793
    point atom=1 phase=4.71238898038469

Points are given either all by phase (``phase=``, listed left to right) or
all by position (``x=``, any order, phase ``k0 * x``; requires ``k0=``).
Blank lines and ``#`` comments are ignored; an optional ``[layout]`` section
header is accepted.

Config files
------------
Sections ``[layout]`` (same grammar as a layout file, or a single
``file=<path>`` line relative to the config), ``[simulation]`` and an
optional ``[sweep]``::

    [simulation]
    dt=0.01
    steps=314
    engine=cascaded          # cascaded | simultaneous | magnus | effective
    reference=effective      # none | effective
    initial=eg               # one e/g letter per atom
    d_right=2
    d_left=0                 # 0 = unidirectional

    [sweep]
    dt=0.02,0.01,0.005       # one run per value, other settings from [simulation]

Rates are in units of ``gamma_right`` and times in ``1/gamma_right``.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collision import Engine, Trajectory
from .registers import BinRegister
from .topology import Layout, LayoutError, layout_from_phases, phases_from_positions


class FormatError(ValueError):
    """Malformed input text; the message names the line."""


def _kv(token: str, lineno: int) -> tuple[str, str]:
    if "=" not in token:
        raise FormatError(f"line {lineno}: expected key=value, got {token!r}")
    k, v = token.split("=", 1)
    k, v = k.strip().lower(), v.strip()
    if not k or not v:
        raise FormatError(f"line {lineno}: empty key or value in {token!r}")
    return k, v


def _float(v: str, key: str, lineno: int) -> float:
    try:
        x = float(v)
    except ValueError:
        raise FormatError(f"line {lineno}: {key} must be a number, got {v!r}") from None
    if not math.isfinite(x):
        raise FormatError(f"line {lineno}: {key} must be finite")
    return x


def _int(v: str, key: str, lineno: int) -> int:
    try:
        return int(v)
    except ValueError:
        raise FormatError(f"line {lineno}: {key} must be an integer, got {v!r}") from None


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_layout_lines(lines: list[tuple[int, str]]) -> Layout:
    header: dict[str, float] = {}
    points: list[tuple[int, str, float, int]] = []
    for lineno, line in lines:
        if line.lower().startswith("point"):
            parts = line.split()
            if parts[0].lower() != "point" or len(parts) != 3:
                raise FormatError(f"line {lineno}: expected 'point atom=<j> x=|phase=<v>'")
            kv = dict(_kv(t, lineno) for t in parts[1:])
            if "atom" not in kv:
                raise FormatError(f"line {lineno}: point is missing atom=")
            atom = _int(kv.pop("atom"), "atom", lineno)
            if atom < 0:
                raise FormatError(f"line {lineno}: atom index must be non-negative")
            if len(kv) != 1:
                raise FormatError(f"line {lineno}: point needs exactly one of x= or phase=")
            (kind, val), = kv.items()
            if kind not in ("x", "phase"):
                raise FormatError(f"line {lineno}: unknown point field {kind!r}")
            points.append((atom, kind, _float(val, kind, lineno), lineno))
        else:
            k, v = _kv(line, lineno)
            if k not in ("k0", "gamma_right", "gamma_left"):
                raise FormatError(f"line {lineno}: unknown layout key {k!r}")
            if k in header:
                raise FormatError(f"line {lineno}: duplicate key {k!r}")
            header[k] = _float(v, k, lineno)
    if not points:
        raise FormatError("layout has no coupling points")
    kinds = {p[1] for p in points}
    if len(kinds) > 1:
        raise FormatError(
            f"line {points[0][3]}: points must all use x= or all use phase=, not a mix"
        )
    g = header.get("gamma_right", 1.0)
    gl = header.get("gamma_left", 0.0)
    try:
        if kinds == {"x"}:
            if "k0" not in header:
                raise FormatError("position-based layout needs k0=")
            return phases_from_positions(header["k0"], [(a, x) for a, _, x, _ in points], g, gl)
        return layout_from_phases([a for a, *_ in points], [v for _, _, v, _ in points], g, gl)
    except LayoutError as e:
        raise FormatError(f"invalid layout: {e}") from None


def _lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        s = _strip(raw)
        if s:
            out.append((lineno, s))
    return out


def parse_layout(text: str) -> Layout:
    lines = [(n, s) for n, s in _lines(text) if s.lower() != "[layout]"]
    return _parse_layout_lines(lines)


def format_layout(layout: Layout) -> str:
    """Phase-based layout text that :func:`parse_layout` reads back exactly."""
    out = [f"gamma_right={layout.gamma_right!r}", f"gamma_left={layout.gamma_left!r}"]
    out += [f"point atom={p.atom} phase={p.phase!r}" for p in layout.points]
    return "\n".join(out) + "\n"


def read_layout(path: str | os.PathLike) -> Layout:
    return parse_layout(Path(path).read_text())


@dataclass(frozen=True)
class RunConfig:
    layout: Layout
    dt: float
    steps: int
    engine: Engine = Engine.CASCADED
    reference: Engine | None = None
    initial: str = ""
    bins: BinRegister = field(default_factory=BinRegister)
    sweep_dt: tuple[float, ...] = ()


_SIM_KEYS = {"dt", "steps", "engine", "reference", "initial", "d_right", "d_left"}


def _sections(text: str) -> dict[str, list[tuple[int, str]]]:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    for lineno, s in _lines(text):
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip().lower()
            if current not in ("layout", "simulation", "sweep"):
                raise FormatError(f"line {lineno}: unknown section [{current}]")
            if current in sections:
                raise FormatError(f"line {lineno}: duplicate section [{current}]")
            sections[current] = []
            continue
        if current is None:
            raise FormatError(f"line {lineno}: content before the first section header")
        sections[current].append((lineno, s))
    return sections


def parse_engine(name: str) -> Engine:
    try:
        return Engine(name.strip().lower())
    except ValueError:
        choices = ", ".join(e.value for e in Engine)
        raise FormatError(f"unknown engine {name!r} (choose from {choices})") from None


def parse_reference(name: str) -> Engine | None:
    n = name.strip().lower()
    if n == "none":
        return None
    if n == "effective":
        return Engine.EFFECTIVE
    raise FormatError(f"reference must be 'none' or 'effective', got {name!r}")


def parse_config(text: str, base_dir: str | os.PathLike | None = None) -> RunConfig:
    sec = _sections(text)
    if "layout" not in sec:
        raise FormatError("config needs a [layout] section")
    if "simulation" not in sec:
        raise FormatError("config needs a [simulation] section")
    lay = sec["layout"]
    if len(lay) == 1 and lay[0][1].lower().startswith("file="):
        lineno, s = lay[0]
        rel = s.split("=", 1)[1].strip()
        path = Path(base_dir or ".") / rel
        try:
            layout = read_layout(path)
        except OSError as e:
            raise FormatError(f"line {lineno}: cannot read layout file {rel!r}: {e.strerror}") from None
    else:
        layout = _parse_layout_lines(lay)

    vals: dict[str, tuple[int, str]] = {}
    for lineno, s in sec["simulation"]:
        k, v = _kv(s, lineno)
        if k not in _SIM_KEYS:
            raise FormatError(f"line {lineno}: unknown simulation key {k!r}")
        if k in vals:
            raise FormatError(f"line {lineno}: duplicate key {k!r}")
        vals[k] = (lineno, v)
    for req in ("dt", "steps"):
        if req not in vals:
            raise FormatError(f"[simulation] is missing {req}=")
    dt = _float(vals["dt"][1], "dt", vals["dt"][0])
    steps = _int(vals["steps"][1], "steps", vals["steps"][0])
    if dt <= 0 or steps < 1:
        raise FormatError("dt must be positive and steps at least 1")
    try:
        engine = parse_engine(vals["engine"][1]) if "engine" in vals else Engine.CASCADED
        reference = parse_reference(vals["reference"][1]) if "reference" in vals else None
    except FormatError as e:
        raise FormatError(f"[simulation]: {e}") from None
    initial = vals["initial"][1].lower() if "initial" in vals else "e" + "g" * (layout.n_atoms - 1)
    if len(initial) != layout.n_atoms or set(initial) - {"e", "g"}:
        raise FormatError(f"initial={initial!r} needs one e/g letter per atom ({layout.n_atoms})")
    d_right = _int(vals["d_right"][1], "d_right", vals["d_right"][0]) if "d_right" in vals else 2
    default_left = d_right if layout.gamma_left > 0 else 0
    d_left = _int(vals["d_left"][1], "d_left", vals["d_left"][0]) if "d_left" in vals else default_left
    try:
        bins = BinRegister(d_right, d_left)
    except ValueError as e:
        raise FormatError(f"[simulation]: {e}") from None
    if layout.gamma_left > 0 and not bins.bidirectional:
        raise FormatError("[simulation]: gamma_left > 0 needs d_left >= 2")

    sweep: tuple[float, ...] = ()
    for lineno, s in sec.get("sweep", []):
        k, v = _kv(s, lineno)
        if k != "dt":
            raise FormatError(f"line {lineno}: only dt= can be swept")
        sweep = tuple(_float(x.strip(), "dt", lineno) for x in v.split(","))
        if any(x <= 0 for x in sweep):
            raise FormatError(f"line {lineno}: swept dt values must be positive")
    return RunConfig(layout, dt, steps, engine, reference, initial, bins, sweep)


def read_config(path: str | os.PathLike) -> RunConfig:
    p = Path(path)
    return parse_config(p.read_text(), base_dir=p.parent)


# -- outputs ----------------------------------------------------------------

def _e(x: float) -> str:
    return format(float(x), ".16e") if math.isfinite(x) else "nan"


def trajectory_csv(traj: Trajectory) -> str:
    n = traj.n_atoms
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"pop_{j}" for j in range(n)] + ["purity", "ref_distance"])
    ref = traj.reference_distance
    for i, t in enumerate(traj.times):
        r = ref[i] if ref is not None else math.nan
        w.writerow([_e(t)] + [_e(p) for p in traj.populations[i]] + [_e(traj.purity[i]), _e(r)])
    return buf.getvalue()


def read_trajectory_csv(text: str) -> dict[str, np.ndarray]:
    rows = list(csv.reader(io.StringIO(text)))
    head, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body]) if body else np.zeros((0, len(head)))
    return {h: data[:, i] for i, h in enumerate(head)}


def complex_matrix_csv(m: np.ndarray) -> str:
    """Row-major ``re,im`` pairs, one matrix row per CSV row."""
    m = np.asarray(m, dtype=complex)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"{p}_{k}" for k in range(m.shape[1]) for p in ("re", "im")])
    for row in m:
        w.writerow([_e(v) for z in row for v in (z.real, z.imag)])
    return buf.getvalue()


def read_complex_matrix_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    data = np.array([[float(x) for x in r] for r in rows])
    return data[:, 0::2] + 1j * data[:, 1::2]


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"
