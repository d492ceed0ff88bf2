"""Sweeps over the coupling and their CSV output.

Every table starts with a format line and an echo of the sweep settings,
followed by a header and one row per (g, branch, method).  Numbers use
12 significant digits; phases are in units of pi unless ``units="rad"``.
Rows that hit a degenerate point keep their place in the grid and carry the
error name in the ``status`` column.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from .errors import CoupledBerryError, DegenerateSchmidt
from .model import BRANCHES, Branch, bloch_length, solve_shifted_eigenvalues
from .oracles import (
    DEFAULT_PERIOD,
    adiabatic_propagate,
    mixed_state_phase_numeric,
    schmidt_track,
    wilson_loop_phase,
)
from .paths import ConstantPolar, transition_loop
from .phases import (
    constant_theta_phases,
    scale_factor,
    transition_path_phase,
)

FORMAT_LINE = "# coupled-berry v1"
MODES = ("point", "sweep-g", "transition-sweep", "verify")
ORACLES = ("none", "wilson", "ode", "all")
UNITS = ("pi", "rad")
PHASE_COLUMNS = ("gamma_ab", "gamma_mixed_sum", "gamma_schmidt", "gamma_a", "gamma_b")


class UsageError(ValueError):
    """Invalid sweep settings (exit code 64)."""

    exit_code = 64


@dataclass(frozen=True)
class SweepSpec:
    mode: str = "point"
    theta: Optional[float] = None
    g_min: float = 0.0
    g_max: float = 10.0
    g_steps: int = 400
    branches: tuple = BRANCHES
    oracle: str = "none"
    points: int = 4096
    period: float = DEFAULT_PERIOD
    units: str = "pi"
    out: Optional[str] = None
    jobs: int = 1
    tol_scale: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.oracle not in ORACLES:
            raise UsageError(f"unknown oracle {self.oracle!r}")
        if self.units not in UNITS:
            raise UsageError(f"unknown units {self.units!r}")
        if not self.g_min <= self.g_max:
            raise UsageError("g_min must not exceed g_max")
        if self.g_steps < 1:
            raise UsageError("g_steps must be at least 1")
        if self.mode in ("point", "sweep-g"):
            if self.theta is None:
                raise UsageError(f"{self.mode} needs a polar angle")
            if not 0.0 < self.theta < np.pi:
                raise UsageError("theta must lie strictly between 0 and pi")
        if self.points < 64:
            raise UsageError("points must be at least 64")
        if self.period <= 0:
            raise UsageError("period must be positive")
        if self.jobs < 1:
            raise UsageError("jobs must be at least 1")
        object.__setattr__(self, "branches", tuple(Branch.parse(b) for b in self.branches))

    @property
    def use_wilson(self) -> bool:
        return self.oracle in ("wilson", "all")

    @property
    def use_ode(self) -> bool:
        return self.oracle in ("ode", "all")

    def g_grid(self) -> np.ndarray:
        if self.g_steps == 1:
            return np.array([float(self.g_min)])
        return np.linspace(self.g_min, self.g_max, self.g_steps)

    def echo(self) -> str:
        items = []
        for f in fields(self):
            if f.name in ("out", "jobs"):  # do not affect the numbers
                continue
            value = getattr(self, f.name)
            if f.name == "branches":
                value = ",".join(b.value for b in value)
            elif isinstance(value, float):
                value = repr(value)
            items.append(f"{f.name}={value}")
        return "# " + " ".join(items)


@dataclass
class CsvRecord:
    """One output row; phases are stored in radians until formatting."""

    g: float
    theta: Optional[float]
    branch: str
    gamma_ab: Optional[float] = None
    gamma_mixed_sum: Optional[float] = None
    gamma_schmidt: Optional[float] = None
    gamma_a: Optional[float] = None
    gamma_b: Optional[float] = None
    p1: Optional[float] = None
    r: Optional[float] = None
    F: Optional[float] = None
    X: Optional[float] = None
    method: str = "analytic"
    status: str = "ok"

    def formatted(self, units: str = "pi") -> list:
        scale = 1.0 / np.pi if units == "pi" else 1.0
        row = []
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name in PHASE_COLUMNS and value is not None:
                value = value * scale
            row.append(_fmt(value))
        return row


HEADER = [f.name for f in fields(CsvRecord)]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    value = float(value)
    if value == 0.0:
        value = 0.0  # drop the sign of negative zero
    return f"{value:.12g}"


# -- single points --------------------------------------------------------------


def analytic_record(theta: float, g: float, branch: Branch) -> CsvRecord:
    """Closed-form quantities at one point; degenerate inputs give a status row."""
    branch = Branch.parse(branch)
    rec = CsvRecord(g=g, theta=theta, branch=branch.value)
    try:
        x = solve_shifted_eigenvalues(theta, g)[branch]
    except CoupledBerryError as exc:
        rec.status = type(exc).__name__
        return rec
    rec.X = x
    rec.r = bloch_length(theta, g, branch)
    rec.p1 = 0.5 * (1.0 + rec.r)
    try:
        rec.F = scale_factor(theta, g, branch)
    except CoupledBerryError:
        pass
    res = constant_theta_phases(theta, g, branch)
    rec.gamma_ab = res.gamma_ab
    rec.gamma_a, rec.gamma_b = res.gamma_a, res.gamma_b
    rec.gamma_mixed_sum = res.gamma_mixed_sum
    rec.gamma_schmidt = res.Gamma_a1
    rec.status = res.status
    return rec


def wilson_record(theta: float, g: float, branch: Branch, points: int) -> CsvRecord:
    """Wilson-loop composite phase plus Schmidt tracking where it is defined."""
    branch = Branch.parse(branch)
    rec = CsvRecord(g=g, theta=theta, branch=branch.value, method="wilson")
    path = ConstantPolar(theta)
    try:
        rec.gamma_ab = wilson_loop_phase(path, g, branch, points)
    except CoupledBerryError as exc:
        rec.status = type(exc).__name__
        return rec
    try:
        track = schmidt_track(path, g, branch, points)
        rec.gamma_a, rec.gamma_b = mixed_state_phase_numeric(track)
    except DegenerateSchmidt as exc:
        rec.status = type(exc).__name__
        return rec
    p1 = float(track.p_start[0])
    # column 1 belongs to the Schmidt vector of weight (1 + r) / 2 with signed r
    signed_r = bloch_length(theta, g, branch)
    k = 0 if signed_r >= 0 else 1
    rec.gamma_schmidt = float(track.Gamma_a[k])
    rec.p1 = float(track.p_start[k])
    rec.r = np.copysign(2.0 * p1 - 1.0, signed_r)
    rec.gamma_mixed_sum = rec.gamma_a + rec.gamma_b
    return rec


def ode_record(theta: Optional[float], g: float, branch: Branch, period: float, path=None) -> CsvRecord:
    branch = Branch.parse(branch)
    rec = CsvRecord(g=g, theta=theta, branch=branch.value, method="ode")
    path = path if path is not None else ConstantPolar(theta)
    try:
        rec.gamma_ab = adiabatic_propagate(path, g, branch, T=period).geometric_phase
    except CoupledBerryError as exc:
        rec.status = type(exc).__name__
    return rec


def _constant_theta_rows(spec: SweepSpec, g: float) -> list:
    rows = []
    for branch in spec.branches:
        rows.append(analytic_record(spec.theta, g, branch))
        if spec.use_wilson:
            rows.append(wilson_record(spec.theta, g, branch, spec.points))
        if spec.use_ode:
            rows.append(ode_record(spec.theta, g, branch, spec.period))
    return rows


def _transition_rows(spec: SweepSpec, g: float) -> list:
    path = transition_loop()
    rows = []
    for branch in spec.branches:
        rec = CsvRecord(g=g, theta=None, branch=branch.value, method="quadrature")
        try:
            rec.gamma_ab = transition_path_phase(path, g, branch)
        except CoupledBerryError as exc:
            rec.status = type(exc).__name__
        rows.append(rec)
        if spec.use_wilson:
            wil = CsvRecord(g=g, theta=None, branch=branch.value, method="wilson")
            try:
                wil.gamma_ab = wilson_loop_phase(path, g, branch, spec.points)
            except CoupledBerryError as exc:
                wil.status = type(exc).__name__
            rows.append(wil)
        if spec.use_ode:
            rows.append(ode_record(None, g, branch, spec.period, path=path))
    return rows


def run_point(spec: SweepSpec) -> list:
    """Rows for a single ``(theta, g)``: analytic first, then any oracle rows.

    Raises the underlying error for a degenerate analytic point or a failed
    oracle, so that the caller can map it to an exit code.
    """
    if spec.mode != "point":
        raise UsageError("run_point needs mode='point'")
    g = float(spec.g_min)
    rows = []
    for branch in spec.branches:
        rec = analytic_record(spec.theta, g, branch)
        _raise_status(rec)
        rows.append(rec)
        if spec.use_wilson:
            rec = wilson_record(spec.theta, g, branch, spec.points)
            _raise_status(rec)
            rows.append(rec)
        if spec.use_ode:
            rec = ode_record(spec.theta, g, branch, spec.period)
            _raise_status(rec)
            rows.append(rec)
    return rows


def _raise_status(rec: CsvRecord):
    if rec.status == "ok":
        return
    from . import errors

    cls = getattr(errors, rec.status, None)
    if isinstance(cls, type) and issubclass(cls, Exception):
        raise cls(f"{rec.method} {rec.branch} at theta={rec.theta!r}, g={rec.g!r}: {rec.status}")
    raise DegenerateSchmidt(f"{rec.branch} at theta={rec.theta!r}, g={rec.g!r}: {rec.status}")


# -- sweeps -----------------------------------------------------------------------


def _map_grid(fn, spec: SweepSpec, grid) -> list:
    if spec.jobs == 1 or len(grid) == 1:
        chunks = [fn(spec, float(g)) for g in grid]
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(fn, [spec] * len(grid), [float(g) for g in grid]))
    return [row for chunk in chunks for row in chunk]


def unwrap_rows(rows: list) -> list:
    """Remove ``2 pi`` jumps in each phase column along g, per branch and method.

    The first defined value of each series is kept as is; later values are
    shifted by multiples of ``2 pi`` to stay within ``pi`` of their
    predecessor.  ``gamma_mixed_sum`` is rebuilt from the unwrapped qubit
    phases.
    """
    series = {}
    for i, rec in enumerate(rows):
        series.setdefault((rec.branch, rec.method), []).append(i)
    out = [replace(rec) for rec in rows]
    for idx in series.values():
        for col in ("gamma_ab", "gamma_schmidt", "gamma_a", "gamma_b"):
            defined = [i for i in idx if getattr(out[i], col) is not None]
            if not defined:
                continue
            values = np.unwrap([getattr(out[i], col) for i in defined])
            for i, v in zip(defined, values):
                setattr(out[i], col, float(v))
    for rec in out:
        if rec.gamma_a is not None and rec.gamma_b is not None:
            rec.gamma_mixed_sum = rec.gamma_a + rec.gamma_b
    return out


def run_sweep_g(spec: SweepSpec) -> list:
    """Rows over the uniform g grid at fixed theta, unwrapped along g."""
    if spec.mode != "sweep-g":
        raise UsageError("run_sweep_g needs mode='sweep-g'")
    return unwrap_rows(_map_grid(_constant_theta_rows, spec, spec.g_grid()))


def run_transition_sweep(spec: SweepSpec) -> list:
    """Composite phases on the pole-to-pole loop over the g grid, unwrapped along g."""
    if spec.mode != "transition-sweep":
        raise UsageError("run_transition_sweep needs mode='transition-sweep'")
    return unwrap_rows(_map_grid(_transition_rows, spec, spec.g_grid()))


# -- output -----------------------------------------------------------------------


def render_csv(rows: list, spec: SweepSpec) -> str:
    buf = io.StringIO()
    buf.write(FORMAT_LINE + "\n")
    buf.write(spec.echo() + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in rows:
        writer.writerow(rec.formatted(spec.units))
    return buf.getvalue()


def write_csv(rows: list, spec: SweepSpec, stream=None) -> str:
    text = render_csv(rows, spec)
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)
    return text


def read_csv(text: str) -> list:
    """Parse a table written by :func:`render_csv` into dicts of strings."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# -- config -----------------------------------------------------------------------


def parse_config(text: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise UsageError(f"config line {lineno}: empty key")
        out[key.replace("_", "-")] = value
    return out


def spec_dict(spec: SweepSpec) -> dict:
    d = asdict(spec)
    d["branches"] = [b.value for b in spec.branches]
    return d


__all__ = [
    "CsvRecord",
    "SweepSpec",
    "UsageError",
    "analytic_record",
    "parse_config",
    "read_csv",
    "render_csv",
    "run_point",
    "run_sweep_g",
    "run_transition_sweep",
    "unwrap_rows",
    "wilson_record",
    "write_csv",
]
