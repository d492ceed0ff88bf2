"""Closed-form geometric phases for the coupled spin pair.

Two kinds of loops are handled.  On a constant-theta circle the Schmidt
coefficients stay fixed (a nontransition loop) and every phase has a closed
form in terms of the shifted eigenvalue ``X``, the signed Bloch length ``r``
and the scale factor ``F``.  On loops where theta varies only the composite
phase is available, as a line integral over ``phi``.

All phases are in radians.  Functions return raw (unwrapped) formula values;
:func:`wrap_phase` maps to ``(-pi, pi]``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Optional

import numpy as np

from .errors import (
    DegenerateRoots,
    DegenerateSchmidt,
    NonconvergentQuadrature,
    SingularScaleFactor,
    UndefinedPhase,
)
from .model import (
    ROOT_GAP_TOL,
    SCHMIDT_GAP_TOL,
    Branch,
    ModelParams,
    bloch_length,
    branch_components,
    branch_index,
    instantaneous_eigenstate,
    sorted_roots,
    solve_shifted_eigenvalues,
)
from .paths import ConstantPolar, LoopPath

SCALE_DENOM_TOL = 1e-14
DEFAULT_PANELS = 2**14


def wrap_phase(x):
    """Representative in ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return float(y) if y.ndim == 0 else y


def phase_distance(a, b) -> float:
    """Distance between two phases modulo ``2 pi``."""
    return abs(wrap_phase(a - b))


@dataclass(frozen=True)
class PhaseResult:
    """Composite, subsystem and Schmidt-vector phases of one branch on one loop.

    Entries are ``None`` where the quantity is undefined (degenerate Schmidt
    data); ``status`` then names the reason.
    """

    gamma_ab: Optional[float]
    gamma_a: Optional[float] = None
    gamma_b: Optional[float] = None
    Gamma_a1: Optional[float] = None
    Gamma_a2: Optional[float] = None
    Gamma_b1: Optional[float] = None
    Gamma_b2: Optional[float] = None
    method: str = "analytic"
    status: str = "ok"

    _PHASES = ("gamma_ab", "gamma_a", "gamma_b", "Gamma_a1", "Gamma_a2", "Gamma_b1", "Gamma_b2")

    @property
    def gamma_mixed_sum(self) -> Optional[float]:
        if self.gamma_a is None or self.gamma_b is None:
            return None
        return self.gamma_a + self.gamma_b

    def wrapped(self) -> "PhaseResult":
        return replace(
            self,
            **{
                name: (None if getattr(self, name) is None else wrap_phase(getattr(self, name)))
                for name in self._PHASES
            },
        )

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    panels: int
    change: float


def _stieltjes_trapezoid(f, phi) -> float:
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(phi)))


def solid_angle(path: LoopPath, panels: int = DEFAULT_PANELS) -> float:
    """Solid angle ``oint (1 - cos theta) d phi`` enclosed by the loop."""
    if isinstance(path, ConstantPolar):
        return 2.0 * np.pi * (1.0 - np.cos(path.theta))
    if panels < 10_000:
        raise ValueError("solid angle quadrature needs at least 1e4 panels")
    s = np.linspace(0.0, 1.0, panels + 1)
    theta, phi = path.sample(s)
    return _stieltjes_trapezoid(1.0 - np.cos(theta), phi)


def zero_coupling_phase(m: int, omega: float) -> PhaseResult:
    """Phases at ``g = 0`` for total-spin projection ``m`` along the field.

    The composite phase is ``-m * omega``.  For ``m = +/-1`` the state is a
    product of two aligned spins and each qubit picks up ``-m * omega / 2``.
    For ``m = 0`` the subsystem phases depend on the admixed singlet; see
    :func:`degenerate_zero_g_subsystem_phase`.
    """
    if m not in (-1, 0, 1):
        raise ValueError(f"m must be -1, 0 or +1, got {m!r}")
    gamma_ab = -m * omega
    if m == 0:
        return PhaseResult(gamma_ab=0.0, status="subsystem phases need alpha, beta")
    half = -m * omega / 2.0
    return PhaseResult(
        gamma_ab=float(gamma_ab),
        gamma_a=float(half),
        gamma_b=float(half),
        Gamma_a1=float(half),
        Gamma_a2=float(-half),
        Gamma_b1=float(half),
        Gamma_b2=float(-half),
    )


def degenerate_zero_g_subsystem_phase(alpha: complex, beta: complex, omega: float):
    """Subsystem phases of ``alpha |1;0> + beta |0;0>`` at zero coupling.

    ``gamma_a = -arctan(2 Re(alpha* beta) tan(omega / 2))`` on the principal
    arctan branch, and ``gamma_b = -gamma_a`` because the singlet admixture
    tilts the two Bloch vectors in opposite directions.

    Returns
    -------
    (gamma_a, gamma_b)

    Raises
    ------
    UndefinedPhase
        When ``2 Re(alpha* beta)`` vanishes and both reduced operators are
        maximally mixed.
    """
    norm = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"|alpha|^2 + |beta|^2 must be 1, got {norm!r}")
    bloch = 2.0 * (np.conj(alpha) * beta).real
    if abs(bloch) < 1e-12:
        raise UndefinedPhase("reduced operators are maximally mixed; subsystem phases undefined")
    gamma_a = -float(np.arctan(bloch * np.tan(omega / 2.0)))
    return gamma_a, -gamma_a


def scale_factor(theta: float, g: float, branch: Branch) -> float:
    """``F = sin(theta) / sqrt(X^4 - 2 X^2 cos^2(theta) + cos^2(theta))``."""
    x = solve_shifted_eigenvalues(theta, g)[Branch.parse(branch)]
    c2 = np.cos(theta) ** 2
    denom = x**4 - 2.0 * x * x * c2 + c2
    if denom < SCALE_DENOM_TOL:
        raise SingularScaleFactor(
            f"scale factor denominator {denom:.3g} at theta={theta!r}, g={g!r}, {Branch.parse(branch).value}"
        )
    return float(np.sin(theta) / np.sqrt(denom))


def _require_schmidt_gap(r: float, theta, g, branch):
    if abs(r) < SCHMIDT_GAP_TOL:
        raise DegenerateSchmidt(
            f"zero Bloch length at theta={theta!r}, g={g!r}, {Branch.parse(branch).value}: "
            "subsystem phases undefined"
        )


def schmidt_vector_phase(theta: float, g: float, branch: Branch):
    """Berry phases ``(Gamma_1, Gamma_2)`` of the two Schmidt vectors on a constant-theta circle.

    ``Gamma_1 = -pi (1 - F cos theta)`` belongs to the vector of weight
    ``(1 + r) / 2`` and ``Gamma_2 = -Gamma_1``.  Both qubits carry the same pair
    because the Hamiltonian is symmetric under exchange.
    """
    r = bloch_length(theta, g, branch)
    _require_schmidt_gap(r, theta, g, branch)
    f = scale_factor(theta, g, branch)
    gamma1 = -np.pi * (1.0 - f * np.cos(theta))
    return float(gamma1), float(-gamma1)


def composite_phase_constant_theta(theta: float, g: float, branch: Branch) -> float:
    """Composite phase ``-2 pi (m - r F cos theta)`` on a constant-theta circle.

    ``r F cos theta`` equals ``<S_z>`` of the eigenstate, so this is the
    familiar ``2 pi <S_z>`` up to the integer offset ``m`` (-1, 0, +1 for
    minus, zero, plus).  The offset picks the representative that coincides
    with ``-m * Omega`` at ``g = 0`` and with 0 in the strong-coupling limit.
    ``r F cos theta`` is evaluated as ``C^2 - A^2``, which stays finite where
    ``F`` alone is singular.
    """
    branch = Branch.parse(branch)
    sol, _ = instantaneous_eigenstate(ModelParams(g, theta, 0.0), branch)
    sz = sol.c**2 - sol.a**2
    return float(-2.0 * np.pi * (branch.m - sz))


def weighted_principal_phase(theta: float, g: float, branch: Branch) -> float:
    """``sum_k p_k (Gamma_ak + Gamma_bk) = -2 pi r (1 - F cos theta)``.

    Weights the principal Schmidt-vector phases by their coefficients.  Each
    Schmidt-vector phase is only fixed modulo ``2 pi``, so for fractional
    weights this sum differs from the true composite phase by
    ``2 pi (r - m)`` modulo ``2 pi``; it agrees only where ``r = m``
    (zero coupling, or the strong-coupling limit).  Kept for comparison with
    :func:`composite_phase_constant_theta`.
    """
    r = bloch_length(theta, g, branch)
    f = scale_factor(theta, g, branch)
    return float(-2.0 * np.pi * r * (1.0 - f * np.cos(theta)))


def subsystem_phase_constant_theta(theta: float, g: float, branch: Branch) -> float:
    """Mixed-state phase ``arg(p1 e^{i Gamma_1} + p2 e^{-i Gamma_1})`` of either qubit.

    Evaluated as ``atan2(r sin Gamma_1, cos Gamma_1)``.  This agrees with
    ``-arctan(r tan(pi (1 - F cos theta)))`` modulo ``pi``; the two-argument form
    keeps the quadrant.
    """
    r = bloch_length(theta, g, branch)
    _require_schmidt_gap(r, theta, g, branch)
    gamma1, _ = schmidt_vector_phase(theta, g, branch)
    return float(np.arctan2(r * np.sin(gamma1), np.cos(gamma1)))


def constant_theta_phases(theta: float, g: float, branch: Branch) -> PhaseResult:
    """All closed-form phases on a constant-theta circle.

    Undefined entries are ``None`` and ``status`` records why.  The composite
    phase is always defined.
    """
    gamma_ab = composite_phase_constant_theta(theta, g, branch)
    try:
        gamma1, gamma2 = schmidt_vector_phase(theta, g, branch)
        gamma_sub = subsystem_phase_constant_theta(theta, g, branch)
    except (DegenerateSchmidt, SingularScaleFactor) as exc:
        return PhaseResult(gamma_ab=gamma_ab, status=type(exc).__name__)
    return PhaseResult(
        gamma_ab=gamma_ab,
        gamma_a=gamma_sub,
        gamma_b=gamma_sub,
        Gamma_a1=gamma1,
        Gamma_a2=gamma2,
        Gamma_b1=gamma1,
        Gamma_b2=gamma2,
    )


def tracked_index(path: LoopPath, g: float, branch: Branch) -> int:
    """Sorted-root position of ``branch`` at the loop's start, followed along the loop."""
    (theta0, _), _ = path.endpoints()
    return branch_index(theta0, g, Branch.parse(branch))


def _check_path_gaps(theta, g):
    roots = sorted_roots(theta, g)
    gap = np.diff(roots, axis=-1).min()
    if gap < ROOT_GAP_TOL:
        raise DegenerateRoots(f"branches meet along the loop at g={g!r} (gap {gap:.3g})")


def _transition_integral(path: LoopPath, g: float, index: int, panels: int) -> float:
    s = np.linspace(0.0, 1.0, panels + 1)
    theta, phi = path.sample(s)
    _check_path_gaps(theta, g)
    _, a, _, c, _ = branch_components(theta, g, index)
    sz = c * c - a * a
    if path.starts_at_pole():
        m = int(np.rint(sz[0]))
    else:
        m = None
    return sz, phi, m


def transition_path_quadrature(
    path: LoopPath,
    g: float,
    branch: Branch,
    panels: int = DEFAULT_PANELS,
    tol: float = 1e-6,
    max_panels: int = 2**22,
) -> QuadratureResult:
    """Composite phase ``-oint (m - r F cos theta) d phi`` on a general loop.

    ``r F cos theta = <S_z>`` is integrated by the trapezoid rule in the
    Stieltjes form ``sum (f_j + f_j+1)/2 (phi_j+1 - phi_j)``.  The integer ``m``
    is the spin projection of the branch at the start: if the loop starts at a
    pole (where the ``e^{-i m phi}`` gauge winds) it is read off the eigenstate
    there, otherwise the nominal label value is used.  The branch is followed
    by its position in the sorted spectrum, which no level crossing can
    reorder inside ``0 < theta < pi``.

    Panels are doubled until two successive values differ by less than
    ``tol * max(1, |value|)``.

    Raises
    ------
    NonconvergentQuadrature
        If ``max_panels`` is reached first.
    """
    if not path.is_closed():
        raise ValueError("loop is not closed on the sphere")
    branch = Branch.parse(branch)
    index = tracked_index(path, g, branch)

    def evaluate(n):
        sz, phi, m = _transition_integral(path, g, index, n)
        if m is None:
            m = branch.m
        return -_stieltjes_trapezoid(m - sz, phi)

    n = panels
    value = evaluate(n)
    while True:
        finer = evaluate(2 * n)
        change = abs(finer - value)
        if change <= tol * max(1.0, abs(finer)):
            return QuadratureResult(value=finer, panels=2 * n, change=change)
        if 2 * n >= max_panels:
            raise NonconvergentQuadrature(
                f"transition phase changed by {change:.3g} at {2 * n} panels"
            )
        n *= 2
        value = finer


def transition_path_phase(path: LoopPath, g: float, branch: Branch, panels: int = DEFAULT_PANELS) -> float:
    """Converged value of :func:`transition_path_quadrature`."""
    return transition_path_quadrature(path, g, branch, panels=panels).value
