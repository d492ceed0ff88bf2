"""Numerical ground truth that avoids every closed-form expression.

* Wilson loops: gauge-invariant discrete holonomy of densely sampled
  eigenvectors from a dense eigensolver.
* Adiabatic propagation: fixed-step RK4 integration of the Schroedinger
  equation along the loop, with the dynamical phase removed by quadrature.
* Schmidt tracking: per-point Schmidt decomposition of the eigenvector,
  parallel transport of the Schmidt vectors and accumulation of their
  (weighted) phases.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit
from scipy.integrate import simpson

from .errors import (
    AdiabaticityFailure,
    DegenerateAlongPath,
    DegenerateSchmidt,
    NormDrift,
    TransitionPath,
)
from .model import (
    ROOT_GAP_TOL,
    SCHMIDT_GAP_TOL,
    SQRT2,
    Branch,
    SchmidtData,
    sorted_roots,
    triplet_blocks,
)
from .paths import LoopPath
from .phases import tracked_index, wrap_phase

NONTRANSITION_TOL = 1e-8
DEFAULT_PERIOD = 2000.0
STEPS_PER_UNIT_TIME = 1000


# -- Wilson loops -------------------------------------------------------------


def wilson_loop_from_states(states: np.ndarray) -> float:
    """``-arg prod_j <psi_j | psi_j+1>`` over a closed chain of states.

    ``states`` has shape ``(N, d)``; the chain closes from the last state back
    to the first.  The result is independent of the phase of each state.
    """
    states = np.asarray(states)
    overlaps = np.sum(states.conj() * np.roll(states, -1, axis=0), axis=-1)
    return wrap_phase(-np.sum(np.angle(overlaps)))


def _branch_states(path: LoopPath, g: float, branch: Branch, n_points: int):
    if not path.is_closed():
        raise ValueError("loop is not closed on the sphere")
    s = np.arange(n_points) / n_points
    theta, phi = path.sample(s)
    index = tracked_index(path, g, branch)
    vals, vecs = np.linalg.eigh(triplet_blocks(theta, phi, g))
    gaps = np.diff(vals, axis=-1)
    if gaps.min() < ROOT_GAP_TOL:
        raise DegenerateAlongPath(f"eigen-gap {gaps.min():.3g} on the loop at g={g!r}")
    return vecs[..., index], vals[..., index], index


def wilson_loop_phase(path: LoopPath, g: float, branch: Branch, n_points: int = 4096) -> float:
    """Berry phase of a triplet branch from the discrete holonomy on ``n_points`` samples.

    The branch is identified at the loop's start and followed by its position
    in the sorted spectrum.  Returned in ``(-pi, pi]``.
    """
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    states, _, _ = _branch_states(path, g, Branch.parse(branch), n_points)
    return wilson_loop_from_states(states)


# -- adiabatic propagation ------------------------------------------------------


@dataclass(frozen=True)
class PropagationResult:
    """Outcome of one RK4 run.

    ``final_state`` holds the four amplitudes over ``(|1;-1>, |1;0>, |1;+1>,
    |0;0>)``.  ``populations_drift`` is the largest total change of the
    instantaneous-eigenstate populations seen on the sampled times.
    """

    final_state: np.ndarray
    populations_drift: float
    total_phase: float
    dynamical_phase: float
    geometric_phase: float
    T: float
    steps: int
    norm_error: float


@njit(cache=True, inline="always")
def _apply_h(c, o, g, shift, y0, y1, y2, y3):
    oc = o.conjugate()
    d0 = (g - c - shift) * y0 + o * y1
    d1 = oc * y0 + (-g - shift) * y1 + o * y2
    d2 = oc * y1 + (g + c - shift) * y2
    d3 = (-g - shift) * y3
    return -1j * d0, -1j * d1, -1j * d2, -1j * d3


@njit(cache=True)
def _rk4_kernel(psi0, cos_h, off_h, g, shift, dt, steps, stride):
    # cos_h / off_h are sampled on the half-step grid t_k = k * dt / 2
    x0, x1, x2, x3 = psi0[0], psi0[1], psi0[2], psi0[3]
    nsamp = steps // stride + 1
    samples = np.empty((nsamp, 4), dtype=np.complex128)
    samples[0, 0], samples[0, 1], samples[0, 2], samples[0, 3] = x0, x1, x2, x3
    h2 = 0.5 * dt
    h6 = dt / 6.0
    for n in range(steps):
        ca, oa = cos_h[2 * n], off_h[2 * n]
        cm, om = cos_h[2 * n + 1], off_h[2 * n + 1]
        cb, ob = cos_h[2 * n + 2], off_h[2 * n + 2]
        a0, a1, a2, a3 = _apply_h(ca, oa, g, shift, x0, x1, x2, x3)
        b0, b1, b2, b3 = _apply_h(
            cm, om, g, shift, x0 + h2 * a0, x1 + h2 * a1, x2 + h2 * a2, x3 + h2 * a3
        )
        c0, c1, c2, c3 = _apply_h(
            cm, om, g, shift, x0 + h2 * b0, x1 + h2 * b1, x2 + h2 * b2, x3 + h2 * b3
        )
        d0, d1, d2, d3 = _apply_h(
            cb, ob, g, shift, x0 + dt * c0, x1 + dt * c1, x2 + dt * c2, x3 + dt * c3
        )
        x0 = x0 + h6 * (a0 + 2.0 * b0 + 2.0 * c0 + d0)
        x1 = x1 + h6 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        x2 = x2 + h6 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        x3 = x3 + h6 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        if (n + 1) % stride == 0:
            k = (n + 1) // stride
            samples[k, 0], samples[k, 1], samples[k, 2], samples[k, 3] = x0, x1, x2, x3
    final = np.empty(4, dtype=np.complex128)
    final[0], final[1], final[2], final[3] = x0, x1, x2, x3
    return final, samples


def _populations(samples: np.ndarray, theta, phi, g) -> np.ndarray:
    _, vecs = np.linalg.eigh(triplet_blocks(theta, phi, g))
    trip = np.abs(np.einsum("kij,ki->kj", vecs.conj(), samples[:, :3])) ** 2
    return np.concatenate([trip, np.abs(samples[:, 3:]) ** 2], axis=1)


def _propagate(path, g, psi0, index, T, steps, samples, check, singlet=False):
    if T <= 0:
        raise ValueError("period must be positive")
    if steps is None:
        steps = int(round(STEPS_PER_UNIT_TIME * T))
    steps = max(2, int(steps) + (int(steps) % 2))  # even, for Simpson
    dt = T / steps
    s_half = np.arange(2 * steps + 1) / (2 * steps)
    theta_h, phi_h = path.sample(s_half)
    cos_h = np.cos(theta_h)
    off_h = np.sin(theta_h) * np.exp(1j * phi_h) / SQRT2

    theta_g, phi_g = theta_h[::2], phi_h[::2]
    if singlet:
        energy = np.full(theta_g.shape, -float(g))
    else:
        # cubic roots are cross-checked against the dense solver elsewhere
        uniq, inverse = np.unique(theta_g, return_inverse=True)
        vals = (sorted_roots(uniq, g) + g)[inverse.ravel()]
        gap = np.diff(vals, axis=-1).min()
        if gap < ROOT_GAP_TOL:
            raise DegenerateAlongPath(f"eigen-gap {gap:.3g} on the loop at g={g!r}")
        energy = vals[:, index]
    shift = float(energy[0])

    stride = max(1, steps // max(1, samples))
    final, sampled = _rk4_kernel(
        np.ascontiguousarray(psi0, dtype=np.complex128),
        cos_h,
        off_h,
        float(g),
        shift,
        float(dt),
        steps,
        stride,
    )
    del cos_h, off_h

    norm_error = abs(np.linalg.norm(final) - 1.0)
    if check and norm_error > 1e-6:
        raise NormDrift(f"state norm drifted by {norm_error:.3g}")

    residual_dyn = simpson(energy - shift, dx=dt)
    overlap = np.vdot(psi0, final)
    geometric = wrap_phase(np.angle(overlap) + residual_dyn)
    dynamical = -(residual_dyn + shift * T)
    total = wrap_phase(np.angle(overlap) - shift * T)

    k = np.arange(sampled.shape[0]) * stride
    pops = _populations(sampled, theta_g[k], phi_g[k], g)
    drift = float(np.max(np.sum(np.abs(pops - pops[0]), axis=1)))
    if check and drift > 0.01:
        raise AdiabaticityFailure(
            f"eigenstate populations drifted by {drift:.3g}; increase the period T={T!r}"
        )
    return PropagationResult(
        final_state=final,
        populations_drift=drift,
        total_phase=float(total),
        dynamical_phase=float(dynamical),
        geometric_phase=float(geometric),
        T=float(T),
        steps=steps,
        norm_error=float(norm_error),
    )


def adiabatic_propagate(
    path: LoopPath,
    g: float,
    branch: Branch,
    T: float = DEFAULT_PERIOD,
    steps: Optional[int] = None,
    samples: int = 2000,
    check: bool = True,
) -> PropagationResult:
    """Propagate the branch eigenstate once around ``path`` in time ``T``.

    RK4 with fixed step ``T / steps`` (default 1000 steps per unit time) on the
    full 4x4 Hamiltonian.  The equation is integrated in a frame shifted by the
    initial energy, which is an exact global phase and keeps the fast
    dynamical rotation out of the truncation error.  The dynamical phase is
    the Simpson integral of the tracked eigenvalue on the integrator grid.

    Raises
    ------
    NormDrift
        If the final norm is off by more than ``1e-6``.
    AdiabaticityFailure
        If the populations drift by more than 0.01 (``T`` too short).
    """
    branch = Branch.parse(branch)
    if not path.is_closed():
        raise ValueError("loop is not closed on the sphere")
    index = tracked_index(path, g, branch)
    theta0, phi0 = path.sample(np.array([0.0]))
    _, vecs = np.linalg.eigh(triplet_blocks(theta0, phi0, g))
    psi0 = np.zeros(4, dtype=complex)
    psi0[:3] = vecs[0, :, index]
    return _propagate(path, g, psi0, index, T, steps, samples, check)


def adiabatic_limit_phase(
    path: LoopPath,
    g: float,
    branch: Branch,
    T: float = DEFAULT_PERIOD,
    check: bool = True,
) -> float:
    """Geometric phase extrapolated to infinite period from runs at ``T`` and ``2 T``.

    At finite period the extracted phase carries a nonadiabatic shift that
    falls off as ``1/T``; ``2 gamma(2T) - gamma(T)`` cancels that leading
    term.  The difference is taken modulo ``2 pi`` before extrapolating.
    """
    short = adiabatic_propagate(path, g, branch, T=T, check=check).geometric_phase
    long = adiabatic_propagate(path, g, branch, T=2.0 * T, check=check).geometric_phase
    return wrap_phase(long + wrap_phase(long - short))


def singlet_propagate(
    path: LoopPath,
    g: float,
    T: float = DEFAULT_PERIOD,
    steps: Optional[int] = None,
    samples: int = 2000,
) -> PropagationResult:
    """Propagate the singlet ``|0;0>`` around ``path``; it is an eigenstate at every point."""
    psi0 = np.array([0, 0, 0, 1], dtype=complex)
    return _propagate(path, g, psi0, 3, T, steps, samples, True, singlet=True)


# -- Schmidt tracking -----------------------------------------------------------


@dataclass(frozen=True)
class SchmidtTrack:
    """Schmidt data sampled around a loop and the phases accumulated from it.

    ``p[j]``, ``vecs_a[j]``, ``vecs_b[j]`` are the Schmidt coefficients and
    vectors at grid point ``j`` in a gauge that is smooth and single-valued
    around the loop.  ``Gamma_a[k]`` / ``Gamma_b[k]`` are the Berry phases of
    the k-th eigenvector of each reduced operator from independent Wilson
    loops (modulo ``2 pi``).  ``Gamma_tilde_a[k]`` / ``Gamma_tilde_b[k]`` are the
    phases of the weighted vectors ``sqrt(p_k) |xi_k>``.
    """

    p: np.ndarray
    vecs_a: np.ndarray
    vecs_b: np.ndarray
    Gamma_a: np.ndarray
    Gamma_b: np.ndarray
    Gamma_tilde_a: np.ndarray
    Gamma_tilde_b: np.ndarray
    p_variation: float
    nontransition: bool

    @property
    def n_points(self) -> int:
        return self.p.shape[0]

    @property
    def p_start(self) -> np.ndarray:
        return self.p[0]

    def point(self, j: int) -> SchmidtData:
        p1, p2 = self.p[j]
        return SchmidtData(p1=p1, p2=p2, r=p1 - p2, vecs_a=self.vecs_a[j], vecs_b=self.vecs_b[j])


def _transport_closed(states: np.ndarray) -> np.ndarray:
    """Rephase a closed chain so every link (including the closing one) has the same phase."""
    n = states.shape[0]
    links = np.sum(states[:-1].conj() * states[1:], axis=-1)
    cum = np.concatenate([[0.0], np.cumsum(np.angle(links))])
    states = states * np.exp(-1j * cum)[:, None]
    closing = np.angle(np.vdot(states[-1], states[0]))
    return states * np.exp(1j * closing * np.arange(n) / n)[:, None]


def _sorted_eigh_desc(rho: np.ndarray):
    vals, vecs = np.linalg.eigh(rho)
    vals = vals[:, ::-1]
    vecs = np.swapaxes(vecs[:, :, ::-1], 1, 2)  # (n, k, component)
    # nondegenerate spectra cannot swap order, but check continuity anyway
    for j in range(1, vals.shape[0]):
        same = abs(np.vdot(vecs[j - 1, 0], vecs[j, 0]))
        cross = abs(np.vdot(vecs[j - 1, 0], vecs[j, 1]))
        if cross > same:
            vals[j] = vals[j, ::-1].copy()
            vecs[j] = vecs[j, ::-1].copy()
    return vals, vecs


def _link_angles(vecs: np.ndarray) -> np.ndarray:
    return np.angle(np.sum(vecs.conj() * np.roll(vecs, -1, axis=0), axis=-1))


def _partner_vectors(psi: np.ndarray, a: np.ndarray, p: np.ndarray) -> np.ndarray:
    """``b_k = Psi^T a_k* / sqrt(p_k)``; a zero-weight partner is completed orthogonally."""
    b = np.einsum("nji,nkj->nki", psi, a.conj())
    empty = p[:, 1] < 1e-14
    b[:, 0] /= np.sqrt(p[:, 0])[:, None]
    b[~empty, 1] /= np.sqrt(p[~empty, 1])[:, None]
    # product state: any unit vector orthogonal to b_1 will do, its weight is zero
    b[empty, 1, 0] = -b[empty, 0, 1].conj()
    b[empty, 1, 1] = b[empty, 0, 0].conj()
    return b


def schmidt_track(path: LoopPath, g: float, branch: Branch, n_points: int = 4096) -> SchmidtTrack:
    """Follow the Schmidt decomposition of a branch eigenstate around ``path``.

    Raises
    ------
    DegenerateSchmidt
        If the Schmidt coefficients coincide at any grid point.
    """
    states, _, _ = _branch_states(path, g, Branch.parse(branch), n_points)
    states = _transport_closed(states)

    minus, zero, plus = states[:, 0], states[:, 1], states[:, 2]
    psi = np.empty((n_points, 2, 2), dtype=complex)
    psi[:, 0, 0] = plus
    psi[:, 0, 1] = psi[:, 1, 0] = zero / SQRT2
    psi[:, 1, 1] = minus

    rho_a = psi @ np.conj(np.swapaxes(psi, 1, 2))
    rho_b = np.swapaxes(psi, 1, 2) @ psi.conj()
    p, vecs_a = _sorted_eigh_desc(rho_a)
    p = np.clip(p, 0.0, 1.0)
    gap = (p[:, 0] - p[:, 1]).min()
    if gap < SCHMIDT_GAP_TOL:
        raise DegenerateSchmidt(f"Schmidt coefficients meet on the loop (gap {gap:.3g})")
    _, vecs_b_free = _sorted_eigh_desc(rho_b)

    gamma_a = np.array([wilson_loop_from_states(vecs_a[:, k]) for k in range(2)])
    gamma_b = np.array([wilson_loop_from_states(vecs_b_free[:, k]) for k in range(2)])

    # smooth single-valued gauge for a_k; b_k follows from the state
    a_sm = np.stack([_transport_closed(vecs_a[:, k]) for k in range(2)], axis=1)
    b_sm = _partner_vectors(psi, a_sm, p)

    weight = np.sqrt(p * np.roll(p, -1, axis=0))
    tilde_a = -np.sum(weight * np.stack([_link_angles(a_sm[:, k]) for k in range(2)], axis=1), axis=0)
    tilde_b = -np.sum(weight * np.stack([_link_angles(b_sm[:, k]) for k in range(2)], axis=1), axis=0)

    variation = float(np.max(np.abs(p[:, 0] - p[0, 0])))
    return SchmidtTrack(
        p=p,
        vecs_a=a_sm,
        vecs_b=b_sm,
        Gamma_a=gamma_a,
        Gamma_b=gamma_b,
        Gamma_tilde_a=tilde_a,
        Gamma_tilde_b=tilde_b,
        p_variation=variation,
        nontransition=variation < NONTRANSITION_TOL,
    )


def composite_from_schmidt(track: SchmidtTrack) -> float:
    """Composite phase rebuilt as ``sum_k (Gamma~_ak + Gamma~_bk)``, in ``(-pi, pi]``."""
    return wrap_phase(np.sum(track.Gamma_tilde_a) + np.sum(track.Gamma_tilde_b))


def mixed_state_phase_numeric(track: SchmidtTrack, symmetry_tol: Optional[float] = 1e-6):
    """Mixed-state phases ``arg sum_k p_k exp(i Gamma_xi,k)`` of both qubits.

    Raises
    ------
    TransitionPath
        If the Schmidt coefficients vary along the loop.
    RuntimeError
        If the two qubit phases differ by more than ``symmetry_tol``, which
        would contradict the exchange symmetry of the model.
    """
    if not track.nontransition:
        raise TransitionPath(
            f"Schmidt coefficients vary by {track.p_variation:.3g} along the loop"
        )
    p0 = track.p_start
    gamma_a = float(np.angle(np.sum(p0 * np.exp(1j * track.Gamma_a))))
    gamma_b = float(np.angle(np.sum(p0 * np.exp(1j * track.Gamma_b))))
    if symmetry_tol is not None and abs(wrap_phase(gamma_a - gamma_b)) > symmetry_tol:
        raise RuntimeError(f"qubit phases differ: {gamma_a!r} vs {gamma_b!r}")
    return gamma_a, gamma_b
