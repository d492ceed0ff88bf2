"""Two uniaxially coupled spin-1/2 particles in a rotating field.

Energies are in units of mu*B0, time in units of 1/(mu*B0), hbar = 1, and the
coupling enters only through ``g = J / (mu*B0)``.

Basis conventions
-----------------
* Total-spin basis ``(|1;-1>, |1;0>, |1;+1>, |0;0>)`` for the Hamiltonian.
* Single-qubit basis ``(|up>, |down>)`` and tensor order ``a (x) b`` for the
  product representation, with ``|1;-1> = |dd>``, ``|1;0> = (|ud> + |du>)/sqrt2``
  and ``|1;+1> = |uu>``.

Branch labels
-------------
The three eigenbranches of the triplet block are labelled ``minus``, ``zero``
and ``plus``.  For ``g != 0`` a label names the triplet state the branch turns
into under strong coupling: ``X(zero) -> -2g`` and ``X(plus/minus) -> +/-cos
theta``.  At ``g == 0`` the block is a plain spin-1 Zeeman problem and the
labels are the projection ``M`` of the total spin on the field, so that
``X = -1, 0, +1``.  Because the triplet block never has a level crossing for
``0 < theta < pi``, both rules reduce to picking a position in the sorted list
of roots; see :func:`branch_index`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRoots, DegenerateSchmidt

SQRT2 = np.sqrt(2.0)

ROOT_GAP_TOL = 1e-9
SCHMIDT_GAP_TOL = 1e-9
# Below this the closed-form components are 0/0 (or lose most of their digits)
MSQ_FALLBACK = 1e-8


class Branch(enum.Enum):
    MINUS = "minus"
    ZERO = "zero"
    PLUS = "plus"

    @property
    def m(self) -> int:
        """Nominal spin projection carried by the label (-1, 0 or +1)."""
        return {"minus": -1, "zero": 0, "plus": 1}[self.value]

    @classmethod
    def parse(cls, label) -> "Branch":
        if isinstance(label, cls):
            return label
        text = str(label).strip().lower()
        aliases = {"-": "minus", "0": "zero", "+": "plus", "-1": "minus", "1": "plus", "+1": "plus"}
        return cls(aliases.get(text, text))


BRANCHES = (Branch.MINUS, Branch.ZERO, Branch.PLUS)


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``g`` and field direction ``(theta, phi)`` in radians."""

    g: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.g):
            raise ValueError(f"coupling must be finite, got {self.g!r}")

    def canonical(self) -> "ModelParams":
        """Same field direction with ``theta in [0, pi]`` and ``phi in [0, 2pi)``."""
        theta = float(np.mod(self.theta, 2 * np.pi))
        phi = float(self.phi)
        if theta > np.pi:
            theta = 2 * np.pi - theta
            phi += np.pi
        phi = float(np.mod(phi, 2 * np.pi))
        return ModelParams(float(self.g), theta, phi)


@dataclass(frozen=True)
class TripletState:
    """Pure state of the triplet sector, amplitudes over ``(|1;-1>, |1;0>, |1;+1>)``."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex).reshape(3)
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"triplet state not normalised (norm^2 = {norm!r})")
        object.__setattr__(self, "amps", amps)

    @classmethod
    def normalized(cls, amps) -> "TripletState":
        amps = np.asarray(amps, dtype=complex)
        return cls(amps / np.linalg.norm(amps))

    def coefficient_matrix(self) -> np.ndarray:
        """2x2 matrix ``psi[a, b]`` over the qubit basis ``(up, down)``."""
        minus, zero, plus = self.amps
        return np.array([[plus, zero / SQRT2], [zero / SQRT2, minus]])

    def product_vector(self) -> np.ndarray:
        """Amplitudes over ``(uu, ud, du, dd)``."""
        return self.coefficient_matrix().reshape(4)


@dataclass(frozen=True)
class EigenSolution:
    branch: Branch
    x: float
    energy: float
    a: float
    b: float
    c: float
    msq: float
    fallback: bool = False


@dataclass(frozen=True)
class SchmidtData:
    """Schmidt form ``sum_k sqrt(p_k) |a_k> (x) |b_k>`` with ``p1 >= p2``.

    ``vecs_a[k]`` and ``vecs_b[k]`` are the k-th Schmidt vectors.  When the two
    coefficients coincide the vectors are not unique and ``valid`` is False.
    """

    p1: float
    p2: float
    r: float
    vecs_a: np.ndarray
    vecs_b: np.ndarray
    valid: bool = True
    weights: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "weights", (self.p1, self.p2))


def triplet_block(params: ModelParams) -> np.ndarray:
    """3x3 triplet block of the Hamiltonian over ``(|1;-1>, |1;0>, |1;+1>)``."""
    p = params.canonical()
    c = np.cos(p.theta)
    off = np.sin(p.theta) * np.exp(1j * p.phi) / SQRT2
    return np.array(
        [
            [p.g - c, off, 0.0],
            [np.conj(off), -p.g, off],
            [0.0, np.conj(off), p.g + c],
        ],
        dtype=complex,
    )


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Full 4x4 Hamiltonian over ``(|1;-1>, |1;0>, |1;+1>, |0;0>)``.

    The singlet is decoupled and sits at energy ``-g``.
    """
    h = np.zeros((4, 4), dtype=complex)
    h[:3, :3] = triplet_block(params)
    h[3, 3] = -params.g
    return h


def triplet_blocks(theta, phi, g) -> np.ndarray:
    """Stack of triplet blocks for broadcast arrays of angles, shape ``(..., 3, 3)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    c = np.cos(theta)
    off = np.sin(theta) * np.exp(1j * phi) / SQRT2
    h = np.zeros(theta.shape + (3, 3), dtype=complex)
    h[..., 0, 0] = g - c
    h[..., 1, 1] = -g
    h[..., 2, 2] = g + c
    h[..., 0, 1] = h[..., 1, 2] = off
    h[..., 1, 0] = h[..., 2, 1] = np.conj(off)
    return h


def cubic_residual(x, theta, g):
    """``X^3 + 2g X^2 - X - 2g cos^2(theta)``."""
    c2 = np.cos(theta) ** 2
    return ((x + 2 * g) * x - 1.0) * x - 2 * g * c2


def sorted_roots(theta, g) -> np.ndarray:
    """Ascending real roots of the shifted characteristic cubic, shape ``(..., 3)``.

    Trigonometric form for three real roots followed by Newton polishing.  At
    the poles the cubic factors as ``(X - 1)(X + 1)(X + 2g)`` and the exact
    roots are used instead, since Cardano loses half the digits at a double root.
    """
    theta = np.asarray(theta, dtype=float)
    c2 = np.cos(theta) ** 2
    a = 2.0 * g
    p = -1.0 - a * a / 3.0
    q = 2.0 * a**3 / 27.0 + a / 3.0 - a * c2
    amp = 2.0 * np.sqrt(-p / 3.0)
    arg = np.clip(3.0 * q / (p * amp), -1.0, 1.0)
    ang = np.arccos(arg) / 3.0
    k = np.arange(3) * (2.0 * np.pi / 3.0)
    x = amp * np.cos(ang[..., None] - k) - a / 3.0

    for _ in range(2):
        f = cubic_residual(x, theta[..., None], g)
        df = (3.0 * x + 4.0 * g) * x - 1.0
        step = np.where(np.abs(df) > 1e-300, f / np.where(df == 0, 1.0, df), 0.0)
        x = x - step

    at_pole = np.sin(theta) == 0.0
    if np.any(at_pole):
        exact = np.broadcast_to(np.array([-1.0, 1.0, -2.0 * g]), x.shape)
        x = np.where(at_pole[..., None], exact, x)
    return np.sort(x, axis=-1)


def branch_index(theta: float, g: float, branch: Branch) -> int:
    """Position of ``branch`` in the ascending root list at ``(theta, g)``."""
    branch = Branch.parse(branch)
    if g == 0:
        return {Branch.MINUS: 0, Branch.ZERO: 1, Branch.PLUS: 2}[branch]
    # X(zero) -> -2g sits at the bottom for g > 0 and at the top for g < 0
    zero, rest = (0, (1, 2)) if g > 0 else (2, (0, 1))
    if branch is Branch.ZERO:
        return zero
    lo, hi = rest
    plus_on_top = np.cos(theta) >= 0
    if branch is Branch.PLUS:
        return hi if plus_on_top else lo
    return lo if plus_on_top else hi


def _check_gaps(roots: np.ndarray, theta, g):
    gaps = np.diff(roots)
    if np.any(gaps < ROOT_GAP_TOL):
        raise DegenerateRoots(
            f"coincident triplet branches at theta={theta!r}, g={g!r} (gap {gaps.min():.3g})"
        )


def solve_shifted_eigenvalues(theta: float, g: float) -> dict:
    """Labelled shifted eigenvalues ``X = E - g`` of the triplet block.

    Returns
    -------
    dict
        ``{Branch.MINUS: x, Branch.ZERO: x, Branch.PLUS: x}``.

    Raises
    ------
    DegenerateRoots
        If two roots are closer than ``1e-9`` (only possible at the poles,
        e.g. ``theta=0, g=1/2``).
    """
    roots = sorted_roots(theta, g)
    _check_gaps(roots, theta, g)
    return {b: float(roots[branch_index(theta, g, b)]) for b in BRANCHES}


def components(theta, x):
    """Closed-form real components ``(A, B, C, msq)`` for shifted eigenvalue ``x``.

    Vectorised; no fallback at the 0/0 points (see :func:`branch_components`).
    """
    c = np.cos(theta)
    s = np.sin(theta)
    x2 = x * x
    msq = x2 * x2 + (1.0 - 3.0 * c * c) * x2 + c * c
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(msq)
        a = (x - c) * s / (SQRT2 * root)
        b = (x2 - c * c) / root
        cc = (x + c) * s / (SQRT2 * root)
    return a, b, cc, msq


def _dense_components(theta: float, g: float, index: int):
    # H_c is real symmetric at phi = 0, so the eigenvector already has the
    # (A, B, C) phase pattern; only the overall sign needs fixing.
    h = triplet_block(ModelParams(g, theta, 0.0)).real
    vals, vecs = np.linalg.eigh(h)
    v = vecs[:, index]
    if abs(v[1]) > 1e-12:
        v = v * np.sign(v[1])
    elif abs(v[0]) > 1e-12:
        v = v * np.sign(v[0])
    else:
        v = v * np.sign(v[2])
    return v[0], v[1], v[2]


def branch_components(theta, g: float, index: int):
    """Components ``(X, A, B, C, msq)`` of the branch at sorted position ``index``.

    Vectorised over ``theta``.  Points where the closed form is 0/0 fall back
    to a dense eigensolve re-gauged to the same convention.
    """
    theta = np.asarray(theta, dtype=float)
    x = sorted_roots(theta, g)[..., index]
    a, b, c, msq = components(theta, x)
    bad = ~(msq >= MSQ_FALLBACK)
    if np.any(bad):
        a, b, c = (np.array(v, dtype=float, copy=True) for v in (a, b, c))
        for idx in zip(*np.nonzero(np.atleast_1d(bad))):
            t = float(np.atleast_1d(theta)[idx])
            va, vb, vc = _dense_components(t, g, index)
            if a.ndim == 0:
                a, b, c = np.float64(va), np.float64(vb), np.float64(vc)
            else:
                a[idx], b[idx], c[idx] = va, vb, vc
    return x, a, b, c, msq


def instantaneous_eigenstate(params: ModelParams, branch: Branch):
    """Eigenstate ``(e^{i phi} A, B, e^{-i phi} C)`` of the triplet block.

    Returns
    -------
    (EigenSolution, TripletState)
    """
    p = params.canonical()
    branch = Branch.parse(branch)
    roots = sorted_roots(p.theta, p.g)
    _check_gaps(roots, p.theta, p.g)
    index = branch_index(p.theta, p.g, branch)
    x, a, b, c, msq = branch_components(p.theta, p.g, index)
    sol = EigenSolution(
        branch=branch,
        x=float(x),
        energy=float(x + p.g),
        a=float(a),
        b=float(b),
        c=float(c),
        msq=float(msq),
        fallback=not msq >= MSQ_FALLBACK,
    )
    amps = np.array([np.exp(1j * p.phi) * a, b, np.exp(-1j * p.phi) * c])
    return sol, TripletState.normalized(amps)


def schmidt_decompose(state: TripletState, strict: bool = True) -> SchmidtData:
    """Schmidt decomposition of a triplet-sector state.

    The coefficients are the eigenvalues of the reduced operator of qubit a;
    the b vectors are ``psi^T conj(a_k) / sqrt(p_k)`` so that the product
    phases are locked to the state.

    Raises
    ------
    DegenerateSchmidt
        If ``|p1 - p2| < 1e-9`` and ``strict`` is set.  With ``strict=False``
        the data is returned with ``valid=False``.
    """
    psi = state.coefficient_matrix()
    rho_a = psi @ psi.conj().T
    vals, vecs = np.linalg.eigh(rho_a)
    order = np.argsort(vals)[::-1]
    p = np.clip(vals[order], 0.0, 1.0)
    vecs_a = vecs[:, order].T.copy()
    p1, p2 = float(p[0]), float(p[1])
    valid = abs(p1 - p2) >= SCHMIDT_GAP_TOL
    if not valid and strict:
        raise DegenerateSchmidt(f"degenerate Schmidt coefficients p1={p1:.12g}, p2={p2:.12g}")
    vecs_b = np.zeros((2, 2), dtype=complex)
    for k in range(2):
        w = psi.T @ vecs_a[k].conj()
        n = np.linalg.norm(w)
        if n > 0:
            vecs_b[k] = w / n
    if p[1] < 1e-15:
        # product state: complete b with the orthogonal vector
        b0 = vecs_b[0]
        vecs_b[1] = np.array([-np.conj(b0[1]), np.conj(b0[0])])
    return SchmidtData(p1=p1, p2=p2, r=p1 - p2, vecs_a=vecs_a, vecs_b=vecs_b, valid=valid)


def bloch_length(theta: float, g: float, branch: Branch) -> float:
    """Effective Bloch length ``r = (A + C) sqrt(2B^2 + (C - A)^2)``.

    The value is signed: ``|r| = p1 - p2`` is the Schmidt gap, and the sign
    tells whether the heavier Schmidt vector of qubit a points along (r > 0) or
    against (r < 0) the tilted axis whose polar cosine is ``F cos(theta)``.
    It is independent of ``phi``.
    """
    sol, _ = instantaneous_eigenstate(ModelParams(g, theta, 0.0), branch)
    return float((sol.a + sol.c) * np.sqrt(2 * sol.b**2 + (sol.c - sol.a) ** 2))


def mean_sz(theta: float, g: float, branch: Branch) -> float:
    """Expectation of the total ``S_z`` in the branch eigenstate, ``C^2 - A^2``."""
    sol, _ = instantaneous_eigenstate(ModelParams(g, theta, 0.0), branch)
    return float(sol.c**2 - sol.a**2)
