"""Closed loops traced by the field direction on the unit sphere."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


def unit_vector(theta, phi) -> np.ndarray:
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    return np.stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1
    )


class LoopPath:
    """A loop ``s in [0, 1] -> (theta(s), phi(s))``, closed on the sphere."""

    name = "loop"

    def sample(self, s):
        raise NotImplementedError

    def endpoints(self):
        th, ph = self.sample(np.array([0.0, 1.0]))
        return (float(th[0]), float(ph[0])), (float(th[1]), float(ph[1]))

    def is_closed(self, tol: float = 1e-12) -> bool:
        (t0, p0), (t1, p1) = self.endpoints()
        return bool(np.linalg.norm(unit_vector(t0, p0) - unit_vector(t1, p1)) < tol)

    def starts_at_pole(self) -> bool:
        (t0, _), _ = self.endpoints()
        return bool(np.sin(t0) == 0.0 or abs(np.sin(t0)) < 1e-14)

    def describe(self) -> str:
        return self.name


@dataclass(frozen=True)
class ConstantPolar(LoopPath):
    """Circle of constant polar angle, ``phi`` running once from 0 to ``2 pi``."""

    theta: float

    @property
    def name(self):
        return "constant-theta"

    def sample(self, s):
        s = np.asarray(s, dtype=float)
        return np.full_like(s, self.theta), 2.0 * np.pi * s

    def describe(self) -> str:
        return f"constant-theta theta={self.theta!r}"


@dataclass(frozen=True)
class Parametrized(LoopPath):
    """Loop given by vectorised callables ``theta_of(s)`` and ``phi_of(s)``.

    ``duration`` is the traversal time used by the propagation oracle; it is
    optional here because the geometric quantities do not depend on it.
    """

    theta_of: Callable
    phi_of: Callable
    duration: Optional[float] = None
    label: str = "parametrized"

    @property
    def name(self):
        return self.label

    def sample(self, s):
        s = np.asarray(s, dtype=float)
        th = np.broadcast_to(np.asarray(self.theta_of(s), dtype=float), s.shape)
        ph = np.broadcast_to(np.asarray(self.phi_of(s), dtype=float), s.shape)
        return th.copy(), ph.copy()

    def describe(self) -> str:
        return self.label


def _pole_loop_theta(s):
    return np.pi * np.sin(np.pi * s)


def _pole_loop_phi(s):
    return np.pi * s


def transition_loop(duration: Optional[float] = None) -> Parametrized:
    """Pole-to-pole loop ``theta = pi sin(pi s)``, ``phi = pi s``.

    Starts and ends at the north pole, so it is closed on the sphere but not in
    the ``(theta, phi)`` chart.
    """
    return Parametrized(_pole_loop_theta, _pole_loop_phi, duration=duration, label="pole-to-pole")


def constant_theta_as_parametrized(theta: float) -> Parametrized:
    return Parametrized(
        lambda s: np.full_like(np.asarray(s, float), theta),
        lambda s: 2.0 * np.pi * np.asarray(s, float),
        label=f"constant-theta theta={theta!r}",
    )


def static_loop(theta: float, phi: float = 0.0) -> Parametrized:
    """Zero-length loop: the field never moves."""
    return Parametrized(
        lambda s: np.full_like(np.asarray(s, float), theta),
        lambda s: np.full_like(np.asarray(s, float), phi),
        label="static",
    )
