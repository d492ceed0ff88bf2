"""Exception types raised on degenerate or ill-posed physics inputs."""


class CoupledBerryError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DegenerateRoots(CoupledBerryError):
    """Two branches of the triplet block coincide; branch labels are ambiguous."""

    exit_code = 4


class DegenerateSchmidt(CoupledBerryError):
    """Equal Schmidt coefficients; the Schmidt vectors (and their phases) are undefined."""

    exit_code = 3


class UndefinedPhase(DegenerateSchmidt):
    """Mixed-state phase of a degenerate reduced density operator."""


class SingularScaleFactor(CoupledBerryError):
    """Vanishing denominator in the coupling scale factor."""

    exit_code = 3


class DegenerateAlongPath(DegenerateRoots):
    """Eigen-gap closes somewhere on a discretised loop."""


class NonconvergentQuadrature(CoupledBerryError):
    """Panel doubling did not converge within the panel budget."""


class NormDrift(CoupledBerryError):
    """Integrator failed to preserve the state norm."""


class AdiabaticityFailure(CoupledBerryError):
    """Populations of instantaneous eigenstates drifted; the period is too short."""

    exit_code = 5


class TransitionPath(CoupledBerryError):
    """Schmidt coefficients vary along the loop; no mixed-state phase is assigned."""

    exit_code = 3
