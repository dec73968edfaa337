"""Exception hierarchy shared by all modules.

Everything numerical derives from :class:`NumericalError` so the CLI can map
failures to a single exit code while usage errors stay separate.
"""


class NdeLabError(Exception):
    """Base class for all package errors."""


class NumericalError(NdeLabError):
    """A computation could not be completed as requested."""


# --- root finding / integration ---

class NoSignChangeError(NumericalError):
    """Root bracket does not straddle a sign change."""


class MaxIterationsError(NumericalError):
    """Iteration budget exhausted before reaching tolerance."""


# --- profiles and shooting ---

class ShootingFailedError(NumericalError):
    """Shooting could not match the requested far-field value."""


class CompleteBlowupError(NumericalError):
    """Every orbit terminates in a square-root singularity; no bounded
    oscillatory profile exists for this exponent."""


class InsufficientTailError(NumericalError):
    """Too few resolved oscillations to estimate tail quantities."""


class UnclassifiedSingularityError(NumericalError):
    """No local model (sqrt / quadratic contact / cubic growth) fits."""


class SingularAtOriginError(NumericalError):
    """Final-time profile diverges at x = 0 for negative exponents."""


class DomainError(NumericalError):
    """Argument outside the mathematical domain of the operation."""


# --- exact solutions ---

class RootNotFoundError(NumericalError):
    """A cubic piece has no admissible next zero (construction defect)."""


class InsufficientHumpsError(NumericalError):
    """Envelope fit needs more humps than the construction provides."""


class ZeroJumpError(NumericalError):
    """Jump condition is undefined for a vanishing value jump."""


# --- invariant-subspace dynamics ---

class AtBlowupError(NumericalError):
    """Closed-form coefficients requested at or past the blow-up time."""


class NonBlowupError(NumericalError):
    """Initial cubic coefficient does not lead to finite-time blow-up."""


# --- blow-up estimates ---

class NonpositiveJ0Error(NumericalError):
    """Weighted initial coefficient is not positive; no bound follows."""


class DivergentCutoffError(NumericalError):
    """Cut-off vanishes too slowly at an endpoint; capacity integral
    diverges."""


class InsufficientSamplesError(NumericalError):
    """Not enough samples for a finite-difference check."""


class OutOfDomainError(NumericalError):
    """Evaluation point outside the weight's support interval."""


# --- PDE simulation ---

class InvalidGridError(NumericalError):
    """Grid violates the minimum-resolution contract."""


class CflViolationError(NumericalError):
    """Requested time step exceeds the explicit stability limit."""


class BlowupDetectedError(NumericalError):
    """Solution magnitude crossed the blow-up threshold.

    Carries the partially recorded diagnostics on the ``diagnostics``
    attribute when raised from :func:`nde_lab.pde_simulator.evolve`.
    """

    def __init__(self, message, diagnostics=None, state=None):
        super().__init__(message)
        self.diagnostics = diagnostics
        self.state = state


class OutOfWindowError(NumericalError):
    """Rescaling window not contained in the simulated domain."""
