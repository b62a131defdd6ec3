# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Exception hierarchy and exit status codes for affinform."""

# standard libs
from typing import Iterable


EXIT_SUCCESS = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_DESIGN = 3
EXIT_DIVERGENCE = 4
EXIT_CONDITIONING = 5
EXIT_INTERRUPT = 130


class AffinformError(Exception):
    """Base class for all domain failures raised by affinform."""
    exit_status = EXIT_UNEXPECTED


class ValidationError(AffinformError):
    """Input (framework, weights, gain, scenario) failed validation."""
    exit_status = EXIT_VALIDATION


class GraphError(ValidationError):
    """Interaction graph is malformed (self-loop, duplicate pair, disconnected)."""


class DegenerateShapeError(ValidationError):
    """The vectors 1, Re(p*) and Im(p*) are not linearly independent."""


class WeightValidationError(ValidationError):
    """Stress weights violate symmetry, sparsity or the equilibrium balance."""


class GainValidationError(ValidationError):
    """The product K·L does not have exactly three zero eigenvalues with the rest stable."""

    def __init__(self, message: str, offending: Iterable[complex] = ()) -> None:
        super().__init__(message)
        self.offending = list(offending)


class UnsupportedTopologyError(ValidationError):
    """The requested design procedure does not apply to the given graph."""


class OutOfShapeError(ValidationError):
    """A configuration expected inside the desired shape set is not."""


class StabilityPreconditionError(ValidationError):
    """The complement block of K·L has an eigenvalue with non-positive real part."""


class RankDefectError(ValidationError):
    """A matrix expected to have rank n-3 does not."""


class ScenarioError(ValidationError):
    """A scenario file is malformed or references missing resources."""


class DesignError(AffinformError):
    """A design step (weights, motion parameters) has no solution."""
    exit_status = EXIT_DESIGN


class NoStressError(DesignError):
    """No nontrivial stress satisfies the equilibrium balance on this framework."""


class UnreachableVelocityError(DesignError):
    """An agent cannot realize its reference velocity from its relative positions."""

    def __init__(self, message: str, agent: int = None) -> None:
        super().__init__(message)
        self.agent = agent


class ZeroWeightError(DesignError):
    """Hardware scaling requested on an edge with zero stress weight but nonzero motion."""

    def __init__(self, message: str, edge: tuple = None) -> None:
        super().__init__(message)
        self.edge = edge


class DivergenceError(AffinformError):
    """Numerical integration produced a non-finite or exploding state."""
    exit_status = EXIT_DIVERGENCE

    def __init__(self, message: str, last_time: float = None, last_state=None) -> None:
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class ConditioningError(AffinformError):
    """A linear system needed for the closed-form solution is ill-conditioned."""
    exit_status = EXIT_CONDITIONING


class NotPSDWarning(UserWarning):
    """The best stress found is not positive semidefinite; a gain K must compensate."""


class ConditioningWarning(UserWarning):
    """A closed-form vector was built from a near-singular expression."""
