"""Exception taxonomy shared by all modules.

Three input-error kinds plus a solver failure:

* StructuralError   -- shape/index mismatches (a vector bound to the wrong
                       space, an out-of-range element index, a non-square
                       basis where a basis is required).
* DomainError       -- mathematically invalid values (p outside (1, inf),
                       the zero vector where a norming functional is needed,
                       delta >= 1 in the Riesz formula).
* ConfigurationError -- feasibility/config problems (enumeration over the
                       oracle cap, a grid too coarse for a dictionary, an
                       experiment config that does not validate).
* SolverError       -- the Chebyshev projector failed to certify optimality;
                       carries the last iterate and gradient norm.
"""


class StructuralError(ValueError):
    pass


class DomainError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, coefficients=None, grad_norm=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.grad_norm = grad_norm
