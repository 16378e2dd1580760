"""
Error types raised by gablab.

Every input failure has its own class so callers (and the CLI) can tell them
apart; all of them are ValueErrors.
"""


class GablabError(ValueError):
    """Base class for all gablab input and precondition errors."""


# Groups and elements

class EmptyModuliError(GablabError):
    pass


class InvalidModulusError(GablabError):
    pass


class OrderCapExceededError(GablabError):
    pass


class SideMismatchError(GablabError):
    pass


class ArityMismatchError(GablabError):
    pass


class ForeignElementError(GablabError):
    pass


class GroupMismatchError(GablabError):
    pass


# Operators and coefficient arrays

class LengthMismatchError(GablabError):
    pass


class NotInLatticeError(GablabError):
    pass


class NonPositiveWeightError(GablabError):
    pass


class NonHermitianError(GablabError):
    pass


class ConvergenceError(GablabError):
    pass


# Frame-theoretic preconditions

class NotAFrameError(GablabError):
    pass


class NotParsevalError(GablabError):
    pass


class NotTightError(GablabError):
    pass


class NotOrthonormalError(GablabError):
    pass


class LatticeMismatchError(GablabError):
    pass


class InvalidThetaError(GablabError):
    pass


class ResidualExceededError(GablabError):
    """The R-dual identity failed beyond tolerance: an implementation defect."""
