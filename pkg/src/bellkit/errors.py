"""Exception hierarchy shared by every bellkit module."""


class BellkitError(Exception):
    """Base class for all library errors."""


class ModelStructureError(BellkitError):
    """Tables are missing entries or have the wrong shape."""


class InvalidModelError(BellkitError):
    """A model violates a probability invariant (positivity, normalization)."""


class UnsupportedAlphabetError(BellkitError):
    """An operation needs +/-1 outcomes and got something else."""


class UnsupportedModelError(BellkitError):
    """The operation is not defined for this number of parties or settings."""


class ParameterRangeError(BellkitError, ValueError):
    """A scalar argument lies outside its admissible range."""


class BranchCapError(BellkitError):
    """The LP engine would have to enumerate more branches than allowed."""

    def __init__(self, needed, cap):
        super().__init__(
            f"{needed} branches needed but the cap is {cap}; "
            "raise LPConfig.branch_cap or reduce the functional size"
        )
        self.needed = needed
        self.cap = cap
