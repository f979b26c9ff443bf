"""Exception hierarchy shared by every pumi module."""


class PumiError(Exception):
    """Base class for all errors raised by pumi."""


class EmptyPointSet(PumiError):
    pass


class DegenerateGeometry(PumiError):
    pass


class TooFewPoints(PumiError):
    pass


class EmptyCover(PumiError):
    pass


class OutOfDomain(PumiError):
    pass


class RadiusExceedsBlock(PumiError):
    pass


class InvalidRadius(PumiError):
    pass


class DuplicateSites(PumiError):
    pass


class IllConditionedPatch(PumiError):
    def __init__(self, patch_id, message=None):
        self.patch_id = patch_id
        super().__init__(message or f"patch {patch_id}: factorization failed after regularization")


class UncoveredSites(PumiError):
    def __init__(self, indices):
        self.indices = list(indices)
        shown = ", ".join(str(i) for i in self.indices[:20])
        more = "" if len(self.indices) <= 20 else f", ... ({len(self.indices)} total)"
        super().__init__(f"sites not covered by any patch: {shown}{more}")


class UncoveredPoint(PumiError):
    pass


class NumericalBlowup(PumiError):
    def __init__(self, time):
        self.time = time
        super().__init__(f"non-finite state encountered at t = {time!r}")


class InvalidBracket(PumiError):
    pass


class BisectError(PumiError):
    pass


class MissingParameters(PumiError):
    def __init__(self, names):
        self.names = list(names)
        super().__init__("missing parameters: " + ", ".join(self.names))
