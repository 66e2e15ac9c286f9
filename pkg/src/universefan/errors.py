"""Exception types raised across the package."""


class UniverseFanError(Exception):
    """Base class; every error raised on purpose by this package derives from it."""


class InputError(UniverseFanError):
    """Malformed or out-of-range input. The CLI maps these to exit code 2."""


class NotALattice(InputError):
    def __init__(self, a, b, what="join"):
        super().__init__(f"no {what} for pair ({a}, {b})")
        self.pair = (a, b)


class NoBottom(InputError):
    pass


class NoTop(InputError):
    pass


class TooLarge(InputError):
    pass


class NotAtomic(InputError):
    pass


class UnknownFixture(InputError):
    pass


class NotNestable(InputError):
    pass


class NotNestoid(InputError):
    pass


class NotStable(InputError):
    pass


class NotMaximal(InputError):
    pass


class NotSimplicial(UniverseFanError):
    pass


class NotUnimodular(UniverseFanError):
    def __init__(self, det):
        super().__init__(f"cone is not unimodular (lattice index {det})")
        self.det = det


class ZeroDenominator(UniverseFanError):
    def __init__(self, term=None):
        super().__init__(f"substitution sends a denominator to zero: {term}")
        self.term = term


class DoublePole(UniverseFanError):
    pass


class DegeneratePoint(UniverseFanError):
    pass


class InvalidMarking(InputError):
    def __init__(self, condition, detail=""):
        msg = f"marking violates condition ({condition})"
        super().__init__(msg + (f": {detail}" if detail else ""))
        self.condition = condition


class NotAFace(UniverseFanError):
    pass


class GluingViolation(UniverseFanError):
    def __init__(self, n1, n2, detail=""):
        super().__init__(f"selector fails gluing on {n1} / {n2} {detail}".strip())
        self.pair = (n1, n2)


class NotConnectedMember(InputError):
    pass


class ParseError(InputError):
    pass
