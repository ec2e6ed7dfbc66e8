"""Exception hierarchy shared by the whole library.

Everything raised on purpose derives from :class:`Char2Error`, so callers
(and the scenario runner) can distinguish "the input violates a contract"
from a genuine bug.
"""


class Char2Error(Exception):
    """Base class for all library errors."""


class TowerMismatch(Char2Error):
    """Operands live in incompatible towers (no coercion path)."""


class UnsupportedTower(Char2Error):
    """The operation is not defined for this tower shape."""


class NotQuadraticLevel(Char2Error):
    """norm/s/conj were asked of an element whose top level is not quadratic."""


class PrecisionExhausted(Char2Error):
    """A truncated series does not carry enough terms to answer."""


class SearchExhausted(Char2Error):
    """A bounded search ended without the decision the pipeline requires."""


class ZeroInput(Char2Error):
    """The operation needs a nonzero (or provably nonzero) argument."""


class ZeroInverse(ZeroInput):
    """Inverse of (provable) zero."""


class ZeroScale(ZeroInput):
    """Scaling a form by zero."""


class ZeroWedge(ZeroInput):
    """Wedging a class with dlog of zero."""


class NotSquare(Char2Error):
    """An exact square root was requested of a non-square."""


class NonCanonicalInput(Char2Error):
    """A structured argument violates its well-formedness invariant."""


class SingularForm(NonCanonicalInput):
    """A nonsingular quadratic form was required (quasilinear part present)."""


class ZeroSlot(NonCanonicalInput):
    """A symbol or form slot that must be nonzero is (provably) zero."""


class WildCoefficient(Char2Error):
    """A residue map was asked of a class whose coefficient has a pole."""


class NotResidueReady(Char2Error):
    """A slot cannot be split as unit * var^k at the requested level."""


class NotPfisterPresented(Char2Error):
    """e_n needs a Pfister-presented argument and none was given."""


class NoFormPreimage(Char2Error):
    """transfer on cohomology classes needs a form-level presentation."""


class NotAlbert(Char2Error):
    """The form is not a 6-dimensional Arf-trivial (Albert-type) form."""


class GP3ShapeFailed(Char2Error):
    """The transferred form did not match its predicted 3-fold Pfister shape."""


class WitnessInvalid(Char2Error):
    """A supplied splitting witness fails its defining identity."""


class ModulusMismatch(Char2Error):
    """Two invariant values live modulo different subgroups."""


class NotInKernel(Char2Error):
    """The class provably does not restrict to zero, so no decomposition exists."""


class TransferNonzero(Char2Error):
    """The transfer of the class could not be certified zero."""


class UnknownSuite(Char2Error):
    """No property suite is registered under that name."""


class DataInvalid(Char2Error):
    """Instance data fails validation (degrees, membership, coercibility)."""


class ScenarioError(Char2Error):
    """A scenario file is malformed or references an unknown name."""


class AssertionFailed(Char2Error):
    """A scenario `assert` line evaluated to the wrong verdict."""
