"""Field tower descriptions.

A tower is a linked chain starting at GF(2^e) and extended by iterated
Laurent-series levels ``base((t))`` and quadratic levels (separable
Artin-Schreier ``δ² + δ = a`` or inseparable ``δ² = d``). Towers are
immutable value objects; equality is structural, so two independently
built descriptions of the same tower interoperate.
"""
from __future__ import annotations

from typing import Optional

from . import gf2
from .errors import NonCanonicalInput, UnsupportedTower

FINITE = "finite"
LAURENT = "laurent"
ARTIN_SCHREIER = "artin_schreier"
INSEP = "insep"

DEFAULT_PRECISION = 48


class FieldTower:
    __slots__ = ("kind", "base", "e", "var", "precision", "adjoined", "label",
                 "_signature")

    def __init__(self, kind, base=None, *, e=None, var=None, precision=None,
                 adjoined=None, label=None):
        self.kind = kind
        self.base = base
        self.e = e
        self.var = var
        self.precision = precision
        self.adjoined = adjoined
        self.label = label
        self._signature = None

    # -- structure ---------------------------------------------------------

    @property
    def signature(self) -> tuple:
        """Canonical structural key (label excluded: it is only for printing)."""
        if self._signature is None:
            if self.kind == FINITE:
                sig = (FINITE, self.e)
            elif self.kind == LAURENT:
                sig = (LAURENT, self.base.signature, self.var, self.precision)
            else:
                sig = (self.kind, self.base.signature, self.adjoined.ser())
            self._signature = sig
        return self._signature

    def __eq__(self, other):
        return isinstance(other, FieldTower) and self.signature == other.signature

    def __hash__(self):
        return hash(self.signature)

    def levels(self) -> list["FieldTower"]:
        """The chain from the root finite field up to (and including) self."""
        out, cur = [], self
        while cur is not None:
            out.append(cur)
            cur = cur.base
        out.reverse()
        return out

    @property
    def root(self) -> "FieldTower":
        cur = self
        while cur.base is not None:
            cur = cur.base
        return cur

    @property
    def degree(self) -> int:
        """Extension degree e of the root finite field GF(2^e)."""
        return self.root.e

    def laurent_vars(self) -> list[str]:
        return [t.var for t in self.levels() if t.kind == LAURENT]

    @property
    def is_quadratic(self) -> bool:
        return self.kind in (ARTIN_SCHREIER, INSEP)

    def chain_supported(self) -> bool:
        """True when every level is Finite or Laurent (ps_reduce territory)."""
        return all(t.kind in (FINITE, LAURENT) for t in self.levels())

    def contains(self, other: "FieldTower") -> bool:
        osig = other.signature
        return any(t.signature == osig for t in self.levels())

    def describe(self) -> str:
        if self.kind == FINITE:
            return f"gf(2^{self.e})"
        if self.kind == LAURENT:
            return f"{self.base.describe()}(({self.var}))"
        name = self.label or "?"
        gen = "p^-1" if self.kind == ARTIN_SCHREIER else "sqrt"
        return f"{self.base.describe()}[{name}={gen}({self.adjoined.ser()})]"

    def __repr__(self):
        return f"<FieldTower {self.describe()}>"

    # -- element conveniences (lazy import to avoid a module cycle) --------

    def zero(self):
        from . import elements
        return elements.const(self, 0)

    def one(self):
        from . import elements
        return elements.const(self, 1)

    def const(self, n: int):
        from . import elements
        return elements.const(self, n)

    def gen(self):
        """The level's own generator: w, the Laurent variable, or δ."""
        from . import elements
        return elements.generator(self)

    def coerce(self, x):
        from . import elements
        return elements.coerce(x, self)


def finite(e: int) -> FieldTower:
    """GF(2^e) with the compiled-in modulus table."""
    if not 1 <= e <= gf2.MAX_DEGREE:
        raise UnsupportedTower(f"GF(2^e) supported for 1 <= e <= {gf2.MAX_DEGREE}")
    return FieldTower(FINITE, e=e)


def laurent(base: FieldTower, var: str, precision: int = DEFAULT_PRECISION) -> FieldTower:
    if not var.isidentifier():
        raise NonCanonicalInput(f"bad Laurent variable name {var!r}")
    if var in base.laurent_vars():
        raise NonCanonicalInput(f"variable {var!r} already used in the tower")
    if var == "w":
        raise NonCanonicalInput("'w' is reserved for the finite-field generator")
    if precision < 1:
        raise NonCanonicalInput("precision floor is 1")
    return FieldTower(LAURENT, base, var=var, precision=precision)


def artin_schreier(base: FieldTower, a, label: Optional[str] = None,
                   check: bool = True) -> FieldTower:
    """base(δ) with δ² + δ = a. Rejects a ∈ ℘(base) whenever that is decidable."""
    a = base.coerce(a)
    if check:
        from .reduction import ps_class_zero
        try:
            dec = ps_class_zero(a)
        except UnsupportedTower:
            dec = None
        if dec is not None and dec.is_zero:
            raise NonCanonicalInput(
                "Artin-Schreier slot lies in ℘(base); the extension would split")
    return FieldTower(ARTIN_SCHREIER, base, adjoined=a, label=label)


def insep(base: FieldTower, d, label: Optional[str] = None,
          check: bool = True) -> FieldTower:
    """base(δ) with δ² = d. Rejects square d whenever that is decidable."""
    d = base.coerce(d)
    if check:
        from .elements import is_square
        dec = is_square(d)
        if dec.is_zero:
            raise NonCanonicalInput("d is a square; the extension would be trivial")
    return FieldTower(INSEP, base, adjoined=d, label=label)
