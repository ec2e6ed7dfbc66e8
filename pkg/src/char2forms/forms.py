"""Quadratic and bilinear forms over characteristic-2 towers.

A quadratic form is kept in decomposed shape: nonsingular binary pairs
[a, b] (meaning ax² + xy + by²) plus a quasilinear diagonal ⟨c₁,…,c_s⟩.
Bilinear forms are diagonal ⟨c₁,…⟩_b. GramPresentation carries a raw
value-list/polar-matrix presentation; normalize_quadratic brings it to the
decomposed shape by symplectic split-off.

The Scharlau transfer s∗ along s(1) = 0, s(δ) = 1 is computed by {1, δ}
basis expansion into a Gram presentation over the base, then normalized.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .elements import (Elem, add, coerce, const, inv, mul, norm_quadratic,
                       s_map, valuation_unit_split, zero3)
from .errors import (NotQuadraticLevel, NotResidueReady, PrecisionExhausted,
                     SingularForm, UnsupportedTower, WildCoefficient,
                     ZeroScale, ZeroSlot)
from .towers import LAURENT, FieldTower

YES, NO, MAYBE = "yes", "no", "maybe"


@dataclass(frozen=True)
class BilinForm:
    """Diagonal symmetric bilinear form ⟨entries⟩_b."""

    tower: FieldTower
    entries: tuple[Elem, ...]

    def __post_init__(self):
        for c in self.entries:
            if zero3(c) == YES:
                raise ZeroSlot("bilinear diagonal entry is zero")

    @property
    def dim(self) -> int:
        return len(self.entries)

    def ser(self) -> str:
        return "b<" + ",".join(c.ser() for c in self.entries) + ">"


def bilinear_pfister(tower: FieldTower, slots: Iterable[Elem]) -> BilinForm:
    """⟨⟨a₁,…,a_n⟩⟩ expanded to its 2^n subset products (1 first)."""
    slots = [coerce(s, tower) for s in slots]
    entries = []
    for mask in range(1 << len(slots)):
        p = const(tower, 1)
        for i, s in enumerate(slots):
            if mask >> i & 1:
                p = mul(p, s)
        entries.append(p)
    return BilinForm(tower, tuple(entries))


@dataclass(frozen=True)
class QuadForm:
    tower: FieldTower
    pairs: tuple[tuple[Elem, Elem], ...] = ()
    quasi: tuple[Elem, ...] = ()

    @property
    def type_rs(self) -> tuple[int, int]:
        return len(self.pairs), len(self.quasi)

    @property
    def dim(self) -> int:
        return 2 * len(self.pairs) + len(self.quasi)

    @property
    def nonsingular(self) -> bool:
        return not self.quasi

    def ser(self) -> str:
        ps = ";".join(a.ser() + "," + b.ser() for a, b in self.pairs)
        qs = ",".join(c.ser() for c in self.quasi)
        return f"qf[{ps}|{qs}]"

    def __repr__(self):
        from .syntax import print_form
        return f"<QuadForm {print_form(self)}>"


def pair_form(tower: FieldTower, a, b) -> QuadForm:
    return QuadForm(tower, ((coerce(a, tower), coerce(b, tower)),))


def hyperbolic_plane(tower: FieldTower) -> QuadForm:
    return pair_form(tower, 0, 0)


def quasilinear_form(tower: FieldTower, entries: Iterable[Elem]) -> QuadForm:
    kept = []
    for c in entries:
        c = coerce(c, tower)
        if zero3(c) == YES:
            continue              # radical summand; drop, see ledger
        kept.append(c)
    return QuadForm(tower, (), tuple(kept))


def perp(*forms: QuadForm) -> QuadForm:
    tower = forms[0].tower
    pairs: list = []
    quasi: list = []
    for f in forms:
        if f.tower != tower:
            raise UnsupportedTower("perp of forms over different towers")
        pairs.extend(f.pairs)
        quasi.extend(f.quasi)
    return QuadForm(tower, tuple(pairs), tuple(quasi))


def scale(lam: Elem, phi: QuadForm) -> QuadForm:
    """λ·φ with the scaled-pair normal form λ[a,b] = [λa, λ⁻¹b]."""
    lam = coerce(lam, phi.tower)
    if zero3(lam) == YES:
        raise ZeroScale("scaling a form by zero")
    lam_inv = inv(lam)
    pairs = tuple((mul(lam, a), mul(lam_inv, b)) for a, b in phi.pairs)
    quasi = tuple(mul(lam, c) for c in phi.quasi)
    return QuadForm(phi.tower, pairs, quasi)


def tensor_bilin(beta: BilinForm, phi: QuadForm) -> QuadForm:
    """⟨c₁,…⟩_b ⊗ φ = ⊥ c_i·φ."""
    if beta.tower != phi.tower:
        raise UnsupportedTower("tensor over different towers")
    return perp(*(scale(c, phi) for c in beta.entries))


def pfister_quad(tower: FieldTower, bslots: Iterable[Elem], a) -> QuadForm:
    """⟪b₁,…,b_{n−1}, a⟫ = ⟨⟨b₁,…⟩⟩ ⊗ [1, a]."""
    return tensor_bilin(bilinear_pfister(tower, bslots),
                        pair_form(tower, 1, a))


def albert_form(tower: FieldTower, q1: tuple, q2: tuple) -> QuadForm:
    """[1, a₁+a₂] ⊥ b₁[1, a₁] ⊥ b₂[1, a₂] — six-dimensional, Arf-trivial."""
    a1, b1 = (coerce(v, tower) for v in q1)
    a2, b2 = (coerce(v, tower) for v in q2)
    if zero3(b1) == YES or zero3(b2) == YES:
        raise ZeroSlot("Albert norm slots must be nonzero")
    return perp(pair_form(tower, 1, add(a1, a2)),
                scale(b1, pair_form(tower, 1, a1)),
                scale(b2, pair_form(tower, 1, a2)))


def arf(phi: QuadForm) -> Elem:
    """Σ aᵢbᵢ, returned ps-reduced whenever the tower chain supports it."""
    if phi.quasi:
        raise SingularForm("Arf invariant needs a nonsingular form")
    total = const(phi.tower, 0)
    for a, b in phi.pairs:
        total = add(total, mul(a, b))
    if phi.tower.chain_supported():
        from .reduction import ps_reduce
        return ps_reduce(total)
    return total


def arf_class_zero(phi: QuadForm):
    """Decision for Δ(φ) = 0 in K/℘(K), covering quadratic top levels."""
    if phi.quasi:
        raise SingularForm("Arf invariant needs a nonsingular form")
    from .reduction import ps_class_zero, ps_class_zero_over
    total = const(phi.tower, 0)
    for a, b in phi.pairs:
        total = add(total, mul(a, b))
    if phi.tower.is_quadratic:
        return ps_class_zero_over(phi.tower, total)
    return ps_class_zero(total)


# ---------------------------------------------------------------------------
# Gram presentations


@dataclass
class GramPresentation:
    tower: FieldTower
    values: list[Elem]
    polar: list[list[Elem]]

    @property
    def dim(self) -> int:
        return len(self.values)


def gram(phi: QuadForm) -> GramPresentation:
    t = phi.tower
    n = phi.dim
    zero_elem = const(t, 0)
    values: list[Elem] = []
    polar = [[zero_elem for _ in range(n)] for _ in range(n)]
    i = 0
    one = const(t, 1)
    for a, b in phi.pairs:
        values.extend([a, b])
        polar[i][i + 1] = one
        polar[i + 1][i] = one
        i += 2
    values.extend(phi.quasi)
    return GramPresentation(t, values, polar)


def evaluate_gram(g: GramPresentation, vec: list[Elem]) -> Elem:
    """q(Σ vᵢeᵢ) = Σ vᵢ²q(eᵢ) + Σ_{i<j} vᵢvⱼ b(eᵢ,eⱼ)."""
    acc = const(g.tower, 0)
    n = g.dim
    for i in range(n):
        acc = add(acc, mul(mul(vec[i], vec[i]), g.values[i]))
        for j in range(i + 1, n):
            acc = add(acc, mul(mul(vec[i], vec[j]), g.polar[i][j]))
    return acc


def normalize_quadratic(g: GramPresentation,
                        log: Optional[list[str]] = None) -> QuadForm:
    """Symplectic split-off into pairs ⊥ quasilinear.

    Deterministic pivot order (lexicographic smallest (i, j) with a
    certifiably nonzero polar entry); raises PrecisionExhausted when some
    remaining polar entry cannot be certified zero or nonzero.
    """
    t = g.tower
    values = list(g.values)
    polar = [row[:] for row in g.polar]
    active = list(range(g.dim))
    pairs: list[tuple[Elem, Elem]] = []

    while True:
        pivot = None
        undecided = None
        for ii, i in enumerate(active):
            for j in active[ii + 1:]:
                z = zero3(polar[i][j])
                if z == NO:
                    pivot = (i, j)
                    break
                if z == MAYBE and undecided is None:
                    undecided = (i, j)
            if pivot:
                break
        if pivot is None:
            if undecided is not None:
                raise PrecisionExhausted(
                    f"polar entry {undecided} not certifiably zero or nonzero")
            quasi = tuple(values[i] for i in active
                          if zero3(values[i]) != YES)
            return QuadForm(t, tuple(pairs), quasi)

        i, j = pivot
        b = polar[i][j]
        b_inv = inv(b)
        q_u = values[i]
        q_v = mul(mul(b_inv, b_inv), values[j])
        if log is not None:
            log.append(f"split-pair({i},{j})")
        rest = [k for k in active if k not in (i, j)]
        lam = {k: mul(b_inv, polar[k][j]) for k in rest}
        mu = {k: polar[k][i] for k in rest}
        for k in rest:
            lk, mk = lam[k], mu[k]
            values[k] = add(values[k],
                            add(add(mul(mul(lk, lk), q_u),
                                    mul(mul(mk, mk), q_v)),
                                mul(lk, mk)))
        for ki, k in enumerate(rest):
            for m in rest[ki + 1:]:
                upd = add(polar[k][m],
                          add(mul(lam[m], mu[k]), mul(lam[k], mu[m])))
                polar[k][m] = upd
                polar[m][k] = upd
        pairs.append((q_u, q_v))
        active = rest


def quadform_in_basis(g: GramPresentation,
                      basis: list[list[Elem]]) -> GramPresentation:
    """The same form presented on the given vectors (not checked independent)."""
    t = g.tower
    n = len(basis)
    values = [evaluate_gram(g, v) for v in basis]
    zero_elem = const(t, 0)
    polar = [[zero_elem for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            acc = const(t, 0)
            for p in range(g.dim):
                for q in range(g.dim):
                    if p == q:
                        continue
                    acc = add(acc, mul(mul(basis[i][p], basis[j][q]),
                                       g.polar[p][q] if p < q else g.polar[q][p]))
            # b(x, y) with x = Σ x_p e_p: cross terms only (b alternating)
            polar[i][j] = acc
            polar[j][i] = acc
    return GramPresentation(t, values, polar)


# ---------------------------------------------------------------------------
# transfer


def transfer_s(phi: QuadForm) -> QuadForm:
    """Scharlau transfer along s: K → F, s(1) = 0, s(δ) = 1.

    Expands each K-basis vector e into (e, δe), takes values/polars through
    s, and normalizes. The dimension doubles.
    """
    K = phi.tower
    if not K.is_quadratic:
        raise NotQuadraticLevel("transfer needs a quadratic top level")
    gk = gram(phi)
    delta = K.gen()
    dsq = mul(delta, delta)
    n = gk.dim
    values: list[Elem] = []
    for i in range(n):
        values.append(s_map(gk.values[i]))
        values.append(s_map(mul(dsq, gk.values[i])))
    F = K.base
    zero_elem = const(F, 0)
    polar = [[zero_elem] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            bij = gk.polar[i][j]
            entries = (s_map(bij), s_map(mul(delta, bij)),
                       s_map(mul(delta, bij)), s_map(mul(dsq, bij)))
            polar[2 * i][2 * j] = entries[0]
            polar[2 * i][2 * j + 1] = entries[1]
            polar[2 * i + 1][2 * j] = entries[2]
            polar[2 * i + 1][2 * j + 1] = entries[3]
    # within one K-line b(e, δe) = s(δ·b_K(e, e)) = 0, so those stay zero
    return normalize_quadratic(GramPresentation(F, values, polar))


# ---------------------------------------------------------------------------
# Clifford invariant


def clifford_class(phi: QuadForm):
    """C(φ) as a formal sum of quaternion symbols [aᵢbᵢ, aᵢ)."""
    from .km import BrauerClass, QuatSymbol
    if phi.quasi:
        raise SingularForm("Clifford invariant needs a nonsingular form")
    symbols = []
    for a, b in phi.pairs:
        za, zb = zero3(a), zero3(b)
        if za == YES or zb == YES:
            continue                       # [0, b] ≅ [a, 0] ≅ H, class 0
        if MAYBE in (za, zb):
            raise PrecisionExhausted(
                "pair slot not certifiably zero or nonzero for Clifford class")
        symbols.append(QuatSymbol(mul(a, b), a))
    return BrauerClass(phi.tower, tuple(symbols))


# ---------------------------------------------------------------------------
# form-level residues


def _entry_residue(entry: Elem, var: str) -> tuple[Elem, int]:
    """(ū, ε) with ⟨entry⟩_b = ⟨u·varᵉ⟩ mod squares, ū the unit residue."""
    try:
        unit, v = valuation_unit_split(entry, var)
    except PrecisionExhausted as exc:
        raise NotResidueReady(str(exc)) from None
    res = const(entry.tower.base, 0)
    for exp, c in unit.coeffs:
        if exp == 0:
            res = c
            break
    return res, v & 1


def residue_form(which: str, beta: BilinForm, a: Elem, var: str) -> QuadForm:
    """First/second residues of β ⊗ [1, a] at the outermost Laurent variable.

    delta2: ∂²(β) ⊗ [1, ā] — entries with odd valuation contribute ⟨ū⟩.
    Delta:  (∂¹+∂²)(β) ⊗ [1, ā] — every entry contributes ⟨ū⟩.
    """
    if which not in ("delta2", "Delta"):
        raise ValueError("which must be 'delta2' or 'Delta'")
    t = beta.tower
    if t.kind != LAURENT or (var is not None and var != t.var):
        raise NotResidueReady(
            "residues are taken at the outermost Laurent variable")
    a = coerce(a, t)
    if a.prec is not None and a.prec <= 0:
        raise PrecisionExhausted("coefficient known to nonpositive precision")
    if any(exp < 0 for exp, _ in a.coeffs):
        raise WildCoefficient("the Artin-Schreier slot has a pole at " + t.var)
    a_res = const(t.base, 0)
    for exp, c in a.coeffs:
        if exp == 0:
            a_res = c
            break
    base = t.base
    entries = []
    for e in beta.entries:
        u_res, eps = _entry_residue(e, var)
        if which == "Delta" or eps == 1:
            entries.append(u_res)
    if not entries:
        return QuadForm(base)
    return tensor_bilin(BilinForm(base, tuple(entries)),
                        pair_form(base, 1, a_res))
