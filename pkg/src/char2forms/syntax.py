"""Concrete syntax for elements, forms and cohomology classes.

Element expressions:     1 + u^-1 + w*v^2 + O(u^48), d(K), (1+u)*t
Form expressions:        [a, b], <c1, c2>, H, x*[1, a], pf<<b1, b2; a>>
Class expressions:       [a; b), {a | b1, b2}, 0

`w` always means the multiplicative generator of the finite root field;
Laurent variables are referred to by their names; `d(L)` is the generator
of the quadratic level labelled L. O(var^k) marks a tail known only up
to that exponent. Printing is canonical — parse ∘ print is the identity
on exact data and precision markers round-trip.
"""
from __future__ import annotations

from typing import Optional

from .elements import (Elem, add, coerce, const, generator, inexact_zero,
                       laurent_elem, mul, pow_int)
from .errors import ScenarioError
from .forms import (QuadForm, hyperbolic_plane, pair_form, pfister_quad,
                    quasilinear_form, scale, perp)
from .km import BrauerClass, KMClass, KMTerm, QuatSymbol
from .towers import ARTIN_SCHREIER, FINITE, INSEP, LAURENT, FieldTower

YES = "yes"


# ---------------------------------------------------------------------------
# lexer


_PUNCT2 = ("<<", ">>")
_PUNCT1 = "+*^(),;[]<>{}|)-"


def _lex(text: str) -> list[tuple[str, str]]:
    toks = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if text[i:i + 2] in _PUNCT2:
            toks.append((text[i:i + 2], text[i:i + 2]))
            i += 2
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("INT", text[i:j]))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("IDENT", text[i:j]))
            i = j
            continue
        if ch in _PUNCT1:
            toks.append((ch, ch))
            i += 1
            continue
        raise ScenarioError(f"unexpected character {ch!r} in {text!r}")
    toks.append(("END", ""))
    return toks


class _Stream:
    def __init__(self, toks):
        self.toks = toks
        self.pos = 0

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        if t[0] != "END":
            self.pos += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ScenarioError(f"expected {kind!r}, found {t[1]!r}")
        return t

    def at_end(self):
        return self.peek()[0] == "END"


# ---------------------------------------------------------------------------
# element parsing


def _find_level(tower: FieldTower, pred) -> Optional[FieldTower]:
    for lvl in tower.levels():
        if pred(lvl):
            return lvl
    return None


def _parse_signed_int(st: _Stream) -> int:
    neg = False
    if st.peek()[0] == "-":
        st.next()
        neg = True
    v = int(st.expect("INT")[1])
    return -v if neg else v


def _parse_atom(st: _Stream, tower: FieldTower, names) -> Elem:
    kind, val = st.peek()
    if kind == "(":
        st.next()
        e = _parse_elem_expr(st, tower, names)
        st.expect(")")
        return e
    if kind == "INT":
        st.next()
        return const(tower, int(val) & 1)
    if kind != "IDENT":
        raise ScenarioError(f"unexpected token {val!r} in element expression")
    st.next()
    if val == "O" and st.peek()[0] == "(":
        st.next()
        var = st.expect("IDENT")[1]
        st.expect("^")
        k = _parse_signed_int(st)
        st.expect(")")
        lvl = _find_level(tower, lambda L: L.kind == LAURENT and L.var == var)
        if lvl is None:
            raise ScenarioError(f"no Laurent variable {var!r} in this tower")
        return coerce(inexact_zero(lvl, k), tower)
    if val == "d" and st.peek()[0] == "(":
        st.next()
        label = st.expect("IDENT")[1]
        st.expect(")")
        lvl = _find_level(tower, lambda L: L.is_quadratic and L.label == label)
        if lvl is None:
            raise ScenarioError(f"no quadratic level labelled {label!r}")
        return coerce(generator(lvl), tower)
    if val == "w":
        root = tower.root
        if root.kind != FINITE:
            raise ScenarioError("'w' needs a finite root field")
        return coerce(generator(root), tower)
    lvl = _find_level(tower, lambda L: L.kind == LAURENT and L.var == val)
    if lvl is not None:
        return coerce(generator(lvl), tower)
    if names and val in names and isinstance(names[val], Elem):
        return coerce(names[val], tower)
    raise ScenarioError(f"unknown name {val!r} in element expression")


def _parse_factor(st: _Stream, tower, names) -> Elem:
    e = _parse_atom(st, tower, names)
    while st.peek()[0] == "^":
        st.next()
        e = pow_int(e, _parse_signed_int(st))
    return e


def _parse_term(st: _Stream, tower, names) -> Elem:
    e = _parse_factor(st, tower, names)
    while st.peek()[0] == "*":
        st.next()
        e = mul(e, _parse_factor(st, tower, names))
    return e


def _parse_elem_expr(st: _Stream, tower, names) -> Elem:
    e = _parse_term(st, tower, names)
    while st.peek()[0] == "+":
        st.next()
        e = add(e, _parse_term(st, tower, names))
    return e


def parse_elem(text: str, tower: FieldTower, names=None) -> Elem:
    st = _Stream(_lex(text))
    e = _parse_elem_expr(st, tower, names)
    if not st.at_end():
        raise ScenarioError(f"trailing input {st.peek()[1]!r} in {text!r}")
    return e


# ---------------------------------------------------------------------------
# element printing


def _print_finite(x: Elem) -> str:
    bits = x.rep
    if bits == 0:
        return "0"
    parts = []
    i = 0
    while bits:
        if bits & 1:
            parts.append("1" if i == 0 else ("w" if i == 1 else f"w^{i}"))
        bits >>= 1
        i += 1
    return " + ".join(parts)


def _needs_parens(s: str) -> bool:
    return " + " in s


def print_elem(x: Elem) -> str:
    t = x.tower
    if t.kind == FINITE:
        return _print_finite(x)
    if t.kind == LAURENT:
        parts = []
        for exp, c in x.coeffs:
            ctxt = print_elem(c)
            if exp == 0:
                parts.append(ctxt)
                continue
            vpart = t.var if exp == 1 else f"{t.var}^{exp}"
            if ctxt == "1":
                parts.append(vpart)
            elif _needs_parens(ctxt):
                parts.append(f"({ctxt})*{vpart}")
            else:
                parts.append(f"{ctxt}*{vpart}")
        if x.prec is not None:
            parts.append(f"O({t.var}^{x.prec})")
        return " + ".join(parts) if parts else "0"
    # quadratic level
    xx, yy = x.rep
    label = t.label or "?"
    xs = print_elem(xx)
    ys = print_elem(yy)
    if ys == "0":
        return xs
    if ys == "1":
        dpart = f"d({label})"
    elif _needs_parens(ys):
        dpart = f"({ys})*d({label})"
    else:
        dpart = f"{ys}*d({label})"
    if xs == "0":
        return dpart
    return f"{xs} + {dpart}"


# ---------------------------------------------------------------------------
# element deserialization from the canonical ser() strings
#
# Certificates store elements in ser() form (stable, whitespace-free).
# parse_ser rebuilds the element against the tower it was recorded over,
# which is what lets a replay re-verify recorded witnesses.


def _ser_int(s: str, i: int) -> tuple[int, int]:
    j = i + 1 if s[i] == "-" else i
    while j < len(s) and s[j].isdigit():
        j += 1
    if j == i or (s[i] == "-" and j == i + 1):
        raise ScenarioError(f"expected an integer at {s[i:i+8]!r}")
    return int(s[i:j]), j


def _parse_ser_at(s: str, i: int, tower: FieldTower) -> tuple[Elem, int]:
    k = tower.kind
    if k == FINITE:
        if s[i] != "g":
            raise ScenarioError(f"expected g<bits> at {s[i:i+8]!r}")
        bits, j = _ser_int(s, i + 1)
        from .elements import finite_elem
        return finite_elem(tower, bits), j
    if k == LAURENT:
        if s[i:i + 2] != "l(":
            raise ScenarioError(f"expected l(...) at {s[i:i+8]!r}")
        i += 2
        coeffs = {}
        prec = None
        while s[i] != ")":
            if s[i] == ";":
                if s[i + 1] != "O":
                    raise ScenarioError(f"expected ;O<prec> at {s[i:i+8]!r}")
                prec, i = _ser_int(s, i + 2)
                continue
            if s[i] == ",":
                i += 1
                continue
            exp, i = _ser_int(s, i)
            if s[i] != ":":
                raise ScenarioError(f"expected ':' at {s[i:i+8]!r}")
            c, i = _parse_ser_at(s, i + 1, tower.base)
            coeffs[exp] = c
        return laurent_elem(tower, coeffs, prec), i + 1
    if s[i:i + 2] != "q(":
        raise ScenarioError(f"expected q(...) at {s[i:i+8]!r}")
    x, i = _parse_ser_at(s, i + 2, tower.base)
    if s[i] != ",":
        raise ScenarioError(f"expected ',' at {s[i:i+8]!r}")
    y, i = _parse_ser_at(s, i + 1, tower.base)
    if s[i] != ")":
        raise ScenarioError(f"expected ')' at {s[i:i+8]!r}")
    from .elements import quad_elem
    return quad_elem(tower, x, y), i + 1


def parse_ser(text: str, tower: FieldTower) -> Elem:
    e, i = _parse_ser_at(text, 0, tower)
    if i != len(text):
        raise ScenarioError(f"trailing input in serialized element {text!r}")
    return e


# ---------------------------------------------------------------------------
# form parsing


_FORM_STARTERS = {"[", "<", "<<"}


def _at_form_item(st: _Stream, names) -> bool:
    kind, val = st.peek()
    if kind in _FORM_STARTERS:
        return True
    if kind == "IDENT":
        if val in ("H", "pf"):
            return True
        if names and val in names and isinstance(names[val], QuadForm):
            return True
    return False


def _parse_form_item(st: _Stream, tower, names) -> QuadForm:
    kind, val = st.peek()
    if kind == "IDENT" and val == "H":
        st.next()
        return hyperbolic_plane(tower)
    if kind == "IDENT" and val == "pf":
        st.next()
        st.expect("<<")
        slots = [_parse_elem_expr(st, tower, names)]
        while st.peek()[0] == ",":
            st.next()
            slots.append(_parse_elem_expr(st, tower, names))
        st.expect(";")
        a = _parse_elem_expr(st, tower, names)
        st.expect(">>")
        return pfister_quad(tower, slots, a)
    if kind == "[":
        st.next()
        a = _parse_elem_expr(st, tower, names)
        st.expect(",")
        b = _parse_elem_expr(st, tower, names)
        st.expect("]")
        return pair_form(tower, a, b)
    if kind == "<":
        st.next()
        entries = [_parse_elem_expr(st, tower, names)]
        while st.peek()[0] == ",":
            st.next()
            entries.append(_parse_elem_expr(st, tower, names))
        st.expect(">")
        return quasilinear_form(tower, entries)
    if kind == "IDENT" and names and val in names \
            and isinstance(names[val], QuadForm):
        st.next()
        return names[val]
    raise ScenarioError(f"expected a form item, found {val!r}")


def _parse_scaled_item(st: _Stream, tower, names) -> QuadForm:
    # lookahead: an element expression followed by '*' and a form item
    mark = st.pos
    try:
        lam = _parse_term_no_form(st, tower, names)
        if st.peek()[0] == "*" and _is_form_ahead(st, names):
            st.next()
            item = _parse_scaled_item(st, tower, names)
            return scale(lam, item)
    except ScenarioError:
        pass
    st.pos = mark
    return _parse_form_item(st, tower, names)


def _parse_term_no_form(st: _Stream, tower, names) -> Elem:
    """Element product that stops before a '*' leading into a form item."""
    e = _parse_factor(st, tower, names)
    while st.peek()[0] == "*" and not _is_form_ahead(st, names):
        st.next()
        e = mul(e, _parse_factor(st, tower, names))
    return e


def _is_form_ahead(st: _Stream, names) -> bool:
    nxt = st.peek(1)
    if nxt[0] in _FORM_STARTERS:
        return True
    if nxt[0] == "IDENT" and (nxt[1] in ("H", "pf") or (
            names and nxt[1] in names and isinstance(names[nxt[1]], QuadForm))):
        return True
    return False


def parse_form(text: str, tower: FieldTower, names=None) -> QuadForm:
    st = _Stream(_lex(text))
    items = [_parse_scaled_item(st, tower, names)]
    while st.peek()[0] == "+":
        st.next()
        items.append(_parse_scaled_item(st, tower, names))
    if not st.at_end():
        raise ScenarioError(f"trailing input {st.peek()[1]!r} in form {text!r}")
    return perp(*items)


def print_form(phi: QuadForm) -> str:
    from .elements import zero3
    parts = []
    for a, b in phi.pairs:
        if zero3(a) == YES and zero3(b) == YES:
            parts.append("H")
        else:
            parts.append(f"[{print_elem(a)}, {print_elem(b)}]")
    if phi.quasi:
        parts.append("<" + ", ".join(print_elem(c) for c in phi.quasi) + ">")
    return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# class parsing


def parse_class(text: str, tower: FieldTower, names=None,
                level: Optional[int] = None) -> KMClass:
    st = _Stream(_lex(text))
    if st.peek()[0] == "INT" and st.peek()[1] == "0" and st.peek(1)[0] == "END":
        if level is None:
            raise ScenarioError("a bare 0 class needs an explicit level")
        return KMClass(tower, level, ())
    terms = []
    while True:
        kind, val = st.peek()
        if kind == "[":
            st.next()
            a = _parse_elem_expr(st, tower, names)
            st.expect(";")
            b = _parse_elem_expr(st, tower, names)
            st.expect(")")
            terms.append(KMTerm(a, (b,)))
        elif kind == "{":
            st.next()
            a = _parse_elem_expr(st, tower, names)
            st.expect("|")
            slots = []
            if st.peek()[0] != "}":
                slots.append(_parse_elem_expr(st, tower, names))
                while st.peek()[0] == ",":
                    st.next()
                    slots.append(_parse_elem_expr(st, tower, names))
            st.expect("}")
            terms.append(KMTerm(a, tuple(slots)))
        elif kind == "IDENT" and names and val in names \
                and isinstance(names[val], KMClass):
            st.next()
            terms.extend(names[val].terms)
        else:
            raise ScenarioError(f"expected a class term, found {val!r}")
        if st.peek()[0] == "+":
            st.next()
            continue
        break
    if not st.at_end():
        raise ScenarioError(f"trailing input {st.peek()[1]!r} in class {text!r}")
    levels = {t.level for t in terms}
    if len(levels) != 1:
        raise ScenarioError(f"mixed levels {sorted(levels)} in one class")
    lv = levels.pop()
    if level is not None and level != lv:
        raise ScenarioError(f"class has level {lv}, expected {level}")
    return KMClass(tower, lv, tuple(terms))


def print_km(x: KMClass) -> str:
    if not x.terms:
        return "0"
    parts = []
    for t in x.terms:
        if x.level == 2:
            parts.append(f"[{print_elem(t.a)}; {print_elem(t.slots[0])})")
        else:
            inner = ", ".join(print_elem(b) for b in t.slots)
            parts.append("{%s | %s}" % (print_elem(t.a), inner))
    return " + ".join(parts)


def print_brauer(b: BrauerClass) -> str:
    if not b.symbols:
        return "0"
    return " + ".join(f"[{print_elem(s.a)}; {print_elem(s.b)})"
                      for s in b.symbols)
