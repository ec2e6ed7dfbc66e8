"""Randomized property suites shared by the CLI driver and the test bed.

Every suite is a pure function of (seed, iterations, options): element
generators draw from a seeded random.Random, so two runs with the same
inputs produce the same instances, the same verdicts and the same
counterexamples. Suites never assert — they tally. A property iteration
lands in one of three buckets:

* pass     — the identity held / the expected verdict came back;
* fail     — a provable counterexample (recorded, with certificates);
* unknown  — some decision inside the check came back Unknown; the
             exhaustion log is kept so the run can account for it.

The suite as a whole is "ok" when nothing failed and the unknown rate
stays within its budget (default one in twenty).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

from .decision import Decision, Verdict
from .elements import (Elem, add, coerce, const, eq3, finite_elem, inv,
                       laurent_elem, mul, norm_quadratic, project, quad_elem,
                       s_map, zero3)
from .errors import (DataInvalid, PrecisionExhausted, SearchExhausted,
                     UnknownSuite, WitnessInvalid)
from .forms import (QuadForm, pair_form, perp, pfister_quad, scale,
                    transfer_s)
from .hyperbolic import DEFAULT_BOUNDS, SearchBounds, is_hyperbolic
from .invariants import (Decomposition, DescentOverE, InvInstance,
                         _modulus_correction, _norm_to_halfway, find_witness,
                         inv_compute, inv_coset_eq, tensor_kernel_symbols,
                         triviality_check, validate_instance)
from .km import (BrauerClass, KMClass, KMTerm, NormHint, QuatSymbol,
                 km_class, km_combine, km_zero_test, transfer_km)
from .syntax import parse_ser, print_elem
from .towers import (FINITE, INSEP, LAURENT, FieldTower, artin_schreier,
                     finite, insep, laurent)

YES, NO, MAYBE = "yes", "no", "maybe"


@dataclass(frozen=True)
class SuiteOptions:
    precision: int = 48
    bounds: SearchBounds = DEFAULT_BOUNDS
    max_unknown_rate: float = 0.05


@dataclass
class PropertyTally:
    name: str
    passed: int = 0
    failed: int = 0
    unknown: int = 0
    counterexample: Optional[str] = None
    logs: list = field(default_factory=list)

    def ok(self, detail: str = "") -> None:
        self.passed += 1

    def bad(self, detail: str) -> None:
        self.failed += 1
        if self.counterexample is None:
            self.counterexample = detail

    def undecided(self, log) -> None:
        self.unknown += 1
        note = "; ".join(str(item) for item in log) if log else "no log"
        self.logs.append(note)

    def record(self, dec: Decision, want: Verdict, detail: str) -> None:
        if dec.verdict is want:
            self.ok()
        elif dec.verdict is Verdict.UNKNOWN:
            self.undecided(dec.log or (dec.reason,))
        else:
            self.bad(f"{detail}: got {dec.verdict.value}, "
                     f"wanted {want.value} ({dec.reason})")

    @property
    def total(self) -> int:
        return self.passed + self.failed + self.unknown


@dataclass(frozen=True)
class SuiteReport:
    suite: str
    seed: int
    iterations: int
    properties: tuple

    @property
    def total(self) -> int:
        return sum(p.total for p in self.properties)

    @property
    def failures(self) -> int:
        return sum(p.failed for p in self.properties)

    @property
    def unknowns(self) -> int:
        return sum(p.unknown for p in self.properties)

    def unknown_rate(self) -> float:
        return self.unknowns / self.total if self.total else 0.0

    def ok(self, max_unknown_rate: float = 0.05) -> bool:
        return self.failures == 0 and self.unknown_rate() <= max_unknown_rate


# ---------------------------------------------------------------------------
# random data generators


def _rand_finite(rng, T, nonzero=False) -> Elem:
    lo = 1 if nonzero else 0
    return finite_elem(T, rng.randrange(lo, 1 << T.e))


def _rand_elem(rng, T: FieldTower, lo=-3, hi=4, terms=3,
               nonzero=True) -> Elem:
    """Sparse random element of a chain tower within an exponent window."""
    if T.kind == FINITE:
        return _rand_finite(rng, T, nonzero)
    while True:
        coeffs = {}
        for _ in range(rng.randrange(1, terms + 1)):
            exp = rng.randrange(lo, hi + 1)
            c = _rand_elem(rng, T.base, lo // 2 or -1, hi // 2 or 1,
                           max(terms - 1, 1), nonzero=False)
            if zero3(c) != YES:
                coeffs[exp] = c
        x = laurent_elem(T, coeffs)
        if not nonzero or zero3(x) == NO:
            return x


def _rand_quad(rng, K, lo=-3, hi=4, rational_rate=0.2) -> Elem:
    """Random nonzero element of a quadratic top level."""
    F = K.base
    while True:
        p = _rand_elem(rng, F, lo, hi, nonzero=False)
        q = (const(F, 0) if rng.random() < rational_rate
             else _rand_elem(rng, F, lo, hi, nonzero=False))
        x = quad_elem(K, p, q)
        if zero3(x) == NO:
            return x


def _rand_quadratic_ext(rng, F, kind: str) -> FieldTower:
    """A valid quadratic extension of F = GF(2^e)((u)) of the given kind."""
    c = _rand_finite(rng, F.base, nonzero=True)
    k = rng.choice((1, 3))
    if kind == "sep":
        # a pole of odd order is never a ℘-image
        d = laurent_elem(F, {-k: c})
        return artin_schreier(F, d, label="k")
    # odd valuation is never a square
    d = laurent_elem(F, {rng.choice((-1, 1, 3)): c})
    return insep(F, d, label="k")


# ---------------------------------------------------------------------------
# suite: transfer-lemma


def _suite_transfer_lemma(rng, iterations, opt: SuiteOptions):
    F = laurent(finite(2), "u", opt.precision)
    t_form = PropertyTally("line-transfer-form-route")
    t_sym = PropertyTally("symbol-transfer-normalized")
    for kind in ("sep", "insep"):
        for _ in range(iterations):
            K = _rand_quadratic_ext(rng, F, kind)
            x = _rand_quad(rng, K)
            a0 = _rand_elem(rng, F)
            a = coerce(a0, K)

            T = transfer_s(scale(x, pair_form(K, 1, a)))
            sx = s_map(x)
            nx = norm_quadratic(x)
            if zero3(sx) == YES:
                dec = is_hyperbolic(T, opt.bounds)
            else:
                cand = scale(sx, pfister_quad(F, [nx], a0))
                dec = is_hyperbolic(perp(T, cand), opt.bounds)
            t_form.record(dec, Verdict.ZERO,
                          f"{kind} x={print_elem(x)} a={print_elem(a0)}")

            out = transfer_km(km_class(K, 2, [(a, (x,))]))
            target = km_class(F, 2, [(a0, (nx,))])
            dec2 = km_zero_test(km_combine(out, target), (), opt.bounds)
            t_sym.record(dec2, Verdict.ZERO,
                         f"{kind} x={print_elem(x)} a={print_elem(a0)}")
    return [t_form, t_sym]


# ---------------------------------------------------------------------------
# suite: exactness


def _suite_exactness(rng, iterations, opt: SuiteOptions):
    F = laurent(finite(2), "u", opt.precision)
    t = PropertyTally("transfer-of-restriction-hyperbolic")
    for kind in ("sep", "insep"):
        for _ in range(iterations):
            K = _rand_quadratic_ext(rng, F, kind)
            npairs = rng.choice((1, 2, 3))
            pairs = []
            for _ in range(npairs):
                a = _rand_elem(rng, F, nonzero=False)
                b = _rand_elem(rng, F, nonzero=False)
                pairs.append((coerce(a, K), coerce(b, K)))
            res = QuadForm(K, tuple(pairs))
            dec = is_hyperbolic(transfer_s(res), opt.bounds)
            t.record(dec, Verdict.ZERO,
                     f"{kind} dim={2 * npairs} "
                     + " ".join(print_elem(project(a, F)) for a, _ in pairs))
    return [t]


# ---------------------------------------------------------------------------
# suite: inv-well-defined


def _unit_choices(F):
    u = laurent_elem(F.base, {1: const(F.base.base, 1)})
    return [F.one(), coerce(add(const(F.base, 1), inv(u)), F),
            coerce(add(const(F.base, 1), u), F)]


def _build_inv_instance(rng, opt: SuiteOptions):
    """One member of the two-witness family over GF(2)((u))((v)).

    The class is built as [a, s₁) + [b, s₂), so (s₁, s₂) is a splitting
    pair by construction; the second pair is the first scaled by
    N_{E/K}(γ₀) for γ₀ = 1 + δε. Norm hints for a+b (over K and, via the
    halfway element, over F) and for d come with the construction and are
    re-verified downstream before use.
    """
    Fu = laurent(finite(1), "u", opt.precision)
    F = laurent(Fu, "v", opt.precision)
    u = coerce(laurent_elem(Fu, {1: const(finite(1), 1)}), F)
    v = laurent_elem(F, {1: const(Fu, 1)})

    kind = rng.choice(("sep", "insep"))
    d = inv(pow(u, rng.choice((1, 3)))) if kind == "sep" \
        else pow(u, rng.choice((1, 3)))
    K = (artin_schreier(F, d, label="k") if kind == "sep"
         else insep(F, d, label="k"))

    ca = rng.choice(_unit_choices(F))
    ma = rng.choice((1, 3))
    a = mul(ca, inv(pow(v, ma)))
    b = mul(inv(pow(u, rng.choice((1, 2)))), inv(pow(v, ma)))
    s1 = mul(pow(u, rng.choice((1, 2))), v)
    s2 = pow(v, rng.choice((1, 3)))
    D = BrauerClass(F, (QuatSymbol(a, s1), QuatSymbol(b, s2)))

    aK, bK = coerce(a, K), coerce(b, K)
    abK = add(aK, bK)
    E = artin_schreier(K, abK, label="e", check=False)
    gamma0 = add(E.one(), mul(coerce(K.gen(), E), E.gen()))
    n = norm_quadratic(gamma0)
    nn = norm_quadratic(n)
    if zero3(nn) != NO or eq3(n, K.one()) == YES:
        return None
    E0 = artin_schreier(F, add(a, b), label="e0", check=False)
    hints = [NormHint(abK, n, gamma0)]
    halfway = _norm_to_halfway(gamma0, E0, K)
    if halfway is not None:
        hints.append(NormHint(add(a, b), nn, halfway))
    if kind == "sep":
        hints.append(NormHint(d, nn, n))
    inst = InvInstance(K, a, b, D, hints=tuple(hints), bounds=opt.bounds)
    if validate_instance(inst).verdict is not Verdict.ZERO:
        return None
    return inst, (coerce(s1, K), coerce(s2, K)), n


def _suite_inv_well_defined(rng, iterations, opt: SuiteOptions):
    t_wit = PropertyTally("two-distinct-witnesses")
    t_coset = PropertyTally("coset-equality-zero")
    t_remark = PropertyTally("norm-generator-identity-replay")
    made = 0
    attempts = 0
    while made < iterations and attempts < 8 * iterations + 20:
        attempts += 1
        got = _build_inv_instance(rng, opt)
        if got is None:
            continue
        inst, w1, n = got
        made += 1
        x2, y2 = mul(w1[0], n), mul(w1[1], n)
        try:
            f1 = find_witness(inst)
            f2 = find_witness(replace(inst, witness=(x2, y2)))
        except WitnessInvalid as exc:
            t_wit.bad(f"witness rejected: {exc}")
            continue
        if isinstance(f1, Decision) or isinstance(f2, Decision):
            t_wit.undecided((f1 if isinstance(f1, Decision) else f2).log)
            continue
        if eq3(f1[0], f2[0]) == YES and eq3(f1[1], f2[1]) == YES:
            t_wit.bad("the two pairs coincide")
            continue
        t_wit.ok()

        r1 = inv_compute(inst, f1)
        r2 = inv_compute(inst, f2)
        dec = inv_coset_eq(r1, r2, inst.hints, opt.bounds)
        t_coset.record(dec, Verdict.ZERO, f"instance {inst.dclass.ser()}")
        if dec.verdict is not Verdict.ZERO:
            continue

        t_remark.record(_replay_norm_generator(inst, r1, r2, dec, opt),
                        Verdict.ZERO, "norm-generator replay")
    return [t_wit, t_coset, t_remark]


def _replay_norm_generator(inst, r1, r2, coset_dec, opt: SuiteOptions):
    """Re-verify coset equality from the certificate's own γ.

    The certificate records the E-element γ whose norm generates the
    matched modulus term; rebuilding γ by deserialization and recomputing
    dlog N(γ) ∧ [D] from scratch must again absorb r₁ + r₂.
    """
    from .decision import unknown
    gamma_ser = None
    for step in coset_dec.certificate.steps:
        if step.rule == "modulus-generator-matched":
            gamma_ser = step.data.get("gamma")
            break
    if gamma_ser is None:
        # the coset closed without a modulus correction (identical reps);
        # nothing to replay, which the identity trivially satisfies
        diff = km_combine(r1.representative, r2.representative)
        return km_zero_test(diff, inst.hints, opt.bounds)
    E = inst.ext_field()
    gamma = parse_ser(gamma_ser, E)
    corr = _modulus_correction(r1.modulus, gamma, E,
                               artin_schreier(inst.F, inst.ab0, label="e0",
                                              check=False))
    if corr is None:
        return unknown("recorded γ no longer yields a correction")
    corr_class, ghints, _ = corr
    total = km_combine(km_combine(r1.representative, r2.representative),
                       corr_class)
    return km_zero_test(total, tuple(inst.hints) + ghints, opt.bounds)


# ---------------------------------------------------------------------------
# suite: vanishing-reducing


def _suite_vanishing_reducing(rng, iterations, opt: SuiteOptions):
    t_van = PropertyTally("base-rational-witness-vanishes")
    t_red = PropertyTally("kernel-tensoring-preserves-vanishing")
    made = 0
    attempts = 0
    while made < iterations and attempts < 8 * iterations + 20:
        attempts += 1
        got = _build_inv_instance(rng, opt)
        if got is None:
            continue
        inst = got[0]
        F = inst.F
        x0 = _monomial(rng, F)
        y0 = _monomial(rng, F)
        D = BrauerClass(F, (QuatSymbol(inst.a0, x0), QuatSymbol(inst.b0, y0)))
        flat = replace(inst, dclass=D, witness=(coerce(x0, inst.K),
                                                coerce(y0, inst.K)))
        made += 1
        try:
            r = inv_compute(flat)
        except (SearchExhausted, WitnessInvalid) as exc:
            t_van.bad(f"witness path failed: {exc}")
            continue
        t_van.record(r.verdict, Verdict.ZERO,
                     f"x={print_elem(x0)} y={print_elem(y0)}")
        if r.verdict.verdict is not Verdict.ZERO:
            continue

        c = _monomial(rng, F)
        e = _monomial(rng, F)
        reduced = tensor_kernel_symbols(flat, c, e)
        try:
            r2 = inv_compute(reduced)
        except (SearchExhausted, WitnessInvalid) as exc:
            t_red.bad(f"tensored witness path failed: {exc}")
            continue
        t_red.record(r2.verdict, Verdict.ZERO,
                     f"c={print_elem(c)} e={print_elem(e)}")
    return [t_van, t_red]


def _monomial(rng, F):
    u = coerce(laurent_elem(F.base, {1: const(F.base.base, 1)}), F)
    v = laurent_elem(F, {1: const(F.base, 1)})
    x = mul(pow(u, rng.randrange(-2, 3)), pow(v, rng.randrange(-2, 3)))
    return x


# ---------------------------------------------------------------------------
# suite: triviality-corrupt


def _build_triviality_instance(rng, opt: SuiteOptions):
    Fu = laurent(finite(1), "u", opt.precision)
    F = laurent(Fu, "v", opt.precision)
    u = coerce(laurent_elem(Fu, {1: const(finite(1), 1)}), F)
    v = laurent_elem(F, {1: const(Fu, 1)})

    kind = rng.choice(("sep", "insep"))
    d = inv(pow(u, rng.choice((1, 3)))) if kind == "sep" \
        else pow(u, rng.choice((1, 3)))
    K = (artin_schreier(F, d, label="k") if kind == "sep"
         else insep(F, d, label="k"))
    ca = rng.choice(_unit_choices(F))
    ma = rng.choice((1, 3))
    a = mul(ca, inv(pow(v, ma)))
    b = mul(a, add(F.one(), inv(u)))       # a+b = a·u⁻¹: same v-pole family
    ab0 = add(a, b)
    vslot = mul(pow(u, rng.choice((1, 2))), v)
    # the u-part is a dlog slot in the separable orientation but a
    # coefficient in the inseparable one; a coefficient with positive
    # valuation would be ℘-trivial (geometric series), so use 1 there
    uslot = pow(v, rng.choice((1, 3))) if kind == "sep" else F.one()
    sym_v = QuatSymbol(ab0, vslot)
    sym_u = QuatSymbol(d, uslot) if kind == "sep" else QuatSymbol(uslot, d)
    D = BrauerClass(F, (sym_v, sym_u))
    inst = InvInstance(K, a, b, D, bounds=opt.bounds)
    return inst, Decomposition(v=vslot, u=uslot), u, v


def _suite_triviality_corrupt(rng, iterations, opt: SuiteOptions):
    t_acc = PropertyTally("decomposition-accepted")
    t_rej = PropertyTally("corruption-rejected")
    t_res = PropertyTally("rejection-is-residue-certificate")
    for _ in range(iterations):
        inst, good, u, v = _build_triviality_instance(rng, opt)
        dec = triviality_check(inst, good)
        t_acc.record(dec, Verdict.ZERO, f"class {inst.dclass.ser()}")

        insep_kind = inst.K.kind == INSEP
        modes = (("swap-u-coeff", "drop-u-slot", "spurious-q") if insep_kind
                 else ("unit-u-slot", "drop-u-slot", "spurious-q"))
        mode = rng.choice(modes)
        if mode == "unit-u-slot":
            bad = Decomposition(v=good.v,
                                u=mul(good.u, add(inst.F.one(), u)))
        elif mode == "swap-u-coeff":
            # replace the coefficient 1 by u⁻¹: the leftover class has
            # coefficient 1 + u⁻¹, whose residue pairs nontrivially with d
            bad = Decomposition(v=good.v, u=inv(u))
        elif mode == "drop-u-slot":
            bad = Decomposition(v=good.v, u=None)
        else:
            bad = Decomposition(v=good.v, u=good.u,
                                q=QuatSymbol(add(inst.F.one(), u), v))
        bdec = triviality_check(inst, bad)
        t_rej.record(bdec, Verdict.NONZERO, f"mode {mode}")
        if bdec.verdict is Verdict.NONZERO:
            from .decision import RESIDUE_OBSTRUCTION
            if bdec.certificate.kind == RESIDUE_OBSTRUCTION:
                t_res.ok()
            else:
                t_res.bad(f"mode {mode}: kind {bdec.certificate.kind}")
    return [t_acc, t_rej, t_res]


# ---------------------------------------------------------------------------
# suite: normal-form


def _rand_coeff(rng, F, nonzero=True):
    """Random coefficient, integral at the outermost variable of a chain
    with two Laurent levels so the residue split there always applies
    (slots are unconstrained — only coefficient poles block the split)."""
    deep = sum(1 for lvl in F.levels() if lvl.kind == LAURENT) > 1
    return _rand_elem(rng, F, lo=0 if deep else -3, nonzero=nonzero)


def _rand_km(rng, F, level, opt: SuiteOptions) -> KMClass:
    terms = []
    for _ in range(rng.randrange(1, 4)):
        a = _rand_coeff(rng, F, nonzero=False)
        if zero3(a) == YES:
            continue
        slots = tuple(_rand_elem(rng, F) for _ in range(level - 1))
        terms.append(KMTerm(a, slots))
    return KMClass(F, level, tuple(terms))


def _suite_normal_form(rng, iterations, opt: SuiteOptions):
    F1 = laurent(finite(2), "u", opt.precision)
    F2 = laurent(laurent(finite(1), "u", opt.precision), "v", opt.precision)
    t_ps = PropertyTally("verdict-stable-under-wp-image-term")
    t_exact = PropertyTally("verdict-stable-under-exact-form-term")
    for i in range(iterations):
        F = F1 if i % 2 == 0 else F2
        level = rng.choice((2, 3)) if F is F2 else 2
        omega = _rand_km(rng, F, level, opt)
        base = km_zero_test(omega, (), opt.bounds)

        r = _rand_coeff(rng, F, nonzero=False)
        ps_coeff = add(mul(r, r), r)
        slots = tuple(_rand_elem(rng, F) for _ in range(level - 1))
        pert1 = KMClass(F, level,
                        omega.terms + ((KMTerm(ps_coeff, slots),)
                                       if zero3(ps_coeff) != YES else ()))
        _record_agreement(t_ps, base, km_zero_test(pert1, (), opt.bounds),
                          omega)

        aa = _rand_coeff(rng, F)
        s = _rand_elem(rng, F)
        exact_slots = (mul(aa, mul(s, s)),) + tuple(
            _rand_elem(rng, F) for _ in range(level - 2))
        pert2 = KMClass(F, level, omega.terms + (KMTerm(aa, exact_slots),))
        _record_agreement(t_exact, base, km_zero_test(pert2, (), opt.bounds),
                          omega)
    return [t_ps, t_exact]


def _record_agreement(tally, base, perturbed, omega):
    bu = base.verdict is Verdict.UNKNOWN
    pu = perturbed.verdict is Verdict.UNKNOWN
    if bu or pu:
        # agreement is only demanded when both sides decide — but a run
        # that never decides would be vacuous, so undecided iterations are
        # tallied against the unknown budget
        tally.undecided(base.log if bu else perturbed.log)
        return
    if base.verdict is perturbed.verdict:
        tally.ok()
    else:
        tally.bad(f"{omega.ser()}: {base.verdict.value} became "
                  f"{perturbed.verdict.value}")


# ---------------------------------------------------------------------------
# suite: finite-consistency


def _suite_finite_consistency(rng, iterations, opt: SuiteOptions):
    t_double = PropertyTally("doubled-form-hyperbolic")
    t_scale = PropertyTally("verdict-scale-invariant")
    t_cancel = PropertyTally("verdict-stable-adding-H")
    for i in range(iterations):
        T = finite(2) if i % 2 == 0 else finite(3)
        pairs = tuple((_rand_finite(rng, T), _rand_finite(rng, T))
                      for _ in range(rng.choice((1, 2, 3))))
        phi = QuadForm(T, pairs)

        dec = is_hyperbolic(perp(phi, phi), opt.bounds)
        t_double.record(dec, Verdict.ZERO, f"pairs {pairs!r}")

        c = _rand_finite(rng, T, nonzero=True)
        d1 = is_hyperbolic(phi, opt.bounds)
        d2 = is_hyperbolic(scale(c, phi), opt.bounds)
        if Verdict.UNKNOWN in (d1.verdict, d2.verdict):
            t_scale.undecided(d1.log + d2.log)
        elif d1.verdict is d2.verdict:
            t_scale.ok()
        else:
            t_scale.bad(f"scaling by {print_elem(c)} flipped the verdict")

        d3 = is_hyperbolic(perp(phi, pair_form(T, 0, 0)), opt.bounds)
        if Verdict.UNKNOWN in (d1.verdict, d3.verdict):
            t_cancel.undecided(d1.log + d3.log)
        elif d1.verdict is d3.verdict:
            t_cancel.ok()
        else:
            t_cancel.bad("adding a hyperbolic plane flipped the verdict")
    return [t_double, t_scale, t_cancel]


# ---------------------------------------------------------------------------
# registry


SUITES: dict[str, Callable] = {
    "transfer-lemma": _suite_transfer_lemma,
    "exactness": _suite_exactness,
    "inv-well-defined": _suite_inv_well_defined,
    "vanishing-reducing": _suite_vanishing_reducing,
    "triviality-corrupt": _suite_triviality_corrupt,
    "normal-form": _suite_normal_form,
    "finite-consistency": _suite_finite_consistency,
}


def run_property_suite(name: str, seed: int, iterations: int,
                       options: SuiteOptions = SuiteOptions()) -> SuiteReport:
    """Run a registered suite deterministically; see SUITES for names."""
    if name not in SUITES:
        raise UnknownSuite(f"no suite named {name!r}; have "
                           + ", ".join(sorted(SUITES)))
    if iterations < 0:
        raise DataInvalid("iterations must be nonnegative")
    rng = random.Random(seed)
    tallies = SUITES[name](rng, iterations, options) if iterations else []
    return SuiteReport(name, seed, iterations, tuple(tallies))
