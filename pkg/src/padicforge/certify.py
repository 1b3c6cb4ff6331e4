"""Brute-force checkers and certificate constructors.

Two layers.  The checkers (`bijective_mod`, `transitive_mod`,
`equiprobable_mod`) enumerate residues and report exactly what they saw;
they are bounded by explicit state caps and never extrapolate.  The
certificate constructors decide a property at every precision from a
single finite check at a class-dependent threshold modulus, and record
which result licensed the extrapolation.  When a function falls outside
every recognized class the certificate honestly degrades to UNKNOWN.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Optional, Sequence, Union

from .core import Modulus, ResidueInt, mod_inverse, ord_p
from .funcalg import BoolTriangle, FnExpr, evaluator, is_class_b, triangle_is_transitive_form
from .mahler import (
    MahlerSeries,
    RationalPoly,
    floor_log,
    is_compatible,
    is_ergodic_2adic,
    is_measure_preserving_2adic,
    rho_lambda,
    series_from_poly,
)

DEFAULT_STATE_CAP = 1 << 24
DEFAULT_PAIR_CAP = 1 << 20
GENERIC_PROBE_BUDGET = 1 << 14

PROVEN = "PROVEN"
REFUTED = "REFUTED"
UNKNOWN = "UNKNOWN"

COMPATIBLE = "COMPATIBLE"
MEASURE_PRESERVING = "MEASURE_PRESERVING"
ERGODIC = "ERGODIC"
EQUIPROBABLE = "EQUIPROBABLE"

Z_POLY = "Z_POLY"
QP_POLY_INTVAL = "QP_POLY_INTVAL"
CLASS_A = "CLASS_A"
CLASS_B = "CLASS_B"
GENERIC_COMPATIBLE = "GENERIC_COMPATIBLE"


class CapExceeded(Exception):
    """State space larger than the enumeration cap."""


class NotBijective(Exception):
    """Orbit walk re-entered itself off the start; no cycle through 0 exists."""


class NotClassA(Exception):
    """Differentiability machinery asked for outside its domain."""


@dataclass(frozen=True)
class Certificate:
    property: str
    verdict: str
    theorem: str
    checked_modulus: Modulus
    witness: Optional[dict] = None
    elapsed_ms: float = 0.0

    def to_json(self) -> dict:
        out = {
            "property": self.property,
            "verdict": self.verdict,
            "theorem": self.theorem,
            "modulus": {"p": self.checked_modulus.p, "k": self.checked_modulus.k},
            "elapsed_ms": self.elapsed_ms,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class FunctionClass:
    """Where a function sits in the certification hierarchy.

    CLASS_B members get rho=0, lam=1; CLASS_A carries the computed pair.
    Z_POLY and QP_POLY_INTVAL also record the polynomial degree since
    their ergodicity threshold depends on it.
    """

    tag: str
    degree: Optional[int] = None
    rho: Optional[int] = None
    lam: Optional[int] = None


MapLike = Union[FnExpr, MahlerSeries, RationalPoly, Callable[[int], int]]


def _as_map(f: MapLike, m: Modulus) -> Callable[[int], int]:
    if isinstance(f, FnExpr):
        return evaluator(f, m)
    if isinstance(f, MahlerSeries):
        if f.p != m.p:
            raise ValueError(f"series is {f.p}-adic, modulus is {m.p}-adic")
        return lambda x: f.eval(ResidueInt(x, m)).residue
    if isinstance(f, RationalPoly):
        return lambda x: f.eval_mod(x, m)
    if callable(f):
        return lambda x: f(x) % m.value
    raise TypeError(f"cannot evaluate {type(f).__name__} as a map")


def bijective_mod(f: MapLike, m: Modulus, cap: Optional[int] = None):
    """Is x -> f(x) a permutation of Z/m?  Returns (bool, witness).

    The witness on failure is a colliding pair (x, y) with f(x) == f(y),
    found by a second partial scan so no preimage index is stored.
    """
    cap = cap if cap is not None else DEFAULT_STATE_CAP
    if m.value > cap:
        raise CapExceeded(f"{m.value} states exceeds cap {cap}")
    fn = _as_map(f, m)
    seen = bytearray(m.value)
    for x in range(m.value):
        v = fn(x)
        if seen[v]:
            for y in range(x):
                if fn(y) == v:
                    return False, (y, x)
            raise AssertionError("collision without earlier preimage")
        seen[v] = 1
    return True, None


def transitive_mod(f: MapLike, m: Modulus, cap: Optional[int] = None):
    """Does the orbit of 0 under f cover all of Z/m?  Returns (bool, orbit_length).

    Walks at most m.value steps.  If the orbit re-enters itself anywhere
    other than at 0 the map cannot be a permutation and NotBijective is
    raised rather than reporting a misleading short cycle.
    """
    cap = cap if cap is not None else DEFAULT_STATE_CAP
    if m.value > cap:
        raise CapExceeded(f"{m.value} states exceeds cap {cap}")
    fn = _as_map(f, m)
    x = 0
    for step in range(1, m.value + 1):
        x = fn(x)
        if x == 0:
            return step == m.value, step
    # m.value steps without returning: some state repeated off the start
    raise NotBijective("orbit of 0 never returned; map is not a permutation")


class MultiPoly:
    """Multivariate integer polynomial, stored as {exponent tuple: coeff}."""

    def __init__(self, arity: int, terms: dict):
        self.arity = arity
        self.terms = {
            tuple(e): int(c)
            for e, c in terms.items()
            if c
        }
        for e in self.terms:
            if len(e) != arity:
                raise ValueError(f"exponent tuple {e} has wrong arity")

    def eval_mod(self, point: Sequence[int], modulus: int) -> int:
        acc = 0
        for exps, c in self.terms.items():
            t = c
            for xi, ei in zip(point, exps):
                if ei:
                    t = t * pow(xi, ei, modulus)
            acc += t
        return acc % modulus

    def partial(self, i: int) -> "MultiPoly":
        out: dict = {}
        for exps, c in self.terms.items():
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            key = tuple(new)
            out[key] = out.get(key, 0) + c * exps[i]
        return MultiPoly(self.arity, out)

    def __repr__(self):
        return f"MultiPoly(arity={self.arity}, terms={self.terms})"


def equiprobable_mod(F: Sequence[MultiPoly], n_in: int, m: Modulus, cap: Optional[int] = None):
    """Census of the map (Z/m)^n_in -> (Z/m)^len(F).  Returns (bool, census).

    True iff every point of the codomain is hit by exactly
    m^(n_in - len(F)) inputs.  The census reports expected fiber size and
    the min/max observed, plus how many distinct outputs appeared.
    """
    cap = cap if cap is not None else DEFAULT_PAIR_CAP
    n_out = len(F)
    if n_out == 0 or n_in <= 0:
        raise ValueError("need at least one component and one input variable")
    if n_out > n_in:
        raise ValueError("more output components than inputs cannot be equiprobable")
    total = m.value ** n_in
    if total > cap:
        raise CapExceeded(f"{total} input tuples exceeds cap {cap}")
    counts: dict = {}
    point = [0] * n_in
    for idx in range(total):
        r = idx
        for i in range(n_in):
            point[i] = r % m.value
            r //= m.value
        out = tuple(g.eval_mod(point, m.value) for g in F)
        counts[out] = counts.get(out, 0) + 1
    expected = m.value ** (n_in - n_out)
    ok = len(counts) == m.value ** n_out and all(c == expected for c in counts.values())
    census = {
        "inputs": total,
        "distinct_outputs": len(counts),
        "expected_fiber": expected,
        "min_fiber": min(counts.values()),
        "max_fiber": max(counts.values()),
    }
    return ok, census


def jacobian_equiprobable_certificate(F: Sequence[MultiPoly], p: int) -> Certificate:
    """PROVEN equiprobability at every p^k, or UNKNOWN.

    Two conditions, both mod p: the reduced map must be equiprobable, and
    at no point of (Z/p)^n may the partial derivatives of every component
    all vanish at once.  Either failure drops to UNKNOWN; this route never
    refutes, since the sufficient condition is not necessary.
    """
    t0 = time.perf_counter()
    m1 = Modulus(p, 1)
    n_in = F[0].arity
    ok, census = equiprobable_mod(F, n_in, m1)
    elapsed = lambda: (time.perf_counter() - t0) * 1000.0
    if not ok:
        return Certificate(EQUIPROBABLE, UNKNOWN, "C3_8", m1,
                           {"reason": "not equiprobable mod p", "census": census}, elapsed())
    partials = [[g.partial(i) for i in range(n_in)] for g in F]
    point = [0] * n_in
    for idx in range(p ** n_in):
        r = idx
        for i in range(n_in):
            point[i] = r % p
            r //= p
        if all(d.eval_mod(point, p) == 0 for row in partials for d in row):
            return Certificate(EQUIPROBABLE, UNKNOWN, "C3_8", m1,
                               {"reason": "all partials vanish", "point": list(point)}, elapsed())
    return Certificate(EQUIPROBABLE, PROVEN, "C3_8", m1, None, elapsed())


def polynomial_bijectivity_certificate(f, p: int, cap: Optional[int] = None) -> Certificate:
    """Measure preservation for polynomials over the p-adic integers.

    Decided exactly by bijectivity mod p^2: an if-and-only-if, so both
    PROVEN and REFUTED verdicts are available.  Accepts a univariate
    RationalPoly (denominators must be units mod p) or a square system
    of MultiPoly components checked as a map on (Z/p^2)^n.
    """
    t0 = time.perf_counter()
    m2 = Modulus(p, 2)
    elapsed = lambda: (time.perf_counter() - t0) * 1000.0
    if isinstance(f, RationalPoly):
        for c in f.to_monomial().coeffs:
            if c.denominator % p == 0:
                raise ValueError(f"coefficient {c} is not a p-adic integer at p={p}")
        ok, witness = bijective_mod(f, m2, cap)
        if ok:
            return Certificate(MEASURE_PRESERVING, PROVEN, "C3_10", m2, None, elapsed())
        return Certificate(MEASURE_PRESERVING, REFUTED, "C3_10", m2,
                           {"collision": list(witness)}, elapsed())
    # square multivariate system
    F = list(f)
    n = F[0].arity
    if len(F) != n:
        raise ValueError("bijectivity needs a square system")
    ok, census = equiprobable_mod(F, n, m2, cap)
    if ok:
        return Certificate(MEASURE_PRESERVING, PROVEN, "C3_10", m2, None, elapsed())
    return Certificate(MEASURE_PRESERVING, REFUTED, "C3_10", m2, {"census": census}, elapsed())


def _poly_from_expr(e: FnExpr, depth: int = 0) -> Optional[RationalPoly]:
    """Fold an AST into a RationalPoly when only polynomial nodes appear.

    Returns None on any bitwise, POW, or INV node, or if intermediate
    degrees blow past the series degree cap.
    """
    if depth > 64:
        return None
    k = e.kind
    if k == "VAR":
        return RationalPoly([0, 1])
    if k == "CONST":
        return RationalPoly([e.value])
    if k == "POLY":
        return e.poly
    if k in ("ADD", "SUB", "MUL"):
        a = _poly_from_expr(e.children[0], depth + 1)
        b = _poly_from_expr(e.children[1], depth + 1)
        if a is None or b is None:
            return None
        if k == "ADD":
            out = a + b
        elif k == "SUB":
            out = a + b.scale(-1)
        else:
            out = a * b
        return out if out.degree <= 64 else None
    if k == "COMPOSE":
        outer = _poly_from_expr(e.children[0], depth + 1)
        inner = _poly_from_expr(e.children[1], depth + 1)
        if outer is None or inner is None:
            return None
        if outer.degree * max(inner.degree, 1) > 64:
            return None
        return outer.compose(inner)
    if k == "DELTA":
        child = _poly_from_expr(e.children[0], depth + 1)
        if child is None:
            return None
        shifted = child.compose(RationalPoly([1, 1]))
        return shifted + child.scale(-1)
    return None


def infer_class(f: MapLike, p: int) -> FunctionClass:
    """Classify f for certification.  Tags, most to least structured:

    Z_POLY            polynomial with integer coefficients
    CLASS_B           built from twice-differentiable pieces (rho=0, lam=1)
    QP_POLY_INTVAL    integer-valued polynomial with p in a denominator
    CLASS_A           via rho/lambda for rational polynomials (odd p route)
    GENERIC_COMPATIBLE  everything else; brute checks only
    """
    if isinstance(f, RationalPoly):
        mono = f.to_monomial().coeffs
        if all(c.denominator == 1 for c in mono):
            return FunctionClass(Z_POLY, degree=f.degree, rho=0, lam=1)
        if all(c.denominator % p != 0 for c in mono):
            return FunctionClass(CLASS_B, degree=f.degree, rho=0, lam=1)
        series = series_from_poly(f, p)
        series._require_integer_valued()
        rho, lam = rho_lambda(f, p)
        return FunctionClass(QP_POLY_INTVAL, degree=f.degree, rho=rho, lam=lam)
    if isinstance(f, MahlerSeries):
        if f.p != p:
            raise ValueError(f"series is {f.p}-adic, asked about p={p}")
        f._require_criteria_ready()
        return FunctionClass(QP_POLY_INTVAL, degree=f.degree)
    if isinstance(f, FnExpr):
        poly = _poly_from_expr(f)
        if poly is not None:
            return infer_class(poly, p)
        if is_class_b(f, p):
            return FunctionClass(CLASS_B, rho=0, lam=1)
        return FunctionClass(GENERIC_COMPATIBLE)
    return FunctionClass(GENERIC_COMPATIBLE)


def class_b_membership(e: FnExpr, p: int) -> bool:
    """Structural membership test; False means not recognized, not a refutation."""
    return is_class_b(e, p)


def _flatten_sum(e: FnExpr):
    """Signed summand list of an ADD/SUB tree."""
    out = []
    stack = [(e, 1)]
    while stack:
        node, sign = stack.pop()
        if node.kind == "ADD":
            stack.append((node.children[0], sign))
            stack.append((node.children[1], sign))
        elif node.kind == "SUB":
            stack.append((node.children[0], sign))
            stack.append((node.children[1], -sign))
        else:
            out.append((sign, node))
    return out


def _split_scale(node: FnExpr):
    """Peel one constant factor off a MUL; scale 1 otherwise."""
    if node.kind == "MUL":
        a, b = node.children
        if a.kind == "CONST":
            return a.value, b
        if b.kind == "CONST":
            return b.value, a
    return Fraction(1), node


def _compatible_leaves(e: FnExpr, p: int) -> bool:
    """Polynomial leaves must pass the coefficient test; every other node
    kind respects congruences by construction."""
    stack = [e]
    while stack:
        node = stack.pop()
        if node.kind == "POLY":
            if not is_compatible(series_from_poly(node.poly, p)):
                return False
        stack.extend(node.children)
    return True


def _shift_family(e: FnExpr, p: int) -> Optional[str]:
    """Match e against c + x + q*Dv ("ergodic") or d + c*x + q*v ("measure").

    q*Dv with ord_p(q) >= 1 rewrites as p*D((q/p)v), and D is linear, so
    several such summands merge into a single one; likewise for q*v.  The
    perturbation only needs to respect congruences, which holds whenever
    its polynomial leaves do.  A miss returns None and decides nothing.
    """
    consts = Fraction(0)
    var_coeff = Fraction(0)
    saw_var = False
    rest = []
    for sign, node in _flatten_sum(e):
        if node.kind == "CONST":
            consts += sign * node.value
            continue
        q, core = _split_scale(node)
        if core.kind == "VAR":
            var_coeff += sign * q
            saw_var = True
            continue
        rest.append((sign * q, core))
    if not saw_var:
        return None
    if any(ord_p(q, p) < 1 or not _compatible_leaves(core, p) for q, core in rest):
        return None
    if (var_coeff == 1 and ord_p(consts, p) == 0
            and all(core.kind == "DELTA" for _, core in rest)):
        return "ergodic"
    if ord_p(var_coeff, p) == 0 and ord_p(consts, p) >= 0:
        return "measure"
    return None


def _as_series(f: MapLike, p: int) -> MahlerSeries:
    if isinstance(f, MahlerSeries):
        if f.p != p:
            raise ValueError(f"series is {f.p}-adic, asked about p={p}")
        return f
    if isinstance(f, FnExpr):
        poly = _poly_from_expr(f)
        if poly is not None:
            return series_from_poly(poly, p)
    if isinstance(f, RationalPoly):
        return series_from_poly(f, p)
    raise ValueError("coefficient route needs a polynomial or interpolation series")


def _lam_for(f: MapLike, p: int, cls: FunctionClass) -> int:
    if cls.lam is not None:
        return cls.lam
    if isinstance(f, RationalPoly):
        return rho_lambda(f, p)[1]
    raise ValueError("CLASS_A certification needs lam; pass it in the FunctionClass")


def _probe_modulus(p: int, cap: Optional[int]) -> Modulus:
    budget = min(cap if cap is not None else DEFAULT_STATE_CAP, GENERIC_PROBE_BUDGET)
    k = 1
    while p ** (k + 1) <= budget:
        k += 1
    return Modulus(p, k)


def ergodicity_certificate(f: MapLike, p: int, cls: Optional[FunctionClass] = None,
                           cap: Optional[int] = None) -> Certificate:
    """One finite transitivity check, extrapolated to every precision.

    Threshold moduli by class (all if-and-only-if, so REFUTED is sound):
      Z_POLY, CLASS_B    p^3 for p in {2,3}, else p^2          (T4_9)
      QP_POLY_INTVAL     p^(floor(log_p d) + 3)                (P4_7)
      CLASS_A, odd p     p^(lam+1), or p^(lam+2) for p=3       (T4_1)
      CLASS_A, p=2       interpolation-coefficient test        (T2_3)
    GENERIC_COMPATIBLE is first matched against the shift family
    c + x + q*Dv (unit c, ord_p(q) >= 1, v congruence-respecting), which
    is ergodic by construction at every prime (L2_5).  Anything else gets
    a bounded brute probe: transitive there is UNKNOWN (no theorem
    extends it), a short cycle is REFUTED.
    """
    t0 = time.perf_counter()
    elapsed = lambda: (time.perf_counter() - t0) * 1000.0
    if cls is None:
        cls = infer_class(f, p)
    if cls.tag in (Z_POLY, CLASS_B):
        k0, theorem = (3 if p in (2, 3) else 2), "T4_9"
    elif cls.tag == QP_POLY_INTVAL:
        series = _as_series(f, p)
        if not is_compatible(series):
            return Certificate(ERGODIC, REFUTED, "T2_1", Modulus(p, 1),
                               {"reason": "not compatible"}, elapsed())
        d = cls.degree if cls.degree is not None else series.degree
        k0, theorem = floor_log(max(d, 1), p) + 3, "P4_7"
    elif cls.tag == CLASS_A:
        if p == 2:
            series = _as_series(f, 2)
            ok = is_ergodic_2adic(series)
            return Certificate(ERGODIC, PROVEN if ok else REFUTED, "T2_3",
                               Modulus(2, 1), None, elapsed())
        if not is_compatible(_as_series(f, p)):
            return Certificate(ERGODIC, REFUTED, "T2_1", Modulus(p, 1),
                               {"reason": "not compatible"}, elapsed())
        lam = _lam_for(f, p, cls)
        k0, theorem = lam + (2 if p == 3 else 1), "T4_1"
    else:
        if isinstance(f, FnExpr) and _shift_family(f, p) == "ergodic":
            m1 = Modulus(p, 3 if p in (2, 3) else 2)
            ok, _ = transitive_mod(f, m1, cap)
            if not ok:
                raise AssertionError("shift-family match contradicts the brute walk")
            return Certificate(ERGODIC, PROVEN, "L2_5", m1, None, elapsed())
        m = _probe_modulus(p, cap)
        try:
            ok, length = transitive_mod(f, m, cap)
        except NotBijective:
            return Certificate(ERGODIC, REFUTED, "BRUTE_ONLY", m,
                               {"reason": "not bijective"}, elapsed())
        if ok:
            return Certificate(ERGODIC, UNKNOWN, "BRUTE_ONLY", m,
                               {"transitive_up_to": m.k}, elapsed())
        return Certificate(ERGODIC, REFUTED, "BRUTE_ONLY", m,
                           {"cycle_through_zero": length}, elapsed())
    m0 = Modulus(p, k0)
    try:
        ok, length = transitive_mod(f, m0, cap)
    except NotBijective:
        return Certificate(ERGODIC, REFUTED, theorem, m0,
                           {"reason": "not bijective"}, elapsed())
    if ok:
        return Certificate(ERGODIC, PROVEN, theorem, m0, None, elapsed())
    return Certificate(ERGODIC, REFUTED, theorem, m0,
                       {"cycle_through_zero": length}, elapsed())


def measure_preservation_certificate(f: MapLike, p: int, cls: Optional[FunctionClass] = None,
                                     cap: Optional[int] = None) -> Certificate:
    """One finite bijectivity check, extrapolated to every precision.

    Threshold moduli by class:
      Z_POLY             p^2, exact criterion                  (C3_10)
      CLASS_B            p^2, every p                          (T4_9)
      QP_POLY_INTVAL     p^(floor(log_p d) + 3)                (P4_8)
      CLASS_A, odd p     p^(lam+2)                             (T4_1)
      CLASS_A, p=2       interpolation-coefficient test        (T2_2)
    GENERIC_COMPATIBLE is first matched against the shift family
    d + c*x + q*v (unit c, ord_p(q) >= 1, v congruence-respecting), which
    is bijective at every precision by construction (L2_5); otherwise a
    bounded probe, UNKNOWN or REFUTED only.
    """
    t0 = time.perf_counter()
    elapsed = lambda: (time.perf_counter() - t0) * 1000.0
    if cls is None:
        cls = infer_class(f, p)
    if cls.tag == Z_POLY:
        k0, theorem = 2, "C3_10"
    elif cls.tag == CLASS_B:
        k0, theorem = 2, "T4_9"
    elif cls.tag == QP_POLY_INTVAL:
        series = _as_series(f, p)
        if not is_compatible(series):
            return Certificate(MEASURE_PRESERVING, REFUTED, "T2_1", Modulus(p, 1),
                               {"reason": "not compatible"}, elapsed())
        d = cls.degree if cls.degree is not None else series.degree
        k0, theorem = floor_log(max(d, 1), p) + 3, "P4_8"
    elif cls.tag == CLASS_A:
        if p == 2:
            series = _as_series(f, 2)
            ok = is_measure_preserving_2adic(series)
            return Certificate(MEASURE_PRESERVING, PROVEN if ok else REFUTED, "T2_2",
                               Modulus(2, 1), None, elapsed())
        if not is_compatible(_as_series(f, p)):
            return Certificate(MEASURE_PRESERVING, REFUTED, "T2_1", Modulus(p, 1),
                               {"reason": "not compatible"}, elapsed())
        lam = _lam_for(f, p, cls)
        k0, theorem = lam + 2, "T4_1"
    else:
        if isinstance(f, FnExpr) and _shift_family(f, p) is not None:
            m1 = Modulus(p, 2)
            ok, _ = bijective_mod(f, m1, cap)
            if not ok:
                raise AssertionError("shift-family match contradicts the brute check")
            return Certificate(MEASURE_PRESERVING, PROVEN, "L2_5", m1, None, elapsed())
        m = _probe_modulus(p, cap)
        ok, witness = bijective_mod(f, m, cap)
        if ok:
            return Certificate(MEASURE_PRESERVING, UNKNOWN, "BRUTE_ONLY", m,
                               {"bijective_up_to": m.k}, elapsed())
        return Certificate(MEASURE_PRESERVING, REFUTED, "BRUTE_ONLY", m,
                           {"collision": list(witness)}, elapsed())
    m0 = Modulus(p, k0)
    ok, witness = bijective_mod(f, m0, cap)
    if ok:
        return Certificate(MEASURE_PRESERVING, PROVEN, theorem, m0, None, elapsed())
    return Certificate(MEASURE_PRESERVING, REFUTED, theorem, m0,
                       {"collision": list(witness)}, elapsed())


def compatibility_certificate(f: MapLike, p: int, cap: Optional[int] = None) -> Certificate:
    """Does f respect congruences at every precision?

    Polynomials and interpolation series are decided exactly by the
    coefficient criterion (T2_1).  ASTs whose polynomial leaves all pass
    the criterion are PROVEN by closure; otherwise a bounded probe either
    finds a violated congruence (REFUTED) or reports UNKNOWN.
    """
    t0 = time.perf_counter()
    elapsed = lambda: (time.perf_counter() - t0) * 1000.0
    if isinstance(f, (MahlerSeries, RationalPoly)):
        series = _as_series(f, p)
        ok = is_compatible(series)
        return Certificate(COMPATIBLE, PROVEN if ok else REFUTED, "T2_1",
                           Modulus(p, 1), None, elapsed())
    if isinstance(f, FnExpr):
        leaves_ok = True
        stack = [f]
        while stack:
            node = stack.pop()
            if node.kind == "POLY":
                if not is_compatible(series_from_poly(node.poly, p)):
                    leaves_ok = False
                    break
            stack.extend(node.children)
        if leaves_ok:
            return Certificate(COMPATIBLE, PROVEN, "T2_1", Modulus(p, 1), None, elapsed())
    m = _probe_modulus(p, cap)
    fn = _as_map(f, m)
    table = [fn(x) for x in range(m.value)]
    for j in range(1, m.k):
        q = p ** j
        induced: dict = {}
        for x in range(m.value):
            r = table[x] % q
            prev = induced.get(x % q)
            if prev is None:
                induced[x % q] = r
            elif prev != r:
                return Certificate(COMPATIBLE, REFUTED, "BRUTE_ONLY", m,
                                   {"level": j, "input_residue": x % q}, elapsed())
    return Certificate(COMPATIBLE, UNKNOWN, "BRUTE_ONLY", m,
                       {"compatible_up_to": m.k}, elapsed())


def triangle_ergodicity_certificate(t: BoolTriangle) -> Certificate:
    """Transitivity of a bit-recursion triangle, decided from its layer forms."""
    t0 = time.perf_counter()
    ok = triangle_is_transitive_form(t)
    witness = None
    if not ok:
        if frozenset() not in t.psi[0] or len(t.psi[0]) != 1:
            witness = {"layer": 0, "reason": "layer 0 is not the constant 1"}
        else:
            for i in range(1, t.length):
                if not t.has_odd_weight(i):
                    witness = {"layer": i, "reason": "even weight"}
                    break
    return Certificate(ERGODIC, PROVEN if ok else REFUTED, "T3_14_NOTE",
                       Modulus(2, t.length), witness,
                       (time.perf_counter() - t0) * 1000.0)


def derivative_mod_p(f: MahlerSeries, x: ResidueInt, lam: int) -> ResidueInt:
    """Derivative of f at x, modulo p^2, for odd p.

    Computed from the interpolation coefficients: the i-th finite
    difference of f is the coefficient-shifted series, and the derivative
    mod p^2 is the alternating sum of differences truncated at 2*p^lam.
    Raises NotClassA for p = 2 or when the truncated sum fails to be
    p-integral.
    """
    p = f.p
    if p == 2:
        raise NotClassA("derivative reduction needs an odd prime")
    if x.modulus.p != p:
        raise ValueError(f"point lives mod {x.modulus.p}^k, series is {p}-adic")
    f._require_integer_valued()
    xhat = x.residue
    top = min(2 * p ** lam, f.degree)
    total = Fraction(0)
    for i in range(1, top + 1):
        delta_i = Fraction(0)
        for j in range(f.degree - i + 1):
            a = f.coeffs[i + j]
            if a:
                delta_i += a * comb(xhat, j)
        if i % 2 == 1:
            total += delta_i / i
        else:
            total -= delta_i / i
    if ord_p(total, p) < 0:
        raise NotClassA(f"difference sum {total} is not p-integral")
    psq = Modulus(p, 2)
    num = total.numerator % psq.value
    inv = mod_inverse(ResidueInt(total.denominator % psq.value, psq)).residue
    return ResidueInt(num * inv % psq.value, psq)
