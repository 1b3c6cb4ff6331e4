"""Expression algebra for generator construction: ASTs, evaluation, builders.

Every node kind except POLY computes a 1-Lipschitz function of its inputs,
so arbitrary compositions stay 1-Lipschitz and evaluation mod p^k is well
defined on residues.  POLY leaves are the one escape hatch: a polynomial
with rational coefficients need not be 1-Lipschitz (C(x,2) is not), and
they evaluate at the exact integer representative.  Callers composing
POLY leaves own that choice.

Bitwise nodes (XOR/AND/OR/NEG) act on base-2 digit expansions and are
rejected outside p = 2.  POW bases must be 1-units; builders that create
the shape 1 + p*(subexpr) mark the node verified, parsed or deserialized
POW nodes stay unverified until a certification-time residue check.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import json

from .core import Modulus, ResidueInt, digits, mod_inverse, ord_p, unit_pow
from .mahler import RationalPoly

KINDS = frozenset(
    "VAR CONST ADD SUB MUL XOR AND OR NEG POW INV POLY DELTA COMPOSE".split()
)
_BITWISE = frozenset(("XOR", "AND", "OR", "NEG"))


class BitwiseOddPrime(ValueError):
    """Bitwise node evaluated at an odd prime."""


class CDivisibleByP(ValueError):
    """Linear coefficient of a construction is not a unit."""


class NotClassB(ValueError):
    """Expression outside the polynomial/rational/exponential closure."""


class LengthMismatch(ValueError):
    """Triangle shorter than the digit count it is asked to produce."""


class DslError(ValueError):
    def __init__(self, message, line, col):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class DslSyntaxError(DslError):
    pass


class UnknownIdentifier(DslError):
    pass


@dataclass(frozen=True)
class FnExpr:
    kind: str
    children: tuple = ()
    value: Fraction = None
    poly: RationalPoly = None
    base_verified: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")


def var():
    return FnExpr("VAR")


def const(q):
    return FnExpr("CONST", value=Fraction(q))


def add(a, b):
    return FnExpr("ADD", (a, b))


def sub(a, b):
    return FnExpr("SUB", (a, b))


def mul(a, b):
    return FnExpr("MUL", (a, b))


def xor(a, b):
    return FnExpr("XOR", (a, b))


def and_(a, b):
    return FnExpr("AND", (a, b))


def or_(a, b):
    return FnExpr("OR", (a, b))


def neg(a):
    return FnExpr("NEG", (a,))


def pow_(base, exponent, base_verified=False):
    return FnExpr("POW", (base, exponent), base_verified=base_verified)


def one_unit_pow(subexpr, exponent, p):
    """(1 + p*subexpr) ^ exponent, base marked verified by its shape."""
    base = add(const(1), mul(const(p), subexpr))
    return pow_(base, exponent, base_verified=True)


def inv(a):
    return FnExpr("INV", (a,))


def poly_node(poly: RationalPoly):
    return FnExpr("POLY", poly=poly)


def delta(e):
    """AST for x -> e(x+1) - e(x)."""
    return FnExpr("DELTA", (e,))


def compose(outer, inner):
    """AST for x -> outer(inner(x))."""
    return FnExpr("COMPOSE", (outer, inner))


def _eval(e: FnExpr, x: int, m: Modulus) -> int:
    """Value mod m at the exact integer point x (x may exceed the modulus).

    Every kind but POLY first reduces its inputs, which is harmless for
    1-Lipschitz operations; POLY consumes x exactly.
    """
    kind = e.kind
    if kind == "VAR":
        return x % m.value
    if kind == "CONST":
        q = e.value
        if q.denominator == 1:
            return q.numerator % m.value
        den_inv = mod_inverse(ResidueInt(q.denominator % m.value, m)).residue
        return q.numerator * den_inv % m.value
    if kind == "POLY":
        return e.poly.eval_mod(x, m)
    if kind == "DELTA":
        return (_eval(e.children[0], x + 1, m) - _eval(e.children[0], x, m)) % m.value
    if kind == "COMPOSE":
        return _eval(e.children[0], _eval(e.children[1], x, m), m)
    if kind in _BITWISE:
        if m.p != 2:
            raise BitwiseOddPrime(f"{kind} needs p = 2, modulus is {m}")
        a = _eval(e.children[0], x, m)
        if kind == "NEG":
            return m.value - 1 - a
        b = _eval(e.children[1], x, m)
        if kind == "XOR":
            return a ^ b
        if kind == "AND":
            return a & b
        return a | b
    a = _eval(e.children[0], x, m)
    if kind == "ADD":
        return (a + _eval(e.children[1], x, m)) % m.value
    if kind == "SUB":
        return (a - _eval(e.children[1], x, m)) % m.value
    if kind == "MUL":
        return a * _eval(e.children[1], x, m) % m.value
    if kind == "POW":
        exponent = _eval(e.children[1], x, m)
        return unit_pow(ResidueInt(a, m), exponent).residue
    if kind == "INV":
        return mod_inverse(ResidueInt(a, m)).residue
    raise AssertionError(kind)


def eval_expr(e: FnExpr, x: ResidueInt) -> ResidueInt:
    return ResidueInt(_eval(e, x.residue, x.modulus), x.modulus)


def evaluator(e: FnExpr, m: Modulus):
    """Plain int -> int closure for bulk evaluation loops."""
    return lambda x: _eval(e, x, m)


def _one_unit_base(base: FnExpr, p: int) -> bool:
    m = Modulus(p, 1)
    try:
        return all(_eval(base, r, m) == 1 % p for r in range(p))
    except (ValueError, ArithmeticError):
        return False


def is_class_b(e: FnExpr, p: int) -> bool:
    """Membership in the polynomial/rational/exponential closure at p.

    Polynomials with p-integral coefficients, inversions of pointwise
    units, powers of 1-unit bases, and sums/products/compositions of
    those.  Bitwise nodes are outside.  Semantic POW/INV checks run mod p
    only; 1-Lipschitz closure makes that decisive.
    """
    kind = e.kind
    if kind == "VAR":
        return True
    if kind == "CONST":
        return e.value.denominator % p != 0
    if kind == "POLY":
        return all(c.denominator % p != 0 for c in e.poly.coeffs)
    if kind in _BITWISE:
        return False
    if not all(is_class_b(c, p) for c in e.children):
        return False
    if kind == "POW":
        return e.base_verified or _one_unit_base(e.children[0], p)
    if kind == "INV":
        m = Modulus(p, 1)
        try:
            return all(_eval(e.children[0], r, m) != 0 for r in range(p))
        except (ValueError, ArithmeticError):
            return False
    return True


def build_measure_preserving(v: FnExpr, c, d, p: int) -> FnExpr:
    """d + c*x + p*v(x); bijective mod p^k at every k for 1-Lipschitz v."""
    c = Fraction(c)
    if ord_p(c, p) != 0:
        raise CDivisibleByP(f"linear coefficient {c} is not a unit mod {p}")
    return add(add(const(d), mul(const(c), var())), mul(const(p), v))


def build_ergodic(v: FnExpr, c, p: int) -> FnExpr:
    """c + x + p*(v(x+1) - v(x)); single cycle mod p^k for 1-Lipschitz v."""
    c = Fraction(c)
    if ord_p(c, p) != 0:
        raise CDivisibleByP(f"additive constant {c} is not a unit mod {p}")
    return add(add(const(c), var()), mul(const(p), delta(v)))


def build_ergodic_4_12(g: FnExpr, p: int) -> FnExpr:
    """1 + x + p^2*g(x) for g in the class-B closure."""
    if not is_class_b(g, p):
        raise NotClassB("g must lie in the polynomial/rational/exponential closure")
    return add(add(const(1), var()), mul(const(p * p), g))


def build_composite_generator(
    u: RationalPoly, v: RationalPoly, w: RationalPoly, m
) -> FnExpr:
    """1 + x + rad(m)^2 * u(x) * (1 + rad(m)*v(x))^w(x).

    The base is a 1-unit at every prime of m because rad(m) kills it mod
    each factor; evaluation mod m runs componentwise through the CRT.
    """
    for name, poly in (("u", u), ("v", v), ("w", w)):
        if any(c.denominator != 1 for c in poly.coeffs):
            raise ValueError(f"{name} must have integer coefficients")
    rad = m.radical()
    base = add(const(1), mul(const(rad), poly_node(v)))
    power = pow_(base, poly_node(w), base_verified=True)
    return add(
        add(const(1), var()),
        mul(mul(const(rad * rad), poly_node(u)), power),
    )


# --- digit triangles ---------------------------------------------------------


def _normalize_anf(monomials):
    return frozenset(frozenset(mono) for mono in monomials)


@dataclass(frozen=True)
class BoolTriangle:
    """Digit functions psi_0, ..., psi_{n-1} in algebraic normal form.

    psi_i is a set of monomials over x_0..x_{i-1}; each monomial is the
    set of variable indices it multiplies (the empty monomial is the
    constant 1).  The induced map sends digit i of x to
    psi_i(x_0..x_{i-1}) xor x_i.
    """

    psi: tuple

    def __post_init__(self):
        normalized = tuple(_normalize_anf(entry) for entry in self.psi)
        for i, entry in enumerate(normalized):
            for mono in entry:
                if any(j >= i or j < 0 for j in mono):
                    raise ValueError(f"psi_{i} uses a variable outside x_0..x_{i-1}")
        object.__setattr__(self, "psi", normalized)

    @property
    def length(self):
        return len(self.psi)

    def digit(self, i, bits):
        """psi_i evaluated on the digit vector bits[0..i-1]."""
        acc = 0
        for mono in self.psi[i]:
            acc ^= all(bits[j] for j in mono)
        return acc

    def has_odd_weight(self, i):
        """Parity of the truth table of psi_i.

        A Boolean function on i variables has odd weight iff its normal
        form contains the full monomial x_0...x_{i-1}; every smaller
        monomial contributes an even number of ones.
        """
        return frozenset(range(i)) in self.psi[i]


def triangle_eval(t: BoolTriangle, x: ResidueInt) -> ResidueInt:
    m = x.modulus
    if m.p != 2:
        raise BitwiseOddPrime("digit triangles act on base-2 expansions")
    if t.length < m.k:
        raise LengthMismatch(f"triangle has {t.length} digits, modulus needs {m.k}")
    bits = digits(x)
    out = 0
    for i in range(m.k):
        out |= (t.digit(i, bits) ^ bits[i]) << i
    return ResidueInt(out, m)


def triangle_is_transitive_form(t: BoolTriangle) -> bool:
    """psi_0 = 1 and every later psi_i has odd weight.

    Exactly the triangles whose induced map is a single cycle mod 2^n for
    every n up to the length.
    """
    if t.psi[0] != frozenset({frozenset()}):
        return False
    return all(t.has_odd_weight(i) for i in range(1, t.length))


# --- DSL ---------------------------------------------------------------------

_FUNCS = frozenset(("xor", "and", "or", "neg", "inv", "ff", "delta"))
_SYMBOLS = "+-*/^(),"


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        start_col = col
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(("INT", int(text[i:j]), line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("IDENT", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch in _SYMBOLS:
            tokens.append((ch, ch, line, start_col))
            col += 1
            i += 1
            continue
        raise DslSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(("EOF", None, line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind):
        tok = self.take()
        if tok[0] != kind:
            raise DslSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2], tok[3])
        return tok

    def parse(self):
        e = self.bitexpr()
        tok = self.take()
        if tok[0] != "EOF":
            raise DslSyntaxError(f"unexpected {tok[1]!r}", tok[2], tok[3])
        return e

    def bitexpr(self):
        e = self.expr()
        build = {"xor": xor, "and": and_, "or": or_}
        while self.peek()[0] == "IDENT" and self.peek()[1] in build:
            op = self.take()[1]
            e = build[op](e, self.expr())
        return e

    def expr(self):
        if self.peek()[0] == "-":
            self.take()
            first = self.term()
            e = const(-first.value) if first.kind == "CONST" else sub(const(0), first)
        else:
            e = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[0] == "*":
            self.take()
            e = self._fold_mul(e, self.factor())
        return e

    @staticmethod
    def _fold_mul(a, b):
        if a.kind == "CONST" and b.kind == "POLY":
            return poly_node(b.poly.scale(a.value))
        if a.kind == "POLY" and b.kind == "CONST":
            return poly_node(a.poly.scale(b.value))
        return mul(a, b)

    def factor(self):
        e = self.atom()
        if self.peek()[0] == "^":
            self.take()
            e = pow_(e, self.atom())
        return e

    def atom(self):
        tok = self.take()
        kind, value, line, col = tok
        if kind == "INT":
            if self.peek()[0] == "/":
                self.take()
                den = self.expect("INT")[1]
                if den == 0:
                    raise DslSyntaxError("zero denominator", line, col)
                return const(Fraction(value, den))
            return const(value)
        if kind == "(":
            e = self.bitexpr()
            self.expect(")")
            return e
        if kind == "-":
            inner = self.atom()
            return const(-inner.value) if inner.kind == "CONST" else sub(const(0), inner)
        if kind == "IDENT":
            if value == "x":
                return var()
            if value in _FUNCS:
                return self.call(value, line, col)
            raise UnknownIdentifier(f"unknown identifier {value!r}", line, col)
        raise DslSyntaxError(f"unexpected {value!r}", line, col)

    def call(self, name, line, col):
        self.expect("(")
        args = [self.bitexpr()]
        while self.peek()[0] == ",":
            self.take()
            args.append(self.bitexpr())
        self.expect(")")
        arity = {"xor": 2, "and": 2, "or": 2, "neg": 1, "inv": 1, "delta": 1, "ff": 2}
        if len(args) != arity[name]:
            raise DslSyntaxError(
                f"{name} takes {arity[name]} argument(s), got {len(args)}", line, col
            )
        if name == "ff":
            arg, deg = args
            if arg.kind != "VAR":
                raise DslSyntaxError("ff needs x as its first argument", line, col)
            if deg.kind != "CONST" or deg.value.denominator != 1 or deg.value < 0:
                raise DslSyntaxError(
                    "ff needs a nonnegative integer degree", line, col
                )
            n = int(deg.value)
            return poly_node(RationalPoly([0] * n + [1], "falling"))
        build = {
            "xor": xor, "and": and_, "or": or_,
            "neg": neg, "inv": inv, "delta": delta,
        }
        return build[name](*args)


def parse_dsl(text: str) -> FnExpr:
    """Parse the generator DSL.

    Grammar: infix + - * ^ with function forms xor/and/or/neg/inv/delta
    and the falling-factorial atom ff(x, n); infix xor/and/or bind loosest.
    Rational literals are written a/b.
    """
    return _Parser(text).parse()


# --- serialization -----------------------------------------------------------


def _to_doc(e: FnExpr):
    doc = {"kind": e.kind}
    if e.kind == "CONST":
        doc["value"] = [e.value.numerator, e.value.denominator]
    elif e.kind == "POLY":
        doc["basis"] = e.poly.basis
        doc["coeffs"] = [[c.numerator, c.denominator] for c in e.poly.coeffs]
    else:
        if e.children:
            doc["children"] = [_to_doc(c) for c in e.children]
        if e.kind == "POW":
            doc["base_verified"] = e.base_verified
    return doc


def _from_doc(doc):
    kind = doc["kind"]
    if kind == "CONST":
        n, d = doc["value"]
        return const(Fraction(n, d))
    if kind == "POLY":
        return poly_node(
            RationalPoly([Fraction(n, d) for n, d in doc["coeffs"]], doc["basis"])
        )
    children = tuple(_from_doc(c) for c in doc.get("children", ()))
    if kind == "POW":
        # serialized guarantees are not trusted; certify re-checks bases
        return FnExpr(kind, children, base_verified=False)
    return FnExpr(kind, children)


def expr_to_json(e: FnExpr) -> str:
    return json.dumps(_to_doc(e))


def expr_from_json(text: str) -> FnExpr:
    return _from_doc(json.loads(text))
