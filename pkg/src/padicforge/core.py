"""Exact arithmetic in Z/p^k and the p-adic primitives everything else builds on.

Residues are stored as arbitrary-precision naturals in [0, p^k); digit
vectors are computed on demand rather than kept alongside.  All values are
immutable after construction and every operation here is pure, so objects
can be shared freely across threads.

Composite moduli m = p_1^{k_1} ... p_s^{k_s} never get direct ring
arithmetic: they are split into prime-power components (CRT) and each
component is handled in its own Z/p^k.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

#: Sentinel returned by ord_p(0, p): the zero of Z_p is divisible by every
#: power of p.
INFINITE = math.inf


class NotAUnit(ValueError):
    """Inversion (or unit-reduction of an exponent) hit a non-unit."""


class BaseNotOneUnit(ValueError):
    """Exponentiation base is not congruent to 1 modulo p (odd modulo 2)."""


class PrecisionShortfall(ValueError):
    """A lifted representative was supplied with too little precision."""


def is_prime(n):
    """Deterministic trial-division primality test."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0 or n % 3 == 0:
        return False
    f = 5
    while f * f <= n:
        if n % f == 0 or n % (f + 2) == 0:
            return False
        f += 6
    return True


@dataclass(frozen=True)
class Modulus:
    """A prime-power modulus p^k with the prime and exponent kept explicit."""

    p: int
    k: int
    value: int = field(init=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"modulus base {self.p} is not prime")
        if self.k < 1:
            raise ValueError("modulus exponent must be positive")
        object.__setattr__(self, "value", self.p**self.k)

    def residue(self, x):
        """Wrap an integer as a ResidueInt modulo this modulus."""
        return ResidueInt(x % self.value, self)

    def __str__(self):
        return f"{self.p}^{self.k}"


@dataclass(frozen=True)
class ResidueInt:
    """An element of Z/p^k carrying its modulus.

    Arithmetic between two ResidueInts requires identical moduli; mixing
    them is a bug in the caller, not something to coerce silently.
    """

    residue: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.residue < self.modulus.value:
            raise ValueError(
                f"residue {self.residue} out of range for modulus {self.modulus}"
            )

    def _coerce(self, other):
        if isinstance(other, ResidueInt):
            if other.modulus != self.modulus:
                raise ValueError(
                    f"mixed moduli: {self.modulus} vs {other.modulus}"
                )
            return other.residue
        if isinstance(other, int):
            return other % self.modulus.value
        return NotImplemented

    def __add__(self, other):
        r = self._coerce(other)
        if r is NotImplemented:
            return NotImplemented
        return ResidueInt((self.residue + r) % self.modulus.value, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        r = self._coerce(other)
        if r is NotImplemented:
            return NotImplemented
        return ResidueInt((self.residue - r) % self.modulus.value, self.modulus)

    def __rsub__(self, other):
        r = self._coerce(other)
        if r is NotImplemented:
            return NotImplemented
        return ResidueInt((r - self.residue) % self.modulus.value, self.modulus)

    def __mul__(self, other):
        r = self._coerce(other)
        if r is NotImplemented:
            return NotImplemented
        return ResidueInt((self.residue * r) % self.modulus.value, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return ResidueInt((-self.residue) % self.modulus.value, self.modulus)

    def __int__(self):
        return self.residue


@dataclass(frozen=True)
class CompositeModulus:
    """m = p_1^{k_1} ... p_s^{k_s} with pairwise distinct primes, kept factored."""

    factors: tuple
    value: int = field(init=False, compare=False)

    def __post_init__(self):
        primes = [f.p for f in self.factors]
        if primes != sorted(set(primes)) or not primes:
            raise ValueError("factors must have strictly increasing distinct primes")
        v = 1
        for f in self.factors:
            v *= f.value
        object.__setattr__(self, "value", v)

    @classmethod
    def from_int(cls, m):
        """Factor m by trial division into prime-power components."""
        if m < 2:
            raise ValueError("composite modulus must be at least 2")
        factors = []
        n = m
        p = 2
        while p * p <= n:
            if n % p == 0:
                k = 0
                while n % p == 0:
                    n //= p
                    k += 1
                factors.append(Modulus(p, k))
            p += 1 if p == 2 else 2
        if n > 1:
            factors.append(Modulus(n, 1))
        return cls(tuple(factors))

    def radical(self):
        """Product of the distinct prime divisors of m."""
        r = 1
        for f in self.factors:
            r *= f.p
        return r

    def decompose(self, x):
        """Residues of x modulo each prime-power component."""
        return [x % f.value for f in self.factors]

    def combine(self, residues):
        """CRT: the unique value mod m matching each component residue."""
        if len(residues) != len(self.factors):
            raise ValueError("one residue per factor required")
        x = 0
        for r, f in zip(residues, self.factors):
            other = self.value // f.value
            x += r * other * pow(other, -1, f.value)
        return x % self.value

    def __str__(self):
        return " * ".join(str(f) for f in self.factors)


def ord_p(n, p):
    """Largest e with p^e dividing n; INFINITE for n = 0.

    Accepts negative integers and exact Fractions (ord of a quotient is the
    difference of the ords).
    """
    if isinstance(n, Fraction):
        if n == 0:
            return INFINITE
        return ord_p(n.numerator, p) - ord_p(n.denominator, p)
    if n == 0:
        return INFINITE
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def digit_sum(n, p):
    s = 0
    while n:
        s += n % p
        n //= p
    return s


def ord_p_factorial(i, p):
    """ord_p(i!) via the digit-sum identity (i - wt_p(i)) / (p - 1)."""
    return (i - digit_sum(i, p)) // (p - 1)


def digits(x: ResidueInt):
    """Base-p digit vector of x, least significant first, padded to length k."""
    out = []
    r = x.residue
    p = x.modulus.p
    for _ in range(x.modulus.k):
        out.append(r % p)
        r //= p
    return out


def binomial_eval(x, i, target: Modulus):
    """C(x, i) reduced modulo p^k.

    Division by i! destroys ord_p(i!) digits of precision, so the caller
    must supply x to at least k + ord_p(i!) digits.  A plain int is an
    exact value (unbounded precision); a ResidueInt declares its precision
    through its own modulus and is rejected when that declared precision
    falls short.
    """
    p, k = target.p, target.k
    need = k + ord_p_factorial(i, p)
    if isinstance(x, ResidueInt):
        if x.modulus.p != p:
            raise ValueError(f"lift prime {x.modulus.p} does not match target {p}")
        if x.modulus.k < need:
            raise PrecisionShortfall(
                f"C(x,{i}) mod {target} needs x mod {p}^{need}, got {x.modulus}"
            )
        x = x.residue
    return ResidueInt(math.comb(x, i) % target.value, target)


def falling_factorial(x: ResidueInt, i):
    """x(x-1)...(x-i+1) mod p^k; the empty product for i = 0."""
    m = x.modulus.value
    acc = 1
    for j in range(i):
        acc = acc * (x.residue - j) % m
    return ResidueInt(acc, x.modulus)


def mod_inverse(u: ResidueInt):
    """Multiplicative inverse of a unit mod p^k."""
    if u.residue % u.modulus.p == 0:
        raise NotAUnit(f"{u.residue} is divisible by {u.modulus.p}")
    return ResidueInt(pow(u.residue, -1, u.modulus.value), u.modulus)


def reduce_exponent(e, modulus: Modulus):
    """Reduce an exponent (int, Fraction with unit denominator, or ResidueInt)
    to its representative in [0, p^k)."""
    if isinstance(e, ResidueInt):
        if e.modulus != modulus:
            raise ValueError(f"mixed moduli: {modulus} vs {e.modulus}")
        return e.residue
    if isinstance(e, Fraction):
        if e.denominator == 1:
            return e.numerator % modulus.value
        if e.denominator % modulus.p == 0:
            raise NotAUnit(
                f"exponent denominator {e.denominator} not a unit mod {modulus}"
            )
        return e.numerator * pow(e.denominator, -1, modulus.value) % modulus.value
    return e % modulus.value


def unit_pow(u: ResidueInt, e):
    """u^e mod p^k for a 1-unit base u (any odd u when p = 2).

    The exponent is reduced mod p^k first; this is well defined because
    u^{p^k} = 1 mod p^k for such bases, and it is how negative and
    rational p-adic exponents (inverses, roots) are reached.
    """
    m = u.modulus
    if m.p == 2:
        if u.residue % 2 == 0:
            raise BaseNotOneUnit(f"{u.residue} is even, not a unit mod {m}")
    elif u.residue % m.p != 1:
        raise BaseNotOneUnit(f"{u.residue} is not a 1-unit mod {m}")
    exp = reduce_exponent(e, m)
    return ResidueInt(pow(u.residue, exp, m.value), m)


def lucas_binomial_mod_p(a, b, p):
    """C(a, b) mod p as the digitwise product of small binomials."""
    r = 1
    while b:
        da, db = a % p, b % p
        if db > da:
            return 0
        r = r * math.comb(da, db) % p
        a //= p
        b //= p
    return r
