"""Sequence diagnostics: affine complexity over Z/p^k and bit-plane periods.

The central question: what is the least r such that one full period of a
sequence satisfies x_{n+r} = c + c_0*x_n + ... + c_{r-1}*x_{n+r-1} at every
cyclic index n?  Two flavors are reported.  ANY accepts any solution of the
congruence system, zero-divisor coefficients included.  UNIT additionally
demands a solution with at least one x-coefficient invertible mod p, which
rules out relations that degenerate mod p to a statement about the constant
term alone.  A relation proved on a row sample is always re-verified against
the entire period before it is reported.

Z/p^k is not a field, so the solver is not Berlekamp-Massey.  It eliminates
with full pivoting on the entry of least p-valuation, which keeps every
frozen row solvable independently of the free choices and makes both the
particular solution and the kernel generators exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .certify import PROVEN, CapExceeded, MapLike, _as_map, ergodicity_certificate
from .core import Modulus, ord_p
from .genlib import GeneratorSpec, GeneratorState, NotBinaryModulus, NotCertified

SOLVER_PERIOD_CAP = 1 << 20
DEFAULT_R_MAX = 32


class EmptySequence(Exception):
    """The diagnostics need at least one element."""


@dataclass(frozen=True)
class NoneFoundUpTo:
    """No relation of any order up to and including r_max."""

    r_max: int


@dataclass(frozen=True)
class Relation:
    """x_{n+order} = constant + sum coeffs[j] * x_{n+j}, all indices cyclic."""

    order: int
    coeffs: Tuple[int, ...]
    constant: int

    def holds_at(self, seq: Sequence[int], m: Modulus, n: int) -> bool:
        period = len(seq)
        acc = self.constant
        for j, cj in enumerate(self.coeffs):
            acc += cj * seq[(n + j) % period]
        return (acc - seq[(n + self.order) % period]) % m.value == 0

    def verify(self, seq: Sequence[int], m: Modulus) -> bool:
        return all(self.holds_at(seq, m, n) for n in range(len(seq)))

    def has_unit_coeff(self, p: int) -> bool:
        return any(cj % p for cj in self.coeffs)

    def as_vector(self) -> Tuple[int, ...]:
        """(c, c_0, ..., c_{r-1}); the leading coefficient is an implicit 1."""
        return (self.constant, *self.coeffs)

    def to_json(self) -> dict:
        return {"order": self.order, "constant": self.constant,
                "coeffs": list(self.coeffs)}


Complexity = Union[int, NoneFoundUpTo]


@dataclass(frozen=True)
class SequenceReport:
    modulus: Modulus
    period: int
    linear_complexity: Complexity
    relation: Optional[Relation]
    unit_complexity: Complexity
    unit_relation: Optional[Relation]
    bit_periods: Tuple[int, ...]
    census_ok: bool

    def to_json(self) -> dict:
        def enc(value):
            if isinstance(value, NoneFoundUpTo):
                return {"none_found_up_to": value.r_max}
            return value

        blob = {
            "modulus": {"p": self.modulus.p, "k": self.modulus.k},
            "period": self.period,
            "linear_complexity": enc(self.linear_complexity),
            "unit_complexity": enc(self.unit_complexity),
            "bit_periods": list(self.bit_periods),
            "census_ok": self.census_ok,
        }
        if self.relation is not None:
            blob["relation"] = self.relation.to_json()
        if self.unit_relation is not None:
            blob["unit_relation"] = self.unit_relation.to_json()
        return blob


def _solve_mod_pk(rows: List[List[int]], rhs: List[int], p: int, k: int):
    """General solution of A z = b over Z/p^k.

    Returns (particular, kernel_gens) or None when the system has no
    solution.  Full pivoting picks the remaining entry of least
    p-valuation, so once a row is frozen every entry to the right of its
    pivot has valuation >= the pivot's and the row can be solved by one
    exact division whatever the later variables are.  Kernel generators
    come in two kinds: one per free column, and one per pivot whose
    valuation e leaves p^(k-e) of slack.
    """
    m = p ** k
    a = [[v % m for v in row] for row in rows]
    b = [v % m for v in rhs]
    nrows, ncols = len(a), len(a[0])
    col_of = list(range(ncols))
    piv_val = []
    t = 0
    while t < nrows and t < ncols:
        best = None
        for i in range(t, nrows):
            for j in range(t, ncols):
                if a[i][j] == 0:
                    continue
                e = ord_p(a[i][j], p)
                if best is None or e < best[0]:
                    best = (e, i, j)
                    if e == 0:
                        break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        e, bi, bj = best
        a[t], a[bi] = a[bi], a[t]
        b[t], b[bi] = b[bi], b[t]
        if bj != t:
            for row in a:
                row[t], row[bj] = row[bj], row[t]
            col_of[t], col_of[bj] = col_of[bj], col_of[t]
        inv_unit = pow(a[t][t] // p ** e, -1, m)
        a[t] = [v * inv_unit % m for v in a[t]]
        b[t] = b[t] * inv_unit % m
        pe = p ** e
        for i in range(t + 1, nrows):
            if a[i][t]:
                q = a[i][t] // pe
                a[i] = [(vi - q * vt) % m for vi, vt in zip(a[i], a[t])]
                b[i] = (b[i] - q * b[t]) % m
        piv_val.append(e)
        t += 1
    rank = len(piv_val)
    if any(b[i] % m for i in range(rank, nrows)):
        return None

    def back_substitute(target, start, preset):
        z = list(preset)
        for i in range(start, -1, -1):
            s = (target[i] - sum(a[i][j] * z[j] for j in range(i + 1, ncols))) % m
            pe = p ** piv_val[i]
            if s % pe:
                return None
            z[i] = (s // pe) % (m // pe)
        return z

    particular = back_substitute(b, rank - 1, [0] * ncols)
    if particular is None:
        return None
    zeros = [0] * nrows
    gens = []
    for free in range(rank, ncols):
        preset = [0] * ncols
        preset[free] = 1
        gens.append(back_substitute(zeros, rank - 1, preset))
    for t in range(rank):
        slack = p ** (k - piv_val[t])
        if slack % m == 0:
            continue
        preset = [0] * ncols
        preset[t] = slack
        gens.append(back_substitute(zeros, t - 1, preset))

    def unpermute(z):
        out = [0] * ncols
        for pos, orig in enumerate(col_of):
            out[orig] = z[pos]
        return out

    return unpermute(particular), [unpermute(g) for g in gens]


def _sample_rows(period: int, want: int) -> List[int]:
    if want >= period:
        return list(range(period))
    stride = period // want
    return [i * stride for i in range(want)]


def _relation_at_order(seq: Sequence[int], m: Modulus, r: int,
                       unit_only: bool) -> Optional[Relation]:
    """Least-order search step: decide order r and return a verified relation.

    Solves on a row sample, then checks the candidate on the whole period;
    a violated index joins the sample and the solve repeats.  Each added
    row strictly shrinks the solution coset, so the loop terminates well
    before (r+1)*k rounds.
    """
    period = len(seq)
    picked = _sample_rows(period, min(period, 4 * (r + 1)))
    chosen = set(picked)
    while True:
        rows = [[seq[(n + j) % period] for j in range(r)] + [1] for n in picked]
        rhs = [seq[(n + r) % period] for n in picked]
        solved = _solve_mod_pk(rows, rhs, m.p, m.k)
        if solved is None:
            return None
        particular, gens = solved
        z = particular
        if unit_only and not any(z[j] % m.p for j in range(r)):
            bump = next((g for g in gens if any(g[j] % m.p for j in range(r))), None)
            if bump is None:
                return None
            z = [(zi + gi) % m.value for zi, gi in zip(z, bump)]
        candidate = Relation(r, tuple(z[:r]), z[r])
        violated = next((n for n in range(period)
                         if not candidate.holds_at(seq, m, n)), None)
        if violated is None:
            return candidate
        picked.append(violated)
        if violated in chosen:
            raise AssertionError("row re-added; the solver returned a non-solution")
        chosen.add(violated)


def _least_order(seq, m, r_max, unit_only, r_start=1):
    for r in range(r_start, r_max + 1):
        rel = _relation_at_order(seq, m, r, unit_only)
        if rel is not None:
            return rel
    return None


def _check_buffer(seq, m: Modulus):
    if len(seq) == 0:
        raise EmptySequence("need one full period, got an empty buffer")
    if len(seq) > SOLVER_PERIOD_CAP:
        raise CapExceeded(f"period {len(seq)} exceeds the solver cap {SOLVER_PERIOD_CAP}")
    bad = next((x for x in seq if not 0 <= x < m.value), None)
    if bad is not None:
        raise ValueError(f"element {bad} is not a residue mod {m.value}")


def affine_linear_complexity(seq: Sequence[int], m: Modulus,
                             r_max: int = DEFAULT_R_MAX) -> SequenceReport:
    """Full diagnostics for one period of residues mod p^k.

    The headline complexity is the ANY flavor; the UNIT flavor never comes
    out smaller, so its scan starts where the first one stopped.
    """
    seq = list(seq)
    _check_buffer(seq, m)
    any_rel = _least_order(seq, m, r_max, unit_only=False)
    if any_rel is not None and any_rel.has_unit_coeff(m.p):
        unit_rel = any_rel
    else:
        unit_rel = _least_order(seq, m, r_max, unit_only=True,
                                r_start=any_rel.order if any_rel else 1)
    counts = {}
    for x in seq:
        counts[x] = counts.get(x, 0) + 1
    census_ok = len(counts) == m.value and len(set(counts.values())) == 1
    return SequenceReport(
        modulus=m,
        period=len(seq),
        linear_complexity=any_rel.order if any_rel else NoneFoundUpTo(r_max),
        relation=any_rel,
        unit_complexity=unit_rel.order if unit_rel else NoneFoundUpTo(r_max),
        unit_relation=unit_rel,
        bit_periods=tuple(bit_plane_periods(seq, m)) if m.p == 2 else (),
        census_ok=census_ok,
    )


def bit_plane_periods(seq: Sequence[int], m: Modulus) -> List[int]:
    """Minimal period of each bit sequence delta_j(x_n), j = 0..k-1.

    The buffer is one full period, so every candidate divides its length;
    each divisor is checked against all rotations, no shortcuts.
    """
    if m.p != 2:
        raise NotBinaryModulus(f"bit planes need p = 2, modulus is {m}")
    seq = list(seq)
    _check_buffer(seq, m)
    period = len(seq)
    divisors = [d for d in range(1, period + 1) if period % d == 0]
    out = []
    for j in range(m.k):
        bits = [(x >> j) & 1 for x in seq]
        for d in divisors:
            if all(bits[i] == bits[(i + d) % period] for i in range(period)):
                out.append(d)
                break
    return out


def complexity_growth_profile(state_fn: MapLike, p: int, k_range,
                              r_max: int = 16, cls=None) -> List[Tuple[int, Complexity]]:
    """UNIT-flavor complexity of the orbit of 0 at each precision in k_range.

    The state map must carry a PROVEN ergodicity certificate, which also
    guarantees the orbit is one full period of length p^k.  Complexity is
    nondecreasing in k (a relation mod p^k holds mod p^(k-1), units stay
    units), so each scan resumes at the previous level's order.
    """
    cert = ergodicity_certificate(state_fn, p, cls=cls)
    if cert.verdict != PROVEN:
        raise NotCertified(f"state map is {cert.verdict} at p={p}, profile needs PROVEN")
    out = []
    r_floor = 1
    for k in sorted(k_range):
        m = Modulus(p, k)
        step = _as_map(state_fn, m)
        seq = []
        x = 0
        for _ in range(m.value):
            seq.append(x)
            x = step(x)
        _check_buffer(seq, m)
        rel = _least_order(seq, m, r_max, unit_only=True, r_start=r_floor)
        if rel is None:
            out.append((k, NoneFoundUpTo(r_max)))
            r_floor = r_max + 1
        else:
            out.append((k, rel.order))
            r_floor = rel.order
    return out


def sequence_from_generator(spec: GeneratorSpec, count: Optional[int] = None) -> List[int]:
    """One full period of outputs by default; count overrides."""
    n = spec.modulus.value if count is None else count
    if n > SOLVER_PERIOD_CAP:
        raise CapExceeded(f"requested {n} elements, solver cap is {SOLVER_PERIOD_CAP}")
    return GeneratorState(spec).take(n)


def sequence_from_bytes(data: bytes, m: Modulus) -> List[int]:
    """Little-endian words of k/8 bytes each; the inverse of byte emission."""
    if m.p != 2 or m.k % 8 != 0:
        raise NotBinaryModulus(f"byte ingestion needs p = 2 and 8 | k, modulus is {m}")
    width = m.k // 8
    if len(data) % width:
        raise ValueError(f"{len(data)} bytes is not a whole number of {width}-byte words")
    return [int.from_bytes(data[i:i + width], "little")
            for i in range(0, len(data), width)]
