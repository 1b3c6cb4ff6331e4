"""Command-line frontend: check, certify, gen, analyze, repro.

check    runs the direct diagnostics at a concrete modulus: compatibility,
         bijectivity with a collision witness, transitivity with the orbit
         length, and the coefficient criteria when the function folds to a
         polynomial.  Composite moduli are split into prime-power factors
         and each factor is reported separately.
certify  infers the function class and asks for theorem-backed certificates
         of compatibility, measure preservation, and ergodicity.  The exit
         code reflects the worst verdict so pipelines can branch on it.
gen      certifies a state map, then writes the byte stream of a generator
         to stdout and the run report to stderr.
analyze  computes the affine-complexity report of a sequence: the orbit of
         a DSL expression, the output of a serialized generator spec, or a
         raw little-endian binary file.
repro    replays the worked-example regression table and fails the run if
         any row disagrees with its recorded outcome.

Exit codes: 0 success, 1 repro row failure, 2 parse or configuration
error, 3 state cap exceeded, 4 a requested certificate came back UNKNOWN,
5 a requested certificate came back REFUTED.  PADIC_FORGE_CAP sets the
default brute-force cap; --cap-states overrides it per run.

Reports are plain dictionaries rendered either as text or as JSON
validating against schemas/report.schema.json.
"""

import argparse
import json
import os
import signal
import sys
import time
from importlib import resources
from typing import Callable, List, Optional, Tuple

from .analysis import (
    EmptySequence,
    Relation,
    affine_linear_complexity,
    complexity_growth_profile,
    sequence_from_bytes,
    sequence_from_generator,
)
from .certify import (
    PROVEN,
    REFUTED,
    UNKNOWN,
    CapExceeded,
    MultiPoly,
    NotBijective,
    bijective_mod,
    compatibility_certificate,
    equiprobable_mod,
    ergodicity_certificate,
    infer_class,
    jacobian_equiprobable_certificate,
    measure_preservation_certificate,
    polynomial_bijectivity_certificate,
    transitive_mod,
    _poly_from_expr,
)
from .core import CompositeModulus, Modulus, ResidueInt, mod_inverse
from .funcalg import (
    DslError,
    add,
    build_composite_generator,
    build_ergodic,
    const,
    evaluator,
    is_class_b,
    mul,
    parse_dsl,
    var,
)
from .genlib import (
    NotBinaryModulus,
    NotCertified,
    emit_bytes,
    full_period_census,
    make_generator,
    spec_from_json,
    spec_to_json,
)
from .mahler import (
    MahlerSeries,
    RationalPoly,
    coeffs_from_values,
    is_compatible,
    is_ergodic_2adic,
    is_ergodic_sufficient_oddp,
    is_measure_preserving_2adic,
    series_from_poly,
)

EXIT_OK = 0
EXIT_ROW_FAILURE = 1
EXIT_PARSE = 2
EXIT_CAP = 3
EXIT_UNKNOWN = 4
EXIT_REFUTED = 5

DEFAULT_GEN_WORDS = 1024


def report_schema() -> dict:
    """The shipped JSON schema every report validates against."""
    path = resources.files(__package__) / "schemas" / "report.schema.json"
    return json.loads(path.read_text())


# ---------------------------------------------------------------- plumbing


def _resolve_cap(args) -> Optional[int]:
    if args.cap_states is not None:
        if args.cap_states <= 0:
            raise ValueError("--cap-states must be positive")
        return args.cap_states
    raw = os.environ.get("PADIC_FORGE_CAP")
    if raw:
        cap = int(raw)
        if cap <= 0:
            raise ValueError("PADIC_FORGE_CAP must be positive")
        return cap
    return None


def _resolve_modulus(args):
    """Single Modulus from -p/-k, or the factored form of -m."""
    if args.m is not None:
        if args.p is not None or args.k is not None:
            raise ValueError("give either -m or -p/-k, not both")
        comp = CompositeModulus.from_int(args.m)
        return comp.factors[0] if len(comp.factors) == 1 else comp
    if args.p is None or args.k is None:
        raise ValueError("modulus required: -p P -k K, or composite -m M")
    return Modulus(args.p, args.k)


def _resolve_primes(args) -> List[int]:
    """Primes to certify at; -k is irrelevant for threshold certificates."""
    if args.m is not None:
        if args.p is not None:
            raise ValueError("give either -m or -p, not both")
        return [f.p for f in CompositeModulus.from_int(args.m).factors]
    if args.p is None:
        raise ValueError("a prime is required: -p P, or composite -m M")
    return [args.p]


def _factor_list(modulus) -> List[Modulus]:
    if isinstance(modulus, CompositeModulus):
        return list(modulus.factors)
    return [modulus]


def _load_source(args) -> str:
    if args.source is not None and args.file is not None:
        raise ValueError("give the function inline or with --file, not both")
    if args.source is not None:
        return args.source
    if args.file is not None:
        with open(args.file, "r", encoding="utf-8") as fh:
            return fh.read()
    raise ValueError("a function is required, inline or with --file")


def _class_json(cls) -> dict:
    out = {"tag": cls.tag}
    for key in ("degree", "rho", "lam"):
        value = getattr(cls, key)
        if value is not None:
            out[key] = value
    return out


def _coefficient_criteria(fn, p: int) -> Optional[dict]:
    """Coefficient verdicts when the expression folds to a polynomial."""
    poly = _poly_from_expr(fn)
    if poly is None:
        return None
    series = series_from_poly(poly, p)
    out = {"compatible": is_compatible(series)}
    if p == 2:
        out["measure_preserving"] = is_measure_preserving_2adic(series)
        out["ergodic"] = is_ergodic_2adic(series)
    else:
        out["ergodic_sufficient"] = is_ergodic_sufficient_oddp(series)
    return out


# ------------------------------------------------------------- subcommands


def cmd_check(args) -> Tuple[dict, int]:
    cap = _resolve_cap(args)
    modulus = _resolve_modulus(args)
    source = _load_source(args)
    fn = parse_dsl(source)
    results = []
    for fac in _factor_list(modulus):
        entry = {"modulus": {"p": fac.p, "k": fac.k}}
        entry["compatibility"] = compatibility_certificate(fn, fac.p, cap).to_json()
        ok, witness = bijective_mod(fn, fac, cap)
        entry["bijective"] = ok
        if witness is not None:
            entry["collision"] = list(witness)
        if ok:
            trans, orbit = transitive_mod(fn, fac, cap)
            entry["transitive"] = trans
            entry["orbit_length"] = orbit
        else:
            # a single cycle through all states would be a permutation
            entry["transitive"] = False
        criteria = _coefficient_criteria(fn, fac.p)
        if criteria is not None:
            entry["coefficient_criteria"] = criteria
        results.append(entry)
    report = {
        "kind": "check",
        "source": source.strip(),
        "modulus_value": modulus.value,
        "results": results,
    }
    return report, EXIT_OK


def cmd_certify(args) -> Tuple[dict, int]:
    cap = _resolve_cap(args)
    source = _load_source(args)
    fn = parse_dsl(source)
    results = []
    verdicts = []
    for p in _resolve_primes(args):
        cls = infer_class(fn, p)
        compat = compatibility_certificate(fn, p, cap)
        mp = measure_preservation_certificate(fn, p, cls, cap=cap)
        erg = ergodicity_certificate(fn, p, cls, cap=cap)
        verdicts += [compat.verdict, mp.verdict, erg.verdict]
        results.append({
            "modulus": {"p": p, "k": erg.checked_modulus.k},
            "class": _class_json(cls),
            "compatibility": compat.to_json(),
            "measure_preservation": mp.to_json(),
            "ergodicity": erg.to_json(),
        })
    if REFUTED in verdicts:
        worst, code = REFUTED, EXIT_REFUTED
    elif UNKNOWN in verdicts:
        worst, code = UNKNOWN, EXIT_UNKNOWN
    else:
        worst, code = PROVEN, EXIT_OK
    report = {
        "kind": "certify",
        "source": source.strip(),
        "results": results,
        "worst": worst,
    }
    return report, code


def _spec_blob_from_file(path: str) -> Optional[dict]:
    """Parsed JSON when the file holds a generator spec, else None."""
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        blob = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return None
    if not isinstance(blob, dict):
        return None
    return blob


def cmd_gen(args) -> Tuple[dict, int]:
    cap = _resolve_cap(args)
    if args.count <= 0:
        raise ValueError("--count must be positive")
    blob = _spec_blob_from_file(args.file) if args.file else None
    if blob is not None:
        if args.p is not None or args.k is not None or args.m is not None:
            raise ValueError("the spec file fixes the modulus; drop -p/-k/-m")
        if args.seed is not None:
            raise ValueError("the spec file fixes the seed; drop --seed")
        spec = spec_from_json(blob, cap)
        source = f"{args.file} (generator spec)"
    else:
        source = _load_source(args)
        fn = parse_dsl(source)
        modulus = _resolve_modulus(args)
        spec = make_generator(fn, modulus, args.seed or 0, cap=cap)
    data = emit_bytes(spec, args.count)
    sys.stdout.buffer.write(data)
    sys.stdout.buffer.flush()
    report = {
        "kind": "gen",
        "source": source.strip(),
        "spec": spec_to_json(spec),
        "words": args.count,
        "bytes_written": len(data),
        "certificates": [c.to_json() for c in spec.certificates],
    }
    return report, EXIT_OK


def cmd_analyze(args) -> Tuple[dict, int]:
    cap = _resolve_cap(args)
    if args.rmax <= 0:
        raise ValueError("--rmax must be positive")
    if args.file is not None and args.source is not None:
        raise ValueError("give a sequence source inline or with --file, not both")
    if args.file is not None:
        blob = _spec_blob_from_file(args.file)
        if blob is not None:
            spec = spec_from_json(blob, cap)
            m = spec.out_modulus if spec.out_fn is not None else spec.modulus
            if isinstance(m, CompositeModulus):
                raise ValueError("affine analysis needs a prime-power modulus")
            seq = sequence_from_generator(spec)
            source = f"{args.file} (generator spec)"
        else:
            m = _resolve_modulus(args)
            if isinstance(m, CompositeModulus):
                raise ValueError("binary input needs -p 2 -k with k a multiple of 8")
            with open(args.file, "rb") as fh:
                seq = sequence_from_bytes(fh.read(), m)
            source = f"{args.file} (binary)"
    else:
        source = _load_source(args)
        fn = parse_dsl(source)
        m = _resolve_modulus(args)
        if isinstance(m, CompositeModulus):
            raise ValueError("affine analysis needs a prime-power modulus")
        walk_cap = cap if cap is not None else 1 << 20
        if m.value > walk_cap:
            raise CapExceeded(f"{m.value} states exceeds cap {walk_cap}")
        seed = args.seed or 0
        if not 0 <= seed < m.value:
            raise ValueError(f"seed {seed} outside 0..{m.value - 1}")
        step = evaluator(fn, m)
        seq = []
        x = seed
        for _ in range(m.value):
            seq.append(x)
            x = step(x)
            if x == seed:
                break
        source = source.strip()
    rep = affine_linear_complexity(seq, m, r_max=args.rmax)
    report = {"kind": "analyze", "source": source, "words": len(seq)}
    report.update(rep.to_json())
    return report, EXIT_OK


# ---------------------------------------------------------------- repro

# Each row replays one worked example and returns None on agreement or a
# short description of the disagreement.  Rows are grouped so subsets can
# be selected with --only.


def _orbit(step: Callable[[int], int], m: Modulus, seed: int = 0) -> List[int]:
    seq = []
    x = seed
    for _ in range(m.value):
        seq.append(x)
        x = step(x)
        if x == seed:
            break
    return seq


def _parity_flip(modval: int) -> Callable[[int], int]:
    """x - 3 on evens, x + 5 on odds; single cycle mod every power of two."""
    return lambda x: (x - 3 if x % 2 == 0 else x + 5) % modval


def _parity_flip_series(degree: int = 14) -> MahlerSeries:
    coeffs = [-3, 9] + [(-1) ** (j + 1) * 2 ** (j + 2) for j in range(2, degree + 1)]
    return MahlerSeries(tuple(coeffs), 2)


def _row_inverse_3_mod_16() -> Optional[str]:
    m16 = Modulus(2, 4)
    got = mod_inverse(ResidueInt(3, m16)).residue
    return None if got == 11 else f"3^-1 mod 16 gave {got}, want 11"


def _row_negative_cube_root() -> Optional[str]:
    m16 = Modulus(2, 4)
    got = (pow(3, 11, 16),
           mod_inverse(ResidueInt(pow(3, 5, 16), m16)).residue,
           pow(11, 3, 16))
    return None if got == (11, 11, 3) else f"got {got}, want (11, 11, 3)"


def _row_xor_and_octet() -> Optional[str]:
    m = Modulus(2, 3)
    got = (evaluator(parse_dsl("1 xor 3"), m)(0), evaluator(parse_dsl("2 and 7"), m)(0))
    return None if got == (2, 2) else f"got {got}, want (2, 2)"


def _row_complement_13() -> Optional[str]:
    got = evaluator(parse_dsl("neg(13)"), Modulus(2, 3))(0)
    return None if got == 2 else f"NEG(13) mod 8 gave {got}, want 2"


def _row_complement_sum_identity() -> Optional[str]:
    for k in (3, 8, 12):
        m = Modulus(2, k)
        f = evaluator(parse_dsl("x + neg(x)"), m)
        for z in (0, 1, 5, min(100, m.value - 1), m.value - 1):
            if f(z) != m.value - 1:
                return f"z + NEG(z) mod 2^{k} at z={z} gave {f(z)}"
    return None


def _row_xor_shift_generator() -> Optional[str]:
    gen = build_ergodic(parse_dsl("x xor (2*x + 1)"), 1, 2)
    for k in (4, 10, 16):
        ok, orbit = transitive_mod(gen, Modulus(2, k))
        if not ok:
            return f"orbit mod 2^{k} has length {orbit}, want {1 << k}"
    return None


def _row_second_order_affine() -> Optional[str]:
    m = Modulus(2, 8)
    for a, b in ((3, 5), (7, 13), (5, 9)):
        step = evaluator(add(const(a), mul(const(b), var())), m)
        seq = _orbit(step, m)
        rel = Relation(2, (-b % m.value, (1 + b) % m.value), 0)
        if not rel.verify(seq, m):
            return f"x_(n+2) = (1+b)x_(n+1) - b*x_n fails for a={a}, b={b}"
        rep = affine_linear_complexity(seq, m, r_max=4)
        if not isinstance(rep.linear_complexity, int) or rep.linear_complexity > 2:
            return f"complexity for a={a}, b={b} is {rep.linear_complexity}, want <= 2"
    return None


def _row_affine_profile_bounded() -> Optional[str]:
    profile = complexity_growth_profile(RationalPoly([1, 5]), 2, range(1, 9))
    bad = [(k, c) for k, c in profile if c > 2]
    return None if not bad else f"profile exceeds 2 at {bad}"


def _row_squares_xor_mask_generator() -> Optional[str]:
    gen = build_ergodic(parse_dsl("(x*x) xor ((x + 32) and x)"), 7, 2)
    for k in (4, 8, 10):
        ok, orbit = transitive_mod(gen, Modulus(2, k))
        if not ok:
            return f"orbit mod 2^{k} has length {orbit}, want {1 << k}"
    return None


def _row_affine_transitivity_rule() -> Optional[str]:
    m = Modulus(2, 5)
    for a in range(m.value):
        for b in range(m.value):
            try:
                got, _ = transitive_mod(add(const(a), mul(const(b), var())), m)
            except NotBijective:
                got = False
            want = a % 2 == 1 and b % 4 == 1
            if got != want:
                return f"a={a}, b={b}: transitive is {got}, the rule says {want}"
    return None


def _row_cube_mix_equiprobable() -> Optional[str]:
    mix = MultiPoly(2, {(1, 0): 2, (0, 3): 1})
    for n in range(1, 9):
        ok, census = equiprobable_mod([mix], 2, Modulus(2, n))
        if not ok:
            return f"fibers mod 2^{n}: {census}"
        if census["expected_fiber"] != 1 << n:
            return f"expected fiber mod 2^{n} is {census['expected_fiber']}"
    return None


def _row_jacobian_unit_certificate() -> Optional[str]:
    f = MultiPoly(2, {(1, 0): 1, (0, 1): 3, (0, 2): 6, (0, 3): 4})
    cert = jacobian_equiprobable_certificate([f], 2)
    return None if cert.verdict == PROVEN else f"verdict {cert.verdict}, want PROVEN"


def _row_jacobian_vanishing_unknown() -> Optional[str]:
    f = MultiPoly(2, {(1, 0): 2, (0, 3): 1})
    cert = jacobian_equiprobable_certificate([f], 2)
    return None if cert.verdict == UNKNOWN else f"verdict {cert.verdict}, want UNKNOWN"


def _unit_power_shift(p: int) -> RationalPoly:
    return RationalPoly([1] + [0] * (p - 1) + [1])


def _row_unit_power_shift_collision() -> Optional[str]:
    for p in (2, 3, 5):
        f = _unit_power_shift(p)
        ok, _ = bijective_mod(f, Modulus(p, 1))
        if not ok:
            return f"1 + x^{p} is not bijective mod {p}"
        ok, witness = bijective_mod(f, Modulus(p, 2))
        if ok or witness is None:
            return f"1 + x^{p} looked bijective mod {p}^2"
    return None


def _row_unit_power_shift_refuted() -> Optional[str]:
    for p in (2, 3, 5):
        cert = polynomial_bijectivity_certificate(_unit_power_shift(p), p)
        if cert.verdict != REFUTED:
            return f"p={p}: verdict {cert.verdict}, want REFUTED"
    return None


def _row_unit_power_shift_measure() -> Optional[str]:
    for p in (2, 3, 5):
        cert = measure_preservation_certificate(_unit_power_shift(p), p)
        if cert.verdict != REFUTED:
            return f"p={p}: verdict {cert.verdict}, want REFUTED"
    return None


def _row_one_unit_exponential_class() -> Optional[str]:
    ok = is_class_b(parse_dsl("(1 + 2*x)^x"), 2)
    return None if ok else "(1+2x)^x not recognized in the one-unit closure"


def _row_parity_flip_series_criteria() -> Optional[str]:
    values = [x - 3 if x % 2 == 0 else x + 5 for x in range(16)]
    series = coeffs_from_values(values, 2)
    if not is_compatible(series):
        return "interpolation coefficients fail the compatibility test"
    if not is_ergodic_2adic(series):
        return "interpolation coefficients fail the ergodicity test"
    return None


def _row_falling_factorial_sextic() -> Optional[str]:
    cert = ergodicity_certificate(parse_dsl("1 + x + (5/18)*ff(x,6)"), 2)
    got = (cert.verdict, cert.theorem, cert.checked_modulus.k)
    want = (PROVEN, "P4_7", 5)
    return None if got == want else f"got {got}, want {want}"


def _row_exponential_201_certificate() -> Optional[str]:
    cert = ergodicity_certificate(parse_dsl("1 + x + 201^x"), 5)
    got = (cert.verdict, cert.theorem, cert.checked_modulus.p, cert.checked_modulus.k)
    want = (PROVEN, "T4_9", 5, 2)
    return None if got == want else f"got {got}, want {want}"


def _row_inversive_composite_period() -> Optional[str]:
    m = CompositeModulus.from_int(10_000)
    fn = build_composite_generator(
        RationalPoly([1]), RationalPoly([0, 2]), RationalPoly([-1]), m)
    spec = make_generator(fn, m, 1)
    census = full_period_census(spec)
    if census["period"] != 10_000 or not census["uniform"]:
        return f"period {census['period']}, uniform {census['uniform']}"
    return None


def _row_quintic_two_prime_transitivity() -> Optional[str]:
    f = RationalPoly([1, -127, 0, -152, 0, 152])
    for p in (2, 5):
        for k in range(1, 7):
            ok, orbit = transitive_mod(f, Modulus(p, k))
            if not ok:
                return (f"not transitive mod {p}^{k}:"
                        f" the orbit of 0 has length {orbit} of {p ** k}")
    return None


def _row_parity_flip_recurrence() -> Optional[str]:
    rel = Relation(2, (1, 0), 2)
    orbits = {}
    for k in range(2, 13):
        m = Modulus(2, k)
        orbits[k] = _orbit(_parity_flip(m.value), m)
        if not rel.verify(orbits[k], m):
            return f"x_(n+2) = x_n + 2 fails mod 2^{k}"
    for k in range(2, 13):
        m = Modulus(2, k)
        rep = affine_linear_complexity(orbits[k], m, r_max=4)
        if rep.linear_complexity != 2:
            return (f"complexity mod 2^{k} is {rep.linear_complexity}, want 2"
                    " (the order-2 relation itself holds at every k here)")
    return None


def _row_parity_flip_profile() -> Optional[str]:
    profile = complexity_growth_profile(_parity_flip_series(), 2, range(2, 11))
    bad = [(k, c) for k, c in profile if c != 2]
    return None if not bad else f"profile is not constant 2: off at {bad}"


def _repro_rows():
    return [
        ("inverse-3-mod-16", "section1", _row_inverse_3_mod_16),
        ("negative-cube-root-mod-16", "section1", _row_negative_cube_root),
        ("xor-and-octet", "section1", _row_xor_and_octet),
        ("complement-13-mod-8", "section1", _row_complement_13),
        ("xor-shift-generator", "section1", _row_xor_shift_generator),
        ("second-order-affine-recurrence", "section1", _row_second_order_affine),
        ("affine-profile-bounded", "section1", _row_affine_profile_bounded),
        ("complement-sum-identity", "section2", _row_complement_sum_identity),
        ("squares-xor-mask-generator", "section2", _row_squares_xor_mask_generator),
        ("affine-transitivity-rule", "section3", _row_affine_transitivity_rule),
        ("cube-mix-equiprobable", "section3", _row_cube_mix_equiprobable),
        ("jacobian-unit-certificate", "section3", _row_jacobian_unit_certificate),
        ("jacobian-vanishing-unknown", "section3", _row_jacobian_vanishing_unknown),
        ("unit-power-shift-collision", "section4", _row_unit_power_shift_collision),
        ("unit-power-shift-refuted", "section4", _row_unit_power_shift_refuted),
        ("unit-power-shift-measure", "section4", _row_unit_power_shift_measure),
        ("one-unit-exponential-class", "section4", _row_one_unit_exponential_class),
        ("parity-flip-series-criteria", "section5", _row_parity_flip_series_criteria),
        ("falling-factorial-sextic", "section5", _row_falling_factorial_sextic),
        ("exponential-201-certificate", "section5", _row_exponential_201_certificate),
        ("inversive-composite-period", "section5", _row_inversive_composite_period),
        ("quintic-two-prime-transitivity", "section5", _row_quintic_two_prime_transitivity),
        ("parity-flip-recurrence", "section5", _row_parity_flip_recurrence),
        ("parity-flip-profile", "section5", _row_parity_flip_profile),
    ]


def cmd_repro(args) -> Tuple[dict, int]:
    rows = _repro_rows()
    if args.only is not None:
        rows = [r for r in rows if r[1] == args.only]
        if not rows:
            groups = sorted({g for _, g, _ in _repro_rows()})
            raise ValueError(f"no rows in group {args.only!r}; groups: {', '.join(groups)}")
    out = []
    failed = 0
    for name, group, run in rows:
        t0 = time.perf_counter()
        try:
            detail = run()
        except Exception as exc:  # a crashed row is a failed row
            detail = f"raised {type(exc).__name__}: {exc}"
        elapsed = (time.perf_counter() - t0) * 1000.0
        ok = detail is None
        if not ok:
            failed += 1
        row = {"name": name, "group": group, "ok": ok, "elapsed_ms": round(elapsed, 2)}
        if detail is not None:
            row["detail"] = detail
        out.append(row)
    report = {
        "kind": "repro",
        "rows": out,
        "passed": len(out) - failed,
        "failed": failed,
    }
    return report, (EXIT_OK if failed == 0 else EXIT_ROW_FAILURE)


# ------------------------------------------------------------- rendering


def _fmt_relation(rel: dict) -> str:
    r = rel["order"]
    terms = [str(rel["constant"])]
    terms += [f"{c}*x[n+{j}]" if j else f"{c}*x[n]"
              for j, c in enumerate(rel["coeffs"]) if c]
    return f"x[n+{r}] = " + " + ".join(terms)


def _fmt_complexity(value) -> str:
    if isinstance(value, dict):
        return f"none found up to order {value['none_found_up_to']}"
    return str(value)


def _fmt_certificate(label: str, cert: dict) -> str:
    mod = cert["modulus"]
    line = (f"  {label:<20} {cert['verdict']:<8} via {cert['theorem']}"
            f" at {mod['p']}^{mod['k']}")
    if "witness" in cert:
        line += f"  witness {cert['witness']}"
    return line


def _render_text(report: dict) -> str:
    kind = report["kind"]
    lines: List[str] = []
    if kind == "check":
        lines.append(f"check {report['source']}  (modulus {report['modulus_value']})")
        for entry in report["results"]:
            mod = entry["modulus"]
            lines.append(f"mod {mod['p']}^{mod['k']}:")
            lines.append(_fmt_certificate("compatibility", entry["compatibility"]))
            bij = f"  bijective            {entry['bijective']}"
            if "collision" in entry:
                bij += f"  collision {tuple(entry['collision'])}"
            lines.append(bij)
            trans = f"  transitive           {entry['transitive']}"
            if "orbit_length" in entry:
                trans += f"  orbit length {entry['orbit_length']}"
            lines.append(trans)
            for name, value in entry.get("coefficient_criteria", {}).items():
                lines.append(f"  coefficient {name:<12} {value}")
    elif kind == "certify":
        lines.append(f"certify {report['source']}")
        for entry in report["results"]:
            mod = entry["modulus"]
            lines.append(f"p = {mod['p']}  (class {entry['class']['tag']}):")
            lines.append(_fmt_certificate("compatibility", entry["compatibility"]))
            lines.append(_fmt_certificate("measure preservation", entry["measure_preservation"]))
            lines.append(_fmt_certificate("ergodicity", entry["ergodicity"]))
        lines.append(f"worst verdict: {report['worst']}")
    elif kind == "gen":
        lines.append(f"gen {report['source']}")
        lines.append(f"wrote {report['bytes_written']} bytes ({report['words']} words)")
        for cert in report["certificates"]:
            lines.append(_fmt_certificate(cert["property"].lower(), cert))
    elif kind == "analyze":
        mod = report["modulus"]
        lines.append(f"analyze {report['source']}")
        lines.append(f"{report['words']} words mod {mod['p']}^{mod['k']},"
                     f" period {report['period']},"
                     f" equidistributed {report['census_ok']}")
        lines.append(f"linear complexity {_fmt_complexity(report['linear_complexity'])}")
        if "relation" in report:
            lines.append(f"  {_fmt_relation(report['relation'])}")
        lines.append(f"unit complexity {_fmt_complexity(report['unit_complexity'])}")
        if "unit_relation" in report:
            lines.append(f"  {_fmt_relation(report['unit_relation'])}")
        if report["bit_periods"]:
            lines.append("bit periods " + " ".join(str(b) for b in report["bit_periods"]))
    elif kind == "repro":
        for row in report["rows"]:
            mark = "ok  " if row["ok"] else "FAIL"
            line = f"{mark}  {row['group']:<9} {row['name']:<32} {row['elapsed_ms']:>9.2f} ms"
            if "detail" in row:
                line += f"  {row['detail']}"
            lines.append(line)
        lines.append(f"{report['passed']} passed, {report['failed']} failed")
    else:
        raise AssertionError(f"unrenderable report kind {kind!r}")
    return "\n".join(lines)


def _emit(report: dict, args) -> None:
    # gen owns stdout for the byte stream; its report goes to stderr
    stream = sys.stderr if report["kind"] == "gen" else sys.stdout
    if args.json_out:
        print(json.dumps(report, indent=2), file=stream)
    else:
        print(_render_text(report), file=stream)


# ------------------------------------------------------------------ entry


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", type=int, metavar="P", help="prime of the modulus")
    common.add_argument("-k", type=int, metavar="K", help="exponent of the modulus")
    common.add_argument("-m", type=int, metavar="M",
                        help="composite modulus, factored by trial division")
    common.add_argument("--seed", type=int, metavar="N", help="starting state (default 0)")
    common.add_argument("--cap-states", type=int, metavar="N", dest="cap_states",
                        help="brute-force state cap (default from PADIC_FORGE_CAP)")
    common.add_argument("--rmax", type=int, default=32, metavar="R",
                        help="largest recurrence order to search (default 32)")
    common.add_argument("--json", action="store_true", dest="json_out",
                        help="machine-readable report")
    common.add_argument("--file", metavar="PATH",
                        help="read the function, spec, or data from a file")

    top = argparse.ArgumentParser(
        prog="padic-forge",
        description="construct, certify, and analyze congruential generators"
                    " on p-adic state spaces")
    sub = top.add_subparsers(dest="command", required=True, metavar="command")

    sp = sub.add_parser("check", parents=[common],
                        help="direct diagnostics at a concrete modulus")
    sp.add_argument("source", nargs="?", help="function in the expression language")

    sp = sub.add_parser("certify", parents=[common],
                        help="theorem-backed certificates; exit code tracks the verdict")
    sp.add_argument("source", nargs="?", help="function in the expression language")

    sp = sub.add_parser("gen", parents=[common],
                        help="emit generator bytes on stdout, report on stderr")
    sp.add_argument("source", nargs="?", help="state map in the expression language")
    sp.add_argument("--count", type=int, default=DEFAULT_GEN_WORDS, metavar="N",
                    help=f"output words to emit (default {DEFAULT_GEN_WORDS})")

    sp = sub.add_parser("analyze", parents=[common],
                        help="affine-complexity report for a sequence")
    sp.add_argument("source", nargs="?", help="state map in the expression language")

    sp = sub.add_parser("repro", parents=[common],
                        help="replay the worked-example regression table")
    sp.add_argument("--only", metavar="GROUP", help="run a single row group")

    return top


_DISPATCH = {
    "check": cmd_check,
    "certify": cmd_certify,
    "gen": cmd_gen,
    "analyze": cmd_analyze,
    "repro": cmd_repro,
}


def main(argv: Optional[List[str]] = None) -> int:
    if hasattr(signal, "SIGPIPE"):
        signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    args = _build_parser().parse_args(argv)
    try:
        report, code = _DISPATCH[args.command](args)
    except DslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except NotCertified as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN if UNKNOWN in str(exc) else EXIT_REFUTED
    except (ValueError, OSError, EmptySequence, NotBinaryModulus) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    _emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
