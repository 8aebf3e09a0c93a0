"""Sufficient-condition checkers for triangular and quadratic convex mappings.

Each checker evaluates the inequalities of one sufficient condition
pointwise, as ``margin = RHS - LHS`` (>= 0 means satisfied), over a sample of
interior points plus deterministic probes on the coordinate axes and on
shells where single coordinates are small.  The quadratic (two-variable)
conditions and the coefficient bounds of the example families are z-free
and are evaluated exactly.

Indices in condition labels are 1-based, matching z_1..z_n; the code itself
is 0-based.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDomain, ParamOutOfRange, ShapeMismatch
from .geometry import DomainSpec, contains, sample_interior
from .mappings import MappingSpec, derivatives
from .numerics import make_rng

PASS_TOL = 1e-12
NONVANISHING_FLOOR = 1e-10
# margin reported when a quotient in a condition is undefined (zero denominator)
UNDEFINED_MARGIN = -1.0
CHECK_BLOCK = 256
SMALL_SHELLS = (1e-1, 1e-2, 1e-3, 1e-4, 0.0)
AXIS_RADII = (0.05, 0.3, 0.6, 0.9, 0.99)


@dataclass
class ConditionMargin:
    condition_id: str
    margin: float
    witness_z: np.ndarray | None = None

    def to_dict(self) -> dict:
        wz = None
        if self.witness_z is not None:
            wz = [[float(c.real), float(c.imag)] for c in self.witness_z]
        return {"condition": self.condition_id, "margin": float(self.margin), "witness_z": wz}


@dataclass
class CheckReport:
    theorem: str
    passed: bool
    margins: list
    samples_used: int
    seed: int | None
    notes: dict = field(default_factory=dict)

    def margin(self, condition_id: str) -> float:
        for m in self.margins:
            if m.condition_id == condition_id:
                return m.margin
        raise KeyError(condition_id)

    def failed_conditions(self) -> list:
        return [m.condition_id for m in self.margins if m.margin < -PASS_TOL]


def _report(theorem, margins, samples_used, seed, notes=None) -> CheckReport:
    passed = all(m.margin >= -PASS_TOL for m in margins)
    return CheckReport(theorem, passed, margins, samples_used, seed, dict(notes or {}))


def _q(num, den):
    """|num / den|, or None when the quotient is undefined."""
    if den == 0:
        return None
    return abs(num / den)


# ---------------------------------------------------------------------------
# sample points


def probe_points(dom: DomainSpec, rng: np.random.Generator) -> list:
    """Deterministic-shape probes: coordinate axes and small-coordinate shells.

    Right-hand sides of the form p_j |z_j|^{p_j - 2} vanish as z_j -> 0 when
    p_j > 2, so violations tend to sit on these sets.
    """
    n = dom.n
    pts = []
    for j in range(n):
        for r in AXIS_RADII:
            for theta in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi):
                z = np.zeros(n, dtype=complex)
                z[j] = r * complex(math.cos(theta), math.sin(theta))
                pts.append(z)
    for j in range(n):
        for eps in SMALL_SHELLS:
            for _ in range(4):
                z = sample_interior(dom, rng, 0.2)
                phase = rng.uniform(0.0, 2.0 * math.pi)
                z[j] = eps * complex(math.cos(phase), math.sin(phase))
                if np.any(z != 0) and contains(dom, z):
                    pts.append(z)
    return pts


def _condition_sample(dom, rng, count):
    return [sample_interior(dom, rng, 0.0) for _ in range(count)]


def _run_checker(dom, spec, conditions, samples, seed, extra_points, threads):
    """Evaluate ``conditions(z, bundle) -> {id: margin}`` over all points.

    Points are produced in fixed-size blocks with generators derived from
    (seed, block index); the probes use block index -1.  Ties in the running
    minimum go to the earliest point, so the result is independent of
    ``threads``.
    """
    point_sets = [list(extra_points or []), probe_points(dom, make_rng(seed, 2**31 - 1))]
    nblocks = -(-samples // CHECK_BLOCK) if samples > 0 else 0
    counts = [min(CHECK_BLOCK, samples - b * CHECK_BLOCK) for b in range(nblocks)]

    def evaluate_set(points):
        best: dict = {}
        order: list = []
        for z in points:
            z = np.asarray(z, dtype=complex)
            res = conditions(z, derivatives(spec, z))
            for cid, m in res.items():
                if cid not in best:
                    order.append(cid)
                    best[cid] = (m, z)
                elif m < best[cid][0]:
                    best[cid] = (m, z)
        return best, order, len(points)

    def block_job(b):
        return evaluate_set(_condition_sample(dom, make_rng(seed, b), counts[b]))

    results = [evaluate_set(ps) for ps in point_sets]
    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=min(threads, nblocks)) as pool:
            results += list(pool.map(block_job, range(nblocks)))
    else:
        results += [block_job(b) for b in range(nblocks)]

    merged: dict = {}
    order: list = []
    used = 0
    for best, ids, cnt in results:
        used += cnt
        for cid in ids:
            m, z = best[cid]
            if cid not in merged:
                order.append(cid)
                merged[cid] = (m, z)
            elif m < merged[cid][0]:
                merged[cid] = (m, z)
    margins = [ConditionMargin(cid, float(merged[cid][0]), merged[cid][1]) for cid in sorted(order)]
    return margins, used


def _prepare(dom: DomainSpec, spec: MappingSpec):
    dom.require_theorem_exponents()
    if dom.n != spec.n:
        raise InvalidDomain(f"mapping has n={spec.n} but domain has n={dom.n}")


def _nonvanishing(values) -> float:
    prod = 1.0 + 0j
    for v in values:
        prod *= v
    return abs(prod) - NONVANISHING_FLOOR


# ---------------------------------------------------------------------------
# triangular mappings with two coupled leading components


def _theorem1_conditions(dom: DomainSpec):
    p = dom.p
    n = dom.n

    def conditions(z, bd):
        J, H = bd.jacobian, bd.hessian
        d11, d22 = J[0, 0], J[1, 1]
        out = {"T1.1a": _nonvanishing([d11, d22] + [J[j, j] for j in range(2, n)])}
        if n > 2:
            out["T1.1b"] = min(abs(J[j, j]) - abs(z[j] * H[j, j, j]) for j in range(2, n))
        out["T1.2a"] = abs(d11) - sum(abs(z[0] * H[0, 0, l]) for l in range(n))
        out["T1.2b"] = abs(d22) - sum(abs(z[1] * H[1, 1, l]) for l in range(1, n))
        if d11 == 0 or d22 == 0:
            out["T1.3"] = UNDEFINED_MARGIN
            if n > 2:
                out["T1.4"] = UNDEFINED_MARGIN
            return out
        c12 = abs(J[0, 1] / d22)
        rhs = (1.0 - sum(abs(z[1] * H[1, 1, l] / d22) for l in range(1, n))) \
            * p[1] * abs(z[1]) ** (p[1] - 2.0)
        lhs = p[0] * (sum(abs(H[0, 1, l] / d11) for l in range(n))
                      + sum(c12 * abs(H[1, 1, l] / d11) for l in range(1, n)))
        out["T1.3"] = rhs - lhs
        if n > 2:
            worst = math.inf
            for j in range(2, n):
                fj1, fj2 = J[j, j], H[j, j, j]
                if fj1 == 0:
                    worst = min(worst, UNDEFINED_MARGIN)
                    continue
                rj = abs(fj2 / fj1)
                lhs = p[0] * (sum(abs(H[0, j, l] / d11) for l in range(n))
                              + sum(c12 * abs(H[1, j, l] / d11) for l in range(1, n))
                              + abs(J[0, 1] / d11) * abs(J[1, j] / d22) * rj
                              + abs(J[0, j] / d11) * rj) \
                    + p[1] * (sum(abs(H[1, j, l] / d22) for l in range(1, n))
                              + abs(J[1, j] / d22) * rj)
                rhs = p[j] * abs(z[j]) ** (p[j] - 2.0) * (1.0 - abs(z[j]) * rj)
                worst = min(worst, rhs - lhs)
            out["T1.4"] = worst
        return out

    return conditions


def _check_shape_theorem1(spec):
    n = spec.n
    if n < 2:
        raise ShapeMismatch("the two-leading-component form needs n >= 2")
    deps = spec.dependence()
    if not deps[1] <= set(range(1, n)):
        raise ShapeMismatch("component 2 may depend only on z_2..z_n")
    for j in range(2, n):
        if deps[j] != {j}:
            raise ShapeMismatch(f"component {j + 1} must depend on z_{j + 1} alone")


def check_theorem1(dom: DomainSpec, spec: MappingSpec, samples: int = 1000, seed: int = 0,
                   extra_points=None, threads: int = 1) -> CheckReport:
    """Conditions (1)-(4) for f = (f_1(z_1..z_n), f_2(z_2..z_n), f_3(z_3), ..., f_n(z_n))."""
    _prepare(dom, spec)
    _check_shape_theorem1(spec)
    margins, used = _run_checker(dom, spec, _theorem1_conditions(dom), samples, seed,
                                 extra_points, threads)
    notes = {"T1.3_reading": "second sum is over l of "
                             "|(df1/dz2)/(df2/dz2)| * |(d2f2/dz2dzl)/(df1/dz1)|"}
    return _report("theorem1", margins, used, seed, notes)


# ---------------------------------------------------------------------------
# triangular mappings coupled through the last variable


def _theorem2_conditions(dom: DomainSpec):
    p = dom.p
    n = dom.n
    last = n - 1
    mids = range(1, last)

    def conditions(z, bd):
        J, H = bd.jacobian, bd.hessian
        d11, dn = J[0, 0], J[last, last]
        out = {"T2.1a": _nonvanishing([J[j, j] for j in range(last)] + [dn]),
               "T2.1b": abs(dn) - abs(z[last] * H[last, last, last]),
               "T2.2a": abs(d11) - sum(abs(z[0] * H[0, 0, l]) for l in range(n))}
        if last > 1:
            out["T2.2b"] = min(abs(J[j, j]) - abs(z[j] * H[j, j, j]) - abs(z[j] * H[j, j, last])
                               for j in mids)
        if d11 == 0 or dn == 0 or any(J[j, j] == 0 for j in mids):
            out["T2.4"] = UNDEFINED_MARGIN
            if last > 1:
                out["T2.3"] = UNDEFINED_MARGIN
            return out
        if last > 1:
            worst = math.inf
            for j in mids:
                dj = abs(J[j, j])
                curv = abs(H[j, j, j]) + abs(H[j, j, last])
                rhs = p[j] * abs(z[j]) ** (p[j] - 2.0) * (1.0 - abs(z[j]) * curv / dj)
                lhs = p[0] / abs(d11) * (abs(J[0, j]) * curv / dj
                                         + sum(abs(H[0, j, l]) for l in range(n)))
                worst = min(worst, rhs - lhs)
            out["T2.3"] = worst
        rn = abs(H[last, last, last] / dn)
        lhs = sum(p[j] / abs(J[j, j]) * (abs(H[j, j, last]) + abs(H[j, last, last])
                                         + abs(J[j, last]) * rn) for j in mids)
        lhs += p[0] / abs(d11) * (
            sum(abs(H[0, last, l]) for l in range(n))
            + sum(abs(J[0, j]) * (abs(H[j, j, last]) + abs(H[j, last, last])) / abs(J[j, j])
                  for j in mids)
            + abs(J[0, last]) * rn
            + sum(abs(J[0, j]) * abs(J[j, last] / J[j, j]) * rn for j in mids))
        rhs = p[last] * abs(z[last]) ** (p[last] - 2.0) * (1.0 - abs(z[last]) * rn)
        out["T2.4"] = rhs - lhs
        return out

    return conditions


def _check_shape_theorem2(spec):
    n = spec.n
    if n < 2:
        raise ShapeMismatch("the last-variable-coupled form needs n >= 2")
    deps = spec.dependence()
    last = n - 1
    for j in range(1, last):
        if not deps[j] <= {j, last}:
            raise ShapeMismatch(f"component {j + 1} may depend only on z_{j + 1} and z_{n}")
    if deps[last] != {last}:
        raise ShapeMismatch(f"component {n} must depend on z_{n} alone")


def check_theorem2(dom: DomainSpec, spec: MappingSpec, samples: int = 1000, seed: int = 0,
                   extra_points=None, threads: int = 1) -> CheckReport:
    """Conditions (1)-(4) for f = (p_1(z_1..z_n), p_2(z_2, z_n), ..., p_{n-1}(z_{n-1}, z_n), p_n(z_n))."""
    _prepare(dom, spec)
    _check_shape_theorem2(spec)
    margins, used = _run_checker(dom, spec, _theorem2_conditions(dom), samples, seed,
                                 extra_points, threads)
    return _report("theorem2", margins, used, seed)


# ---------------------------------------------------------------------------
# mappings coupled through a single variable z_k


def _theorem3_conditions(dom: DomainSpec, kk: int):
    p = dom.p
    n = dom.n
    others = [j for j in range(1, n) if j != kk]

    def conditions(z, bd):
        J, H = bd.jacobian, bd.hessian
        d11 = J[0, 0]
        out = {"T3.1a": _nonvanishing([d11] + [J[j, j] for j in range(1, n)]),
               "T3.1b": min(abs(J[j, j]) - abs(z[j] * H[j, j, j]) for j in range(1, n)),
               "T3.2": abs(d11) - sum(abs(z[0] * H[0, 0, l]) for l in range(n))}
        if d11 == 0 or any(J[j, j] == 0 for j in range(1, n)):
            out["T3.4"] = UNDEFINED_MARGIN
            if others:
                out["T3.3"] = UNDEFINED_MARGIN
            return out
        if others:
            worst = math.inf
            for j in others:
                rj = abs(H[j, j, j] / J[j, j])
                lhs = p[0] * abs(J[0, j] / d11) * rj \
                    + p[0] * sum(abs(H[0, j, l] / d11) for l in range(n))
                rhs = p[j] * abs(z[j]) ** (p[j] - 2.0) * (1.0 - abs(z[j]) * rj)
                worst = min(worst, rhs - lhs)
            out["T3.3"] = worst
        rk = abs(H[kk, kk, kk] / J[kk, kk])
        lhs = 0.0
        for j in others:
            g1 = abs(J[j, kk] / J[j, j])       # |f_j'(z_k) / p_j'(z_j)|
            g2 = abs(H[j, kk, kk] / J[j, j])   # |f_j''(z_k) / p_j'(z_j)|
            c1 = abs(J[0, j] / d11)
            lhs += g2 * p[j] + g1 * rk * p[j] + g2 * c1 * p[0] + g1 * rk * c1 * p[0]
        lhs += sum(abs(H[0, l, kk] / d11) for l in range(n)) * p[0]
        lhs += rk * abs(J[0, kk] / d11) * p[0]
        rhs = (1.0 - abs(z[kk]) * rk) * p[kk] * abs(z[kk]) ** (p[kk] - 2.0)
        out["T3.4"] = rhs - lhs
        return out

    return conditions


def _check_shape_theorem3(spec, k):
    n = spec.n
    if n < 2:
        raise ShapeMismatch("the single-variable-coupled form needs n >= 2")
    if int(k) != k or not 2 <= k <= n:
        raise ShapeMismatch(f"k must be an integer with 2 <= k <= n, got {k}")
    kk = k - 1
    if spec.dependence()[kk] != {kk}:
        raise ShapeMismatch(f"component {k} must depend on z_{k} alone")
    for j, comp in enumerate(spec.compiled):
        if j in (0, kk):
            continue
        for t in comp.terms:
            vars_ = {v for v, _ in t.support()}
            if not (vars_ <= {j} or vars_ <= {kk}):
                raise ShapeMismatch(
                    f"component {j + 1} must split as p_{j + 1}(z_{j + 1}) + f_{j + 1}(z_{k})")


def check_theorem3(dom: DomainSpec, spec: MappingSpec, k: int, samples: int = 1000, seed: int = 0,
                   extra_points=None, threads: int = 1) -> CheckReport:
    """Conditions (1)-(4) for f = (p_1(z), p_j(z_j) + f_j(z_k) for j != 1, k, p_k(z_k)).

    Condition (3) is also imposed for j = n when k < n; without it the
    coefficient of |b_n|^2 would be left unconstrained.
    """
    _prepare(dom, spec)
    _check_shape_theorem3(spec, k)
    margins, used = _run_checker(dom, spec, _theorem3_conditions(dom, k - 1), samples, seed,
                                 extra_points, threads)
    return _report("theorem3", margins, used, seed, {"k": int(k)})


# ---------------------------------------------------------------------------
# quadratic maps of two variables


def theorem4_sums(a1, a2, a1p, a2p) -> tuple:
    """Left-hand sides of the two coefficient inequalities."""
    A1, A2, B1, B2 = abs(a1), abs(a2), abs(a1p), abs(a2p)
    lhs4 = 4 * A1 + 2 * B2 + 8 * A1 * B2 + 2 * A2 + 4 * A1 * A2 + 8 * B1 * A2 + 4 * A1 * A2
    lhs5 = 2 * A1 + 2 * B1 + 4 * B1 * B2 + 4 * B2 + 8 * A1 * B2 + 4 * B1 * B2 + 8 * B1 * A2
    return lhs4, lhs5


def check_theorem4(spec: MappingSpec, dom: DomainSpec | None = None) -> CheckReport:
    """Coefficient conditions for f = (z_1 + a_1 z_1^2 + a'_1 z_2^2, a_2 z_1^2 + z_2 + a'_2 z_2^2)."""
    if spec.family != "Theorem4Quadratic":
        raise ShapeMismatch(f"expected a Theorem4Quadratic mapping, got {spec.family}")
    if dom is not None:
        dom.require_theorem_exponents()
        if dom.n != 2 or dom.p[0] != dom.p[1]:
            raise InvalidDomain("the quadratic conditions require equal exponents")
    (a1, a2), (a1p, a2p) = spec.a, spec.a_prime
    lhs4, lhs5 = theorem4_sums(a1, a2, a1p, a2p)
    margins = [ConditionMargin("T4.4", 1.0 - lhs4), ConditionMargin("T4.5", 1.0 - lhs5)]
    return _report("theorem4", margins, 0, None, {"lhs4": lhs4, "lhs5": lhs5})


# ---------------------------------------------------------------------------
# coefficient validators for the example families


@dataclass(frozen=True)
class ExampleParams:
    n: int
    p: tuple
    k: int
    a: tuple
    lam: complex = 0j

    @classmethod
    def from_spec(cls, dom: DomainSpec, spec: MappingSpec) -> "ExampleParams":
        return cls(spec.n, dom.p, spec.k, spec.a, spec.lam)


def _common_checks(params: ExampleParams, which: int):
    n, p, k = params.n, tuple(float(v) for v in params.p), params.k
    if n < 2 or len(p) != n or len(params.a) != n:
        raise ParamOutOfRange(f"example {which}: need n >= 2 with n exponents and n coefficients")
    if p[0] < 2 or any(pj < p[0] for pj in p[1:]):
        raise ParamOutOfRange(f"example {which}: exponents must satisfy p_j >= p_1 >= 2, got {p}")
    if int(k) != k or k < 1:
        raise ParamOutOfRange(f"example {which}: k must be a positive integer, got {k}")
    if not k < max(p) <= k + 1:
        raise ParamOutOfRange(f"example {which}: need k < max p_j <= k + 1 (k={k}, max p={max(p)})")
    return n, p, int(k), [abs(complex(c)) for c in params.a]


def _lam_check(params, which):
    lam = abs(complex(params.lam))
    if not 0 < lam <= 1:
        raise ParamOutOfRange(f"example {which}: need 0 < |lambda| <= 1, got {params.lam}")
    return lam


def _guard(den: float) -> bool:
    return den > 0


def _triangular_bound_margins(tag, p, k, A, bound, rhs_of_j):
    """Shared margin layout of the first two examples."""
    a = max(A)
    margins = [ConditionMargin(f"{tag}.a", bound - a)]
    if len(A) > 2:
        worst = math.inf
        for j in range(2, len(A)):
            rhs = rhs_of_j(j)
            if not _guard(1 - 2 * a) or rhs is None:
                worst = min(worst, UNDEFINED_MARGIN)
                continue
            lhs = ((p[0] + p[1]) / (1 - 2 * a) + p[0] * (k + 1) * a / (1 - 2 * a) ** 2) * A[j]
            worst = min(worst, rhs - lhs)
        margins.append(ConditionMargin(f"{tag}.b", worst))
    return margins


def validate_example1(params: ExampleParams) -> CheckReport:
    """a <= (1-|lam|)/((k+1)^2+4) and the per-j bound for j = 3..n."""
    n, p, k, A = _common_checks(params, 1)
    lam = _lam_check(params, 1)
    bound = (1 - lam) / ((k + 1) ** 2 + 4)
    margins = _triangular_bound_margins(
        "E1", p, k, A, bound, lambda j: p[j] * (1 - lam) / ((k + 1) * (k + lam)))
    return _report("example1", margins, 0, None, {"a_bound": bound})


def validate_example2(params: ExampleParams) -> CheckReport:
    """a <= 1/((k+1)^2+4) and the per-j bound with mu_j = 2|a_j|/(1-2|a_j|)."""
    n, p, k, A = _common_checks(params, 2)
    bound = 1 / ((k + 1) ** 2 + 4)

    def rhs(j):
        if not _guard(1 - 2 * A[j]):
            return None
        mu = 2 * A[j] / (1 - 2 * A[j])
        return p[j] * (1 - mu) / ((k + 1) * (k + mu))

    margins = _triangular_bound_margins("E2", p, k, A, bound, rhs)
    return _report("example2", margins, 0, None, {"a_bound": bound})


def _last_coupled_margins(tag, p, k, A, t, plus_t_in_denominator):
    """Shared margins of the last-variable-coupled examples; ``t`` plays |lambda|."""
    n = len(A)
    a = max(A[1:])
    tail = 1 + t if plus_t_in_denominator else 1 - t
    bound = (1 - t) / (2 * (k + 1) ** 2 * (k + 1 + t) + tail)
    margins = [ConditionMargin(f"{tag}.a", bound - a)]
    mids = range(1, n - 1)
    if a >= 1 or any(A[j] >= 1 for j in mids):
        margins.append(ConditionMargin(f"{tag}.b", UNDEFINED_MARGIN))
        return margins, bound
    s_p = sum(p[j] * A[j] / (1 - A[j]) for j in mids)
    s_1 = sum(A[j] / (1 - A[j]) for j in mids)
    lhs = s_p + a * p[0] / (1 - a) * (1 + (k + 1) * s_1)
    rhs = p[n - 1] * (1 - t) / ((k + 1) * (k + 1 + t))
    margins.append(ConditionMargin(f"{tag}.b", rhs - lhs))
    return margins, bound


def validate_example3(params: ExampleParams) -> CheckReport:
    """Bounds with the stricter denominator 2(k+1)^2(k+1+|lam|) + 1 + |lam|."""
    n, p, k, A = _common_checks(params, 3)
    lam = _lam_check(params, 3)
    margins, bound = _last_coupled_margins("E3", p, k, A, lam, True)
    return _report("example3", margins, 0, None, {"a_bound": bound})


def validate_example4(params: ExampleParams) -> CheckReport:
    """Example-3 bounds with |lam| replaced by 2|a_n|/(1-2|a_n|)."""
    n, p, k, A = _common_checks(params, 4)
    an = A[n - 1]
    if not 0 < an <= 0.25:
        raise ParamOutOfRange(f"example 4: need 0 < |a_n| <= 1/4, got {an}")
    mu = 2 * an / (1 - 2 * an)
    margins, bound = _last_coupled_margins("E4", p, k, A, mu, False)
    return _report("example4", margins, 0, None, {"a_bound": bound, "substitute": mu})


VALIDATORS = {1: validate_example1, 2: validate_example2, 3: validate_example3, 4: validate_example4}
EXAMPLE_FAMILY = {1: "Example1", 2: "Example2", 3: "Example3", 4: "Example4"}


def validate_example(which: int, params: ExampleParams) -> CheckReport:
    if which not in VALIDATORS:
        raise ParamOutOfRange(f"unknown example {which}")
    return VALIDATORS[which](params)
