"""Holomorphic mapping families normalised by f(0) = 0, Df(0) = I.

Every family compiles to the same internal form: component i is a *lead*
atom in z_i (either z_i itself or the scaled exponential (e^{lam z_i} - 1)/lam)
plus a sparse sum of monomials c * z^alpha of total degree >= 2.  Exact first
and second derivatives follow from that form, and the normalisation holds by
construction.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, InvalidMapping, StepTooLarge
from .geometry import minkowski
from .numerics import as_complex_vector

FAMILIES = (
    "Identity",
    "Example1",
    "Example2",
    "Example3",
    "Example4",
    "Theorem4Quadratic",
    "CustomTriangular",
    "Custom",
)
MAX_DEGREE = 8
FD_STEP = 1e-5
FD_HESS_STEP = 1e-3


@dataclass(frozen=True)
class Term:
    """Monomial ``coeff * prod_v z_v^{powers[v]}`` contributing to one component."""

    coeff: complex
    powers: tuple

    def support(self):
        return [(v, e) for v, e in enumerate(self.powers) if e > 0]


@dataclass(frozen=True)
class Component:
    """Lead atom (``lead_lambda`` None means identity) plus nonlinear terms."""

    terms: tuple = ()
    lead_lambda: complex | None = None


@dataclass(frozen=True)
class MappingSpec:
    """Tagged mapping family with its coefficients.

    ``a`` holds a_1..a_n (a_1 is unused by Example3/Example4), ``a_prime``
    holds (a'_1, a'_2) for Theorem4Quadratic, ``lam`` is the exponential
    parameter and ``k`` the monomial degree parameter.  Custom families carry
    explicit ``components``.
    """

    family: str
    n: int
    a: tuple = ()
    a_prime: tuple = ()
    lam: complex = 0j
    k: int = 1
    components: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(complex(c) for c in self.a))
        object.__setattr__(self, "a_prime", tuple(complex(c) for c in self.a_prime))
        object.__setattr__(self, "lam", complex(self.lam))
        if self.family not in FAMILIES:
            raise InvalidMapping(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidMapping(f"n must be a positive integer, got {self.n!r}")
        _compile(self)  # validates eagerly

    # convenience constructors -------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "MappingSpec":
        return cls("Identity", n)

    @classmethod
    def theorem4(cls, a1, a2, a1p, a2p) -> "MappingSpec":
        return cls("Theorem4Quadratic", 2, a=(a1, a2), a_prime=(a1p, a2p))

    @classmethod
    def custom(cls, components, triangular: bool = True) -> "MappingSpec":
        """Build from ``[(lead_lambda, [(coeff, powers), ...]), ...]``."""
        comps = tuple(
            Component(tuple(Term(complex(c), tuple(int(e) for e in pw)) for c, pw in terms),
                      None if lead is None else complex(lead))
            for lead, terms in components)
        return cls("CustomTriangular" if triangular else "Custom", len(comps), components=comps)

    @property
    def compiled(self) -> tuple:
        return _compile(self)

    def dependence(self) -> list:
        """Set of variable indices each component depends on."""
        deps = []
        for i, comp in enumerate(self.compiled):
            d = {i}
            for t in comp.terms:
                d.update(v for v, _ in t.support())
            deps.append(d)
        return deps


@dataclass
class DerivativeBundle:
    """f(z), Df(z), and hessian[i, j, l] = d^2 f_i / dz_j dz_l."""

    value: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray


def _powers(n, *pairs):
    pw = [0] * n
    for v, e in pairs:
        pw[v] += e
    return tuple(pw)


def _require_coeffs(spec, count, name="a"):
    got = len(getattr(spec, name))
    if got != count:
        raise InvalidMapping(f"{spec.family} needs {count} values in {name!r}, got {got}")


def _require_k(spec):
    if int(spec.k) != spec.k or spec.k < 1 or spec.k + 1 > MAX_DEGREE:
        raise InvalidMapping(f"k must be an integer in [1, {MAX_DEGREE - 1}], got {spec.k!r}")


def _require_lam(lam):
    if lam == 0 or abs(lam) > 1.0:
        raise InvalidMapping(f"exponential parameter must satisfy 0 < |lambda| <= 1, got {lam}")


@lru_cache(maxsize=256)
def _compile(spec: MappingSpec) -> tuple:
    n, fam = spec.n, spec.family
    a = spec.a
    comps: list[list[Term]] = [[] for _ in range(n)]
    leads: list = [None] * n

    if fam == "Identity":
        pass
    elif fam in ("Example1", "Example2"):
        if n < 2:
            raise InvalidMapping(f"{fam} needs n >= 2")
        _require_coeffs(spec, n)
        _require_k(spec)
        k = spec.k
        comps[0].append(Term(a[0], _powers(n, (0, 2))))
        comps[0] += [Term(a[j], _powers(n, (j, k + 1))) for j in range(1, n)]
        comps[1].append(Term(a[1], _powers(n, (1, 2))))
        if fam == "Example1":
            _require_lam(spec.lam)
            comps[1] += [Term(a[j], _powers(n, (j, k + 1))) for j in range(2, n)]
            for j in range(2, n):
                leads[j] = spec.lam
        else:
            # the inner sum pairs each a_j with z_j^2
            comps[1] += [Term(a[j], _powers(n, (j, 2))) for j in range(2, n)]
            for j in range(2, n):
                comps[j].append(Term(a[j], _powers(n, (j, 2))))
    elif fam in ("Example3", "Example4"):
        if n < 2:
            raise InvalidMapping(f"{fam} needs n >= 2")
        _require_coeffs(spec, n)
        _require_k(spec)
        k, last = spec.k, n - 1
        comps[0] += [Term(a[j], _powers(n, (j, k + 1))) for j in range(1, last)]
        comps[0].append(Term(a[last], _powers(n, (0, 1), (last, k + 1))))
        for j in range(1, last):
            # component j carries a_j z_j z_n^{k+1} in both families
            comps[j].append(Term(a[j], _powers(n, (j, 1), (last, k + 1))))
        if fam == "Example3":
            _require_lam(spec.lam)
            leads[last] = spec.lam
        else:
            comps[last].append(Term(a[last], _powers(n, (last, 2))))
    elif fam == "Theorem4Quadratic":
        if n != 2:
            raise InvalidMapping("Theorem4Quadratic is defined for n = 2 only")
        _require_coeffs(spec, 2)
        _require_coeffs(spec, 2, "a_prime")
        (a1, a2), (a1p, a2p) = a, spec.a_prime
        comps[0] += [Term(a1, (2, 0)), Term(a1p, (0, 2))]
        comps[1] += [Term(a2, (2, 0)), Term(a2p, (0, 2))]
    else:
        if len(spec.components) != n:
            raise InvalidMapping(f"{fam} needs {n} components, got {len(spec.components)}")
        for i, comp in enumerate(spec.components):
            if comp.lead_lambda is not None and comp.lead_lambda != 0:
                _require_lam(comp.lead_lambda)
                leads[i] = comp.lead_lambda
            for t in comp.terms:
                if len(t.powers) != n or any(e < 0 or e > MAX_DEGREE for e in t.powers):
                    raise InvalidMapping(
                        f"component {i + 1}: exponents must be {n} integers in [0, {MAX_DEGREE}]")
                if sum(t.powers) < 2:
                    raise InvalidMapping(
                        f"component {i + 1}: terms must have total degree >= 2 "
                        "so that f(0) = 0 and Df(0) = I")
                if fam == "CustomTriangular" and any(t.powers[:i]):
                    raise InvalidMapping(
                        f"component {i + 1} may depend only on z_{i + 1}..z_{n}")
                comps[i].append(t)

    return tuple(Component(tuple(t for t in ts if t.coeff != 0), lead)
                 for ts, lead in zip(comps, leads))


def _scaled_exp(lam: complex, x: complex):
    """(e^{lam x} - 1)/lam with its first two derivatives."""
    e = cmath.exp(lam * x)
    lx = lam * x
    if abs(lx) < 1e-5:
        val = x * (1 + lx / 2 + lx * lx / 6)
    else:
        val = (e - 1) / lam
    return val, e, lam * e


def evaluate(spec: MappingSpec, z) -> np.ndarray:
    """f(z) in closed form."""
    zs = as_complex_vector(z, spec.n).tolist()
    out = []
    for i, comp in enumerate(spec.compiled):
        if comp.lead_lambda is None:
            acc = zs[i]
        else:
            acc = _scaled_exp(comp.lead_lambda, zs[i])[0]
        for t in comp.terms:
            val = t.coeff
            for v, e in t.support():
                val *= zs[v] ** e
            acc += val
        out.append(acc)
    return np.array(out, dtype=complex)


def derivatives(spec: MappingSpec, z) -> DerivativeBundle:
    """Closed-form value, Jacobian and second-derivative tensor at z."""
    n = spec.n
    zs = as_complex_vector(z, n).tolist()
    value = [0j] * n
    jac = np.zeros((n, n), dtype=complex)
    hess = np.zeros((n, n, n), dtype=complex)
    for i, comp in enumerate(spec.compiled):
        if comp.lead_lambda is None:
            value[i] = zs[i]
            jac[i, i] = 1.0
        else:
            v0, v1, v2 = _scaled_exp(comp.lead_lambda, zs[i])
            value[i] = v0
            jac[i, i] = v1
            hess[i, i, i] = v2
        for t in comp.terms:
            supp = t.support()
            pw = [zs[v] ** e for v, e in supp]
            d1 = [e * zs[v] ** (e - 1) for v, e in supp]
            d2 = [e * (e - 1) * zs[v] ** (e - 2) if e >= 2 else 0j for v, e in supp]
            c = t.coeff
            full = c
            for x in pw:
                full *= x
            value[i] += full
            for a_idx, (u, _) in enumerate(supp):
                rest = c
                for b_idx, x in enumerate(pw):
                    if b_idx != a_idx:
                        rest *= x
                jac[i, u] += rest * d1[a_idx]
                hess[i, u, u] += rest * d2[a_idx]
                for b_idx in range(a_idx + 1, len(supp)):
                    w = supp[b_idx][0]
                    rest2 = c * d1[a_idx] * d1[b_idx]
                    for c_idx, x in enumerate(pw):
                        if c_idx != a_idx and c_idx != b_idx:
                            rest2 *= x
                    hess[i, u, w] += rest2
                    hess[i, w, u] += rest2
    return DerivativeBundle(np.array(value, dtype=complex), jac, hess)


def hessian_action(bundle: DerivativeBundle, b) -> np.ndarray:
    """D^2 f(z)(b, b): component i is sum_{j,l} hessian[i, j, l] b_j b_l."""
    n = bundle.jacobian.shape[0]
    bv = np.asarray(b, dtype=complex).reshape(-1)
    if bv.size != n:
        raise DimensionMismatch(f"direction has length {bv.size}, expected {n}")
    return bundle.hessian @ bv @ bv


def derivatives_fd(spec: MappingSpec, z, h: float = FD_STEP, hess_step: float = FD_HESS_STEP,
                   dom=None) -> DerivativeBundle:
    """Finite-difference oracle built only from ``evaluate``.

    Df uses central differences with step h * max(1, |z_k|).  The second
    tensor uses the holomorphic four-point stencil
    g''(0) ~ [g(s) + g(-s) - g(is) - g(-is)] / (2 s^2) along e_j and, for mixed
    entries, along e_j +- e_l (polarisation).  When ``dom`` is given, the
    stencil must stay inside it.
    """
    if h <= 0 or hess_step <= 0:
        raise ValueError("steps must be positive")
    n = spec.n
    zv = as_complex_vector(z, n)
    scale = max(1.0, float(np.max(np.abs(zv))))
    hs, ss = h * scale, hess_step * scale
    if dom is not None:
        margin = 1.0 - minkowski(dom, zv).rho
        if 2.0 * max(hs, ss) >= margin:
            raise StepTooLarge(
                f"stencil reach {2.0 * max(hs, ss):.3e} exceeds distance to boundary {margin:.3e}")

    f = lambda x: evaluate(spec, x)
    eye = np.eye(n, dtype=complex)
    jac = np.empty((n, n), dtype=complex)
    for k in range(n):
        jac[:, k] = (f(zv + hs * eye[k]) - f(zv - hs * eye[k])) / (2.0 * hs)

    def second(direction):
        d = direction * ss
        return (f(zv + d) + f(zv - d) - f(zv + 1j * d) - f(zv - 1j * d)) / (2.0 * ss * ss)

    hess = np.empty((n, n, n), dtype=complex)
    for j in range(n):
        hess[:, j, j] = second(eye[j])
        for l in range(j + 1, n):
            mixed = (second(eye[j] + eye[l]) - second(eye[j] - eye[l])) / 4.0
            hess[:, j, l] = mixed
            hess[:, l, j] = mixed
    return DerivativeBundle(f(zv), jac, hess)
