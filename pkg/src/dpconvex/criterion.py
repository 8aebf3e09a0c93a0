"""Convexity criterion on D_p^n: tangency constraint and the quadratic form J_f(z, b).

For z in D_p^n \\ {0} and b in the real hyperplane

    Re sum_j p_j |z_j/rho|^{p_j} b_j / z_j = 0,

a normalised locally biholomorphic f is convex iff J_f(z, b) >= 0, where

    J_f(z, b) = Re{ sum_j p_j^2/2 |z_j|^{p_j-2} / rho^{p_j} |b_j|^2
                  + sum_j p_j (p_j/2 - 1) |z_j/rho|^{p_j} (b_j/z_j)^2
                  - 2 sum_j p_j/rho |z_j/rho|^{p_j} <Df^{-1} D^2f(b, b), d rho/d conj(z)> }.

Sampling here gives evidence only; a single admissible (z, b) with J < 0 is a
genuine counterexample, but no finite scan proves J >= 0 everywhere.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (AllSamplesSingular, DegenerateConstraint, InvalidDomain, SingularJacobian,
                     SingularMatrix, ZeroPoint)
from .geometry import DomainSpec, contains, minkowski, rho_bar_gradient, sample_interior
from .mappings import MappingSpec, derivatives, hessian_action
from .numerics import as_complex_vector, hermitian_inner, make_rng, solve_linear

SCAN_BLOCK = 256
EVIDENCE_NOTE = ("sampling is evidence, not proof: only an admissible witness with J < 0 "
                 "establishes a violation")


@dataclass(frozen=True)
class TangentConstraint:
    """Real-linear functional L(b) = Re sum_j c_j b_j anchored at ``at``."""

    c: np.ndarray
    at: np.ndarray
    rho: float

    def functional(self, b) -> float:
        return float(np.real(np.sum(self.c * np.asarray(b, dtype=complex))))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.c))


@dataclass
class CriterionEvaluation:
    z: np.ndarray
    b: np.ndarray
    j_value: float
    constraint_residual: float
    rho: float

    def to_dict(self) -> dict:
        return {
            "z": [[float(c.real), float(c.imag)] for c in self.z],
            "b": [[float(c.real), float(c.imag)] for c in self.b],
            "j_value": float(self.j_value),
            "residual": float(self.constraint_residual),
            "rho": float(self.rho),
        }


def tangency(dom: DomainSpec, z, rho_value: float | None = None) -> TangentConstraint:
    """c_j = p_j |z_j/rho|^{p_j} / z_j, with c_j = 0 where z_j = 0."""
    v = as_complex_vector(z, dom.n)
    r = minkowski(dom, v).rho if rho_value is None else rho_value
    if r == 0.0:
        raise ZeroPoint("the tangency constraint is undefined at z = 0")
    # |z|^p / z = |z|^{p-2} conj(z)
    c = [pj * abs(zj) ** (pj - 2.0) * zj.conjugate() / r ** pj if zj != 0 else 0j
         for zj, pj in zip(v.tolist(), dom.p)]
    return TangentConstraint(np.array(c, dtype=complex), v, r)


def project_tangent(tc: TangentConstraint, b_raw) -> np.ndarray:
    """Orthogonal projection (real inner product on C^n = R^2n) onto {L(b) = 0}."""
    b = as_complex_vector(b_raw, tc.c.size)
    cc = float(np.sum(np.abs(tc.c) ** 2))
    if cc < 1e-28:
        raise DegenerateConstraint("constraint normal vanishes")
    return b - (tc.functional(b) / cc) * np.conj(tc.c)


def evaluate_J(dom: DomainSpec, spec: MappingSpec, z, b) -> CriterionEvaluation:
    """J_f(z, b) together with the (normalised) tangency residual L(b)/|c|.

    Removable forms at z_j = 0 use their continuous extensions: the first sum
    keeps |z_j|^0 = 1 when p_j = 2, the second and third sums drop index j.
    """
    dom.require_theorem_exponents()
    if spec.n != dom.n:
        raise InvalidDomain(f"mapping has n={spec.n} but domain has n={dom.n}")
    zv = as_complex_vector(z, dom.n)
    bv = as_complex_vector(b, dom.n)
    if not contains(dom, zv):
        raise InvalidDomain("z must lie inside the domain")
    tc = tangency(dom, zv)
    r = tc.rho
    zs, bs = zv.tolist(), bv.tolist()
    first = second = 0.0
    weight = 0.0
    for zj, bj, pj in zip(zs, bs, dom.p):
        az = abs(zj)
        first += pj * pj / 2.0 * az ** (pj - 2.0) / r ** pj * abs(bj) ** 2
        if az > 0.0:
            ratio_p = (az / r) ** pj
            q = bj / zj
            second += pj * (pj / 2.0 - 1.0) * ratio_p * (q * q).real
            weight += pj * ratio_p
    weight /= r

    bundle = derivatives(spec, zv)
    try:
        w = solve_linear(bundle.jacobian, hessian_action(bundle, bv))
    except SingularMatrix as exc:
        raise SingularJacobian(str(exc)) from exc
    grad = rho_bar_gradient(dom, zv, r)
    third = -2.0 * weight * hermitian_inner(w, grad).real

    residual = tc.functional(bv) / tc.norm
    return CriterionEvaluation(zv, bv, first + second + third, residual, r)


@dataclass
class ScanReport:
    samples: int
    evaluated: int
    singular: int
    min_j: float
    witness: CriterionEvaluation | None
    count_below: int
    seed: int
    rho_floor: float
    tol: float
    worst: list = field(default_factory=list)
    note: str = EVIDENCE_NOTE

    @property
    def violation(self) -> bool:
        return self.min_j < -self.tol


def draw_admissible(dom: DomainSpec, rng: np.random.Generator, rho_floor: float):
    """Interior z and a unit-norm direction b on its tangency hyperplane."""
    z = sample_interior(dom, rng, rho_floor)
    parts = rng.standard_normal(2 * dom.n)
    b = project_tangent(tangency(dom, z), parts[:dom.n] + 1j * parts[dom.n:])
    return z, b / np.linalg.norm(b)


def _scan_block(dom, spec, seed, block, count, rho_floor, tol, keep):
    rng = make_rng(seed, block)
    results = []
    singular = below = 0
    for i in range(count):
        z, b = draw_admissible(dom, rng, rho_floor)
        try:
            ev = evaluate_J(dom, spec, z, b)
        except SingularJacobian:
            singular += 1
            continue
        if ev.j_value < -tol:
            below += 1
        results.append((ev.j_value, block * SCAN_BLOCK + i, ev))
    results.sort(key=lambda item: (item[0], item[1]))
    return results[:keep], singular, below, len(results)


def scan(dom: DomainSpec, spec: MappingSpec, samples: int = 10_000, seed: int = 42,
         rho_floor: float = 0.3, tol: float = 1e-8, threads: int = 1, keep: int = 10) -> ScanReport:
    """Monte-Carlo minimum of J over admissible (z, b) with ||b|| = 1.

    Samples are drawn in fixed blocks, each with its own generator derived
    from (seed, block index), so the report does not depend on ``threads``.
    """
    dom.require_theorem_exponents()
    if samples < 1:
        raise ValueError("samples must be positive")
    nblocks = -(-samples // SCAN_BLOCK)
    jobs = [(b, min(SCAN_BLOCK, samples - b * SCAN_BLOCK)) for b in range(nblocks)]
    run = lambda job: _scan_block(dom, spec, seed, job[0], job[1], rho_floor, tol, keep)
    if threads > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=min(threads, nblocks)) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(job) for job in jobs]

    best = []
    singular = below = evaluated = 0
    for res, s, bl, ev in parts:
        best.extend(res)
        singular += s
        below += bl
        evaluated += ev
    if evaluated == 0:
        raise AllSamplesSingular(f"all {samples} draws hit a singular Jacobian")
    best.sort(key=lambda item: (item[0], item[1]))
    worst = [ev for _, _, ev in best[:keep]]
    return ScanReport(samples, evaluated, singular, worst[0].j_value, worst[0], below,
                      int(seed), float(rho_floor), float(tol), worst)
