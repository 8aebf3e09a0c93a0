import numpy as np
import pytest
from hypothesis import given, strategies as st

from dpconvex import hypotheses as H
from dpconvex.criterion import evaluate_J, scan
from dpconvex.errors import InvalidDomain, ParamOutOfRange, ShapeMismatch
from dpconvex.geometry import DomainSpec
from dpconvex.mappings import MappingSpec

P233 = DomainSpec(3, (2, 3, 3))


def example1(a, lam=0.5, k=2, n=3):
    return MappingSpec("Example1", n, a=(a,) * n, lam=lam, k=k)


def params(dom, spec):
    return H.ExampleParams.from_spec(dom, spec)


# --- checkers -----------------------------------------------------------------


def test_identity_passes_every_checker():
    ident = MappingSpec.identity(3)
    for rep in (H.check_theorem1(P233, ident, 200), H.check_theorem2(P233, ident, 200),
                H.check_theorem3(P233, ident, 2, 200), H.check_theorem3(P233, ident, 3, 200)):
        assert rep.passed, rep.failed_conditions()
    assert [m.condition_id for m in H.check_theorem1(P233, ident, 10).margins] == \
        ["T1.1a", "T1.1b", "T1.2a", "T1.2b", "T1.3", "T1.4"]


def test_example1_instance_passes_theorem1():
    rep = H.check_theorem1(P233, example1(0.03), samples=1000, seed=1)
    assert rep.passed and rep.samples_used >= 1000
    for m in rep.margins:
        assert np.isfinite(m.margin)
        assert m.witness_z is not None and np.sum(np.abs(m.witness_z) ** np.array(P233.p)) < 1


def test_large_coefficients_fail_theorem1():
    rep = H.check_theorem1(P233, example1(0.3), samples=1000, seed=1)
    assert not rep.passed
    assert min(rep.margin("T1.2a"), rep.margin("T1.3")) < 0


def test_example3_instance_passes_theorem2_and_large_a2_fails():
    spec = MappingSpec("Example3", 3, a=(0, 0.003, 0.003), lam=0.5, k=2)
    assert H.validate_example3(params(P233, spec)).passed
    assert H.check_theorem2(P233, spec, 1000, 2).passed
    bad = MappingSpec("Example3", 3, a=(0, 0.5, 0.003), lam=0.5, k=2)
    assert not H.check_theorem2(P233, bad, 1000, 2).passed


def _separable(c):
    """(z1 + 0.02 z2^3 + 0.01 z1 z3^2, z2 + 0.03 z2^2 + c z3^3, (e^{0.5 z3} - 1)/0.5)."""
    return MappingSpec.custom([
        (None, [(0.02, (0, 3, 0)), (0.01, (1, 0, 2))]),
        (None, [(0.03, (0, 2, 0)), (c, (0, 0, 3))]),
        (0.5, [])])


@pytest.mark.parametrize("c", [0.0, 0.005, 0.05, 0.5])
def test_theorem3_with_k_equal_n_agrees_with_theorem2(c):
    spec = _separable(c)
    t2 = H.check_theorem2(P233, spec, 500, 3)
    t3 = H.check_theorem3(P233, spec, 3, 500, 3)
    assert t2.passed == t3.passed


def test_theorem3_strong_coupling_fails_condition4():
    # component 3 couples to the earlier variable z_2, so the map is not triangular
    spec = MappingSpec.custom([(None, []), (None, []), (None, [(0.5, (0, 2, 0))])],
                              triangular=False)
    rep = H.check_theorem3(P233, spec, 2, 500, 4)
    assert not rep.passed and rep.margin("T3.4") < 0


def test_shape_mismatch():
    ex1_n4 = example1(0.01, n=4)
    with pytest.raises(ShapeMismatch):
        H.check_theorem2(DomainSpec(4, (2, 3, 3, 3)), ex1_n4)
    ex3 = MappingSpec("Example3", 3, a=(0, 0.01, 0.01), lam=0.5, k=2)
    with pytest.raises(ShapeMismatch):
        H.check_theorem3(P233, ex3, 3)
    with pytest.raises(ShapeMismatch):
        H.check_theorem3(P233, MappingSpec.identity(3), 1)
    with pytest.raises(ShapeMismatch):
        H.check_theorem4(MappingSpec.identity(2))
    nontri = MappingSpec.custom([(None, []), (None, [(0.1, (2, 0))])], triangular=False)
    with pytest.raises(ShapeMismatch):
        H.check_theorem1(DomainSpec.ball(2, 2), nontri)


def test_checkers_require_theorem_exponents():
    with pytest.raises(InvalidDomain):
        H.check_theorem1(DomainSpec(3, (1.5, 3, 3)), MappingSpec.identity(3))
    with pytest.raises(InvalidDomain):
        H.check_theorem4(MappingSpec.theorem4(0, 0, 0, 0), DomainSpec(2, (2, 3)))


def test_checker_thread_independent():
    spec = example1(0.3)
    a = H.check_theorem1(P233, spec, 600, 5, threads=1)
    b = H.check_theorem1(P233, spec, 600, 5, threads=4)
    assert [(m.condition_id, m.margin) for m in a.margins] == \
        [(m.condition_id, m.margin) for m in b.margins]


def test_injected_witness_is_reported():
    spec = example1(0.3)
    full = H.check_theorem1(P233, spec, 1000, 6)
    worst = min(full.margins, key=lambda m: m.margin)
    assert worst.margin <= -1e-3
    tiny = H.check_theorem1(P233, spec, 1, 7, extra_points=[worst.witness_z])
    assert tiny.margin(worst.condition_id) <= worst.margin
    assert not tiny.passed


# --- quadratic two-variable maps -----------------------------------------------


def test_theorem4_examples():
    rep = H.check_theorem4(MappingSpec.theorem4(0, 0, 0, 0))
    assert [m.margin for m in rep.margins] == [1.0, 1.0]
    rep = H.check_theorem4(MappingSpec.theorem4(0.05, 0.05, 0.05, 0.05), DomainSpec.ball(2, 3))
    assert rep.passed
    assert rep.notes["lhs4"] == pytest.approx(0.46, abs=1e-15)
    assert rep.notes["lhs5"] == pytest.approx(0.46, abs=1e-15)
    rep = H.check_theorem4(MappingSpec.theorem4(0.5, 0, 0, 0))
    assert rep.notes["lhs4"] == 2.0 and not rep.passed


def test_theorem4_is_bit_identical():
    spec = MappingSpec.theorem4(0.01j, 0.2, -0.03, 0.04)
    a, b = H.check_theorem4(spec), H.check_theorem4(spec)
    assert [m.margin for m in a.margins] == [m.margin for m in b.margins]


# --- example validators --------------------------------------------------------


def test_example1_validator_examples():
    rep = H.validate_example1(params(P233, example1(0.0)))
    assert rep.passed and rep.margin("E1.a") == pytest.approx(0.5 / 13)
    assert rep.notes["a_bound"] == pytest.approx(0.0384615, abs=1e-7)
    assert H.validate_example1(params(P233, example1(0.03))).passed
    rep = H.validate_example1(params(P233, example1(0.05)))
    assert not rep.passed and rep.margin("E1.a") < 0


def test_example4_validator_at_substitution_boundary():
    spec = MappingSpec("Example4", 3, a=(0, 0.001, 0.25), k=2)
    rep = H.validate_example4(params(P233, spec))
    assert rep.notes["substitute"] == pytest.approx(1.0)
    assert all(np.isfinite(m.margin) for m in rep.margins)
    assert not rep.passed


@pytest.mark.parametrize("bad", [
    lambda: H.validate_example1(H.ExampleParams(3, (2, 3, 3), 2, (0.01,) * 3, 1.5)),
    lambda: H.validate_example1(H.ExampleParams(3, (2, 3, 3), 2.5, (0.01,) * 3, 0.5)),
    lambda: H.validate_example1(H.ExampleParams(3, (3, 2, 3), 2, (0.01,) * 3, 0.5)),
    lambda: H.validate_example2(H.ExampleParams(3, (2, 3, 3), 3, (0.01,) * 3)),
    lambda: H.validate_example3(H.ExampleParams(3, (2, 3, 3), 2, (0.01,) * 3, 0)),
    lambda: H.validate_example4(H.ExampleParams(3, (2, 3, 3), 2, (0.01, 0.01, 0.0))),
    lambda: H.validate_example4(H.ExampleParams(3, (2, 3, 3), 2, (0.01, 0.01, 0.3))),
    lambda: H.validate_example(5, H.ExampleParams(3, (2, 3, 3), 2, (0.01,) * 3)),
])
def test_validators_reject_out_of_range(bad):
    with pytest.raises(ParamOutOfRange):
        bad()


coeff = st.floats(0, 0.05)


@given(which=st.sampled_from([1, 2, 3, 4]), a=st.lists(coeff, min_size=4, max_size=4),
       t=st.floats(0.01, 0.99), lam=st.floats(0.05, 0.9))
def test_validator_margins_monotone_under_scaling(which, a, t, lam):
    p = (2.0, 2.5, 3.0, 3.0)
    if which == 4:
        a[3] = max(a[3], 0.01)
    base = H.ExampleParams(4, p, 2, tuple(a), lam)
    scaled = H.ExampleParams(4, p, 2, tuple(t * x for x in a), lam)
    if which == 4 and t * a[3] == 0:
        return
    before = H.validate_example(which, base)
    after = H.validate_example(which, scaled)
    for m0, m1 in zip(before.margins, after.margins):
        assert m1.margin >= m0.margin - 1e-12


# --- soundness chain: validator pass => checker pass => no sampled violation ---


SOUND_CASES = [
    (1, H.check_theorem1, P233, example1(0.03)),
    (2, H.check_theorem1, DomainSpec(3, (2, 3, 2)), MappingSpec("Example2", 3, a=(0.03,) * 3, k=2)),
    (3, H.check_theorem2, P233, MappingSpec("Example3", 3, a=(0, 0.003, 0.003), lam=0.5, k=2)),
    (4, H.check_theorem2, DomainSpec(3, (2, 3, 2.5)), MappingSpec("Example4", 3, a=(0, 0.002, 0.01), k=2)),
]


@pytest.mark.parametrize("which,checker,dom,spec", SOUND_CASES)
def test_soundness_chain(which, checker, dom, spec):
    assert H.validate_example(which, params(dom, spec)).passed
    rep = checker(dom, spec, samples=1000, seed=11)
    assert rep.passed, rep.failed_conditions()
    assert scan(dom, spec, samples=10_000, seed=12).min_j >= -1e-8


def test_example2_counterexample_when_third_exponent_exceeds_two():
    # the validator accepts these coefficients, but J < 0 on the set z_3 = 0
    spec = MappingSpec("Example2", 3, a=(0.05,) * 3, k=2)
    assert H.validate_example2(params(P233, spec)).passed
    rep = H.check_theorem1(P233, spec, 200, 13)
    assert rep.failed_conditions() == ["T1.4"]
    ev = evaluate_J(P233, spec, [0, 0.5, 0], [0, 0, 1])
    assert ev.constraint_residual == 0
    assert ev.j_value == pytest.approx(-3 * 2 * 0.05 / (0.5 * (1 + 2 * 0.05 * 0.5)), rel=1e-12)
