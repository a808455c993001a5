"""Measure families, deficiencies, the bridge function and the system check."""

import pytest

from feistab.domain import KVec, SimplexTuple, dk_grid, simplex_grid
from feistab.errors import DomainViolation, NoWitness
from feistab.feim import Exact, sup_residual
from feistab.harness import NoiseSpec
from feistab.measures import (
    ExactJ,
    JFamily,
    PerturbedLevels,
    Recursive,
    certify_system,
    derive_f,
    measure_eval,
    recursivity_defect,
    semisymmetry_defect,
    system_bound,
)
from feistab.feim import K_bound, residual_support
from feistab.multiplicative import powers

M2 = powers(2.0)


def tup(*vals):
    return SimplexTuple(tuple(KVec([v]) for v in vals))


class TestJFamily:
    def test_uniform_thirds(self):
        fam = ExactJ(JFamily(1.0, 0.0, M2))
        assert measure_eval(fam, tup(1 / 3, 1 / 3, 1 / 3)) == pytest.approx(-2 / 3, abs=1e-15)

    def test_weighted_example(self):
        fam = ExactJ(JFamily(1.0, 2.0, M2))
        got = measure_eval(fam, tup(0.5, 0.25, 0.25))
        assert got == pytest.approx(-2.125, abs=1e-15)

    def test_base_fcn_matches_level_two(self):
        J = JFamily(1.0, 2.0, M2)
        g = J.base_fcn()
        assert isinstance(g, Exact) and (g.a, g.b) == (1.0, 3.0)
        for t in simplex_grid(2, 1, 8):
            assert ExactJ(J).eval(t) == pytest.approx(g(t.parts[1]), abs=1e-14)


class TestRecursion:
    def test_recursion_reproduces_closed_form_example(self):
        J = JFamily(1.0, 0.0, M2)
        rec = Recursive(J.base_fcn(), M2)
        got = rec.eval(tup(0.5, 0.25, 0.25))
        assert got == pytest.approx(-0.625, abs=1e-14)
        assert got == pytest.approx(ExactJ(J).eval(tup(0.5, 0.25, 0.25)), abs=1e-14)

    @pytest.mark.parametrize("c,d", [(-1, 0), (0, 1), (1, 2), (2, -1)])
    @pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0])
    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_recursion_identity_on_grids(self, c, d, alpha, n):
        M = powers(alpha)
        J = JFamily(float(c), float(d), M)
        exact = ExactJ(J)
        rec = Recursive(J.base_fcn(), M)
        for t in simplex_grid(n, 1, 6):
            assert rec.eval(t) == pytest.approx(exact.eval(t), abs=1e-10)

    def test_d_term_telescopes(self):
        # d (M(p1+p2) - 1) + M(p1+p2) d (M(u) - 1) == d (M(p1) - 1)
        for alpha in (0.5, 2.0):
            M = powers(alpha)
            for t in simplex_grid(3, 1, 8):
                s = t.parts[0] + t.parts[1]
                u = t.parts[0] / s if all(c > 0 for c in s) else KVec([0.0])
                lhs = (M(s) - 1.0) + M(s) * (M(u) - 1.0)
                rhs = M(t.parts[0]) - 1.0
                assert lhs == pytest.approx(rhs, abs=1e-12)


class TestDeficiencies:
    def test_exactJ_is_recursive_and_semisymmetric(self):
        fam = ExactJ(JFamily(1.5, -0.5, M2))
        for n in (3, 4, 5):
            assert recursivity_defect(fam, n, simplex_grid(n, 1, 8)) <= 1e-12
        assert semisymmetry_defect(fam, simplex_grid(3, 1, 8)) <= 1e-12

    def test_recursive_family_from_own_base(self):
        class Cubic:
            def __call__(self, x):
                return x.coords[0] ** 3

        fam = Recursive(Cubic(), M2)
        # only the final addition's rounding survives the cancellation
        assert recursivity_defect(fam, 4, simplex_grid(4, 1, 6)) <= 1e-12

    def test_perturbed_levels_triangle_bounds(self):
        delta = {2: 2e-4, 3: 5e-4, 4: 1e-3, 5: 7e-4}
        noise = {n: NoiseSpec(delta[n], seed=40 + n) for n in delta}
        fam = PerturbedLevels(ExactJ(JFamily(1.0, 1.0, M2)), noise)
        for n in (4, 5):
            got = recursivity_defect(fam, n, simplex_grid(n, 1, 6))
            assert got <= delta[n] + delta[n - 1] + delta[2] + 1e-12
        assert semisymmetry_defect(fam, simplex_grid(3, 1, 6)) <= 2 * delta[3] + 1e-15

    def test_semisymmetry_vanishes_on_symmetric_tuples(self):
        fam = PerturbedLevels(
            ExactJ(JFamily(1.0, 0.0, M2)), {3: NoiseSpec(1e-2, seed=3)}
        )
        t = tup(0.5, 0.25, 0.25)
        swapped = SimplexTuple((t.parts[0], t.parts[2], t.parts[1]))
        assert fam.eval(t) == fam.eval(swapped)

    def test_level_validation(self):
        fam = ExactJ(JFamily(1.0, 0.0, M2))
        with pytest.raises(ValueError):
            recursivity_defect(fam, 2, simplex_grid(2, 1, 4))
        with pytest.raises(DomainViolation):
            recursivity_defect(fam, 4, simplex_grid(3, 1, 4))
        with pytest.raises(DomainViolation):
            semisymmetry_defect(fam, simplex_grid(4, 1, 4))


class TestDeriveF:
    def test_entropy_like_family(self):
        # J2 with c=1, d=0 gives f(x) = x^2 + (1-x)^2 - 1 = Exact(1, 1)
        fam = ExactJ(JFamily(1.0, 0.0, M2))
        points = [KVec([i / 8]) for i in range(9)]
        f = derive_f(fam, points)
        target = Exact(1.0, 1.0, M2)
        for x in points:
            assert f(x) == pytest.approx(target(x), abs=1e-14)
            assert f(x) == pytest.approx(-2 * x[0] * (1 - x[0]), abs=1e-14)

    def test_first_part_only_family(self):
        fam = ExactJ(JFamily(0.0, 1.0, M2))
        points = [KVec([i / 4]) for i in range(5)]
        f = derive_f(fam, points)
        target = Exact(0.0, 1.0, M2)
        for x in points:
            assert f(x) == pytest.approx(target(x), abs=1e-14)

    def test_derived_residual_bounded_by_deficiencies(self):
        m = 8
        noise = {2: NoiseSpec(1e-3, seed=21), 3: NoiseSpec(2e-3, seed=22)}
        fam = PerturbedLevels(ExactJ(JFamily(1.0, 0.5, M2)), noise)
        eps1 = semisymmetry_defect(fam, simplex_grid(3, 1, m))
        eps2 = recursivity_defect(fam, 3, simplex_grid(3, 1, m))
        grid = dk_grid(1, m)
        f = derive_f(fam, residual_support(grid))
        scan = sup_residual(f, M2, grid)
        assert scan.sup <= eps1 + 2 * eps2 + 1e-12


class TestSystemBound:
    def test_level_two_is_plain_K(self):
        qs = KVec([0.5])
        eps = (0.01, 0.02)
        t = tup(0.75, 0.25)
        got = system_bound(2, eps, M2, qs, t)
        expected = K_bound(M2, qs, 0.01 + 2 * 0.02, t.parts[1])
        assert got == pytest.approx(expected, abs=1e-15)

    def test_zero_deficiencies_give_zero(self):
        qs = KVec([0.5])
        for n, t in ((2, tup(0.5, 0.5)), (3, tup(0.5, 0.25, 0.25)), (4, tup(0.25, 0.25, 0.25, 0.25))):
            assert system_bound(n, (0.0, 0.0, 0.0), M2, qs, t) == 0.0

    def test_hand_worked_level_four(self):
        # eps = (0, 0.01, 0.01); tuple (0.25, 0.25, 0.25, 0.25):
        # tail = eps_2 + eps_3 = 0.02, K at eps_K = 0.02 with p2 = 0.25,
        # M(p1+p2) = 0.25, multiplier 1 + 2 * 0.25
        qs = KVec([0.5])
        t = tup(0.25, 0.25, 0.25, 0.25)
        eps_k = 0.0 + 2 * 0.01
        k_val = (4 * eps_k + 3 * eps_k * (1 - 0.25 * 0.5) ** 2) / 0.5
        expected = 0.02 + (1 + 2 * 0.25) * k_val
        got = system_bound(4, (0.0, 0.01, 0.01), M2, qs, t)
        assert got == pytest.approx(expected, abs=1e-14)

    def test_monotone_in_deficiencies_and_level(self):
        qs = KVec([0.5])
        t4 = tup(0.25, 0.25, 0.25, 0.25)
        lo = system_bound(4, (0.001, 0.001, 0.001), M2, qs, t4)
        hi = system_bound(4, (0.002, 0.003, 0.004), M2, qs, t4)
        assert hi > lo
        t5 = tup(0.25, 0.25, 0.25, 0.125, 0.125)
        base = (0.001, 0.002, 0.003, 0.004)
        assert system_bound(5, base, M2, qs, t5) > system_bound(
            4, base, M2, qs, tup(0.25, 0.25, 0.25, 0.25)
        )

    def test_needs_two_deficiencies(self):
        with pytest.raises(ValueError):
            system_bound(2, (0.01,), M2, KVec([0.5]), tup(0.5, 0.5))


class TestCertifySystem:
    def test_exact_family_passes_and_recovers_cd(self):
        for c, d in ((1.0, 0.0), (1.0, 2.0), (-1.0, 0.5)):
            fam = ExactJ(JFamily(c, d, M2))
            cert = certify_system(fam, M2, 5, 8)
            assert cert.passed
            assert max(cert.eps_seq) <= 1e-12
            assert (cert.c, cert.d) == pytest.approx((c, d), abs=1e-10)
            J = JFamily(cert.c, cert.d, M2)
            for t in simplex_grid(4, 1, 4):
                assert J.value(t) == pytest.approx(fam.eval(t), abs=1e-10)

    def test_perturbed_levels_pass(self):
        noise = {n: NoiseSpec(1e-3, seed=60 + n) for n in (2, 3, 4, 5)}
        fam = PerturbedLevels(ExactJ(JFamily(1.0, 0.5, M2)), noise)
        cert = certify_system(fam, M2, 5, 8)
        assert cert.passed
        assert cert.worst_violation <= 1e-9
        assert len(cert.eps_seq) == 4
        assert set(cert.max_violation) == {2, 3, 4, 5}

    def test_projection_refused(self):
        fam = ExactJ(JFamily(1.0, 0.0, powers(1.0)))
        with pytest.raises(NoWitness):
            certify_system(fam, powers(1.0), 4, 8)

    def test_minimum_levels_still_measures_eps2(self):
        fam = ExactJ(JFamily(1.0, 1.0, M2))
        cert = certify_system(fam, M2, 2, 6)
        assert cert.passed
        assert len(cert.eps_seq) == 2  # eps_1 and eps_2 both measured
        assert set(cert.max_violation) == {2}
