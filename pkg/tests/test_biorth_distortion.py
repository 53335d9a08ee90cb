import json
import math

import numpy as np
import pytest

from zplab.biorth_distortion import (BiorthSystem, BiorthValidationError, InevitabilityProbe,
                                     PreconditionError, chain_instance, distortion_bound,
                                     distortion_lower_bound, inevitability_proxy, lift_system,
                                     perturbation_chain_check, renorm, synth_system,
                                     validate_biorth)
from zplab.kp_centralizer import TwistedVector, omega_p, quasi_norm, twisted_pairing
from zplab.seq_core import SeqVector, lp_norm, pairing, unit

from .conftest import random_vec


def orthonormal(delta=0.1, p=2):
    return BiorthSystem(p, delta, [[unit(1)], [unit(2)]], [[unit(1)], [unit(2)]])


def brute_margins(sys):
    m = len(sys)
    same = [min(max(pairing(f, x) for f in sys.dual_families[j]) for x in sys.families[j])
            for j in range(m)]
    cross = [[max(pairing(f, x) for x in sys.families[j] for f in sys.dual_families[k])
              for k in range(m)] for j in range(m)]
    return same, cross


class TestSystem:
    def test_orthonormal_passes(self):
        r = validate_biorth(orthonormal())
        assert r.passed and r.same_index == [1.0, 1.0]
        assert r.cross[0, 1] == 0.0

    @pytest.mark.parametrize("delta", [0.6, 0.5, 0.0, -0.1])
    def test_delta_range(self, delta):
        with pytest.raises(BiorthValidationError):
            orthonormal(delta)

    def test_malformed(self):
        with pytest.raises(BiorthValidationError):
            BiorthSystem(2, 0.1, [[unit(1)], [unit(2)]], [[unit(1)]])
        with pytest.raises(BiorthValidationError):
            BiorthSystem(2, 0.1, [[unit(1)]], [[unit(1)]])
        with pytest.raises(BiorthValidationError):
            BiorthSystem(2, 0.1, [[unit(1)], []], [[unit(1)], [unit(2)]])

    def test_near_threshold_family(self):
        delta = 0.2
        head = math.sqrt(1 - delta ** 2)
        x1 = SeqVector([1, 2], [head, delta])
        sys = BiorthSystem(2, delta, [[x1], [unit(2)]], [[unit(1)], [unit(2)]])
        r = validate_biorth(sys)
        same, cross = brute_margins(sys)
        assert r.same_index == pytest.approx(same, abs=1e-9)
        np.testing.assert_allclose(r.cross, cross, atol=1e-9)
        assert r.cross[0, 1] == pytest.approx(delta, abs=1e-15)
        assert r.condition3_ok and r.condition2_ok

    def test_failing_cross(self):
        x1 = SeqVector([1, 2], [0.8, 0.6])
        r = validate_biorth(BiorthSystem(2, 0.1, [[x1], [unit(2)]], [[unit(1)], [unit(2)]]))
        assert not r.condition3_ok and not r.passed

    def test_norm_checks(self):
        r = validate_biorth(BiorthSystem(2, 0.1, [[2 * unit(1)], [unit(2)]], [[unit(1)], [unit(2)]]))
        assert not r.norms_ok

    def test_json_roundtrip(self):
        sys = synth_system(2.5, 0.2, seed=4)
        back = BiorthSystem.from_json(json.loads(json.dumps(sys.to_json())))
        np.testing.assert_array_equal(validate_biorth(back).margins(), validate_biorth(sys).margins())
        z = lift_system(sys)
        zback = BiorthSystem.from_json(z.to_json())
        assert zback.space == "zp"
        np.testing.assert_array_equal(validate_biorth(zback).margins(), validate_biorth(z).margins())


class TestRenorm:
    def test_annihilated(self):
        assert renorm(unit(3), 0.1, [unit(1), unit(2)], 2) == pytest.approx(0.1)

    def test_bounds_on_synthetic(self):
        sys = synth_system(2, 0.1, seed=1)
        A1s = sys.dual_families[0]
        for x in sys.families[0]:
            assert renorm(x, 0.1, A1s, 2) >= 0.1 + 0.9 - 1e-12
        for y in sys.families[1]:
            assert renorm(y, 0.1, A1s, 2) <= 0.1 + 0.1 + 1e-12

    def test_errors(self):
        with pytest.raises(ValueError):
            renorm(unit(1), 0.1, [], 2)
        with pytest.raises(ValueError):
            renorm(unit(1), 0.0, [unit(1)], 2)

    def test_norm_axioms(self, rng):
        F = [random_vec(rng, 6) for _ in range(3)]
        for _ in range(30):
            x, y = random_vec(rng, 6), random_vec(rng, 6)
            lam = rng.standard_normal()
            assert renorm(lam * x, 0.2, F, 3) == pytest.approx(abs(lam) * renorm(x, 0.2, F, 3), rel=1e-10)
            assert renorm(x + y, 0.2, F, 3) <= renorm(x, 0.2, F, 3) + renorm(y, 0.2, F, 3) + 1e-10

    def test_monotone_in_functionals(self, rng):
        F = [random_vec(rng, 6) for _ in range(4)]
        x = random_vec(rng, 6)
        vals = [renorm(x, 0.3, F[:k], 2) for k in range(1, 5)]
        assert vals == sorted(vals)


class TestDistortion:
    def test_bound_formula(self):
        assert distortion_bound(0.1, 0.1) == pytest.approx(5.0, rel=1e-15)
        assert distortion_bound(0.05, 0.1) == pytest.approx(0.95 / 0.15, rel=1e-15)

    def test_orthonormal_ratio(self):
        r = distortion_lower_bound(orthonormal(), 0.1)
        assert r.ratio == pytest.approx(11.0, rel=1e-14)
        assert r.bound == pytest.approx(5.0) and r.holds

    def test_rejects_invalid(self):
        x1 = SeqVector([1, 2], [0.8, 0.6])
        with pytest.raises(BiorthValidationError):
            distortion_lower_bound(BiorthSystem(2, 0.1, [[x1], [unit(2)]], [[unit(1)], [unit(2)]]), 0.1)

    def test_other_index(self):
        sys = synth_system(2, 0.1, seed=2, families=3)
        r = distortion_lower_bound(sys, 0.1, index=3)
        assert r.other == 1 and r.holds
        with pytest.raises(ValueError):
            distortion_lower_bound(sys, 0.1, index=2, other=2)


class TestLift:
    def test_pairing_preserved(self, rng):
        for p in (1.5, 2.0, 3.0):
            q = p / (p - 1)
            x, b = random_vec(rng), random_vec(rng)
            f = TwistedVector(omega_p(b, q), b, q)
            assert twisted_pairing(TwistedVector.first(x, p), f) == pairing(x, b)
            assert quasi_norm(f) == pytest.approx(lp_norm(b, q), rel=1e-12)

    def test_margins_identical(self):
        sys = synth_system(3.0, 0.2, seed=9)
        z = lift_system(sys)
        assert z.space == "zp"
        np.testing.assert_array_equal(validate_biorth(z).margins(), validate_biorth(sys).margins())

    def test_lift_rejects_zp(self):
        with pytest.raises(ValueError):
            lift_system(lift_system(orthonormal()))


class TestProbe:
    def test_element_in_span(self):
        a = SeqVector.from_dense([0.6, 0.8])
        probe = InevitabilityProbe([unit(1), unit(2)], search_budget=50, seed=0)
        assert inevitability_proxy([a], probe, 2) <= 1e-6

    def test_orthogonal_span_exact_distance(self):
        probe = InevitabilityProbe([unit(1)], search_budget=1000, seed=3)
        assert inevitability_proxy([unit(2)], probe, 2) == pytest.approx(math.sqrt(2), abs=1e-6)

    def test_budget_monotone(self):
        rng = np.random.default_rng(0)
        basis = [SeqVector.from_dense(rng.standard_normal(6)) for _ in range(3)]
        A = [SeqVector.from_dense(v / np.sum(np.abs(v) ** 3) ** (1 / 3)) for v in rng.standard_normal((2, 6))]
        vals = [inevitability_proxy(A, InevitabilityProbe(basis, search_budget=b, seed=5), 3)
                for b in (1, 10, 100, 1000)]
        assert vals == sorted(vals, reverse=True)

    def test_invalid_probe(self):
        with pytest.raises(ValueError):
            InevitabilityProbe([unit(1), 2 * unit(1)])
        with pytest.raises(ValueError):
            InevitabilityProbe([unit(1)], tolerance=0)
        with pytest.raises(ValueError):
            inevitability_proxy([unit(1)], InevitabilityProbe([unit(1)], search_budget=0), 2)


class TestChain:
    def test_exact_blocks(self):
        us = [unit(1), unit(2)]
        lam = [0.6, 0.8]
        ws = [TwistedVector.first(u, 2) for u in us]
        a = SeqVector.from_dense(lam)
        r = perturbation_chain_check(ws, us, a, lam, 0.1)
        assert r.value == pytest.approx(0.0, abs=1e-15) and r.holds

    def test_second_coordinate_perturbation(self):
        eps, p = 0.1, 2
        us = [unit(2 * k + 1) for k in range(4)]
        ws = [TwistedVector(u, unit(2 * n) * (eps / 2 ** (n + 1)), p) for n, u in enumerate(us, 1)]
        r = perturbation_chain_check(ws, us, us[0], [1, 0, 0, 0], eps)
        assert r.value == pytest.approx(eps / 4, rel=1e-12)
        assert r.within_2eps and r.within_chain

    def test_preconditions(self):
        us = [unit(1), unit(2)]
        ws = [TwistedVector.first(u, 2) for u in us]
        with pytest.raises(PreconditionError):
            perturbation_chain_check(ws, us, unit(1), [1.0, 1.0], 0.1)
        with pytest.raises(PreconditionError, match="block 2"):
            bad = [ws[0], TwistedVector(unit(2), unit(5), 2)]
            perturbation_chain_check(bad, us, unit(1), [1.0, 0.0], 0.1)
        with pytest.raises(PreconditionError):
            perturbation_chain_check(ws, us, 2 * unit(1), [1.0, 0.0], 0.1)

    def test_random_instances(self):
        for seed in range(20):
            r = perturbation_chain_check(*chain_instance(2.0, 5, 0.05, seed), 0.05)
            assert r.approx_error <= 0.05 and r.within_2eps
