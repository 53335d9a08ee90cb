"""Exit criteria.  Each test records one PASS/FAIL line, printed at the end
of the pytest run by the terminal-summary hook in ``conftest.py``."""
import math
import time
from contextlib import contextmanager

import numpy as np

from zplab.biorth_distortion import (chain_instance, distortion_lower_bound, lift_system,
                                     perturbation_chain_check, synth_system, validate_biorth)
from zplab.blocks_psp import (PROFILES, BlockSequence, block_sum_growth, log_lift,
                              make_disjoint_blocks, normalize_flattened, psp_flatten)
from zplab.cli import main
from zplab.kp_centralizer import (TwistedVector, centralizer_defect,
                                  estimate_centralizer_constant, omega_p, quasi_norm)
from zplab.seq_core import SeqVector, lp_norm, pointwise_mul, sup_norm, unit

from . import oracles

RESULTS = []
EXPONENTS = (1.5, 2.0, 3.0)


@contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        within = budget is None or dt < budget
        status = "PASS" if ok and within else "FAIL"
        limit = f" < {budget:g} s" if budget else ""
        RESULTS.append(f"[{status}] criterion {number:2d}: {title} ({dt:.3f} s{limit})")
    if budget is not None:
        assert dt < budget, f"criterion {number} took {dt:.3f} s, budget {budget} s"


def rand_vec(rng, max_dim=64):
    dim = int(rng.integers(1, max_dim + 1))
    v = rng.standard_normal(dim) * (rng.random(dim) < 0.8)
    return SeqVector.from_dense(v * 10.0 ** rng.uniform(-3, 3))


def test_c01_omega_correctness():
    rng = np.random.default_rng(1)
    with criterion(1, "Omega_p homogeneity, support, unit and flat vectors", 1.0):
        for p in EXPONENTS:
            for _ in range(200):
                x = rand_vec(rng)
                lam = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-3, 3))
                w = omega_p(x, p)
                assert w.support() <= x.support()
                scale = abs(lam) * lp_norm(x, p)
                assert lp_norm(omega_p(lam * x, p) - lam * w, p) <= 1e-10 * max(scale, 1e-300)
                assert omega_p(0.0 * x, p).is_zero()
            for i in (1, 2, 17, 64):
                assert omega_p(unit(i), p).is_zero()
        w = omega_p(SeqVector.from_dense([1, 1, 1, 1]), 2)
        assert np.all(np.abs(w.to_dense(4) + math.log(2)) <= 1e-12)


def test_c02_quasi_norm_exactness():
    rng = np.random.default_rng(2)
    with criterion(2, "Q((x,0)) = ||x||_p and Q((Omega_p(y),y)) = ||y||_p", 1.0):
        for k in range(200):
            p = EXPONENTS[k % 3]
            x, y = rand_vec(rng), rand_vec(rng)
            nx, ny = lp_norm(x, p), lp_norm(y, p)
            assert abs(quasi_norm(TwistedVector.first(x, p)) - nx) <= 1e-12 * max(nx, 1.0)
            assert abs(quasi_norm(TwistedVector(omega_p(y, p), y, p)) - ny) <= 1e-12 * max(ny, 1.0)


def test_c03_log_lift_closed_form():
    with criterion(3, "log-lift of n normalized disjoint blocks = n^(1/p) log(n)/p", 5.0):
        for p in EXPONENTS:
            for profile in PROFILES:
                for n in range(1, 65):
                    bs = make_disjoint_blocks(n, 3, profile, p)
                    closed = n ** (1 / p) * math.log(n) / p
                    value = log_lift(bs)
                    brute = oracles.log_lift([oracles.as_dict(b) for b in bs], p)
                    assert abs(value - closed) <= 1e-10 * max(closed, 1e-300) or (n == 1 and value == 0.0)
                    assert abs(brute - closed) <= 1e-10 * max(closed, 1e-300) or (n == 1 and brute == 0.0)


def test_c04_seminormalized_lower_bound():
    rng = np.random.default_rng(4)
    with criterion(4, "log-lift >= eta(log(n)/p + log eta) n^(1/p) for norms in [eta, 1]", 5.0):
        checked = 0
        for trial in range(100):
            eta = (0.5, 0.9)[trial % 2]
            p = EXPONENTS[trial % 3]
            n = int(rng.integers(2, 65))
            blocks, start = [], 1
            for _ in range(n):
                w = int(rng.integers(1, 5))
                g = rng.standard_normal(w)
                g *= rng.uniform(eta, 1.0) / np.sum(np.abs(g) ** p) ** (1 / p)
                blocks.append(SeqVector.from_dense(g, start=start))
                start += w
            bs = BlockSequence(blocks, p)
            bound = eta * (math.log(n) / p + math.log(eta)) * n ** (1 / p)
            if bound > 0:
                checked += 1
                assert log_lift(bs) >= bound - 1e-10
        assert checked >= 50


def test_c05_growth_dichotomy():
    with criterion(5, "growth: (0,e_j) ratio 1+log(n)/p, flattened ratio 1", 2.0):
        for p in EXPONENTS:
            N = 64
            second = [TwistedVector(SeqVector(), unit(j), p) for j in range(1, N + 1)]
            table = block_sum_growth(second, list(range(1, N + 1)))
            for (n, _, _), ratio in zip(table.rows, table.ratios()):
                assert abs(ratio - (1 + math.log(n) / p)) <= 1e-10 * (1 + math.log(n) / p)
            n_cross = math.ceil(math.exp(p))
            assert table.ratios()[n_cross - 1] > 2.0
            assert np.all(np.diff(table.ratios()) > 0)

            blocks = make_disjoint_blocks(N, 3, "geometric", p)
            pairs = [TwistedVector(b, b * 2.0 ** -j, p) for j, b in enumerate(blocks, 1)]
            ys, _ = normalize_flattened([y for y, _ in psp_flatten(pairs)], p)
            flat = block_sum_growth([TwistedVector.first(y, p) for y in ys], list(range(1, N + 1)))
            assert np.all(np.abs(flat.ratios() - 1.0) <= 1e-12)


def test_c06_psp_flattening_exactness():
    rng = np.random.default_rng(6)
    with criterion(6, "flattening error equals ||u_j||_p (dyadic case with equality)", 1.0):
        for k in range(200):
            p = EXPONENTS[k % 3]
            x, u = rand_vec(rng), rand_vec(rng)
            ((_, err),) = psp_flatten([TwistedVector(x, u, p)])
            nu = lp_norm(u, p)
            assert abs(err - nu) <= 1e-12 * max(nu, 1.0)
        for p in EXPONENTS:
            bs = make_disjoint_blocks(20, 4, "geometric", p)
            pairs = [TwistedVector(b * rng.standard_normal(), b * 2.0 ** -j, p)
                     for j, b in enumerate(bs, 1)]
            for j, (_, err) in enumerate(psp_flatten(pairs), 1):
                assert abs(err - 2.0 ** -j) <= 1e-12


def test_c07_centralizer_defect():
    rng = np.random.default_rng(7)
    witness = math.log(2) / (2 * math.sqrt(2))
    with criterion(7, "centralizer defect identities and witness ratio", 5.0):
        for k in range(100):
            p = EXPONENTS[k % 3]
            x = rand_vec(rng, 32)
            if x.is_zero():
                continue
            ones = SeqVector(sorted(x.support()), [1.0] * len(x))
            assert centralizer_defect(ones, x, p) == 0.0
            A = [i for i in sorted(x.support()) if rng.random() < 0.5] or [x.min_index()]
            ind = SeqVector(A, [1.0] * len(A))
            na, nx = lp_norm(pointwise_mul(ind, x), p), lp_norm(x, p)
            closed = na * math.log(nx / na)
            assert abs(centralizer_defect(ind, x, p) - closed) <= 1e-10 * closed
            a = rand_vec(rng, 32)
            lam = float(rng.choice([-1, 1]) * 10.0 ** rng.uniform(-2, 2))
            d0 = centralizer_defect(a, x, p)
            d1 = centralizer_defect(a, lam * x, p)
            assert abs(d1 - abs(lam) * d0) <= 1e-12 * abs(lam) * sup_norm(a) * nx
        est = estimate_centralizer_constant(2, dim=2, trials=50, seed=0)
        assert est >= witness - 1e-10


def test_c08_distortion_bound():
    with criterion(8, "renorm ratio >= (1+eps-delta)/(eps+delta) on 50 systems", 5.0):
        deltas, epss = (0.05, 0.1, 0.2, 0.4), (0.01, 0.05, 0.1, 0.5)
        for seed in range(50):
            sys = synth_system(EXPONENTS[seed % 3], deltas[seed % 4], seed)
            assert validate_biorth(sys).passed
            for eps in epss:
                r = distortion_lower_bound(sys, eps)
                assert r.ratio >= r.bound - 1e-9
                assert abs(r.bound - (1 + eps - sys.delta) / (eps + sys.delta)) <= 1e-15 * r.bound
                if sys.delta == 0.1 and eps == 0.1:
                    assert abs(r.bound - 5.0) <= 1e-12


def test_c09_lift_fidelity():
    deltas, epss = (0.05, 0.1, 0.2, 0.4), (0.01, 0.05, 0.1, 0.5)
    with criterion(9, "lift preserves margins, norms and the distortion bound", 5.0):
        for seed in range(50):
            sys = synth_system(EXPONENTS[seed % 3], deltas[seed % 4], seed)
            z = lift_system(sys)
            before, after = validate_biorth(sys), validate_biorth(z)
            assert np.max(np.abs(before.margins() - after.margins())) <= 1e-12
            for A, Az in zip(sys.families, z.families):
                for x, zx in zip(A, Az):
                    assert abs(quasi_norm(zx) - 1.0) <= 1e-12
            for As, Azs in zip(sys.dual_families, z.dual_families):
                for b, f in zip(As, Azs):
                    nb = lp_norm(b, sys.q)
                    assert abs(quasi_norm(f) - nb) <= 1e-12 * max(nb, 1.0)
            for eps in epss:
                r = distortion_lower_bound(z, eps)
                assert r.ratio >= r.bound - 1e-9


def test_c10_perturbation_chain():
    with criterion(10, "chain value Q(sum lambda_n w_n - (a,0)) <= 2 eps", 2.0):
        for seed in range(100):
            p = EXPONENTS[seed % 3]
            eps = (0.01, 0.05, 0.1, 0.25)[seed % 4]
            ws, us, a, lam = chain_instance(p, 2 + seed % 7, eps, seed)
            r = perturbation_chain_check(ws, us, a, lam, eps)
            assert r.approx_error <= eps
            assert r.value <= 2 * eps + 1e-9


DETERMINISM_RUNS = [
    ["omega", "--p", "2", "--vec", "1:1;2:1;3:1;4:1"],
    ["qnorm", "--p", "1.5", "--x", "1:0.3;4:2", "--y", "2:1;3:-1"],
    ["defect", "--p", "3", "--a", "1:1", "--vec", "1:1;2:1"],
    ["cconst", "--p", "2", "--dim", "4", "--trials", "100", "--seed", "9"],
    ["qtri", "--p", "1.5", "--dim", "4", "--trials", "50", "--seed", "9"],
    ["loglift", "--p", "3", "--n", "1,2,8", "--profile", "geometric"],
    ["psp", "--p", "2", "--n", "5"],
    ["growth", "--p", "2", "--n", "1,2,4,8", "--kind", "flattened"],
    ["synth", "--p", "2", "--delta", "0.2", "--seed", "4"],
    ["sweep", "--op", "loglift", "--p", "1.5,2,3", "--n", "2,4,8,16"],
    ["sweep", "--op", "distort", "--p", "2", "--delta", "0.1,0.4", "--eps", "0.1,0.5", "--seed", "2"],
]


def test_c11_determinism(tmp_path):
    with criterion(11, "repeated CLI invocations give byte-identical reports", None):
        sysfile = tmp_path / "sys.json"
        assert main(["synth", "--p", "2", "--seed", "8", "--out", str(sysfile)]) == 0
        runs = DETERMINISM_RUNS + [
            ["validate", "--system", str(sysfile)],
            ["lift", "--system", str(sysfile)],
            ["distort", "--system", str(sysfile), "--eps", "0.05,0.1"],
            ["probe", "--system", str(sysfile), "--budget", "300", "--seed", "3"],
        ]
        for k, argv in enumerate(runs):
            for fmt in ("json", "csv"):
                outs = []
                for rep in range(2):
                    path = tmp_path / f"r{k}_{fmt}_{rep}"
                    assert main(argv + ["--format", fmt, "--out", str(path)]) == 0, argv
                    outs.append(path.read_bytes())
                assert outs[0] == outs[1], argv
