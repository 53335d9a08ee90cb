"""Finite biorthogonal systems, the distortion renorming and their lift to Z_p.

A system is a list of families ``A_j`` of unit vectors together with
families ``A_j*`` of functionals in the dual unit ball, and a constant
``0 < delta < 1/2``.  Validation measures the two finitely checkable
conditions: every ``x`` in ``A_j`` is almost normed by some functional of
``A_j*`` (pairing at least ``1 - delta``), and functionals of other
families pair with it at most ``delta``.  Inevitability of the ``A_j``
quantifies over infinite-dimensional subspaces and is only probed here,
by :func:`inevitability_proxy`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .kp_centralizer import (TwistedVector, omega_p, quasi_norm,
                             twisted_combination, twisted_pairing)
from .seq_core import (PExponent, SeqVector, as_exponent, linear_combination,
                       lp_norm, pairing)

__all__ = [
    "BiorthSystem", "BiorthReport", "BiorthValidationError", "PreconditionError",
    "InevitabilityProbe", "DistortionResult", "ChainResult", "validate_biorth",
    "renorm", "distortion_bound", "distortion_lower_bound", "lift_system",
    "inevitability_proxy", "perturbation_chain_check", "synth_system",
    "chain_instance", "NORM_TOL",
]

NORM_TOL = 1e-9
SPACES = ("ellp", "zp")


class BiorthValidationError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass
class BiorthSystem:
    """Families ``A_j`` and ``A_j*`` with constant ``delta``.

    For ``space="ellp"`` elements are :class:`SeqVector`.  For
    ``space="zp"`` the ``A_j`` hold :class:`TwistedVector` at exponent ``p``
    and the ``A_j*`` hold :class:`TwistedVector` at the dual exponent.
    """

    p: PExponent
    delta: float
    families: list
    dual_families: list
    space: str = "ellp"

    def __post_init__(self):
        self.p = as_exponent(self.p)
        self.delta = float(self.delta)
        self.families = [list(A) for A in self.families]
        self.dual_families = [list(A) for A in self.dual_families]
        if not 0.0 < self.delta < 0.5:
            raise BiorthValidationError(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.space not in SPACES:
            raise BiorthValidationError(f"unknown space {self.space!r}")
        if len(self.families) != len(self.dual_families):
            raise BiorthValidationError("A and A* have different index counts")
        if len(self.families) < 2:
            raise BiorthValidationError("a system needs at least two families")
        for j, (A, As) in enumerate(zip(self.families, self.dual_families), 1):
            if not A or not As:
                raise BiorthValidationError(f"family {j} is empty")
            want = SeqVector if self.space == "ellp" else TwistedVector
            if not all(isinstance(v, want) for v in A + As):
                raise BiorthValidationError(f"family {j} holds non-{want.__name__} elements")
            if self.space == "zp":
                if any(v.p != self.p for v in A) or any(f.p != self.p.dual() for f in As):
                    raise BiorthValidationError(f"family {j} mixes exponents")

    @property
    def q(self) -> float:
        return self.p.q

    def __len__(self):
        return len(self.families)

    def norm(self, v) -> float:
        return quasi_norm(v) if self.space == "zp" else lp_norm(v, self.p.p)

    def dual_norm(self, f) -> float:
        return quasi_norm(f) if self.space == "zp" else lp_norm(f, self.q)

    def pair(self, f, v) -> float:
        """Value of functional ``f`` at ``v``."""
        return twisted_pairing(v, f) if self.space == "zp" else pairing(f, v)

    def to_json(self) -> dict:
        return {
            "p": self.p.p,
            "delta": self.delta,
            "space": self.space,
            "families": [{"A": [v.to_json() for v in A], "Astar": [f.to_json() for f in As]}
                         for A, As in zip(self.families, self.dual_families)],
        }

    @classmethod
    def from_json(cls, obj) -> "BiorthSystem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        p = PExponent(obj["p"])
        space = obj.get("space", "ellp")
        if space == "zp":
            load = lambda v: TwistedVector.from_json(v, p)  # noqa: E731
            load_dual = lambda v: TwistedVector.from_json(v, p.dual())  # noqa: E731
        else:
            load = load_dual = SeqVector.from_json
        fams = obj["families"]
        return cls(p, obj["delta"], [[load(v) for v in F["A"]] for F in fams],
                   [[load_dual(v) for v in F["Astar"]] for F in fams], space)


@dataclass
class BiorthReport:
    delta: float
    same_index: list      # j -> min_x max_{x*} <x*, x>
    cross: np.ndarray     # (j, k) -> max <x*, x>, x in A_j, x* in A_k*
    abs_cross: np.ndarray
    worst_norm_error: float
    worst_dual_excess: float

    @property
    def norms_ok(self) -> bool:
        return self.worst_norm_error <= NORM_TOL and self.worst_dual_excess <= NORM_TOL

    @property
    def condition2_ok(self) -> bool:
        return min(self.same_index) >= 1.0 - self.delta - NORM_TOL

    @property
    def condition3_ok(self) -> bool:
        off = ~np.eye(len(self.same_index), dtype=bool)
        return bool(np.all(self.cross[off] <= self.delta + NORM_TOL))

    @property
    def abs_cross_ok(self) -> bool:
        off = ~np.eye(len(self.same_index), dtype=bool)
        return bool(np.all(self.abs_cross[off] <= self.delta + NORM_TOL))

    @property
    def passed(self) -> bool:
        return self.norms_ok and self.condition2_ok and self.condition3_ok

    def margins(self) -> np.ndarray:
        """Every validated number in a fixed order, for before/after comparisons."""
        return np.concatenate([np.asarray(self.same_index), self.cross.ravel(),
                               self.abs_cross.ravel()])

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "same_index": list(self.same_index),
            "cross": self.cross.tolist(),
            "abs_cross": self.abs_cross.tolist(),
            "worst_norm_error": self.worst_norm_error,
            "worst_dual_excess": self.worst_dual_excess,
            "norms_ok": self.norms_ok,
            "condition2_ok": self.condition2_ok,
            "condition3_ok": self.condition3_ok,
            "abs_cross_ok": self.abs_cross_ok,
            "passed": self.passed,
        }


def _pairing_matrix(sys: BiorthSystem, A, As) -> np.ndarray:
    return np.array([[sys.pair(f, x) for f in As] for x in A])


def validate_biorth(sys: BiorthSystem) -> BiorthReport:
    m = len(sys)
    same, cross, abs_cross = [], np.zeros((m, m)), np.zeros((m, m))
    for j, A in enumerate(sys.families):
        for k, As in enumerate(sys.dual_families):
            P = _pairing_matrix(sys, A, As)
            cross[j, k] = P.max()
            abs_cross[j, k] = np.abs(P).max()
            if j == k:
                same.append(float(P.max(axis=1).min()))
    norm_err = max(abs(sys.norm(x) - 1.0) for A in sys.families for x in A)
    dual_excess = max(sys.dual_norm(f) - 1.0 for As in sys.dual_families for f in As)
    return BiorthReport(sys.delta, same, cross, abs_cross, norm_err, max(dual_excess, 0.0))


def renorm(v, eps: float, functionals: Sequence, p=None) -> float:
    """``eps ||v|| + max |f(v)|`` over the given functionals.

    A :class:`TwistedVector` is measured with the Z_p quasi-norm and the
    twisted pairing; a :class:`SeqVector` needs ``p``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not functionals:
        raise ValueError("the functional set must be nonempty")
    if isinstance(v, TwistedVector):
        return eps * quasi_norm(v) + max(abs(twisted_pairing(v, f)) for f in functionals)
    if p is None:
        raise ValueError("p is required for sequence input")
    return eps * lp_norm(v, p) + max(abs(pairing(f, v)) for f in functionals)


def distortion_bound(eps: float, delta: float) -> float:
    """Guaranteed oscillation ``(1 + eps - delta) / (eps + delta)`` of the renorming."""
    return (1.0 + eps - delta) / (eps + delta)


@dataclass
class DistortionResult:
    ratio: float
    bound: float
    witness: tuple  # (position in A_index, position in A_other)
    index: int
    other: int
    worst_ratio: float  # min over A_index / max over A_other

    @property
    def holds(self) -> bool:
        return self.ratio >= self.bound - NORM_TOL

    def to_json(self) -> dict:
        return {"ratio": self.ratio, "bound": self.bound, "holds": self.holds,
                "worst_ratio": self.worst_ratio, "witness": list(self.witness),
                "index": self.index, "other": self.other}


def distortion_lower_bound(sys: BiorthSystem, eps: float, index: int = 1,
                           other: int | None = None) -> DistortionResult:
    """Largest renorm ratio between ``A_index`` and ``A_other`` (1-based).

    The renorming uses the functionals of ``A_index*``.
    """
    report = validate_biorth(sys)
    if not report.passed:
        raise BiorthValidationError("system fails validation: " + json.dumps(
            {k: report.to_json()[k] for k in ("norms_ok", "condition2_ok", "condition3_ok")}))
    if other is None:
        other = 2 if index == 1 else 1
    if index == other or not (1 <= index <= len(sys) and 1 <= other <= len(sys)):
        raise ValueError("index and other must be distinct family numbers")
    Fs = sys.dual_families[index - 1]
    p = sys.p.p

    def rn(v):
        return renorm(v, eps, Fs, p)

    top = [rn(x) for x in sys.families[index - 1]]
    low = [rn(y) for y in sys.families[other - 1]]
    i, k = int(np.argmax(top)), int(np.argmin(low))
    return DistortionResult(top[i] / low[k], distortion_bound(eps, sys.delta), (i, k),
                            index, other, min(top) / max(low))


def lift_system(sys: BiorthSystem) -> BiorthSystem:
    """Carry an l_p system into Z_p.

    ``x`` becomes ``(x, 0)``; a functional ``b`` becomes ``(Omega_q(b), b)``,
    whose Z_q quasi-norm is exactly ``||b||_q`` and whose pairing with
    ``(x, 0)`` is exactly ``<x, b>``.
    """
    if sys.space != "ellp":
        raise ValueError("only l_p systems can be lifted")
    if not validate_biorth(sys).passed:
        raise BiorthValidationError("input system fails validation")
    p, q = sys.p, sys.p.dual()
    fams = [[TwistedVector.first(x, p) for x in A] for A in sys.families]
    duals = [[TwistedVector(omega_p(b, q.p), b, q) for b in As] for As in sys.dual_families]
    return BiorthSystem(p, sys.delta, fams, duals, "zp")


@dataclass(frozen=True)
class InevitabilityProbe:
    """Finite stand-in for a subspace, with search settings."""

    subspace_basis: tuple
    tolerance: float = 1e-6
    search_budget: int = 2000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "subspace_basis", tuple(self.subspace_basis))
        if not self.subspace_basis:
            raise ValueError("probe needs at least one basis vector")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        n = max(b.max_index() for b in self.subspace_basis)
        B = np.array([b.to_dense(n) for b in self.subspace_basis])
        if np.linalg.matrix_rank(B) < len(self.subspace_basis):
            raise ValueError("probe basis vectors are linearly dependent")


def _starts(B: np.ndarray, Amat: np.ndarray, rng) -> Iterator[np.ndarray]:
    for a in Amat:
        c = np.linalg.lstsq(B.T, a, rcond=None)[0]
        if np.any(c):
            yield c
            yield -c
    while True:
        yield rng.standard_normal(B.shape[0])


def _pattern_search(c, f, max_evals: int):
    """Compass search from ``c``; yields objective values as evaluated."""
    best = f(c)
    yield best
    used, k = 1, c.size
    h = 0.5 * max(np.abs(c).max(), 1e-12)
    floor = 1e-12 * h
    while h > floor and used < max_evals:
        improved = False
        for i in range(k):
            for s in (1.0, -1.0):
                t = c.copy()
                t[i] += s * h
                val = f(t)
                used += 1
                yield val
                if val < best:
                    best, c, improved = val, t, True
                    break
                if used >= max_evals:
                    return
            if improved:
                break
        if not improved:
            h *= 0.5


def inevitability_proxy(A_j: Sequence[SeqVector], probe: InevitabilityProbe, p) -> float:
    """Best distance found from the unit sphere of the probe span to ``A_j``.

    Seeded restarts (least-squares projections of each target first, then
    Gaussian directions) each followed by a compass search on the sphere.
    The evaluation schedule does not depend on the budget, so a larger
    budget can only lower the result.  The value is an upper bound on the
    true distance.
    """
    if probe.search_budget < 1:
        raise ValueError("search budget must be positive")
    p = as_exponent(p).p
    A_j = [a.x if isinstance(a, TwistedVector) else a for a in A_j]
    n = max(max(b.max_index() for b in probe.subspace_basis), max(a.max_index() for a in A_j))
    B = np.array([b.to_dense(n) for b in probe.subspace_basis])
    Amat = np.array([a.to_dense(n) for a in A_j])
    rng = np.random.default_rng(probe.seed)

    def f(c):
        return kernels.sphere_objective(c, B, Amat, p)

    best, used = math.inf, 0
    per_restart = 60 * B.shape[0] + 60
    for c0 in _starts(B, Amat, rng):
        for val in _pattern_search(c0, f, per_restart):
            best = min(best, val)
            used += 1
            if used >= probe.search_budget:
                return float(best)


@dataclass
class ChainResult:
    value: float            # Q(sum lambda_n w_n - (a, 0))
    chain_bound: float      # sum |lambda_n| eps / 2^n + ||u - a||_p
    approx_error: float     # ||u - a||_p
    eps: float

    @property
    def within_chain(self) -> bool:
        return self.value <= self.chain_bound + NORM_TOL

    @property
    def within_2eps(self) -> bool:
        return self.value <= 2.0 * self.eps + NORM_TOL

    @property
    def holds(self) -> bool:
        if self.approx_error <= self.eps:
            return self.within_2eps
        return self.within_chain

    def to_json(self) -> dict:
        return {"value": self.value, "chain_bound": self.chain_bound,
                "approx_error": self.approx_error, "two_eps": 2.0 * self.eps,
                "within_chain": self.within_chain, "within_2eps": self.within_2eps,
                "holds": self.holds}


def perturbation_chain_check(w_blocks: Sequence[TwistedVector], u_blocks, a: SeqVector,
                             coeffs: Sequence[float], eps: float) -> ChainResult:
    """Distance from ``sum lambda_n w_n`` to ``(a, 0)`` for perturbed blocks.

    Preconditions: ``||lambda||_p <= 1``, ``Q(w_n - (u_n, 0)) <= eps / 2^n``
    and ``||a||_p = 1``.
    """
    u_blocks = list(u_blocks)
    if not (len(w_blocks) == len(u_blocks) == len(coeffs)) or not w_blocks:
        raise PreconditionError("w_blocks, u_blocks and coeffs must have one common nonzero length")
    p = w_blocks[0].p
    lam = np.asarray(coeffs, dtype=np.float64)
    if kernels.lp_norm(lam, p.p) > 1.0 + 1e-12:
        raise PreconditionError(f"coefficients have l_p norm {kernels.lp_norm(lam, p.p):.17g} > 1")
    if abs(lp_norm(a, p.p) - 1.0) > NORM_TOL:
        raise PreconditionError("target a must be a unit vector")
    for n, (w, u) in enumerate(zip(w_blocks, u_blocks), 1):
        gap = quasi_norm(w - TwistedVector.first(u, p))
        if gap > eps / 2.0 ** n + 1e-12:
            raise PreconditionError(f"block {n}: perturbation {gap:.17g} exceeds eps/2^{n}")
    w = twisted_combination(lam, list(w_blocks))
    u = linear_combination(lam, u_blocks)
    value = quasi_norm(w - TwistedVector.first(a, p))
    approx = lp_norm(u - a, p.p)
    chain = float(np.sum(np.abs(lam) * eps / 2.0 ** np.arange(1, lam.size + 1))) + approx
    return ChainResult(value, chain, approx, eps)


def chain_instance(p, n: int, eps: float, seed: int, width: int = 3):
    """Random instance meeting the chain-check preconditions.

    Returns ``(w_blocks, u_blocks, a, coeffs)`` with normalized disjoint
    ``u_n``, perturbations of size at most ``eps / 2^n`` concentrated in
    the second coordinate, and ``a`` within ``eps`` of ``sum lambda_n u_n``.
    """
    p = as_exponent(p)
    rng = np.random.default_rng(seed)
    us = []
    for k in range(n):
        g = rng.standard_normal(width)
        us.append(SeqVector.from_dense(g / kernels.lp_norm(g, p.p), start=1 + k * width))
    lam = rng.standard_normal(n)
    lam *= rng.uniform(1.0 - eps / 4.0, 1.0) / kernels.lp_norm(lam, p.p)
    u = linear_combination(lam, us)
    # a: unit vector near u, distance at most eps
    jitter = SeqVector.from_dense(rng.standard_normal(n * width))
    a = u + jitter * (eps / 4.0 / lp_norm(jitter, p.p))
    a = a / lp_norm(a, p.p)
    ws = []
    for k, uk in enumerate(us, 1):
        r = SeqVector.from_dense(rng.standard_normal(width), start=1 + (k - 1) * width)
        v = SeqVector.from_dense(rng.standard_normal(width), start=1 + (k - 1) * width)
        d = TwistedVector(r * rng.uniform(0.0, 0.2), v, p)
        d = d * (rng.uniform(0.5, 1.0) * eps / 2.0 ** k / quasi_norm(d))
        ws.append(TwistedVector.first(uk, p) + d)
    return ws, us, a, lam


def synth_system(p, delta: float, seed: int, families: int = 3, size: int = 4,
                 width: int = 4) -> BiorthSystem:
    """Synthetic l_p system: disjoint windows per family plus small cross terms.

    Each element of ``A_j`` is a random unit vector ``b`` on window ``j``
    plus a cross term of relative size ``tau`` on another family's window
    (sometimes aligned with that family's own vectors), renormalized.  The
    functionals of ``A_j*`` are the norming functionals
    ``sign(b) |b|^(p-1)`` of the main parts.  ``tau`` is capped so that the
    same-index pairing ``(1 + tau^p)^(-1/p)`` stays at least ``1 - delta``
    and every cross pairing stays at most ``tau <= delta`` in modulus.
    """
    p = as_exponent(p)
    if families < 2:
        raise ValueError("need at least two families")
    rng = np.random.default_rng(seed)
    tau_max = 0.999 * min(delta, ((1.0 - delta) ** -p.p - 1.0) ** (1.0 / p.p))
    mains = []
    for j in range(families):
        blk = []
        for _ in range(size):
            g = rng.standard_normal(width)
            blk.append(SeqVector.from_dense(g / kernels.lp_norm(g, p.p), start=1 + j * width))
        mains.append(blk)
    fams, duals = [], []
    for j in range(families):
        A, As = [], []
        for b in mains[j]:
            k = int(rng.choice([i for i in range(families) if i != j]))
            if rng.random() < 0.5:
                d = mains[k][int(rng.integers(size))]
            else:
                g = rng.standard_normal(width)
                d = SeqVector.from_dense(g / kernels.lp_norm(g, p.p), start=1 + k * width)
            tau = rng.uniform(0.0, tau_max)
            x = b + d * tau
            A.append(x / lp_norm(x, p.p))
            bv = b.values
            As.append(SeqVector._raw(b.indices, np.sign(bv) * np.abs(bv) ** (p.p - 1.0)))
        fams.append(A)
        duals.append(As)
    return BiorthSystem(p, delta, fams, duals, "ellp")
