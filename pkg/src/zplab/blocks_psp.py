"""Block sequences, the log-lift quantity and the flattening procedure.

For disjoint blocks ``u_1, ..., u_n`` with norms ``c_k`` and
``S = ||sum u_k||_p`` one has coordinatewise

    Omega_p(sum u_k) - sum Omega_p(u_k) = sum_k log(c_k / S) u_k,

so ``n`` normalized blocks give a log-lift of exactly ``n^(1/p) log(n) / p``.
A pair ``(x, u)`` whose second coordinate is small is moved onto the first
coordinate by ``y = x - Omega_p(u)`` at quasi-norm cost exactly ``||u||_p``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .kp_centralizer import TwistedVector, omega_p, quasi_norm, twisted_combination
from .seq_core import (PExponent, SeqVector, are_disjoint, as_exponent,
                       linear_combination, lp_norm)

__all__ = [
    "BlockSequence", "GrowthTable", "LowerBoundCheck", "make_disjoint_blocks",
    "log_lift", "disjoint_lift_vector", "log_lift_lower_bound",
    "log_lift_lower_bound_check", "psp_flatten", "normalize_flattened",
    "block_sum_growth", "PROFILES",
]

PROFILES = ("flat", "geometric", "singleton")


@dataclass(frozen=True)
class BlockSequence:
    """Nonzero vectors with successively increasing, disjoint supports."""

    blocks: tuple
    p: PExponent

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        object.__setattr__(self, "p", as_exponent(self.p))
        for k, b in enumerate(self.blocks):
            if b.is_zero():
                raise ValueError(f"block {k + 1} is the zero vector")
        for k in range(len(self.blocks) - 1):
            if self.blocks[k].max_index() >= self.blocks[k + 1].min_index():
                raise ValueError(f"blocks {k + 1} and {k + 2} are not successive")

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, k):
        return self.blocks[k]

    def norms(self) -> np.ndarray:
        return np.array([lp_norm(b, self.p.p) for b in self.blocks])

    def total(self) -> SeqVector:
        return linear_combination([1.0] * len(self.blocks), self.blocks)


def make_disjoint_blocks(n: int, width: int, profile: str, p, normalize: bool = True) -> BlockSequence:
    """``n`` blocks on consecutive windows of ``width`` coordinates.

    ``flat`` puts ones on the window, ``geometric`` puts ``2^-i``,
    ``singleton`` uses only the first coordinate of each window.
    """
    if n < 1 or width < 1:
        raise ValueError("n and width must be at least 1")
    if profile == "flat":
        coef = np.ones(width)
    elif profile == "geometric":
        coef = 0.5 ** np.arange(width)
    elif profile == "singleton":
        coef = np.zeros(width)
        coef[0] = 1.0
    else:
        raise ValueError(f"unknown profile {profile!r}; choose from {PROFILES}")
    p = as_exponent(p)
    if normalize:
        coef = coef / kernels.lp_norm(coef, p.p)
    blocks = [SeqVector.from_dense(coef, start=1 + k * width) for k in range(n)]
    return BlockSequence(blocks, p)


def _offsets(blocks):
    return np.concatenate([[0], np.cumsum([len(b) for b in blocks])]).astype(np.int64)


def log_lift(blocks: BlockSequence | Sequence[SeqVector], p=None) -> float:
    """``||Omega_p(sum u_j) - sum Omega_p(u_j)||_p``.

    Disjoint input runs through a dense kernel; overlapping supports are
    evaluated with the generic map.
    """
    if isinstance(blocks, BlockSequence):
        p = blocks.p.p if p is None else float(p)
        blocks = blocks.blocks
    if p is None:
        raise ValueError("exponent required for a plain list of blocks")
    p = float(p)
    if not blocks:
        raise ValueError("log_lift needs at least one block")
    if are_disjoint(blocks):
        order = np.argsort([b.min_index() for b in blocks], kind="stable")
        blocks = [blocks[k] for k in order]
        values = np.concatenate([b.values for b in blocks])
        return float(kernels.lift_disjoint(values, _offsets(blocks), p))
    total = linear_combination([1.0] * len(blocks), blocks)
    parts = linear_combination([1.0] * len(blocks), [omega_p(b, p) for b in blocks])
    return lp_norm(omega_p(total, p) - parts, p)


def disjoint_lift_vector(blocks: BlockSequence) -> SeqVector:
    """The closed form ``sum_k log(c_k / S) u_k`` for disjoint blocks."""
    c = blocks.norms()
    S = kernels.lp_norm(c, blocks.p.p)
    return linear_combination(np.log(c / S), blocks.blocks)


def log_lift_lower_bound(norms_floor: float, n: int, p) -> float:
    """``eta * max(0, log(n)/p + log(eta)) * n^(1/p)`` for block norms in ``[eta, 1]``."""
    p = as_exponent(p).p
    eta = float(norms_floor)
    return eta * max(0.0, math.log(n) / p + math.log(eta)) * n ** (1.0 / p)


@dataclass(frozen=True)
class LowerBoundCheck:
    value: float
    bound: float
    holds: bool


def log_lift_lower_bound_check(blocks: BlockSequence, eta: float, tol: float = 1e-10) -> LowerBoundCheck:
    """Compare the log-lift of semi-normalized blocks with its explicit lower bound.

    With block norms ``c_k`` in ``[eta, 1]`` the total norm ``S`` is at
    least ``eta n^(1/p)``, so every factor ``log(S / c_k)`` is at least
    ``log(n)/p + log(eta)``.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must lie in (0, 1]")
    p = blocks.p.p
    norms = blocks.norms()
    for k, c in enumerate(norms):
        if not (eta - 1e-12 <= c <= 1.0 + 1e-12):
            raise ValueError(f"block {k + 1} has norm {c:.17g} outside [{eta}, 1]")
    value = log_lift(blocks)
    bound = log_lift_lower_bound(eta, len(blocks), p)
    return LowerBoundCheck(value, bound, value >= bound - tol)


def psp_flatten(pairs: Sequence[TwistedVector]) -> list[tuple[SeqVector, float]]:
    """Move each pair onto the first coordinate: ``y = x - Omega_p(u)``.

    Returns ``(y, err)`` with ``err = Q((x, u) - (y, 0))``, which equals
    ``||u||_p`` because the difference is ``(Omega_p(u), u)``.
    """
    if not pairs:
        return []
    p = pairs[0].p
    out = []
    for j, w in enumerate(pairs, 1):
        if w.p != p:
            raise ValueError(f"pair {j} has exponent {w.p.p}, expected {p.p}")
        y = w.x - omega_p(w.y, p.p)
        err = quasi_norm(w - TwistedVector.first(y, p))
        out.append((y, err))
    return out


def normalize_flattened(ys: Sequence[SeqVector], p) -> tuple[list[SeqVector], np.ndarray]:
    """Scale each ``y_j`` to unit norm; returns the vectors and factors ``1/||y_j||``."""
    p = as_exponent(p).p
    out, lam = [], []
    for j, y in enumerate(ys, 1):
        nrm = lp_norm(y, p)
        if nrm == 0.0:
            raise ValueError(f"flattened vector {j} is zero; input was not a small "
                             "perturbation of first-coordinate blocks")
        out.append(y / nrm)
        lam.append(1.0 / nrm)
    lam = np.array(lam)
    assert lam.size == 0 or (lam.min() > 0.0 and np.isfinite(lam.max()))
    return out, lam


@dataclass
class GrowthTable:
    law: str
    rows: list = field(default_factory=list)

    def add(self, n, value, reference):
        if self.rows and n <= self.rows[-1][0]:
            raise ValueError("n must increase across rows")
        self.rows.append((int(n), float(value), float(reference)))

    def ratios(self) -> np.ndarray:
        return np.array([v / r for _, v, r in self.rows])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "reference", "law"])
        for n, v, r in self.rows:
            w.writerow([n, f"{v:.17g}", f"{r:.17g}", self.law])
        return buf.getvalue()


def block_sum_growth(pairs: Sequence[TwistedVector], n_values: Sequence[int]) -> GrowthTable:
    """Quasi-norm of the partial sums ``sum_{j<=n} (x_j, u_j)`` against ``n^(1/p)``."""
    if not pairs:
        raise ValueError("no pairs given")
    if not are_disjoint([w.x for w in pairs]) or not are_disjoint([w.y for w in pairs]):
        raise ValueError("first and second coordinates must each form disjoint families")
    p = pairs[0].p.p
    table = GrowthTable(law="n^(1/p)")
    for n in n_values:
        if not 1 <= n <= len(pairs):
            raise ValueError(f"n={n} outside 1..{len(pairs)}")
        total = twisted_combination([1.0] * n, list(pairs[:n]))
        table.add(n, quasi_norm(total), n ** (1.0 / p))
    return table
