"""The Kalton-Peck map, the Z_p quasi-norm and the twisted pairing.

Elements of a finite section of Z_p are pairs ``(x, y)`` of finitely
supported sequences with quasi-norm ``||x - Omega_p(y)||_p + ||y||_p``.
The dual side is represented by the same pair type at the conjugate
exponent.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .seq_core import (PExponent, SeqVector, as_exponent, linear_combination,
                       lp_norm, pairing, pointwise_mul)

__all__ = [
    "TwistedVector", "CentralizerSpec", "ExponentMismatch", "DegenerateSampleError",
    "omega_p", "quasi_norm", "centralizer_defect", "centralizer_ratios",
    "estimate_centralizer_constant", "twisted_pairing", "quasi_triangle_defect",
    "adversarial_battery",
]


class ExponentMismatch(ValueError):
    pass


class DegenerateSampleError(ValueError):
    """Every sample had a vanishing denominator."""


def omega_p(x: SeqVector, p) -> SeqVector:
    """Kalton-Peck map ``x_i * log(|x_i| / ||x||_p)`` with ``0 log 0 = 0``.

    Zero coordinates are never passed to the logarithm, and
    ``omega_p(0) = 0``.
    """
    if x.is_zero():
        return SeqVector()
    return SeqVector._raw(x.indices, kernels.omega(x.values, float(p)))


@dataclass(frozen=True)
class TwistedVector:
    x: SeqVector
    y: SeqVector
    p: PExponent

    def __post_init__(self):
        object.__setattr__(self, "p", as_exponent(self.p))

    @classmethod
    def first(cls, x: SeqVector, p) -> "TwistedVector":
        """Embed ``x`` as ``(x, 0)``."""
        return cls(x, SeqVector(), p)

    def _check(self, other):
        if not isinstance(other, TwistedVector):
            return False
        if other.p != self.p:
            raise ExponentMismatch(f"exponents differ: {self.p.p} vs {other.p.p}")
        return True

    def __add__(self, other):
        if not self._check(other):
            return NotImplemented
        return TwistedVector(self.x + other.x, self.y + other.y, self.p)

    def __sub__(self, other):
        if not self._check(other):
            return NotImplemented
        return TwistedVector(self.x - other.x, self.y - other.y, self.p)

    def __neg__(self):
        return TwistedVector(-self.x, -self.y, self.p)

    def __mul__(self, scalar):
        return TwistedVector(self.x * scalar, self.y * scalar, self.p)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, TwistedVector):
            return NotImplemented
        return self.p == other.p and self.x == other.x and self.y == other.y

    __hash__ = None

    def to_json(self) -> dict:
        return {"x": self.x.to_json(), "y": self.y.to_json()}

    @classmethod
    def from_json(cls, obj, p) -> "TwistedVector":
        return cls(SeqVector.from_json(obj["x"]), SeqVector.from_json(obj["y"]), p)


def twisted_combination(coeffs, vecs) -> TwistedVector:
    if not vecs:
        raise ValueError("empty combination has no exponent")
    p = vecs[0].p
    if any(v.p != p for v in vecs):
        raise ExponentMismatch("mixed exponents in combination")
    return TwistedVector(linear_combination(coeffs, [v.x for v in vecs]),
                         linear_combination(coeffs, [v.y for v in vecs]), p)


@dataclass(frozen=True)
class CentralizerSpec:
    """Which centralizer builds the twisted sum.  Only Kalton-Peck exists."""

    p: PExponent
    kind: str = "kalton-peck"

    def __post_init__(self):
        object.__setattr__(self, "p", as_exponent(self.p))
        if self.kind != "kalton-peck":
            raise ValueError(f"unsupported centralizer kind {self.kind!r}")

    def __call__(self, x: SeqVector) -> SeqVector:
        return omega_p(x, self.p.p)


def quasi_norm(z: TwistedVector, omega: CentralizerSpec | None = None) -> float:
    if omega is not None and omega.p != z.p:
        raise ExponentMismatch(
            f"centralizer exponent {omega.p.p} does not match vector exponent {z.p.p}")
    p = z.p.p
    return lp_norm(z.x - omega_p(z.y, p), p) + lp_norm(z.y, p)


def centralizer_defect(a: SeqVector, x: SeqVector, p) -> float:
    """``||Omega(a x) - a Omega(x)||_p`` for a multiplier ``a``."""
    p = float(p)
    return lp_norm(omega_p(pointwise_mul(a, x), p) - pointwise_mul(a, omega_p(x, p)), p)


def twisted_pairing(z: TwistedVector, f: TwistedVector) -> float:
    """``<(x, y), (a, b)> = <x, b> + <y, a>``."""
    return pairing(z.x, f.y) + pairing(z.y, f.x)


def adversarial_battery(dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Fixed dense (multiplier, vector) pairs known to produce large defects.

    Indicator multipliers of initial segments against flat vectors,
    geometrically decaying vectors and single spikes.
    """
    flat = np.ones(dim)
    geom = 0.5 ** np.arange(dim)
    spike = np.zeros(dim)
    spike[0] = 1.0
    spiky = np.full(dim, np.e ** -1)
    spiky[0] = 1.0
    out = []
    for k in range(1, dim + 1):
        ind = np.zeros(dim)
        ind[:k] = 1.0
        for x in (flat, geom, geom[::-1].copy(), spiky):
            out.append((ind, x))
            out.append((1.0 - ind, x))
    out.append((flat, spike))
    return out


def _sample_stream(rng, dim, trials):
    # one draw per trial in a fixed order so longer runs extend shorter ones
    A = np.empty((trials, dim))
    X = np.empty((trials, dim))
    for t in range(trials):
        X[t] = rng.standard_normal(dim)
        A[t] = rng.standard_normal(dim)
    return A, X


def centralizer_ratios(multipliers, vectors, p) -> np.ndarray:
    """Ratios ``defect(a, x) / (||a||_inf ||x||_p)``; NaN marks a zero denominator."""
    return kernels.defect_ratios(np.asarray(multipliers, dtype=np.float64),
                                 np.asarray(vectors, dtype=np.float64), float(p))


def _nanmax(ratios, what):
    ratios = np.asarray(ratios)
    if ratios.size == 0 or np.all(np.isnan(ratios)):
        raise DegenerateSampleError(f"all {what} samples are degenerate")
    return float(np.nanmax(ratios))


def estimate_centralizer_constant(p, dim: int, trials: int, seed: int,
                                  battery: bool = True) -> float:
    """Empirical lower estimate of the centralizer constant of ``Omega_p``.

    Maximum of the defect ratio over ``trials`` Gaussian samples and, when
    ``battery`` is set, the fixed adversarial battery.  Deterministic in
    ``seed``; growing ``trials`` only appends samples.
    """
    p = as_exponent(p).p
    if dim < 1 or trials < 1:
        raise ValueError("dim and trials must be at least 1")
    A, X = _sample_stream(np.random.default_rng(seed), dim, trials)
    if battery:
        bat = adversarial_battery(dim)
        A = np.vstack([np.array([a for a, _ in bat]), A])
        X = np.vstack([np.array([x for _, x in bat]), X])
    return _nanmax(centralizer_ratios(A, X, p), "centralizer")


def quasi_triangle_defect(p, dim: int, trials: int, seed: int, battery: bool = True) -> float:
    """Largest observed ``Q(z + w) / (Q(z) + Q(w))`` for the Z_p quasi-norm ``Q``.

    A value above 1 certifies that ``Q`` violates the triangle inequality.
    """
    p = as_exponent(p).p
    if dim < 1 or trials < 1:
        raise ValueError("dim and trials must be at least 1")
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(trials):
        rows.append(rng.standard_normal((4, dim)))
    if battery and dim >= 2:
        e1 = np.zeros(dim)
        e1[0] = 1.0
        tail = np.zeros(dim)
        tail[1:] = 1.0
        tail /= kernels.lp_norm(tail, p)
        for y1, y2 in ((e1, tail), (e1, 1.0 - e1)):
            rows.append(np.array([kernels.omega(y1, p), y1, kernels.omega(y2, p), y2]))
            rows.append(np.array([np.zeros(dim), y1, np.zeros(dim), y2]))
    S = np.array(rows)
    ratios = kernels.triangle_ratios(S[:, 0], S[:, 1], S[:, 2], S[:, 3], p)
    return _nanmax(ratios, "quasi-triangle")
