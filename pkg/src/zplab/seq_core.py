"""Finitely supported real sequences and the l_p machinery on them.

A :class:`SeqVector` stores a sorted array of 1-based indices and the
matching nonzero values; everything outside the stored support is zero.
Norms and pairings are computed on the value arrays through
:mod:`zplab.kernels`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels

__all__ = [
    "PExponent", "SeqVector", "as_exponent", "lp_norm", "sup_norm", "pairing",
    "pointwise_mul", "are_disjoint", "linear_combination", "parse_sparse",
    "format_sparse", "unit",
]


@dataclass(frozen=True)
class PExponent:
    """Exponent ``1 < p < inf``; the dual exponent is derived on demand."""

    p: float

    def __post_init__(self):
        p = float(self.p)
        if not (1.0 < p < math.inf):
            raise ValueError(f"exponent must satisfy 1 < p < inf, got {self.p!r}")
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def dual(self) -> "PExponent":
        return PExponent(self.q)

    def __float__(self):
        return self.p


def as_exponent(p) -> PExponent:
    return p if isinstance(p, PExponent) else PExponent(p)


class SeqVector:
    """Immutable finitely supported real sequence in canonical form.

    Parameters
    ----------
    indices, values : array_like
        Matching 1-based indices and values.  Duplicate indices are
        rejected; exact zeros are dropped.
    """

    __slots__ = ("_idx", "_val")

    def __init__(self, indices=(), values=()):
        idx = np.asarray(indices, dtype=np.int64).ravel()
        val = np.asarray(values, dtype=np.float64).ravel()
        if idx.shape != val.shape:
            raise ValueError("indices and values must have the same length")
        if idx.size and idx.min() < 1:
            raise ValueError("indices are 1-based")
        order = np.argsort(idx, kind="stable")
        idx, val = idx[order], val[order]
        if idx.size > 1 and np.any(idx[1:] == idx[:-1]):
            raise ValueError("duplicate index in SeqVector")
        if not np.all(np.isfinite(val)):
            raise ValueError("SeqVector values must be finite")
        keep = val != 0.0
        self._set(idx[keep], val[keep])

    def _set(self, idx, val):
        idx.flags.writeable = False
        val.flags.writeable = False
        object.__setattr__(self, "_idx", idx)
        object.__setattr__(self, "_val", val)

    @classmethod
    def _raw(cls, idx, val):
        # caller guarantees sorted, distinct indices
        keep = val != 0.0
        obj = cls.__new__(cls)
        obj._set(np.ascontiguousarray(idx[keep], dtype=np.int64),
                 np.ascontiguousarray(val[keep], dtype=np.float64))
        return obj

    @classmethod
    def from_dense(cls, values, start=1):
        val = np.asarray(values, dtype=np.float64).ravel()
        return cls._raw(np.arange(start, start + val.size, dtype=np.int64), val)

    @classmethod
    def from_dict(cls, mapping: Mapping[int, float]):
        return cls(list(mapping.keys()), list(mapping.values()))

    @classmethod
    def zero(cls):
        return cls()

    def __setattr__(self, name, value):
        raise AttributeError("SeqVector is immutable")

    @property
    def indices(self) -> np.ndarray:
        return self._idx

    @property
    def values(self) -> np.ndarray:
        return self._val

    def entries(self):
        return [(int(i), float(v)) for i, v in zip(self._idx, self._val)]

    def support(self) -> frozenset:
        return frozenset(int(i) for i in self._idx)

    def is_zero(self) -> bool:
        return self._idx.size == 0

    def max_index(self) -> int:
        return int(self._idx[-1]) if self._idx.size else 0

    def min_index(self) -> int:
        return int(self._idx[0]) if self._idx.size else 0

    def __len__(self):
        return int(self._idx.size)

    def __getitem__(self, i: int) -> float:
        k = np.searchsorted(self._idx, i)
        if k < self._idx.size and self._idx[k] == i:
            return float(self._val[k])
        return 0.0

    def to_dense(self, n: int | None = None) -> np.ndarray:
        n = self.max_index() if n is None else n
        out = np.zeros(n)
        if self._idx.size:
            if self._idx[-1] > n:
                raise ValueError(f"support reaches index {self.max_index()} > {n}")
            out[self._idx - 1] = self._val
        return out

    def restrict(self, indices: Iterable[int]) -> "SeqVector":
        mask = np.isin(self._idx, np.fromiter(indices, dtype=np.int64))
        return SeqVector._raw(self._idx[mask], self._val[mask])

    def __add__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return linear_combination((1.0, 1.0), (self, other))

    def __sub__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return linear_combination((1.0, -1.0), (self, other))

    def __neg__(self):
        return SeqVector._raw(self._idx, -self._val)

    def __mul__(self, scalar):
        if isinstance(scalar, SeqVector):
            return pointwise_mul(self, scalar)
        return SeqVector._raw(self._idx, self._val * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return SeqVector._raw(self._idx, self._val / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, SeqVector):
            return NotImplemented
        return np.array_equal(self._idx, other._idx) and np.array_equal(self._val, other._val)

    __hash__ = None

    def __repr__(self):
        body = ", ".join(f"{i}: {v:.6g}" for i, v in self.entries())
        return f"SeqVector({{{body}}})"

    def to_json(self) -> dict:
        return {"entries": [[i, v] for i, v in self.entries()]}

    @classmethod
    def from_json(cls, obj) -> "SeqVector":
        if isinstance(obj, str):
            obj = json.loads(obj)
        entries = obj["entries"]
        idx = [int(i) for i, _ in entries]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("SeqVector JSON entries must have strictly increasing indices")
        return cls(idx, [float(v) for _, v in entries])


def unit(i: int) -> SeqVector:
    """The unit vector ``e_i``."""
    return SeqVector([i], [1.0])


def linear_combination(coeffs: Sequence[float], vecs: Sequence[SeqVector]) -> SeqVector:
    """Return ``sum(c * v)``, accumulating coordinates in input order."""
    if len(coeffs) != len(vecs):
        raise ValueError("coefficient and vector counts differ")
    if not vecs:
        return SeqVector()
    idx = np.concatenate([v.indices for v in vecs])
    val = np.concatenate([float(c) * v.values for c, v in zip(coeffs, vecs)])
    uniq, inv = np.unique(idx, return_inverse=True)
    acc = np.zeros(uniq.size)
    np.add.at(acc, inv, val)
    return SeqVector._raw(uniq, acc)


def lp_norm(x: SeqVector, p) -> float:
    """(sum |x_i|^p)^(1/p); the empty vector has norm 0."""
    return kernels.lp_norm(x.values, float(p))


def sup_norm(a: SeqVector) -> float:
    return float(np.abs(a.values).max()) if len(a) else 0.0


def pairing(x: SeqVector, b: SeqVector) -> float:
    """Bilinear bracket sum_i x_i b_i (no conjugation)."""
    common, ix, ib = np.intersect1d(x.indices, b.indices, assume_unique=True,
                                    return_indices=True)
    if common.size == 0:
        return 0.0
    return float(np.dot(x.values[ix], b.values[ib]))


def pointwise_mul(a: SeqVector, x: SeqVector) -> SeqVector:
    common, ia, ix = np.intersect1d(a.indices, x.indices, assume_unique=True,
                                    return_indices=True)
    return SeqVector._raw(common, a.values[ia] * x.values[ix])


def are_disjoint(blocks: Sequence[SeqVector]) -> bool:
    idx = np.concatenate([b.indices for b in blocks]) if blocks else np.empty(0, np.int64)
    return np.unique(idx).size == idx.size


def parse_sparse(text: str) -> SeqVector:
    """Parse the command-line grammar ``"i1:v1;i2:v2;..."``."""
    text = text.strip()
    if not text:
        return SeqVector()
    idx, val = [], []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            i, v = item.split(":")
            idx.append(int(i))
            val.append(float(v))
        except ValueError as exc:
            raise ValueError(f"bad sparse entry {item!r}; expected 'index:value'") from exc
    return SeqVector(idx, val)


def format_sparse(x: SeqVector) -> str:
    return ";".join(f"{i}:{v:.17g}" for i, v in x.entries())
