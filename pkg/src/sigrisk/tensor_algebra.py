"""Dense truncated tensor algebra T^(N)(R^d).

A tensor is stored as one contiguous float64 vector holding levels 0..N back
to back.  Level ``k`` has ``d**k`` coordinates and a word ``(i1, ..., ik)``
sits at flat position ``i1*d**(k-1) + ... + ik`` inside its level (leftmost
letter most significant).  ``TruncatedTensor.levels`` exposes read-only views
per level.

Products silently drop everything above the truncation depth.  Inverse,
exponential and logarithm are finite series that terminate exactly at the
depth, so no iteration tolerance is involved.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import NotGroupLikeError, ShapeMismatchError, SigRiskError, TruncationError

__all__ = [
    "AlgebraShape",
    "TruncatedTensor",
    "GroupElement",
    "MultiIndex",
    "identity",
    "zeros",
    "basis",
    "tensor_product",
    "group_inverse",
    "tensor_exp",
    "tensor_log",
    "shuffle_product",
    "inner_product",
    "weighted_norm",
    "sym_anti_level2",
    "lie_projection",
    "group_projection",
    "tensor_to_json",
    "tensor_from_json",
    "dumps",
    "loads",
]


@dataclass(frozen=True)
class AlgebraShape:
    """Channel count ``dim`` (time channel included) and truncation ``depth``."""

    dim: int
    depth: int

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise SigRiskError(f"dim must be a positive integer, got {self.dim!r}", code="tensor_algebra.invalid_shape")
        if isinstance(self.depth, bool) or not isinstance(self.depth, (int, np.integer)) or self.depth < 1:
            raise SigRiskError(f"depth must be a positive integer, got {self.depth!r}", code="tensor_algebra.invalid_shape")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "depth", int(self.depth))

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """Start of each level in the flat vector, plus the total size."""
        return _offsets(self.dim, self.depth)

    @property
    def size(self) -> int:
        """Total coordinate count D = sum_k dim**k."""
        return self.offsets[-1]

    def level_slice(self, k: int) -> slice:
        return slice(self.offsets[k], self.offsets[k + 1])

    def word_index(self, word: Sequence[int]) -> int:
        """Flat position of a word (empty word is the scalar slot)."""
        word = tuple(word)
        if len(word) > self.depth:
            raise TruncationError(f"word {word} longer than depth {self.depth}")
        idx = 0
        for letter in word:
            if not 0 <= letter < self.dim:
                raise SigRiskError(f"letter {letter} outside 0..{self.dim - 1}", code="tensor_algebra.invalid_word")
            idx = idx * self.dim + letter
        return self.offsets[len(word)] + idx

    def word_at(self, index: int) -> tuple[int, ...]:
        """Inverse of :meth:`word_index`."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        k = int(np.searchsorted(self.offsets, index, side="right")) - 1
        rem = index - self.offsets[k]
        word = []
        for _ in range(k):
            rem, letter = divmod(rem, self.dim)
            word.append(letter)
        return tuple(reversed(word))


@lru_cache(maxsize=None)
def _offsets(dim, depth):
    out = [0]
    for k in range(depth + 1):
        out.append(out[-1] + dim**k)
    return tuple(out)


class TruncatedTensor:
    """Immutable element of the truncated tensor algebra."""

    __slots__ = ("shape", "_data")

    def __init__(self, shape: AlgebraShape, data, *, copy: bool = True):
        arr = np.array(data, dtype=np.float64, copy=True) if copy else np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != shape.size:
            raise ShapeMismatchError(f"expected {shape.size} coordinates for {shape}, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise SigRiskError("tensor coordinates must be finite", code="tensor_algebra.non_finite")
        arr.flags.writeable = False
        self.shape = shape
        self._data = arr
        self._check()

    def _check(self):
        pass

    @classmethod
    def from_levels(cls, shape: AlgebraShape, levels: Sequence[Iterable[float]]):
        if len(levels) != shape.depth + 1:
            raise ShapeMismatchError(f"expected {shape.depth + 1} levels, got {len(levels)}")
        parts = []
        for k, lev in enumerate(levels):
            arr = np.asarray(lev, dtype=np.float64).ravel()
            if arr.shape[0] != shape.dim**k:
                raise ShapeMismatchError(f"level {k} must have {shape.dim**k} coordinates, got {arr.shape[0]}")
            parts.append(arr)
        return cls(shape, np.concatenate(parts), copy=False)

    @property
    def data(self) -> np.ndarray:
        """Flat read-only coordinate vector."""
        return self._data

    @property
    def levels(self) -> list[np.ndarray]:
        return [self.level(k) for k in range(self.shape.depth + 1)]

    def level(self, k: int) -> np.ndarray:
        return self._data[self.shape.level_slice(k)]

    def level_matrix(self, k: int = 2) -> np.ndarray:
        """Level ``k`` reshaped to a ``(dim,)*k`` array."""
        return self.level(k).reshape((self.shape.dim,) * k)

    def __getitem__(self, word) -> float:
        if isinstance(word, (int, np.integer)):
            word = (int(word),)
        return float(self._data[self.shape.word_index(word)])

    @property
    def scalar(self) -> float:
        return float(self._data[0])

    def is_group_like(self) -> bool:
        return self._data[0] == 1.0

    def as_group(self) -> "GroupElement":
        return GroupElement(self.shape, self._data, copy=False)

    def as_tensor(self) -> "TruncatedTensor":
        return TruncatedTensor(self.shape, self._data, copy=False)

    def truncate(self, level: int) -> "TruncatedTensor":
        """Copy with every level above ``level`` zeroed."""
        out = self._data.copy()
        out[self.shape.offsets[level + 1]:] = 0.0
        return TruncatedTensor(self.shape, out, copy=False)

    def _coerce(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeMismatchError(f"shape mismatch: {self.shape} vs {other.shape}")
        return other._data

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TruncatedTensor(self.shape, self._data + o, copy=False)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return TruncatedTensor(self.shape, self._data - o, copy=False)

    def __neg__(self):
        return TruncatedTensor(self.shape, -self._data, copy=False)

    def __mul__(self, scalar):
        if isinstance(scalar, TruncatedTensor):
            return NotImplemented
        return TruncatedTensor(self.shape, self._data * float(scalar), copy=False)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TruncatedTensor(self.shape, self._data / float(scalar), copy=False)

    def __eq__(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._data, other._data)

    __hash__ = None

    def allclose(self, other: "TruncatedTensor", atol: float = 1e-10, rtol: float = 0.0) -> bool:
        return self.shape == other.shape and np.allclose(self._data, other._data, atol=atol, rtol=rtol)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.shape.dim}, depth={self.shape.depth}, levels={[lv.tolist() for lv in self.levels]!r})"


class GroupElement(TruncatedTensor):
    """Tensor whose scalar level is exactly 1 (signatures, bridge operators)."""

    __slots__ = ()

    def _check(self):
        if self._data[0] != 1.0:
            raise NotGroupLikeError(f"group element needs scalar level 1.0, got {self._data[0]!r}")


@dataclass(frozen=True)
class MultiIndex:
    """A word over the letters ``0..dim-1`` of length at most ``depth``."""

    word: tuple[int, ...]
    shape: AlgebraShape

    def __post_init__(self):
        object.__setattr__(self, "word", tuple(int(x) for x in self.word))
        self.shape.word_index(self.word)

    def __len__(self):
        return len(self.word)

    @property
    def index(self) -> int:
        return self.shape.word_index(self.word)


def identity(shape: AlgebraShape) -> GroupElement:
    data = np.zeros(shape.size)
    data[0] = 1.0
    return GroupElement(shape, data, copy=False)


def zeros(shape: AlgebraShape) -> TruncatedTensor:
    return TruncatedTensor(shape, np.zeros(shape.size), copy=False)


def basis(shape: AlgebraShape, word: Sequence[int], value: float = 1.0) -> TruncatedTensor:
    """Indicator tensor ``value * e_word``."""
    data = np.zeros(shape.size)
    data[shape.word_index(word)] = value
    return TruncatedTensor(shape, data, copy=False)


def _same_shape(a: TruncatedTensor, b: TruncatedTensor):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def _mul_raw(a: np.ndarray, b: np.ndarray, shape: AlgebraShape) -> np.ndarray:
    return _kernels.tensor_mul(a, b, shape.dim, shape.depth)


def tensor_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Truncated product; a GroupElement when both factors are."""
    _same_shape(a, b)
    out = _mul_raw(a.data, b.data, a.shape)
    if isinstance(a, GroupElement) and isinstance(b, GroupElement):
        # 1*1 is exact so the scalar stays 1.0
        return GroupElement(a.shape, out, copy=False)
    return TruncatedTensor(a.shape, out, copy=False)


def _require_unit_scalar(g: TruncatedTensor, what: str):
    if g.data[0] != 1.0:
        raise NotGroupLikeError(f"{what} needs scalar level 1.0, got {g.data[0]!r}")


def group_inverse(g: TruncatedTensor) -> GroupElement:
    """Inverse via the Neumann series sum_k (-(g-1))^k, exact at the depth."""
    _require_unit_scalar(g, "group_inverse")
    shape = g.shape
    x = g.data.copy()
    x[0] = 0.0
    result = np.zeros(shape.size)
    result[0] = 1.0
    for _ in range(shape.depth):
        result = -_mul_raw(x, result, shape)
        result[0] = 1.0
    return GroupElement(shape, result, copy=False)


def tensor_exp(x: TruncatedTensor) -> GroupElement:
    """exp(x) = sum_k x^k/k!, requires a zero scalar level."""
    if x.data[0] != 0.0:
        raise SigRiskError("tensor_exp needs a zero scalar level", code="tensor_algebra.nonzero_scalar")
    shape = x.shape
    result = np.zeros(shape.size)
    result[0] = 1.0
    for k in range(shape.depth, 0, -1):
        result = _mul_raw(x.data, result, shape) / k
        result[0] = 1.0
    return GroupElement(shape, result, copy=False)


def tensor_log(g: TruncatedTensor) -> TruncatedTensor:
    """Mercator series log(1+x) = sum_k (-1)^(k+1) x^k / k."""
    _require_unit_scalar(g, "tensor_log")
    shape = g.shape
    x = g.data.copy()
    x[0] = 0.0
    n = shape.depth
    r = np.zeros(shape.size)
    r[0] = (-1.0) ** (n + 1) / n
    for k in range(n - 1, 0, -1):
        r = _mul_raw(x, r, shape)
        r[0] += (-1.0) ** (k + 1) / k
    return TruncatedTensor(shape, _mul_raw(x, r, shape), copy=False)


def shuffle_product(u, v, shape: AlgebraShape | None = None) -> list[tuple[tuple[int, ...], int]]:
    """All interleavings of ``u`` and ``v`` with multiplicities.

    ``u`` and ``v`` are :class:`MultiIndex` values or plain letter sequences.
    When a shape is known (given, or taken from a MultiIndex) the letters are
    validated against it and :class:`TruncationError` is raised if the
    combined length exceeds the depth.  Output is sorted by word.
    """
    if isinstance(u, MultiIndex):
        shape = shape or u.shape
        u = u.word
    if isinstance(v, MultiIndex):
        shape = shape or v.shape
        v = v.word
    u, v = tuple(int(x) for x in u), tuple(int(x) for x in v)
    if shape is not None:
        if len(u) + len(v) > shape.depth:
            raise TruncationError(f"shuffle of lengths {len(u)}+{len(v)} exceeds depth {shape.depth}")
        shape.word_index(u)
        shape.word_index(v)
    elif min(u + v, default=0) < 0:
        raise SigRiskError("letters must be non-negative", code="tensor_algebra.invalid_word")
    counts = _shuffle(u, v)
    return sorted(counts.items())


@lru_cache(maxsize=4096)
def _shuffle(u, v):
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: dict[tuple[int, ...], int] = {}
    # last letter of the result comes from u or from v
    for w, c in _shuffle(u[:-1], v).items():
        key = w + (u[-1],)
        out[key] = out.get(key, 0) + c
    for w, c in _shuffle(u, v[:-1]).items():
        key = w + (v[-1],)
        out[key] = out.get(key, 0) + c
    return out


def inner_product(w: TruncatedTensor, t: TruncatedTensor) -> float:
    """Sum of coordinatewise products, O(D)."""
    _same_shape(w, t)
    return _kernels.dot(w.data, t.data)


def weighted_norm(t: TruncatedTensor, level_weights: Sequence[float] | None = None) -> float:
    """l2 norm with level ``k`` scaled by ``level_weights[k]`` (default 1)."""
    if level_weights is None:
        return float(np.sqrt(np.dot(t.data, t.data)))
    weights = np.asarray(level_weights, dtype=np.float64)
    if weights.shape != (t.shape.depth + 1,):
        raise ShapeMismatchError(f"need {t.shape.depth + 1} level weights, got {weights.shape}")
    if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
        raise SigRiskError("level weights must be positive", code="tensor_algebra.invalid_weight")
    total = 0.0
    for k in range(t.shape.depth + 1):
        lev = t.level(k)
        total += weights[k] ** 2 * float(np.dot(lev, lev))
    return math.sqrt(total)


def sym_anti_level2(t: TruncatedTensor) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and antisymmetric parts of the level-2 matrix.

    The antisymmetric part is the Levy-area matrix.
    """
    if t.shape.depth < 2:
        raise TruncationError("sym_anti_level2 needs depth >= 2")
    m = t.level_matrix(2)
    return 0.5 * (m + m.T), 0.5 * (m - m.T)


def _dynkin_bracket(x: np.ndarray, dim: int, k: int) -> np.ndarray:
    # left-normed bracketing r(a1..ak) = [..[a1,a2],..,ak] applied to rows of x (n, dim**k)
    if k == 1:
        return x
    n = x.shape[0]
    prefix = x.reshape(n, dim ** (k - 1), dim).transpose(0, 2, 1).reshape(n * dim, dim ** (k - 1))
    r = _dynkin_bracket(prefix, dim, k - 1).reshape(n, dim, dim ** (k - 1))
    right = r.transpose(0, 2, 1).reshape(n, dim**k)  # r(prefix) (x) e_a
    left = r.reshape(n, dim**k)  # e_a (x) r(prefix)
    return right - left


def lie_projection(t: TruncatedTensor) -> TruncatedTensor:
    """Dynkin projection onto Lie elements: level k maps to r(x_k)/k."""
    shape = t.shape
    out = np.zeros(shape.size)
    for k in range(1, shape.depth + 1):
        lev = t.level(k).reshape(1, -1)
        out[shape.level_slice(k)] = _dynkin_bracket(lev, shape.dim, k).ravel() / k
    return TruncatedTensor(shape, out, copy=False)


def group_projection(t: TruncatedTensor) -> GroupElement:
    """exp of the Lie part of log(t); maps an expected signature to a group-like one."""
    return tensor_exp(lie_projection(tensor_log(t)))


def tensor_to_json(t: TruncatedTensor) -> dict:
    """``{"dim", "depth", "levels"}`` with levels 0..N as lists of floats."""
    return {
        "dim": t.shape.dim,
        "depth": t.shape.depth,
        "levels": [lv.tolist() for lv in t.levels],
    }


def tensor_from_json(obj: dict, *, group: bool | None = None) -> TruncatedTensor:
    """Parse the dict form.  ``group=None`` returns a GroupElement when the scalar is 1."""
    try:
        shape = AlgebraShape(obj["dim"], obj["depth"])
        levels = obj["levels"]
    except (KeyError, TypeError) as exc:
        raise SigRiskError(f"malformed tensor JSON: {exc}", code="tensor_algebra.bad_json") from exc
    t = TruncatedTensor.from_levels(shape, levels)
    if group or (group is None and t.is_group_like()):
        return t.as_group()
    return t


def dumps(t: TruncatedTensor) -> str:
    # json writes floats with repr(), the shortest string that round-trips
    return json.dumps(tensor_to_json(t), allow_nan=False)


def loads(text: str, *, group: bool | None = None) -> TruncatedTensor:
    return tensor_from_json(json.loads(text), group=group)
