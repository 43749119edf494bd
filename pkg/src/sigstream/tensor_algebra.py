"""Dense arithmetic in the truncated free tensor algebra T^(n)(R^d).

Coefficients live in one contiguous float64 buffer, degree-major, with the
words of each degree in lexicographic order over letters 1..d.  With that
layout the degree-k block of ``a (x) b`` is just the sum over splits
``i + j = k`` of ``outer(a_i, b_j).ravel()``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

INT64_MAX = 2**63 - 1

Word = tuple[int, ...]


def dim(d: int, n: int) -> int:
    """Number of words of length <= n over a d-letter alphabet."""
    if d < 1 or n < 0:
        raise ValueError(f"need d >= 1 and n >= 0, got d={d}, n={n}")
    if d == 1:
        return n + 1
    # (d^(n+1) - 1)/(d - 1); refuse anything whose numerator leaves int64
    top = d ** (n + 1)
    if top > INT64_MAX:
        raise OverflowError(
            f"tensor algebra dimension for d={d}, n={n} overflows a 64-bit integer"
        )
    return (top - 1) // (d - 1)


@dataclass(frozen=True)
class AlgebraShape:
    d: int
    n: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or not isinstance(self.n, (int, np.integer)):
            raise TypeError("d and n must be integers")
        if self.d < 1:
            raise ValueError(f"channel count d must be >= 1, got {self.d}")
        if self.n < 0:
            raise ValueError(f"truncation depth n must be >= 0, got {self.n}")

    @property
    def dim(self) -> int:
        return dim(self.d, self.n)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        """offsets[k] is the index of the first word of length k; offsets[n+1] == dim."""
        out = [0]
        for k in range(self.n + 1):
            out.append(out[-1] + self.d**k)
        return tuple(out)

    def level_slice(self, k: int) -> slice:
        return slice(self.offsets[k], self.offsets[k + 1])

    def index(self, word: Sequence[int]) -> int:
        k = len(word)
        if k > self.n:
            raise ValueError(f"word {word!r} longer than depth {self.n}")
        idx = 0
        for letter in word:
            if not 1 <= letter <= self.d:
                raise ValueError(f"letter {letter} outside 1..{self.d}")
            idx = idx * self.d + (letter - 1)
        return self.offsets[k] + idx

    def word(self, index: int) -> Word:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        k = 0
        while self.offsets[k + 1] <= index:
            k += 1
        rem = index - self.offsets[k]
        letters = []
        for _ in range(k):
            rem, r = divmod(rem, self.d)
            letters.append(r + 1)
        return tuple(reversed(letters))

    def words(self) -> list[Word]:
        return [self.word(i) for i in range(self.dim)]


def word_to_str(word: Sequence[int], d: int) -> str:
    """Serialize a word: ``"112"`` for d <= 9, ``"(1,12,3)"`` beyond."""
    if len(word) == 0:
        return ""
    if d <= 9:
        return "".join(str(a) for a in word)
    return "(" + ",".join(str(a) for a in word) + ")"


def str_to_word(s: str, d: int) -> Word:
    if s == "":
        return ()
    if d <= 9:
        return tuple(int(c) for c in s)
    if not (s.startswith("(") and s.endswith(")")):
        raise ValueError(f"word {s!r} must be parenthesised for d > 9")
    return tuple(int(c) for c in s[1:-1].split(","))


@dataclass(frozen=True, eq=False)
class TruncatedTensor:
    shape: AlgebraShape
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64, copy=True).reshape(-1)
        if c.size != self.shape.dim:
            raise ValueError(
                f"expected {self.shape.dim} coefficients for {self.shape}, got {c.size}"
            )
        if not np.all(np.isfinite(c)):
            raise FloatingPointError("tensor coefficients must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    def level(self, k: int) -> np.ndarray:
        """Degree-k block reshaped to a k-dimensional array of side d."""
        return self.coeffs[self.shape.level_slice(k)].reshape((self.shape.d,) * k)

    def __getitem__(self, word) -> float:
        if isinstance(word, str):
            word = str_to_word(word, self.shape.d)
        return float(self.coeffs[self.shape.index(word)])

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __neg__(self):
        return scale(self, -1.0)

    def __mul__(self, lam):
        return scale(self, lam)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return concat_mul(self, other)

    def __repr__(self):
        return f"TruncatedTensor(d={self.shape.d}, n={self.shape.n}, nnz={np.count_nonzero(self.coeffs)})"

    def to_dict(self, skip_zeros: bool = False) -> dict[str, float]:
        d = self.shape.d
        return {
            word_to_str(w, d): float(c)
            for w, c in zip(self.shape.words(), self.coeffs)
            if not (skip_zeros and c == 0.0)
        }

    @classmethod
    def from_dict(cls, shape: AlgebraShape, mapping: Mapping[str, float]) -> "TruncatedTensor":
        c = np.zeros(shape.dim)
        for key, val in mapping.items():
            c[shape.index(str_to_word(key, shape.d))] += val
        return cls(shape, c)

    @classmethod
    def from_words(cls, shape: AlgebraShape, mapping: Mapping[Word, float]) -> "TruncatedTensor":
        c = np.zeros(shape.dim)
        for w, val in mapping.items():
            c[shape.index(w)] += val
        return cls(shape, c)


def unit(shape: AlgebraShape) -> TruncatedTensor:
    c = np.zeros(shape.dim)
    c[0] = 1.0
    return TruncatedTensor(shape, c)


def zero(shape: AlgebraShape) -> TruncatedTensor:
    return TruncatedTensor(shape, np.zeros(shape.dim))


def from_level1(shape: AlgebraShape, x) -> TruncatedTensor:
    """Embed a vector of R^d as a pure degree-1 tensor."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != shape.d:
        raise ValueError(f"expected {shape.d} components, got {x.size}")
    c = np.zeros(shape.dim)
    if shape.n >= 1:
        c[shape.level_slice(1)] = x
    return TruncatedTensor(shape, c)


def _check_same(a: TruncatedTensor, b: TruncatedTensor):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _mul_raw(shape: AlgebraShape, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros(shape.dim)
    off = shape.offsets
    for k in range(shape.n + 1):
        acc = out[off[k]:off[k + 1]]
        for i in range(k + 1):
            ai = a[off[i]:off[i + 1]]
            bj = b[off[k - i]:off[k - i + 1]]
            acc += np.multiply.outer(ai, bj).reshape(-1)
    return out


def concat_mul(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    _check_same(a, b)
    return TruncatedTensor(a.shape, _mul_raw(a.shape, a.coeffs, b.coeffs))


def add(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    _check_same(a, b)
    return TruncatedTensor(a.shape, a.coeffs + b.coeffs)


def scale(a: TruncatedTensor, lam: float) -> TruncatedTensor:
    return TruncatedTensor(a.shape, a.coeffs * float(lam))


def tensor_exp(t: TruncatedTensor) -> TruncatedTensor:
    """Truncated exponential of a tensor with zero scalar part (Horner form)."""
    if abs(t.coeffs[0]) > 1e-14:
        raise ValueError(f"tensor_exp needs a zero empty-word coefficient, got {t.coeffs[0]!r}")
    shape = t.shape
    x = t.coeffs.copy()
    x[0] = 0.0
    r = np.zeros(shape.dim)
    r[0] = 1.0
    for k in range(shape.n, 0, -1):
        r = _mul_raw(shape, x, r) / k
        r[0] += 1.0
    return TruncatedTensor(shape, r)


def tensor_log(g: TruncatedTensor) -> TruncatedTensor:
    """Truncated log(1 + x) series of a tensor whose scalar part is 1."""
    if abs(g.coeffs[0] - 1.0) > 1e-12:
        raise ValueError(f"tensor_log needs empty-word coefficient 1, got {g.coeffs[0]!r}")
    shape = g.shape
    if shape.n == 0:
        return zero(shape)
    x = g.coeffs.copy()
    x[0] = 0.0
    # log(1+x) = x (1 - x (1/2 - x (1/3 - ...)))
    r = np.zeros(shape.dim)
    r[0] = 1.0 / shape.n
    for k in range(shape.n - 1, 0, -1):
        r = -_mul_raw(shape, x, r)
        r[0] += 1.0 / k
    return TruncatedTensor(shape, _mul_raw(shape, x, r))


def exp_level1(shape: AlgebraShape, x) -> TruncatedTensor:
    """exp of a pure degree-1 element: degree k is x^{(x)k}/k!."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.size != shape.d:
        raise ValueError(f"expected {shape.d} components, got {x.size}")
    c = np.empty(shape.dim)
    c[0] = 1.0
    term = np.ones(1)
    for k in range(1, shape.n + 1):
        term = np.multiply.outer(term, x).reshape(-1) / k
        c[shape.level_slice(k)] = term
    return TruncatedTensor(shape, c)


def truncate_to(t: TruncatedTensor, n: int) -> TruncatedTensor:
    """Project onto a lower depth by dropping the higher degrees."""
    if n > t.shape.n:
        raise ValueError(f"cannot raise depth {t.shape.n} to {n}")
    shape = AlgebraShape(t.shape.d, n)
    return TruncatedTensor(shape, t.coeffs[: shape.dim])


def inner(a: TruncatedTensor, b: TruncatedTensor) -> float:
    """Euclidean pairing of coefficient vectors (words orthonormal)."""
    _check_same(a, b)
    return float(a.coeffs @ b.coeffs)


def max_abs_diff(a: TruncatedTensor, b: TruncatedTensor) -> float:
    _check_same(a, b)
    return float(np.max(np.abs(a.coeffs - b.coeffs)))

