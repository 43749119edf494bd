"""Lyndon basis of the free Lie algebra inside T^(n)(R^d).

Each Lyndon word w carries its standard bracketing: w = u v with v the
longest proper Lyndon suffix, bracket [u, v].  Expanded in the tensor
algebra, the bracket of w is w itself plus words that are lexicographically
larger, so restricting the expansion matrix of one degree to the Lyndon
columns gives a unitriangular system.  Projection onto coordinates is a
back-substitution followed by a residual check over every word.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.linalg import solve_triangular

from .tensor_algebra import (
    AlgebraShape,
    TruncatedTensor,
    Word,
    concat_mul,
    from_level1,
    str_to_word,
    word_to_str,
)

# a letter, or a pair of sub-brackets
Bracket = Union[int, tuple["Bracket", "Bracket"]]

PROJECTION_TOL = 1e-9


class NotLieElementError(ValueError):
    """Raised when a tensor has no exact expansion in the Lyndon basis."""

    def __init__(self, word: str, residual: float):
        self.word = word
        self.residual = residual
        super().__init__(
            f"tensor is not a Lie element: residual {residual:.3e} at word {word!r} "
            f"exceeds {PROJECTION_TOL:g}"
        )


def is_lyndon(word: Word) -> bool:
    k = len(word)
    if k == 0:
        return False
    return all(word < word[i:] + word[:i] for i in range(1, k))


def lyndon_words(d: int, n: int) -> list[Word]:
    """Lyndon words of length <= n over 1..d, by length then lexicographically.

    Duval's generator emits them in plain lexicographic order; we then regroup
    by length.
    """
    if n < 1:
        return []
    out: list[Word] = []
    w = [0]
    while w:
        w[-1] += 1
        out.append(tuple(w))
        m = len(w)
        while len(w) < n:
            w.append(w[len(w) - m])
        while w and w[-1] == d:
            w.pop()
    out.sort(key=lambda u: (len(u), u))
    return out


def standard_factorization(word: Word) -> tuple[Word, Word]:
    if len(word) < 2:
        raise ValueError(f"word {word!r} has no standard factorization")
    for i in range(1, len(word)):
        if is_lyndon(word[i:]):
            return word[:i], word[i:]
    raise AssertionError("unreachable: the last letter is always Lyndon")


def bracketing(word: Word) -> Bracket:
    if len(word) == 1:
        return word[0]
    u, v = standard_factorization(word)
    return (bracketing(u), bracketing(v))


def bracket_str(b: Bracket) -> str:
    if isinstance(b, int):
        return str(b)
    return f"[{bracket_str(b[0])},{bracket_str(b[1])}]"


def _expand(b: Bracket, shape: AlgebraShape) -> TruncatedTensor:
    if isinstance(b, int):
        e = np.zeros(shape.d)
        e[b - 1] = 1.0
        return from_level1(shape, e)
    left = _expand(b[0], shape)
    right = _expand(b[1], shape)
    return concat_mul(left, right) - concat_mul(right, left)


def bracket_to_tensor(word, shape: AlgebraShape) -> TruncatedTensor:
    """Expand the standard bracketing of a Lyndon word as a tensor."""
    if isinstance(word, str):
        word = str_to_word(word, shape.d)
    word = tuple(word)
    if not is_lyndon(word):
        raise ValueError(f"{word!r} is not a Lyndon word")
    if len(word) > shape.n:
        raise ValueError(f"word {word!r} longer than depth {shape.n}")
    return _expand(bracketing(word), shape)


@dataclass(frozen=True, eq=False)
class LyndonBasis:
    shape: AlgebraShape
    words: tuple[Word, ...]
    brackets: tuple[Bracket, ...]
    expansions: tuple[TruncatedTensor, ...] = field(repr=False)

    def __len__(self):
        return len(self.words)

    def word_strings(self) -> list[str]:
        return [word_to_str(w, self.shape.d) for w in self.words]

    def position(self, word) -> int:
        if isinstance(word, str):
            word = str_to_word(word, self.shape.d)
        return self.words.index(tuple(word))

    def degree_block(self, k: int) -> tuple[list[int], np.ndarray]:
        """Basis positions of degree k and their expansions restricted to degree k."""
        pos = [i for i, w in enumerate(self.words) if len(w) == k]
        sl = self.shape.level_slice(k)
        width = sl.stop - sl.start
        mat = np.array([self.expansions[i].coeffs[sl] for i in pos]).reshape(len(pos), width)
        return pos, mat

    @property
    def depth(self) -> int:
        return self.shape.n


@lru_cache(maxsize=64)
def build_basis(shape: AlgebraShape) -> LyndonBasis:
    words = tuple(lyndon_words(shape.d, shape.n))
    brackets = tuple(bracketing(w) for w in words)
    expansions = tuple(_expand(b, shape) for b in brackets)
    return LyndonBasis(shape, words, brackets, expansions)


@dataclass(frozen=True, eq=False)
class LyndonCoordinates:
    basis: LyndonBasis
    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=np.float64, copy=True).reshape(-1)
        if c.size != len(self.basis):
            raise ValueError(f"expected {len(self.basis)} coordinates, got {c.size}")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    def __getitem__(self, word) -> float:
        return float(self.coords[self.basis.position(word)])

    def __len__(self):
        return self.coords.size

    def to_dict(self) -> dict[str, float]:
        return dict(zip(self.basis.word_strings(), map(float, self.coords)))

    @classmethod
    def from_dict(cls, basis: LyndonBasis, mapping) -> "LyndonCoordinates":
        c = np.zeros(len(basis))
        for key, val in mapping.items():
            c[basis.position(key)] = val
        return cls(basis, c)


def coords_to_tensor(coords: LyndonCoordinates) -> TruncatedTensor:
    basis = coords.basis
    out = np.zeros(basis.shape.dim)
    for c, e in zip(coords.coords, basis.expansions):
        if c != 0.0:
            out += c * e.coeffs
    return TruncatedTensor(basis.shape, out)


def tensor_to_coords(log_tensor: TruncatedTensor, basis: LyndonBasis | None = None) -> LyndonCoordinates:
    shape = log_tensor.shape
    if basis is None:
        basis = build_basis(shape)
    if basis.shape != shape:
        raise ValueError(f"basis shape {basis.shape} does not match tensor shape {shape}")
    if abs(log_tensor.coeffs[0]) > PROJECTION_TOL:
        raise NotLieElementError("", abs(float(log_tensor.coeffs[0])))

    coords = np.zeros(len(basis))
    for k in range(1, shape.n + 1):
        pos, mat = basis.degree_block(k)
        if not pos:
            continue
        sl = shape.level_slice(k)
        cols = [shape.index(basis.words[i]) - sl.start for i in pos]
        # mat[:, cols] is unit upper triangular in basis order
        tri = mat[:, cols]
        rhs = log_tensor.coeffs[sl][cols]
        coords[pos] = solve_triangular(tri.T, rhs, lower=True, unit_diagonal=True)

    result = LyndonCoordinates(basis, coords)
    resid = np.abs(coords_to_tensor(result).coeffs - log_tensor.coeffs)
    worst = int(np.argmax(resid))
    if resid[worst] > PROJECTION_TOL:
        raise NotLieElementError(word_to_str(shape.word(worst), shape.d), float(resid[worst]))
    return result


def necklace_count(d: int, k: int) -> int:
    """Number of Lyndon words of length k over d letters (Witt's formula)."""
    total = 0
    for j in range(1, k + 1):
        if k % j == 0:
            total += _mobius(j) * d ** (k // j)
    return total // k


def _mobius(m: int) -> int:
    out, p = 1, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            out = -out
        p += 1
    return -out if m > 1 else out
