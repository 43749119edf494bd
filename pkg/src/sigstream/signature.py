"""Truncated signatures and log-signatures of piecewise-linear paths.

The signature of one linear segment with increment D is exp(D); over a
path the segment exponentials are multiplied left to right (Chen).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lie_basis import LyndonBasis, LyndonCoordinates, build_basis, tensor_to_coords
from .stream import PiecewiseLinearPath
from .tensor_algebra import (
    AlgebraShape,
    TruncatedTensor,
    _mul_raw,
    concat_mul,
    exp_level1,
    tensor_log,
)

CHEN_TIME_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignatureResult:
    sig: TruncatedTensor
    interval: tuple[float, float]

    def __post_init__(self):
        if self.sig.coeffs[0] != 1.0:
            raise ValueError("a signature has empty-word coefficient exactly 1")

    @property
    def depth(self) -> int:
        return self.sig.shape.n

    def to_dict(self) -> dict:
        return {
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "depth": self.sig.shape.n,
            "channels": self.sig.shape.d,
            "coefficients": self.sig.to_dict(),
        }


def signature(path: PiecewiseLinearPath, depth: int) -> SignatureResult:
    shape = AlgebraShape(path.dim, depth)
    acc = np.zeros(shape.dim)
    acc[0] = 1.0
    for inc in path.increments():
        seg = exp_level1(shape, inc).coeffs
        acc = _mul_raw(shape, acc, seg)
    return SignatureResult(TruncatedTensor(shape, acc), path.span)


def log_signature(path: PiecewiseLinearPath, depth: int, basis: LyndonBasis | None = None) -> LyndonCoordinates:
    if depth < 1:
        raise ValueError("log-signature needs depth >= 1")
    sig = signature(path, depth).sig
    return tensor_to_coords(tensor_log(sig), basis or build_basis(sig.shape))


def chen_concat(a: SignatureResult, b: SignatureResult) -> SignatureResult:
    """Signature over the union of two adjacent intervals."""
    if not math.isclose(a.interval[1], b.interval[0], rel_tol=0.0, abs_tol=CHEN_TIME_TOL):
        raise ValueError(f"intervals {a.interval} and {b.interval} are not adjacent")
    return SignatureResult(concat_mul(a.sig, b.sig), (a.interval[0], b.interval[1]))


def unit_signature(d: int, depth: int, at: float = 0.0) -> SignatureResult:
    """Signature of the empty interval [at, at]."""
    shape = AlgebraShape(d, depth)
    c = np.zeros(shape.dim)
    c[0] = 1.0
    return SignatureResult(TruncatedTensor(shape, c), (at, at))


def levy_area(path: PiecewiseLinearPath) -> np.ndarray:
    """Antisymmetric d x d matrix of signed areas, A_ij = (S_ij - S_ji)/2."""
    s2 = signature(path, 2).sig.level(2)
    upper = 0.5 * (s2 - s2.T)
    # build from the strict upper triangle so A = -A.T holds bit-exactly
    iu = np.triu_indices(path.dim, 1)
    area = np.zeros_like(upper)
    area[iu] = upper[iu]
    return area - area.T


def log_signature_report(coords: LyndonCoordinates, interval: tuple[float, float]) -> dict:
    return {
        "interval": [float(interval[0]), float(interval[1])],
        "depth": coords.basis.shape.n,
        "channels": coords.basis.shape.d,
        "basis": "lyndon",
        "coordinates": coords.to_dict(),
    }

