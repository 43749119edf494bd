"""Signature kernels via an explicit finite-difference Goursat solver, Gram matrices and MMD.

The grid is path vertices x dyadic subdivision.  With increment coefficient

    A(i, j) = k(x_{i+1}, y_{j+1}) - k(x_{i+1}, y_j) - k(x_i, y_{j+1}) + k(x_i, y_j)

(for the linear kernel simply <dX_i, dY_j>) the update is

    U(i+1, j+1) = U(i+1, j) + U(i, j+1) - U(i, j) + A(i, j) (U(i+1, j) + U(i, j+1)) / 2

with U = 1 on the first row and column.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .stream import PiecewiseLinearPath

LINEAR = "linear"
RBF = "rbf"

PSD_WARN = -1e-8
PSD_FAIL = -1e-6


class NotPSDError(ArithmeticError):
    pass


@dataclass(frozen=True)
class StaticKernel:
    kind: str = LINEAR
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in (LINEAR, RBF):
            raise ValueError(f"unknown static kernel {self.kind!r}")
        if self.kind == RBF and not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"RBF bandwidth must be finite and positive, got {self.sigma!r}")

    def matrix(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """k(x_i, y_j) for point clouds x (p, d) and y (q, d)."""
        if self.kind == LINEAR:
            return x @ y.T
        sq = np.sum(x**2, 1)[:, None] + np.sum(y**2, 1)[None, :] - 2.0 * x @ y.T
        return np.exp(-np.maximum(sq, 0.0) / (2.0 * self.sigma**2))

    def increments(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.kind == LINEAR:
            return np.diff(x, axis=0) @ np.diff(y, axis=0).T
        k = self.matrix(x, y)
        return k[1:, 1:] - k[1:, :-1] - k[:-1, 1:] + k[:-1, :-1]

    def describe(self) -> dict:
        return {"kind": self.kind, "sigma": float(self.sigma) if self.kind == RBF else None}


@dataclass(frozen=True, eq=False)
class KernelGrid:
    U: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.U)):
            raise FloatingPointError("kernel grid has non-finite entries")

    @property
    def value(self) -> float:
        return float(self.U[-1, -1])


def refine_points(path: PiecewiseLinearPath, refine: int) -> np.ndarray:
    """Vertices with every segment split into 2**refine equal pieces."""
    if refine < 0:
        raise ValueError("refine level must be >= 0")
    pts = path.points
    if pts.shape[0] == 1 or refine == 0:
        return pts
    m = 2**refine
    frac = np.arange(m) / m
    seg = pts[:-1, None, :] + frac[None, :, None] * np.diff(pts, axis=0)[:, None, :]
    return np.concatenate([seg.reshape(-1, pts.shape[1]), pts[-1:]], axis=0)


@numba.njit(cache=True, nogil=True)
def _goursat(A):
    p, q = A.shape
    U = np.ones((p + 1, q + 1))
    for i in range(p):
        for j in range(q):
            a = U[i + 1, j]
            b = U[i, j + 1]
            U[i + 1, j + 1] = a + b - U[i, j] + 0.5 * A[i, j] * (a + b)
    return U


def solve_goursat(X: PiecewiseLinearPath, Y: PiecewiseLinearPath, kernel: StaticKernel = StaticKernel(), refine: int = 0) -> KernelGrid:
    if X.dim != Y.dim:
        raise ValueError(f"paths live in different dimensions: {X.dim} vs {Y.dim}")
    x = refine_points(X, refine)
    y = refine_points(Y, refine)
    A = np.ascontiguousarray(kernel.increments(x, y))
    return KernelGrid(_goursat(A))


def sig_kernel(X: PiecewiseLinearPath, Y: PiecewiseLinearPath, kernel: StaticKernel = StaticKernel(), refine: int = 0) -> float:
    return solve_goursat(X, Y, kernel, refine).value


def gram(
    paths_a: Sequence[PiecewiseLinearPath],
    paths_b: Sequence[PiecewiseLinearPath] | None = None,
    kernel: StaticKernel = StaticKernel(),
    refine: int = 0,
    n_jobs: int = 1,
) -> np.ndarray:
    """G[a, b] = sig_kernel(A_a, B_b).  ``paths_b=None`` means the same collection.

    For a single collection only the upper triangle is solved and mirrored,
    so G is exactly symmetric.
    """
    if len(paths_a) == 0 or (paths_b is not None and len(paths_b) == 0):
        raise ValueError("gram needs nonempty path collections")
    same = paths_b is None
    if same:
        paths_b = paths_a
        pairs = [(i, j) for i in range(len(paths_a)) for j in range(i, len(paths_a))]
    else:
        pairs = [(i, j) for i in range(len(paths_a)) for j in range(len(paths_b))]

    def one(pair):
        i, j = pair
        return sig_kernel(paths_a[i], paths_b[j], kernel, refine)

    if n_jobs == 1:
        vals = [one(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=None if n_jobs < 1 else n_jobs) as ex:
            vals = list(ex.map(one, pairs))

    G = np.empty((len(paths_a), len(paths_b)))
    for (i, j), v in zip(pairs, vals):
        G[i, j] = v
        if same:
            G[j, i] = v
    return G


def min_eigenvalue(G: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (G + G.T))[0])


def check_psd(G: np.ndarray) -> float:
    """Smallest eigenvalue; warns below -1e-8 and raises below -1e-6."""
    lam = min_eigenvalue(G)
    if lam < PSD_FAIL:
        raise NotPSDError(f"Gram matrix has eigenvalue {lam:.3e} < {PSD_FAIL:g}")
    if lam < PSD_WARN:
        warnings.warn(f"Gram matrix has slightly negative eigenvalue {lam:.3e}", RuntimeWarning)
    return lam


def mmd2_unbiased(
    samples_p: Sequence[PiecewiseLinearPath],
    samples_q: Sequence[PiecewiseLinearPath],
    kernel: StaticKernel = StaticKernel(),
    refine: int = 0,
    n_jobs: int = 1,
) -> float:
    M, N = len(samples_p), len(samples_q)
    if M < 2 or N < 2:
        raise ValueError(f"unbiased MMD needs at least 2 samples per side, got {M} and {N}")
    kxx = gram(samples_p, None, kernel, refine, n_jobs)
    kyy = gram(samples_q, None, kernel, refine, n_jobs)
    kxy = gram(samples_p, samples_q, kernel, refine, n_jobs)
    return mmd2_from_grams(kxx, kxy, kyy)


def mmd2_from_grams(kxx: np.ndarray, kxy: np.ndarray, kyy: np.ndarray) -> float:
    M, N = kxy.shape
    xx = (kxx.sum() - np.trace(kxx)) / (M * (M - 1))
    yy = (kyy.sum() - np.trace(kyy)) / (N * (N - 1))
    xy = 2.0 * kxy.sum() / (M * N)
    return float(xx - xy + yy)
