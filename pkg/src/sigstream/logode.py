"""Log-ODE solver for controlled differential equations dY = sum_i f^i(Y) dX^i.

On each step [r_k, r_{k+1}] the log-signature of the control is contracted
against Lie brackets of the driving fields, giving one autonomous field F.
Its unit-time flow, integrated with fixed-step RK4, is the step update.

Bracket convention is the vector-field one,

    [f, g](y) = Dg(y) f(y) - Df(y) g(y),

which makes v_i -> f^i a Lie algebra morphism for the letter ordering used
by the signature (earlier letters act first).  For linear fields
f^i(y) = A_i y this means [f^1, f^2](y) = (A_2 A_1 - A_1 A_2) y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .lie_basis import Bracket, LyndonCoordinates, build_basis
from .signature import log_signature
from .stream import PiecewiseLinearPath, restrict
from .tensor_algebra import AlgebraShape, TruncatedTensor

LINEAR = "linear"
GENERAL = "general"

FD_REL_STEP = 1e-5


class LogOdeError(ArithmeticError):
    def __init__(self, message: str, step: int | None = None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")


class BracketDepthError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class VectorFieldSet:
    """Driving fields f^0..f^{d-1} on R^v (letter i+1 of a word is field i)."""

    d: int
    v: int
    kind: str = LINEAR
    matrices: Optional[np.ndarray] = field(default=None, repr=False)
    fn: Optional[Callable] = field(default=None, repr=False)
    jvp: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == LINEAR:
            m = np.array(self.matrices, dtype=np.float64, copy=True)
            if m.shape != (self.d, self.v, self.v):
                raise ValueError(f"expected matrices of shape {(self.d, self.v, self.v)}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError("linear vector field matrices must be finite")
            m.flags.writeable = False
            object.__setattr__(self, "matrices", m)
        elif self.kind == GENERAL:
            if self.fn is None:
                raise ValueError("a general vector field set needs fn(i, y)")
        else:
            raise ValueError(f"unknown vector field kind {self.kind!r}")

    @classmethod
    def linear(cls, matrices) -> "VectorFieldSet":
        m = np.asarray(matrices, dtype=np.float64)
        if m.ndim != 3 or m.shape[1] != m.shape[2]:
            raise ValueError(f"need a stack of square matrices, got shape {m.shape}")
        return cls(m.shape[0], m.shape[1], LINEAR, matrices=m)

    @classmethod
    def general(cls, fn, d: int, v: int, jvp=None) -> "VectorFieldSet":
        return cls(d, v, GENERAL, fn=fn, jvp=jvp)

    def eval(self, i: int, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if self.kind == LINEAR:
            return self.matrices[i] @ y
        return np.asarray(self.fn(i, y), dtype=np.float64)

    @property
    def max_bracket_depth(self) -> float:
        if self.kind == LINEAR:
            return math.inf
        return 3 if self.jvp is not None else 2


@dataclass(frozen=True)
class LogOdeConfig:
    depth: int = 2
    partition: Optional[tuple[float, ...]] = None
    substeps: int = 8

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("log-ODE depth must be >= 1")
        if self.substeps < 1:
            raise ValueError("need at least one RK4 substep")
        if self.partition is not None:
            p = tuple(float(r) for r in self.partition)
            if len(p) < 2:
                raise ValueError("a partition needs at least two points")
            if any(b <= a for a, b in zip(p, p[1:])):
                raise ValueError("partition must be strictly increasing")
            object.__setattr__(self, "partition", p)


def uniform_partition(path: PiecewiseLinearPath, steps: int) -> tuple[float, ...]:
    t0, t1 = path.span
    return tuple(np.linspace(t0, t1, steps + 1))


def bracket_matrix(b: Bracket, matrices: np.ndarray) -> np.ndarray:
    if isinstance(b, int):
        return matrices[b - 1]
    mu = bracket_matrix(b[0], matrices)
    mv = bracket_matrix(b[1], matrices)
    return mv @ mu - mu @ mv


def frozen_matrix(vf: VectorFieldSet, logsig: LyndonCoordinates) -> np.ndarray:
    _check_compatible(vf, logsig)
    out = np.zeros((vf.v, vf.v))
    for c, b in zip(logsig.coords, logsig.basis.brackets):
        if c != 0.0:
            out += c * bracket_matrix(b, vf.matrices)
    return out


def _check_compatible(vf: VectorFieldSet, logsig: LyndonCoordinates):
    shape = logsig.basis.shape
    if shape.d != vf.d:
        raise ValueError(f"log-signature has {shape.d} channels, vector fields expect {vf.d}")
    if shape.n > vf.max_bracket_depth:
        hint = "" if vf.jvp is not None else " (supply jvp to allow depth 3)"
        raise BracketDepthError(
            f"depth {shape.n} exceeds the bracket depth limit {vf.max_bracket_depth} "
            f"for general vector fields{hint}"
        )


def _fd_step(y: np.ndarray) -> float:
    return FD_REL_STEP * (1.0 + float(np.linalg.norm(y)))


class _GeneralBrackets:
    """Evaluate bracket fields of a GENERAL set; one finite-difference level at most."""

    def __init__(self, vf: VectorFieldSet):
        self.vf = vf

    def value(self, b: Bracket, y: np.ndarray) -> np.ndarray:
        if isinstance(b, int):
            return self.vf.eval(b - 1, y)
        fu = self.value(b[0], y)
        fv = self.value(b[1], y)
        return self.derivative(b[1], y, fu) - self.derivative(b[0], y, fv)

    def derivative(self, b: Bracket, y: np.ndarray, h: np.ndarray) -> np.ndarray:
        """Directional derivative D B_b(y) h."""
        if isinstance(b, int) and self.vf.jvp is not None:
            return np.asarray(self.vf.jvp(b - 1, y, h), dtype=np.float64)
        norm = float(np.linalg.norm(h))
        if norm == 0.0:
            return np.zeros(self.vf.v)
        eps = _fd_step(y) / norm
        return (self.value(b, y + eps * h) - self.value(b, y - eps * h)) / (2.0 * eps)


def frozen_field(vf: VectorFieldSet, logsig: LyndonCoordinates) -> Callable[[np.ndarray], np.ndarray]:
    """y -> F(y) = sum_w logsig_w * bracket_w(y)."""
    _check_compatible(vf, logsig)
    if vf.kind == LINEAR:
        m = frozen_matrix(vf, logsig)
        return lambda y: m @ np.asarray(y, dtype=np.float64)

    terms = [(c, b) for c, b in zip(logsig.coords, logsig.basis.brackets) if c != 0.0]
    ev = _GeneralBrackets(vf)

    def F(y):
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(vf.v)
        for c, b in terms:
            out += c * ev.value(b, y)
        return out

    return F


def rk4_flow(F: Callable, z0: np.ndarray, substeps: int, duration: float = 1.0) -> np.ndarray:
    z = np.array(z0, dtype=np.float64, copy=True)
    h = duration / substeps
    for _ in range(substeps):
        k1 = F(z)
        k2 = F(z + 0.5 * h * k1)
        k3 = F(z + 0.5 * h * k2)
        k4 = F(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return z


def logode_step(vf: VectorFieldSet, z_s, segment: PiecewiseLinearPath, config: LogOdeConfig, step: int = 0) -> np.ndarray:
    """Advance the state across ``segment`` with one frozen field.

    dz/du = F(z)/(t - s) on [s, t] is the same as the unit-time flow of F,
    which is what gets integrated.
    """
    z_s = np.asarray(z_s, dtype=np.float64)
    if z_s.shape != (vf.v,):
        raise ValueError(f"state must have shape ({vf.v},), got {z_s.shape}")
    if segment.dim != vf.d:
        raise ValueError(f"control has {segment.dim} channels, vector fields expect {vf.d}")
    logsig = log_signature(segment, config.depth, build_basis(AlgebraShape(vf.d, config.depth)))
    F = frozen_field(vf, logsig)
    with np.errstate(over="ignore", invalid="ignore"):
        z_t = rk4_flow(F, z_s, config.substeps)
    if not np.all(np.isfinite(z_t)):
        raise LogOdeError("non-finite state", step=step)
    return z_t


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "states": self.states.tolist()}


def solve_cde(vf: VectorFieldSet, path: PiecewiseLinearPath, config: LogOdeConfig, z0) -> Trajectory:
    partition = config.partition if config.partition is not None else tuple(path.times)
    t0, t1 = path.span
    if partition[0] < t0 or partition[-1] > t1:
        raise ValueError(f"partition [{partition[0]}, {partition[-1]}] leaves the path span [{t0}, {t1}]")
    z = np.asarray(z0, dtype=np.float64)
    states = [z.copy()]
    for k, (a, b) in enumerate(zip(partition, partition[1:])):
        z = logode_step(vf, z, restrict(path, a, b), config, step=k)
        states.append(z)
    return Trajectory(np.array(partition), np.array(states))


def right_multiplication_field(shape: AlgebraShape) -> VectorFieldSet:
    """Linear fields y -> y (x) v_i on the coefficient space of T^(n)(R^d)."""
    mats = np.zeros((shape.d, shape.dim, shape.dim))
    for idx, w in enumerate(shape.words()):
        if len(w) < shape.n:
            for i in range(shape.d):
                mats[i, shape.index(w + (i + 1,)), idx] = 1.0
    return VectorFieldSet.linear(mats)


def contract_signature(sig: TruncatedTensor, matrices, z0) -> np.ndarray:
    """sum_w sig_w A_{w_k} ... A_{w_1} z0: the truncated Picard expansion of a linear CDE."""
    A = np.asarray(matrices, dtype=np.float64)
    z0 = np.asarray(z0, dtype=np.float64)
    out = sig.coeffs[0] * z0
    for k in range(1, sig.shape.n + 1):
        w = sig.level(k)[..., None] * z0
        for _ in range(k):
            # apply the matrix of the leading (earliest) letter and drop that axis
            w = np.einsum("iab,i...b->...a", A, w)
        out = out + w
    return out
