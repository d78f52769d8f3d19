"""Grids, fields and the reflection/extension/restriction maps.

The infinite lattice hZ^d is truncated to a torus with index range
{-N, ..., N-1} per axis.  Axis 0 is the normal direction x_1; the half-lattice
keeps n_1 in {1, ..., N-1} (Dirichlet truncation) or {1, ..., N} (Neumann
truncation, where n_1 = N is stored at the torus slot -N).  The continuum is
represented by a periodic reference grid on [-L, L)^d with L = N h.

Every extension and restriction acts along axis 0 only, and is stored as an
index map (source slot + sign) so that its exact adjoint is available.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import GridMismatchError

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
HALF_PLANE = "half-plane"
WALL_COPY = "wall-copy"
EVEN_VARIANTS = (HALF_PLANE, WALL_COPY)


@dataclass(frozen=True)
class LatticeGrid:
    d: int
    h: float
    N: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if not self.h > 0:
            raise ValueError(f"mesh size must be positive, got {self.h}")
        if self.N < 2:
            raise ValueError(f"half-extent N must be at least 2, got {self.N}")

    @property
    def shape(self):
        return (2 * self.N,) * self.d

    @property
    def L(self):
        return self.N * self.h

    @property
    def weight(self):
        return self.h**self.d

    def indices(self):
        return np.arange(-self.N, self.N)

    def frequencies(self):
        """Per-axis lattice frequencies in FFT order, in [-pi/h, pi/h)."""
        return np.fft.fftfreq(2 * self.N) * 2 * np.pi / self.h

    def half(self, kind):
        return HalfLatticeGrid(self, kind)


@dataclass(frozen=True)
class HalfLatticeGrid:
    parent: LatticeGrid
    kind: str = DIRICHLET

    def __post_init__(self):
        if self.kind not in (DIRICHLET, NEUMANN):
            raise ValueError(f"unknown half-grid truncation {self.kind!r}")

    @property
    def d(self):
        return self.parent.d

    @property
    def h(self):
        return self.parent.h

    @property
    def N(self):
        return self.parent.N

    @property
    def weight(self):
        return self.parent.weight

    def normal_indices(self):
        top = self.N - 1 if self.kind == DIRICHLET else self.N
        return np.arange(1, top + 1)

    @property
    def shape(self):
        n1 = self.N - 1 if self.kind == DIRICHLET else self.N
        return (n1,) + (2 * self.N,) * (self.d - 1)


@dataclass(frozen=True)
class ReferenceGrid:
    """Periodic sampling grid on [-L, L)^d with M points per axis."""

    d: int
    L: float
    M: int

    def __post_init__(self):
        if self.M % 2 or self.M < 4:
            raise ValueError(f"M must be even and at least 4, got {self.M}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @classmethod
    def for_lattice(cls, lattice, oversample=2):
        return cls(lattice.d, lattice.L, 2 * lattice.N * oversample)

    @property
    def hf(self):
        return 2 * self.L / self.M

    @property
    def shape(self):
        return (self.M,) * self.d

    @property
    def half_shape(self):
        return (self.M // 2 - 1,) + (self.M,) * (self.d - 1)

    @property
    def weight(self):
        return self.hf**self.d

    def coordinates(self):
        return (np.arange(self.M) - self.M // 2) * self.hf

    def half_coordinates(self):
        return np.arange(1, self.M // 2) * self.hf

    def frequencies(self):
        return np.fft.fftfreq(self.M) * 2 * np.pi / self.hf

    def mesh(self, half=False):
        """Coordinate arrays, one per axis, broadcast to the field shape."""
        axes = [self.half_coordinates() if half else self.coordinates()]
        axes += [self.coordinates()] * (self.d - 1)
        return np.meshgrid(*axes, indexing="ij")

    def check_serves(self, lattice):
        if lattice.d != self.d:
            raise GridMismatchError("reference grid and lattice differ in dimension")
        if not np.isclose(self.L, lattice.L, rtol=1e-12):
            raise GridMismatchError(f"box half-length {self.L} != N*h = {lattice.L}")
        if self.hf > 2 * lattice.h / 3 * (1 + 1e-12):
            raise GridMismatchError(
                f"reference spacing {self.hf} exceeds 2h/3 for h = {lattice.h}"
            )


def _check_shape(grid, values, shape):
    if values.shape != tuple(shape):
        raise GridMismatchError(f"values of shape {values.shape} do not fit {grid} (shape {shape})")


@dataclass(frozen=True, eq=False)
class LatticeField:
    grid: LatticeGrid | HalfLatticeGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        _check_shape(self.grid, self.values, self.grid.shape)

    @property
    def is_half(self):
        return isinstance(self.grid, HalfLatticeGrid)

    def norm(self):
        return float(np.sqrt(self.grid.weight) * np.linalg.norm(self.values))

    def inner(self, other):
        """Weighted inner product, antilinear in the first entry."""
        return complex(self.grid.weight * np.vdot(self.values, other.values))

    def __add__(self, other):
        if other.grid != self.grid:
            raise GridMismatchError("cannot add fields on different grids")
        return LatticeField(self.grid, self.values + other.values)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return LatticeField(self.grid, scalar * self.values)


@dataclass(frozen=True, eq=False)
class ContinuumField:
    grid: ReferenceGrid
    values: np.ndarray = field(repr=False)
    half: bool = False

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        _check_shape(self.grid, self.values, self.grid.half_shape if self.half else self.grid.shape)

    @classmethod
    def sample(cls, grid, func, half=False):
        """Sample ``func(x_1, ..., x_d)`` on the grid."""
        return cls(grid, func(*grid.mesh(half=half)), half=half)

    def norm(self):
        return float(np.sqrt(self.grid.weight) * np.linalg.norm(self.values))

    def inner(self, other):
        return complex(self.grid.weight * np.vdot(self.values, other.values))

    def __add__(self, other):
        if other.grid != self.grid or other.half != self.half:
            raise GridMismatchError("cannot add fields on different grids")
        return ContinuumField(self.grid, self.values + other.values, self.half)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return ContinuumField(self.grid, scalar * self.values, self.half)


class AxisMap:
    """Linear map along axis 0: ``out[p] = sign[p] * u[src[p]]`` (0 where src < 0)."""

    def __init__(self, src, sign, n_in):
        self.src = np.asarray(src, dtype=np.intp)
        self.sign = np.asarray(sign, dtype=float)
        self.n_in = n_in
        self._take = np.where(self.src < 0, 0, self.src)
        self._live = self.src >= 0

    def _bcast(self, arr, ndim):
        return arr.reshape(arr.shape + (1,) * (ndim - 1))

    def apply(self, u):
        if u.shape[0] != self.n_in:
            raise GridMismatchError(f"axis-0 length {u.shape[0]} != {self.n_in}")
        return u[self._take] * self._bcast(self.sign, u.ndim)

    def adjoint(self, v):
        if v.shape[0] != self.src.size:
            raise GridMismatchError(f"axis-0 length {v.shape[0]} != {self.src.size}")
        out = np.zeros((self.n_in,) + v.shape[1:], dtype=np.result_type(v, float))
        live = self._live
        np.add.at(out, self.src[live], v[live] * self._bcast(self.sign[live], v.ndim))
        return out


@lru_cache(maxsize=None)
def lattice_map(N, op):
    """Axis-0 map between the half-lattice and the period-2N torus.

    ``op`` is one of ``odd``, ``even-half-plane``, ``even-wall-copy``,
    ``zero-dirichlet`` or ``zero-neumann``.  Restrictions are the adjoints of
    the ``zero-*`` maps.
    """
    n = np.arange(-N, N)
    src = np.full(2 * N, -1)
    sign = np.zeros(2 * N)
    pos = n >= 1
    src[pos], sign[pos] = n[pos] - 1, 1.0
    if op == "odd":
        neg = (n <= -1) & (n >= -N + 1)
        src[neg], sign[neg] = -n[neg] - 1, -1.0
        return AxisMap(src, sign, N - 1)
    if op == "zero-dirichlet":
        return AxisMap(src, sign, N - 1)
    # Neumann truncation: n_1 = N lives at the torus slot -N.
    src[0], sign[0] = N - 1, 1.0
    if op == "zero-neumann":
        return AxisMap(src, sign, N)
    if op == "even-half-plane":
        neg = (n <= 0) & (n >= -N + 1)
        src[neg], sign[neg] = -n[neg], 1.0
    elif op == "even-wall-copy":
        neg = (n <= -1) & (n >= -N + 1)
        src[neg], sign[neg] = -n[neg] - 1, 1.0
        src[N], sign[N] = 0, 1.0
    else:
        raise ValueError(f"unknown lattice map {op!r}")
    return AxisMap(src, sign, N)


@lru_cache(maxsize=None)
def continuum_map(M, op):
    """Axis-0 map between the half reference grid (x_1 > 0) and the full one.

    ``op`` is ``odd``, ``even`` or ``zero``.  The planes x_1 = 0 and x_1 = -L
    are fixed by the reflection: odd extension puts 0 there, even extension
    copies the nearest sample from the half-space side.
    """
    half = M // 2
    j = np.arange(M)
    src = np.full(M, -1)
    sign = np.zeros(M)
    pos = j > half
    src[pos], sign[pos] = j[pos] - half - 1, 1.0
    if op == "zero":
        return AxisMap(src, sign, half - 1)
    neg = (j >= 1) & (j < half)
    src[neg] = half - j[neg] - 1
    if op == "odd":
        sign[neg] = -1.0
    elif op == "even":
        sign[neg] = 1.0
        src[half], sign[half] = 0, 1.0
        src[0], sign[0] = half - 2, 1.0
    else:
        raise ValueError(f"unknown continuum map {op!r}")
    return AxisMap(src, sign, half - 1)


def _even_op(variant):
    if variant not in EVEN_VARIANTS:
        raise ValueError(f"unknown even-extension variant {variant!r}")
    return "even-" + variant


def odd_extend_lattice(u):
    if not isinstance(u.grid, HalfLatticeGrid) or u.grid.kind != DIRICHLET:
        raise GridMismatchError("odd extension needs a field on the Dirichlet-truncated half grid")
    return LatticeField(u.grid.parent, lattice_map(u.grid.N, "odd").apply(u.values))


def even_extend_lattice(u, variant=HALF_PLANE):
    """Reflection-even extension to the torus.

    ``half-plane`` reflects across n_1 = 1/2 and doubles the norm exactly.
    ``wall-copy`` reflects across n_1 = 0 and repeats u(1, .) on n_1 = 0;
    its squared norm is 2|u|^2 + h^d |u(1, .)|^2 - h^d |u(N, .)|^2, the last
    term coming from the truncated far wall.
    """
    if not isinstance(u.grid, HalfLatticeGrid) or u.grid.kind != NEUMANN:
        raise GridMismatchError("even extension needs a field on the Neumann-truncated half grid")
    return LatticeField(u.grid.parent, lattice_map(u.grid.N, _even_op(variant)).apply(u.values))


def restrict_lattice(v, kind=DIRICHLET):
    if isinstance(v.grid, HalfLatticeGrid):
        raise GridMismatchError("restriction needs a field on the full torus")
    half = v.grid.half(kind)
    return LatticeField(half, lattice_map(v.grid.N, "zero-" + kind).adjoint(v.values))


def _full_to_half(f):
    if not f.half:
        raise GridMismatchError("expected a half-space continuum field")


def odd_extend_continuum(f):
    _full_to_half(f)
    return ContinuumField(f.grid, continuum_map(f.grid.M, "odd").apply(f.values))


def even_extend_continuum(f):
    _full_to_half(f)
    return ContinuumField(f.grid, continuum_map(f.grid.M, "even").apply(f.values))


def zero_extend_continuum(f):
    _full_to_half(f)
    return ContinuumField(f.grid, continuum_map(f.grid.M, "zero").apply(f.values))


def restrict_continuum(g):
    if g.half:
        raise GridMismatchError("restriction needs a full-grid continuum field")
    return ContinuumField(g.grid, continuum_map(g.grid.M, "zero").adjoint(g.values), half=True)


def reflect_lattice(v):
    """n_1 -> -n_1 on the torus (slot -N is fixed)."""
    return np.roll(v[::-1], 1, axis=0)


def reflect_continuum(g):
    """x_1 -> -x_1 on the reference grid (planes 0 and -L are fixed)."""
    return np.roll(g[::-1], 1, axis=0)
