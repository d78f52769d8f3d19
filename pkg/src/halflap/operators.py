"""Finite difference Laplacians, their symbols, and potentials."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import GridMismatchError
from .lattice import (
    DIRICHLET,
    HALF_PLANE,
    NEUMANN,
    WALL_COPY,
    HalfLatticeGrid,
    LatticeField,
    LatticeGrid,
    lattice_map,
)

FULL = "full"
KINDS = (FULL, DIRICHLET, NEUMANN)


@dataclass(frozen=True)
class StencilOperator:
    kind: str
    grid: LatticeGrid | HalfLatticeGrid

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown stencil kind {self.kind!r}")
        half = isinstance(self.grid, HalfLatticeGrid)
        if half != (self.kind != FULL) or (half and self.grid.kind != self.kind):
            raise GridMismatchError(f"stencil kind {self.kind!r} does not match grid {self.grid}")

    @property
    def h(self):
        return self.grid.h

    @classmethod
    def on(cls, lattice, kind):
        return cls(kind, lattice if kind == FULL else lattice.half(kind))


def _transverse(v, h, first_axis):
    out = np.zeros_like(v)
    for ax in range(first_axis, v.ndim):
        out += 2 * v - np.roll(v, 1, axis=ax) - np.roll(v, -1, axis=ax)
    return out / h**2


def stencil_array(kind, v, h):
    """Apply the (half-)lattice Laplacian to a raw array with x_1 on axis 0.

    Half kinds close the near wall with the boundary rows 2v(1) - v(2)
    (Dirichlet) and v(1) - v(2) (Neumann).  The far wall is the one induced
    by the torus symmetry: v(N) = 0 for Dirichlet, v(N+1) = v(N) for Neumann.
    """
    if kind == FULL:
        return _transverse(v, h, 0)
    pad = np.zeros((1,) + v.shape[1:], dtype=v.dtype)
    if kind == DIRICHLET:
        lo, hi = pad, pad
    else:
        lo, hi = v[:1], v[-1:]
    ext = np.concatenate([lo, v, hi], axis=0)
    normal = (2 * v - ext[:-2] - ext[2:]) / h**2
    return normal + _transverse(v, h, 1)


def apply_stencil(op, v):
    if v.grid != op.grid:
        raise GridMismatchError(f"field on {v.grid} does not match operator grid {op.grid}")
    return LatticeField(v.grid, stencil_array(op.kind, v.values, op.h))


def dense_matrix(kind, N, h):
    """Dense d = 1 matrix of the stencil, for oracle checks."""
    n = {FULL: 2 * N, DIRICHLET: N - 1, NEUMANN: N}[kind]
    eye = np.eye(n)
    return np.column_stack([stencil_array(kind, eye[:, j], h) for j in range(n)])


def lattice_symbol(h, *xi):
    """g_h(xi) = (4 / h^2) sum_j sin^2(h xi_j / 2)."""
    return sum((4 / h**2) * np.sin(0.5 * h * np.asarray(x)) ** 2 for x in xi)


def continuum_symbol(*xi):
    return sum(np.asarray(x) ** 2 for x in xi)


def psi_lattice_symbol(psi, h, *xi):
    """G_{0,h}(xi) = Psi(g_h(xi)), i.e. G_0 evaluated at (2/h) sin(h xi_j / 2)."""
    return psi(lattice_symbol(h, *xi))


def dirichlet_eigenvalues(N, h):
    """Axis-1 eigenvalues of the Dirichlet stencil, DST-I order (k = 1..N-1)."""
    k = np.arange(1, N)
    return (4 / h**2) * np.sin(k * np.pi / (2 * N)) ** 2


def neumann_eigenvalues(N, h):
    """Axis-1 eigenvalues of the Neumann stencil, DCT-II order (k = 0..N-1)."""
    k = np.arange(N)
    return (4 / h**2) * np.sin(k * np.pi / (2 * N)) ** 2


@dataclass(frozen=True)
class PotentialSpec:
    """Real bounded potential on the closed half-space with declared Holder data."""

    name: str
    evaluator: Callable = field(repr=False)
    bound: float
    theta: float
    holder_constant: float

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"Holder order must lie in (0, 1], got {self.theta}")

    def __call__(self, *x):
        return np.asarray(self.evaluator(*x), dtype=float)


def _gauss(x):
    return np.exp(-sum(np.asarray(c) ** 2 for c in x))


def cos_gauss():
    return PotentialSpec("cos-gauss", lambda *x: np.cos(x[0]) * _gauss(x), 1.0, 1.0, 2.0)


def sqrt_sin_gauss():
    return PotentialSpec(
        "sqrt-sin-gauss", lambda *x: np.sqrt(np.abs(np.sin(x[0]))) * _gauss(x), 1.0, 0.5, 2.0
    )


def constant(c=1.0):
    return PotentialSpec(f"constant-{c:g}", lambda *x: np.full(np.shape(x[0]), float(c)), abs(c), 1.0, 0.0)


POTENTIALS = {"cos-gauss": cos_gauss, "sqrt-sin-gauss": sqrt_sin_gauss, "zero": lambda: constant(0.0)}


def get_potential(name):
    try:
        return POTENTIALS[name]()
    except KeyError:
        raise ValueError(f"unknown potential {name!r}; choose from {sorted(POTENTIALS)}") from None


@dataclass(frozen=True, eq=False)
class DiscretePotential:
    grid: HalfLatticeGrid
    values: np.ndarray = field(repr=False)


def _half_points(grid):
    axes = [grid.normal_indices() * grid.h]
    axes += [np.arange(-grid.N, grid.N) * grid.h] * (grid.d - 1)
    return np.meshgrid(*axes, indexing="ij")


def sample_potential(spec, grid):
    """V_h(n) = V(h n) on the half grid."""
    return DiscretePotential(grid, spec(*_half_points(grid)))


def even_extend_potential(spec):
    """Evaluator of the reflection-even extension x -> V(|x_1|, x')."""

    def extended(*x):
        return spec(np.abs(x[0]), *x[1:])

    return extended


def torus_potential(spec, lattice, variant=HALF_PLANE):
    """Even extension of V_h to the torus, by the chosen lattice reflection.

    ``half-plane`` reflects n_1 -> 1 - n_1; ``wall-copy`` reflects
    n_1 -> -n_1 and repeats V(h e_1 + .) on n_1 = 0; ``sampled`` is (E V)_h,
    i.e. V(h |n_1|, h n').
    """
    if variant == "sampled":
        axes = [np.arange(-lattice.N, lattice.N) * lattice.h] * lattice.d
        return even_extend_potential(spec)(*np.meshgrid(*axes, indexing="ij"))
    if variant not in (HALF_PLANE, WALL_COPY):
        raise ValueError(f"unknown variant {variant!r}")
    half = sample_potential(spec, lattice.half(NEUMANN))
    return lattice_map(lattice.N, "even-" + variant).apply(half.values).real


def extension_discrepancy(spec, lattice, variant=WALL_COPY):
    """max |E_h V_h - (E V)_h| over the torus, with the slice where it is attained."""
    diff = np.abs(torus_potential(spec, lattice, variant) - torus_potential(spec, lattice, "sampled"))
    # the far-wall slot -N is excluded: truncation, not reflection
    diff[0] = 0.0
    where = np.unravel_index(np.argmax(diff), diff.shape)
    return float(diff.max()), int(where[0]) - lattice.N


def holder_ratio(spec, d, theta=None, pairs=10_000, radius=3.0, rng=None):
    """sup |V(x) - V(y)| / |x - y|^theta over random pairs in the closed half-space."""
    rng = np.random.default_rng(rng)
    theta = spec.theta if theta is None else theta
    x = rng.uniform(-radius, radius, size=(pairs, d))
    x[:, 0] = np.abs(x[:, 0])
    # short separations probe the local Holder behaviour, long ones the global
    scale = 10.0 ** rng.uniform(-6, 0, size=(pairs, 1))
    y = x + scale * rng.normal(size=(pairs, d))
    y[:, 0] = np.abs(y[:, 0])
    num = np.abs(spec(*x.T) - spec(*y.T))
    den = np.linalg.norm(x - y, axis=1) ** theta
    ok = den > 0
    return float(np.max(num[ok] / den[ok]))
