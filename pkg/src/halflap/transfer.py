"""Embedding J_h and discretization K_h = J_h^* between lattice and reference grid.

On the period-2L torus the embedding of v is the band-limited function with
Fourier coefficients proportional to phi_hat_0(h xi) * V(xi), where V is the
DFT of v extended 2 pi/h-periodically in xi.  With the oversampling rule
h_f <= 2h/3 every frequency in supp phi_hat_0(h .) is resolved, so both maps
are exact on the torus: J_h is an isometry and K_h J_h = I.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft

from .errors import GridMismatchError
from .genfunc import GeneratingFunction
from .lattice import (
    DIRICHLET,
    NEUMANN,
    ContinuumField,
    HalfLatticeGrid,
    LatticeField,
    LatticeGrid,
    ReferenceGrid,
    continuum_map,
    lattice_map,
)

MODES = ("odd", "even-half-plane", "even-wall-copy")


def mode_kind(mode):
    """Half-lattice truncation that goes with a transfer mode."""
    if mode not in MODES:
        raise ValueError(f"unknown half-space mode {mode!r}; choose from {MODES}")
    return DIRICHLET if mode == "odd" else NEUMANN


def to_fft(a):
    """Natural-order array (origin in the middle) -> spectrum."""
    return fft.fftn(fft.ifftshift(a))


def from_fft(A):
    return fft.fftshift(fft.ifftn(A))


@dataclass(frozen=True)
class TransferPlan:
    lattice: LatticeGrid
    reference: ReferenceGrid
    genfunc: GeneratingFunction

    def __post_init__(self):
        self.reference.check_serves(self.lattice)

    @classmethod
    def build(cls, d, h, N, genfunc, oversample=2):
        lattice = LatticeGrid(d, h, N)
        return cls(lattice, ReferenceGrid.for_lattice(lattice, oversample), genfunc)

    @property
    def d(self):
        return self.lattice.d

    @cached_property
    def _fold_index(self):
        M, P = self.reference.M, 2 * self.lattice.N
        return np.rint(fft.fftfreq(M) * M).astype(int) % P

    @cached_property
    def _axis_window(self):
        return self.genfunc.window(self.lattice.h * self.reference.frequencies())

    @cached_property
    def window(self):
        """(2 pi)^{d/2} phi_hat_0(h xi) on the reference frequency grid (FFT order)."""
        w = self._axis_window
        out = w
        for _ in range(self.d - 1):
            out = np.multiply.outer(out, w)
        return out

    @property
    def ratio(self):
        """(h / h_f)^d."""
        return (self.lattice.h / self.reference.hf) ** self.d

    def _tile(self, V):
        idx = self._fold_index
        for ax in range(self.d):
            V = np.take(V, idx, axis=ax)
        return V

    def _fold(self, G):
        P, M = 2 * self.lattice.N, self.reference.M
        for ax in range(self.d):
            if M % P == 0:
                shape = G.shape[:ax] + (M // P, P) + G.shape[ax + 1 :]
                G = G.reshape(shape).sum(axis=ax)
            else:
                moved = np.moveaxis(G, ax, 0)
                out = np.zeros((P,) + moved.shape[1:], dtype=complex)
                np.add.at(out, self._fold_index, moved)
                G = np.moveaxis(out, 0, ax)
        return G

    # array level: natural-order arrays, full torus / full reference grid

    def embed_array(self, v):
        if v.shape != self.lattice.shape:
            raise GridMismatchError(f"lattice array of shape {v.shape} != {self.lattice.shape}")
        return from_fft(self.ratio * self.window * self._tile(to_fft(v)))

    def discretize_array(self, f):
        if f.shape != self.reference.shape:
            raise GridMismatchError(f"reference array of shape {f.shape} != {self.reference.shape}")
        return from_fft(self._fold(self.window * to_fft(f)) / self.ratio)

    # half-space variants J^ro = R J O_h, J^re = R J E_h, K^ro = R_h K O, K^re = R_h K E

    def _maps(self, mode):
        kind = mode_kind(mode)
        N, M = self.lattice.N, self.reference.M
        ext_con = continuum_map(M, "odd" if kind == DIRICHLET else "even")
        return lattice_map(N, mode), ext_con, continuum_map(M, "zero"), lattice_map(N, "zero-" + kind)

    def embed_half_array(self, u, mode):
        ext_lat, _, zero_con, _ = self._maps(mode)
        return zero_con.adjoint(self.embed_array(ext_lat.apply(u)))

    def embed_half_adjoint(self, f, mode):
        ext_lat, _, zero_con, _ = self._maps(mode)
        return ext_lat.adjoint(self.discretize_array(zero_con.apply(f)))

    def discretize_half_array(self, f, mode):
        _, ext_con, _, zero_lat = self._maps(mode)
        return zero_lat.adjoint(self.discretize_array(ext_con.apply(f)))

    def discretize_half_adjoint(self, u, mode):
        _, ext_con, _, zero_lat = self._maps(mode)
        return ext_con.adjoint(self.embed_array(zero_lat.apply(u)))


def _check_plan(plan, grid):
    target = grid.parent if isinstance(grid, HalfLatticeGrid) else grid
    if target != plan.lattice:
        raise GridMismatchError(f"field lives on {target}, plan is for {plan.lattice}")


def embed(plan, v):
    _check_plan(plan, v.grid)
    if v.is_half:
        raise GridMismatchError("embed needs a full-torus field; use embed_halfspace")
    return ContinuumField(plan.reference, plan.embed_array(v.values))


def discretize(plan, f):
    if f.grid != plan.reference or f.half:
        raise GridMismatchError("discretize needs a full field on the plan's reference grid")
    return LatticeField(plan.lattice, plan.discretize_array(f.values))


def embed_halfspace(plan, u, mode="odd"):
    _check_plan(plan, u.grid)
    if not u.is_half or u.grid.kind != mode_kind(mode):
        raise GridMismatchError(f"mode {mode!r} needs a field on the {mode_kind(mode)} half grid")
    return ContinuumField(plan.reference, plan.embed_half_array(u.values, mode), half=True)


def discretize_halfspace(plan, f, mode="odd"):
    if f.grid != plan.reference or not f.half:
        raise GridMismatchError("discretize_halfspace needs a half field on the plan's reference grid")
    half = plan.lattice.half(mode_kind(mode))
    return LatticeField(half, plan.discretize_half_array(f.values, mode))
