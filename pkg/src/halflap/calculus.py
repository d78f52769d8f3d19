"""Resolvents and functions of the lattice and continuum Laplacians.

Free operators are diagonalized exactly: the torus Laplacian by the DFT, the
half-lattice Dirichlet stencil by DST-I along x_1, the Neumann stencil by
DCT-II along x_1, and the continuum surrogate by the DFT of the reference grid
(symbol |xi|^2).  A function Psi of an operator acts as Psi(eigenvalue) in
that basis.  Potentials are handled by GMRES on the free-resolvent
preconditioned system u + R_0 V u = R_0 f.
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import fft
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import ConvergenceError, GridMismatchError, SpectralProximityError
from .lattice import (
    DIRICHLET,
    HALF_PLANE,
    NEUMANN,
    ContinuumField,
    HalfLatticeGrid,
    LatticeField,
    continuum_map,
    lattice_map,
)
from .operators import (
    FULL,
    dense_matrix,
    dirichlet_eigenvalues,
    even_extend_potential,
    lattice_symbol,
    neumann_eigenvalues,
    sample_potential,
    stencil_array,
    torus_potential,
)

PROXIMITY = 1e-8

PsiParams = namedtuple("PsiParams", "alpha beta gamma cited")


def derive_psi_params(s):
    """(alpha, beta, gamma) for Psi_s(lambda) = lambda^{s/2}.

    For s >= 2: alpha = (s+2)/2, beta = s-1.  For 1/2 < s < 2: alpha = s,
    beta = s-1.  The rate is gamma = min(s, 2) throughout; for 0 < s < 1 it
    rests on an external estimate rather than on the (alpha, beta) formula,
    which is flagged by ``cited``.  For s <= 1/2 no admissible (alpha, beta)
    exists and both are None.
    """
    if not s > 0:
        raise ValueError(f"power must be positive, got {s}")
    if s >= 2:
        alpha, beta = (s + 2) / 2, s - 1
    elif s > 0.5:
        alpha, beta = s, s - 1
    else:
        alpha = beta = None
    return PsiParams(alpha, beta, min(s, 2.0), s < 1)


def psi_constraints_hold(alpha, beta):
    return alpha > 0.5 and beta > -0.5 and alpha <= 1 + beta < 2 * alpha <= 3 + beta


@dataclass(frozen=True)
class SpectralFunction:
    name: str
    evaluator: Callable = field(repr=False)
    alpha: float | None = None
    beta: float | None = None
    s: float | None = None
    gamma_override: float | None = None

    def __post_init__(self):
        if abs(float(self.evaluator(np.array(0.0)))) > 0:
            raise ValueError("Psi(0) must vanish")
        if self.alpha is not None and not psi_constraints_hold(self.alpha, self.beta):
            raise ValueError(f"(alpha, beta) = ({self.alpha}, {self.beta}) violate the admissibility constraints")

    def __call__(self, lam):
        return self.evaluator(np.asarray(lam))

    @property
    def gamma(self):
        if self.gamma_override is not None:
            return self.gamma_override
        if self.alpha is None:
            return None
        return min(2 * self.alpha - 1, 2 * self.alpha - self.beta - 1)

    @classmethod
    def power(cls, s):
        p = derive_psi_params(s)
        return cls(f"power-{s:g}", lambda lam: np.maximum(lam, 0.0) ** (s / 2), p.alpha, p.beta, s, p.gamma)

    @classmethod
    def identity(cls):
        return cls.power(2.0)


# ----------------------------------------------------------------------------
# spectral parameter checks


def check_z(z, spectrum, nonreal=False):
    """Reject z on [0, inf), near the sampled spectrum, or real when ``nonreal``."""
    z = complex(z)
    if nonreal and z.imag == 0:
        raise SpectralProximityError(f"z = {z} must have nonzero imaginary part")
    if z.imag == 0 and z.real >= min(0.0, float(np.min(spectrum))):
        raise SpectralProximityError(f"z = {z} lies on [0, inf)")
    dist = float(np.min(np.abs(np.asarray(spectrum) - z)))
    if dist < PROXIMITY:
        raise SpectralProximityError(f"z = {z} is within {dist:.2e} of the spectrum")
    return z


# ----------------------------------------------------------------------------
# diagonalizing transforms


def _transverse_fft(u, inverse=False):
    axes = tuple(range(1, u.ndim))
    if not axes:
        return u
    return fft.ifftn(u, axes=axes) if inverse else fft.fftn(u, axes=axes)


def forward(kind, u):
    if kind == FULL:
        return fft.fftn(u)
    if kind == DIRICHLET:
        return _transverse_fft(fft.dst(u, type=1, axis=0, norm="ortho"))
    return _transverse_fft(fft.dct(u, type=2, axis=0, norm="ortho"))


def inverse(kind, U):
    if kind == FULL:
        return fft.ifftn(U)
    U = _transverse_fft(U, inverse=True)
    if kind == DIRICHLET:
        return fft.idst(U, type=1, axis=0, norm="ortho")
    return fft.idct(U, type=2, axis=0, norm="ortho")


@lru_cache(maxsize=64)
def eigenvalues(kind, N, h, d):
    """Eigenvalues of the (half-)lattice Laplacian in its transform basis."""
    xi = np.fft.fftfreq(2 * N) * 2 * np.pi / h
    g = lattice_symbol(h, xi)
    if kind == FULL:
        first = g
    elif kind == DIRICHLET:
        first = dirichlet_eigenvalues(N, h)
    else:
        first = neumann_eigenvalues(N, h)
    out = first
    for _ in range(d - 1):
        out = np.add.outer(out, g)
    return out


@lru_cache(maxsize=64)
def continuum_eigenvalues(M, hf, d):
    xi = np.fft.fftfreq(M) * 2 * np.pi / hf
    out = xi**2
    for _ in range(d - 1):
        out = np.add.outer(out, xi**2)
    return out


def _symbol(lam, psi):
    return lam if psi is None else psi(lam)


def _gmres(apply_a, rhs, tol, maxiter, restart=60):
    n = rhs.size
    history = []
    A = LinearOperator((n, n), matvec=lambda x: apply_a(x.reshape(rhs.shape)).ravel(), dtype=complex)
    x, info = gmres(
        A, rhs.ravel(), rtol=tol, atol=0.0, restart=restart, maxiter=maxiter,
        callback=history.append, callback_type="pr_norm",
    )
    if info != 0:
        raise ConvergenceError(f"GMRES stopped with info={info}", history)
    return x.reshape(rhs.shape)


class _Resolvent:
    """Shared machinery: diagonal free part plus optional multiplicative potential."""

    tol = 1e-13
    maxiter = 50
    restart = 60

    def free_solve(self, u, conj=False):
        mult = np.conj(self._mult) if conj else self._mult
        return inverse(self.kind, mult * forward(self.kind, u))

    def solve(self, u, conj=False):
        """(A + V - z)^{-1} u, or with conj(z) when ``conj`` (the adjoint)."""
        free = self.free_solve(u, conj)
        if self.potential is None:
            return free
        V = self.potential
        return _gmres(lambda x: x + self.free_solve(V * x, conj), free, self.tol, self.maxiter, self.restart)

    def apply_operator(self, u):
        """(A + V) u, computed independently of the resolvent when possible."""
        out = self._apply_free(u)
        return out if self.potential is None else out + self.potential * u


class LatticeResolvent(_Resolvent):
    """(Psi(H) + V - z)^{-1} for the torus (``full``) or a half-lattice stencil."""

    def __init__(self, lattice, kind, z, psi=None, potential=None):
        self.lattice, self.kind, self.psi = lattice, kind, psi
        lam = eigenvalues(kind, lattice.N, lattice.h, lattice.d)
        sym = _symbol(lam, psi)
        self.z = check_z(z, sym, nonreal=potential is not None)
        self.potential = None if potential is None else np.asarray(potential, dtype=float)
        self._mult = 1.0 / (sym - self.z)
        self._sym = sym

    def _apply_free(self, u):
        if self.psi is None:
            return stencil_array(self.kind, u, self.lattice.h)
        return inverse(self.kind, self._sym * forward(self.kind, u))


class ContinuumResolvent(_Resolvent):
    """(Psi(H_0) + W - z)^{-1} on the full reference grid, W an even potential."""

    kind = FULL

    def __init__(self, reference, z, psi=None, potential=None):
        self.reference, self.psi = reference, psi
        sym = _symbol(continuum_eigenvalues(reference.M, reference.hf, reference.d), psi)
        self.z = check_z(z, sym, nonreal=potential is not None)
        self.potential = None if potential is None else np.asarray(potential, dtype=float)
        self._mult = 1.0 / (sym - self.z)
        self._sym = sym

    def _apply_free(self, u):
        return inverse(FULL, self._sym * forward(FULL, u))


def continuum_potential(spec, reference):
    """Even extension of V sampled on the full reference grid."""
    return even_extend_potential(spec)(*reference.mesh())


# ----------------------------------------------------------------------------
# field-level API


@dataclass(frozen=True)
class ResolventQuery:
    z: complex
    psi: SpectralFunction | None = None
    potential: object = None


def _lattice_potential(q, grid):
    if q.potential is None:
        return None
    if isinstance(grid, HalfLatticeGrid):
        return sample_potential(q.potential, grid).values
    return torus_potential(q.potential, grid, "sampled")


def resolve_full(q, v):
    if v.is_half:
        raise GridMismatchError("resolve_full needs a full-torus field")
    R = LatticeResolvent(v.grid, FULL, q.z, q.psi, _lattice_potential(q, v.grid))
    return LatticeField(v.grid, R.solve(v.values))


def resolve_dirichlet(q, u, route="transform"):
    """Dirichlet half-lattice resolvent.

    ``transform`` diagonalizes with DST-I; ``extension`` computes
    R_h (H_{0,h} - z)^{-1} O_h u.  The two agree exactly without potential.
    """
    if not u.is_half or u.grid.kind != DIRICHLET:
        raise GridMismatchError("resolve_dirichlet needs a field on the Dirichlet half grid")
    if route == "transform":
        R = LatticeResolvent(u.grid.parent, DIRICHLET, q.z, q.psi, _lattice_potential(q, u.grid))
        return LatticeField(u.grid, R.solve(u.values))
    ext = lattice_map(u.grid.N, "odd")
    zero = lattice_map(u.grid.N, "zero-dirichlet")
    R = LatticeResolvent(u.grid.parent, FULL, q.z, q.psi, _extended_potential(q, u.grid, "odd"))
    return LatticeField(u.grid, zero.adjoint(R.solve(ext.apply(u.values))))


def resolve_neumann(q, u, variant=HALF_PLANE, route="transform"):
    """Neumann half-lattice resolvent.

    ``transform`` diagonalizes with DCT-II and is the resolvent of the stencil
    itself.  ``extension`` computes R_h (H_{0,h} - z)^{-1} E_h u with the chosen
    even extension; it reproduces the transform route for ``half-plane`` only.
    """
    if not u.is_half or u.grid.kind != NEUMANN:
        raise GridMismatchError("resolve_neumann needs a field on the Neumann half grid")
    if route == "transform":
        R = LatticeResolvent(u.grid.parent, NEUMANN, q.z, q.psi, _lattice_potential(q, u.grid))
        return LatticeField(u.grid, R.solve(u.values))
    ext = lattice_map(u.grid.N, "even-" + variant)
    zero = lattice_map(u.grid.N, "zero-neumann")
    R = LatticeResolvent(u.grid.parent, FULL, q.z, q.psi, _extended_potential(q, u.grid, variant))
    return LatticeField(u.grid, zero.adjoint(R.solve(ext.apply(u.values))))


def _extended_potential(q, grid, variant):
    if q.potential is None:
        return None
    if variant == "odd":
        # values on n_1 = 0 and -N never meet an odd sequence
        return torus_potential(q.potential, grid.parent, "sampled")
    return torus_potential(q.potential, grid.parent, variant)


def resolve_continuum(q, f):
    if f.half:
        raise GridMismatchError("use resolve_continuum_halfspace for half-space fields")
    W = None if q.potential is None else continuum_potential(q.potential, f.grid)
    R = ContinuumResolvent(f.grid, q.z, q.psi, W)
    return ContinuumField(f.grid, R.solve(f.values))


def resolve_continuum_halfspace(q, f, bc=DIRICHLET, full=False):
    """R (Psi(H_0) + E V - z)^{-1} X f with X the odd (Dirichlet) or even (Neumann) extension.

    With ``full=True`` the extended solution is returned before restriction.
    """
    if not f.half:
        raise GridMismatchError("expected a half-space continuum field")
    ext = continuum_map(f.grid.M, "odd" if bc == DIRICHLET else "even")
    W = None if q.potential is None else continuum_potential(q.potential, f.grid)
    out = ContinuumResolvent(f.grid, q.z, q.psi, W).solve(ext.apply(f.values))
    if full:
        return ContinuumField(f.grid, out)
    return ContinuumField(f.grid, continuum_map(f.grid.M, "zero").adjoint(out), half=True)


def resolve_with_potential(q, f, bc=DIRICHLET):
    """Resolvent with the query's potential attached, for any field type."""
    if q.potential is None:
        raise ValueError("query carries no potential")
    if complex(q.z).imag == 0:
        raise SpectralProximityError("a potential requires Im z != 0")
    if isinstance(f, ContinuumField):
        return resolve_continuum_halfspace(q, f, bc) if f.half else resolve_continuum(q, f)
    if not f.is_half:
        return resolve_full(q, f)
    if f.grid.kind == DIRICHLET:
        return resolve_dirichlet(q, f)
    return resolve_neumann(q, f)


def resolve_psi(psi, q, f, bc=DIRICHLET):
    """(Psi(A) - z)^{-1} f for whichever operator A the field's grid carries."""
    q = ResolventQuery(q.z, psi, q.potential)
    if isinstance(f, ContinuumField):
        return resolve_continuum_halfspace(q, f, bc) if f.half else resolve_continuum(q, f)
    if not f.is_half:
        return resolve_full(q, f)
    return resolve_dirichlet(q, f) if f.grid.kind == DIRICHLET else resolve_neumann(q, f)


def apply_psi(psi, f, bc=DIRICHLET, route="transform", variant=HALF_PLANE):
    """Psi(A) f by diagonalization, or by restrict o Psi(full) o extend.

    Continuum half-space fields always use the extension route.
    """
    if isinstance(f, ContinuumField):
        lam = continuum_eigenvalues(f.grid.M, f.grid.hf, f.grid.d)
        if not f.half:
            return ContinuumField(f.grid, inverse(FULL, psi(lam) * forward(FULL, f.values)))
        ext = continuum_map(f.grid.M, "odd" if bc == DIRICHLET else "even")
        out = inverse(FULL, psi(lam) * forward(FULL, ext.apply(f.values)))
        return ContinuumField(f.grid, continuum_map(f.grid.M, "zero").adjoint(out), half=True)
    grid = f.grid
    if not f.is_half:
        lam = eigenvalues(FULL, grid.N, grid.h, grid.d)
        return LatticeField(grid, inverse(FULL, psi(lam) * forward(FULL, f.values)))
    kind = grid.kind
    if route == "transform":
        lam = eigenvalues(kind, grid.N, grid.h, grid.d)
        return LatticeField(grid, inverse(kind, psi(lam) * forward(kind, f.values)))
    lam = eigenvalues(FULL, grid.N, grid.h, grid.d)
    ext = lattice_map(grid.N, "odd" if kind == DIRICHLET else "even-" + variant)
    out = inverse(FULL, psi(lam) * forward(FULL, ext.apply(f.values)))
    return LatticeField(grid, lattice_map(grid.N, "zero-" + kind).adjoint(out))


def compare_zero_extension(psi, f):
    """|R Psi(H_0) O f - R Psi(H_0) E_0 f| on the reference grid.

    Odd extension is the functional-calculus Dirichlet operator; extension by
    zero is the other common definition of a fractional Dirichlet Laplacian.
    """
    if not f.half:
        raise GridMismatchError("expected a half-space continuum field")
    lam = continuum_eigenvalues(f.grid.M, f.grid.hf, f.grid.d)
    mult = psi(lam)
    zero = continuum_map(f.grid.M, "zero")
    odd = continuum_map(f.grid.M, "odd")
    diff = inverse(FULL, mult * forward(FULL, odd.apply(f.values) - zero.apply(f.values)))
    return ContinuumField(f.grid, zero.adjoint(diff), half=True).norm()


def dense_solve(kind, N, h, z, rhs, potential=None, psi=None):
    """Dense d = 1 oracle: (Psi(A) + diag(V) - z)^{-1} rhs."""
    A = dense_matrix(kind, N, h)
    if psi is not None:
        w, Q = np.linalg.eigh(A)
        A = (Q * psi(np.clip(w, 0, None))) @ Q.T
    if potential is not None:
        A = A + np.diag(potential)
    return np.linalg.solve(A - z * np.eye(A.shape[0]), rhs)
