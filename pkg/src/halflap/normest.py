"""Resolvent-difference error operators and matrix-free norm estimation."""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from .calculus import ContinuumResolvent, LatticeResolvent, continuum_potential
from .errors import GridMismatchError, SpectralProximityError
from .lattice import DIRICHLET, HALF_PLANE, NEUMANN, continuum_map
from .operators import PotentialSpec, sample_potential
from .transfer import TransferPlan, mode_kind

CASES = (
    "dirichlet",
    "neumann",
    "potential-dirichlet",
    "potential-neumann",
    "psi-dirichlet",
    "psi-neumann",
)


def case_kind(case):
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; choose from {CASES}")
    return DIRICHLET if case.endswith("dirichlet") else NEUMANN


def case_mode(case, variant=HALF_PLANE):
    return "odd" if case_kind(case) == DIRICHLET else "even-" + variant


@dataclass(eq=False)
class ErrorOperator:
    """f -> J R_h(z) K f - R(z) f on the reference half-grid.

    J, K are the half-space transfer maps of ``mode``; R_h is the
    half-lattice resolvent of Psi(stencil) + V_h and R the continuum one of
    Psi(H_0) + E V, realized by extension to the reference torus.
    """

    case: str
    plan: TransferPlan
    z: complex
    mode: str
    psi: object = None
    potential: PotentialSpec | None = None
    lattice_resolvent: LatticeResolvent = field(init=False, repr=False)
    continuum_resolvent: ContinuumResolvent = field(init=False, repr=False)

    def __post_init__(self):
        kind = case_kind(self.case)
        if mode_kind(self.mode) != kind:
            raise GridMismatchError(f"mode {self.mode!r} does not serve case {self.case!r}")
        if self.case.startswith("potential") and self.potential is None:
            raise ValueError(f"case {self.case!r} needs a potential")
        if self.case.startswith("psi") and self.psi is None:
            raise ValueError(f"case {self.case!r} needs a spectral function")
        if self.potential is not None and complex(self.z).imag == 0:
            raise SpectralProximityError("a potential requires Im z != 0")
        lattice, ref = self.plan.lattice, self.plan.reference
        half = lattice.half(kind)
        V_h = None if self.potential is None else sample_potential(self.potential, half).values
        W = None if self.potential is None else continuum_potential(self.potential, ref)
        self.kind = kind
        self.lattice_resolvent = LatticeResolvent(lattice, kind, self.z, self.psi, V_h)
        self.continuum_resolvent = ContinuumResolvent(ref, self.z, self.psi, W)
        self.extension = continuum_map(ref.M, "odd" if kind == DIRICHLET else "even")
        self._zero = continuum_map(ref.M, "zero")

    @property
    def shape(self):
        return self.plan.reference.half_shape

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def h(self):
        return self.plan.lattice.h

    def lattice_branch(self, f, conj=False):
        p, m = self.plan, self.mode
        if conj:
            return p.discretize_half_adjoint(self.lattice_resolvent.solve(p.embed_half_adjoint(f, m), conj=True), m)
        return p.embed_half_array(self.lattice_resolvent.solve(p.discretize_half_array(f, m)), m)

    def continuum_branch(self, f, conj=False):
        if conj:
            return self.extension.adjoint(self.continuum_resolvent.solve(self._zero.apply(f), conj=True))
        return self._zero.adjoint(self.continuum_resolvent.solve(self.extension.apply(f)))

    def apply(self, f):
        f = np.asarray(f, dtype=complex).reshape(self.shape)
        return self.lattice_branch(f) - self.continuum_branch(f)

    def adjoint(self, g):
        g = np.asarray(g, dtype=complex).reshape(self.shape)
        return self.lattice_branch(g, conj=True) - self.continuum_branch(g, conj=True)

    def as_linear_operator(self):
        n = self.size
        return LinearOperator(
            (n, n),
            matvec=lambda x: self.apply(x).ravel(),
            rmatvec=lambda x: self.adjoint(x).ravel(),
            dtype=complex,
        )

    def dense(self, max_size=256):
        """Column-by-column assembly; only for small d = 1 oracles."""
        n = self.size
        if n > max_size:
            raise ValueError(f"dense assembly of a {n} x {n} operator exceeds max_size={max_size}")
        eye = np.eye(n, dtype=complex)
        return np.column_stack([self.apply(eye[:, j]).ravel() for j in range(n)])


def assemble_error(case, plan, z, mode=None, psi=None, potential=None, variant=HALF_PLANE):
    if mode is None:
        mode = case_mode(case, variant)
    return ErrorOperator(case, plan, z, mode, psi, potential)


NormEstimate = namedtuple("NormEstimate", "value iterations converged restarts history")


def _linear(E):
    if hasattr(E, "as_linear_operator"):
        return E.as_linear_operator()
    return aslinearoperator(E)


def operator_norm(E, tol=1e-6, max_iter=500, restarts=3, seed=None):
    """Largest singular value by power iteration on E*E.

    Each restart begins from an independent complex Gaussian vector; the
    estimate ||E x|| with ||x|| = 1 is a lower bound, and the maximum over
    restarts is returned.  ``converged`` is False if any restart ran out of
    iterations before the relative change fell below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    A = _linear(E)
    n = A.shape[1]
    rng = np.random.default_rng(seed)
    best, total, all_ok, history = 0.0, 0, True, []
    for _ in range(max(1, restarts)):
        x = rng.normal(size=n) + 1j * rng.normal(size=n)
        x /= np.linalg.norm(x)
        sigma, ok, trace = 0.0, False, []
        for _ in range(max_iter):
            y = A.matvec(x)
            new = float(np.linalg.norm(y))
            trace.append(new)
            total += 1
            if new == 0.0:
                ok = True
                break
            if abs(new - sigma) <= tol * new:
                sigma, ok = new, True
                break
            sigma = new
            w = A.rmatvec(y)
            nw = np.linalg.norm(w)
            if nw == 0.0:
                ok = True
                break
            x = w / nw
        best = max(best, sigma)
        all_ok &= ok
        history.append(trace)
    return NormEstimate(best, total, all_ok, restarts, history)


Residual = namedtuple("Residual", "value degenerate")


def residual_certificate(u, v, apply_op, z):
    """||(A - z) u - v|| / ||v||; with v = 0 the absolute residual is flagged."""
    u, v = np.asarray(u), np.asarray(v)
    r = float(np.linalg.norm(apply_op(u) - z * u - v))
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return Residual(r, True)
    return Residual(r / nv, False)
