import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import crandn
from halflap.calculus import LatticeResolvent, SpectralFunction
from halflap.errors import GridMismatchError, SpectralProximityError
from halflap.genfunc import make_meyer, make_shannon
from halflap.lattice import DIRICHLET, LatticeGrid
from halflap.normest import (
    CASES,
    ErrorOperator,
    assemble_error,
    case_kind,
    case_mode,
    operator_norm,
    residual_certificate,
)
from halflap.operators import cos_gauss
from halflap.transfer import TransferPlan

SHANNON, MEYER = make_shannon(), make_meyer()


def small_plan(h=1 / 4, L=4.0, g=SHANNON):
    return TransferPlan.build(1, h, int(round(L / h)), g)


def test_case_table():
    assert {case_kind(c) for c in CASES} == {"dirichlet", "neumann"}
    assert case_mode("psi-dirichlet") == "odd"
    assert case_mode("neumann", "wall-copy") == "even-wall-copy"
    with pytest.raises(ValueError):
        case_kind("robin")


def test_assembly_rejects_bad_inputs():
    plan = small_plan()
    with pytest.raises(GridMismatchError):
        ErrorOperator("dirichlet", plan, -1, "even-half-plane")
    with pytest.raises(ValueError):
        assemble_error("potential-dirichlet", plan, -1 + 2j)
    with pytest.raises(ValueError):
        assemble_error("psi-neumann", plan, -1)
    with pytest.raises(SpectralProximityError):
        assemble_error("potential-dirichlet", plan, -1, potential=cos_gauss())
    with pytest.raises(SpectralProximityError):
        assemble_error("dirichlet", plan, 2.0)


def test_smoke_action_is_finite(rng):
    E = assemble_error("dirichlet", small_plan(), -1)
    out = E.apply(crandn(rng, E.shape))
    assert out.shape == E.shape and np.all(np.isfinite(out))


ALL_OPERATORS = {
    "dirichlet": dict(),
    "neumann": dict(),
    "neumann-wall-copy": dict(variant="wall-copy"),
    "potential-dirichlet": dict(potential=cos_gauss()),
    "potential-neumann": dict(potential=cos_gauss()),
    "psi-dirichlet": dict(psi=SpectralFunction.power(1.0)),
    "psi-neumann": dict(psi=SpectralFunction.power(3.0)),
}


def build(key, z=-1 + 2j, plan=None):
    case = key.replace("-wall-copy", "")
    return assemble_error(case, plan or small_plan(g=MEYER), z, **ALL_OPERATORS[key])


@pytest.mark.parametrize("key", ALL_OPERATORS)
def test_linearity(key, rng):
    E = build(key)
    for _ in range(3):
        f, g = crandn(rng, E.shape), crandn(rng, E.shape)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = E.apply(a * f + b * g)
        rhs = a * E.apply(f) + b * E.apply(g)
        assert np.linalg.norm(lhs - rhs) <= 1e-12 * np.linalg.norm(rhs)


@pytest.mark.parametrize("key", ALL_OPERATORS)
def test_adjoint_action(key, rng):
    E = build(key)
    for _ in range(3):
        f, g = crandn(rng, E.shape), crandn(rng, E.shape)
        a, b = np.vdot(g, E.apply(f)), np.vdot(E.adjoint(g), f)
        assert abs(a - b) <= 1e-11 * abs(a) + 1e-14


@pytest.mark.parametrize("key", ["dirichlet", "neumann", "potential-dirichlet", "psi-dirichlet"])
def test_conjugate_z_gives_equal_norm(key):
    # dense singular values as the oracle on both sides of the real axis
    E, Ebar = build(key, -1 + 2j), build(key, -1 - 2j)
    s = np.linalg.norm(E.dense(), 2)
    sbar = np.linalg.norm(Ebar.dense(), 2)
    assert abs(s - sbar) <= 1e-8 * s


def test_dense_assembly_guard():
    E = assemble_error("dirichlet", small_plan(h=1 / 8), -1)
    with pytest.raises(ValueError):
        E.dense(max_size=16)


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.integers(1, 12), st.integers(0, 2**31))
def test_scaled_projection(c, rank, seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(crandn(rng, (20, rank)))
    est = operator_norm(c * (Q @ Q.conj().T), tol=1e-10, seed=seed)
    assert est.converged
    assert abs(est.value - abs(c)) <= 1e-10 * abs(c)


def test_random_matrix_against_svd():
    rng = np.random.default_rng(7)
    A = crandn(rng, (50, 50))
    sigma = np.linalg.svd(A, compute_uv=False)[0]
    est = operator_norm(A, tol=1e-13, max_iter=20000, restarts=1, seed=3)
    assert abs(est.value - sigma) <= 1e-6 * sigma


def test_power_iteration_matches_dense_svd_on_error_operator():
    E = assemble_error("dirichlet", small_plan(), -1)
    sigma = np.linalg.norm(E.dense(), 2)
    est = operator_norm(E, tol=1e-10, max_iter=2000, restarts=2, seed=0)
    assert est.value <= sigma * (1 + 1e-12)
    assert abs(est.value - sigma) <= 1e-6 * sigma


def test_restarts_agree_on_dirichlet_case():
    tol = 1e-8
    E = assemble_error("dirichlet", small_plan(), -1)
    est = operator_norm(E, tol=tol, max_iter=2000, restarts=3, seed=11)
    assert est.converged and len(est.history) == 3
    finals = [trace[-1] for trace in est.history]
    assert (max(finals) - min(finals)) <= 2 * tol * max(finals)


def test_estimate_is_a_lower_bound_and_monotone_in_restarts():
    E = assemble_error("neumann", small_plan(), -4)
    sigma = np.linalg.norm(E.dense(), 2)
    values = [operator_norm(E, tol=1e-3, max_iter=5, restarts=r, seed=5).value for r in (1, 2, 4, 8)]
    assert all(v <= sigma * (1 + 1e-12) for v in values)
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_seed_reproducibility():
    E = assemble_error("psi-dirichlet", small_plan(), -1, psi=SpectralFunction.power(1.0))
    a = operator_norm(E, tol=1e-6, restarts=2, seed=42)
    b = operator_norm(E, tol=1e-6, restarts=2, seed=42)
    assert a.value == b.value and a.iterations == b.iterations


def test_nonconvergence_is_flagged_not_raised():
    E = assemble_error("neumann", small_plan(), -1)
    est = operator_norm(E, tol=1e-15, max_iter=3, restarts=1, seed=0)
    assert not est.converged and est.iterations == 3 and est.value > 0


def test_zero_operator_and_bad_tol():
    assert operator_norm(np.zeros((4, 4)), seed=0).value == 0.0
    with pytest.raises(ValueError):
        operator_norm(np.eye(3), tol=0)


@pytest.mark.parametrize("case", ["dirichlet", "neumann", "psi-dirichlet"])
def test_estimate_decreases_with_h(case):
    psi = SpectralFunction.power(3.0) if case.startswith("psi") else None
    values = []
    for h in (1 / 2, 1 / 4, 1 / 8):
        E = assemble_error(case, small_plan(h=h), -1, psi=psi)
        values.append(operator_norm(E, tol=1e-6, max_iter=400, restarts=1, seed=0).value)
    assert all(b <= 1.5 * a for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


def test_residual_certificate(rng):
    grid = LatticeGrid(1, 1 / 4, 32)
    R = LatticeResolvent(grid, DIRICHLET, -1 + 0.5j)
    v = crandn(rng, grid.half(DIRICHLET).shape)
    u = R.solve(v)
    ok = residual_certificate(u, v, R.apply_operator, R.z)
    assert not ok.degenerate and ok.value <= 1e-10
    noisy = u + 1e-3 * crandn(rng, u.shape) * np.linalg.norm(u) / np.sqrt(u.size)
    assert residual_certificate(noisy, v, R.apply_operator, R.z).value >= 1e-4
    zero = residual_certificate(np.zeros_like(v), np.zeros_like(v), R.apply_operator, R.z)
    assert zero.degenerate and zero.value == 0.0
