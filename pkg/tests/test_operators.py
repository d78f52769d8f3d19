import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn
from halflap.errors import GridMismatchError
from halflap.lattice import (
    HALF_PLANE,
    WALL_COPY,
    LatticeField,
    LatticeGrid,
    lattice_map,
    reflect_lattice,
)
from halflap.operators import (
    FULL,
    StencilOperator,
    apply_stencil,
    constant,
    continuum_symbol,
    cos_gauss,
    dense_matrix,
    dirichlet_eigenvalues,
    even_extend_potential,
    extension_discrepancy,
    get_potential,
    holder_ratio,
    lattice_symbol,
    neumann_eigenvalues,
    psi_lattice_symbol,
    sample_potential,
    sqrt_sin_gauss,
    stencil_array,
    torus_potential,
)

KINDS = ["full", "dirichlet", "neumann"]


def impulse(shape, index):
    v = np.zeros(shape)
    v[index] = 1.0
    return v


def test_dirichlet_impulse_d2():
    N = 4
    op = StencilOperator.on(LatticeGrid(2, 1.0, N), "dirichlet")
    v = LatticeField(op.grid, impulse(op.grid.shape, (0, N)))
    out = apply_stencil(op, v).values.real
    assert out[0, N] == 4 and out[1, N] == -1 and out[0, N + 1] == -1 and out[0, N - 1] == -1
    assert np.count_nonzero(out) == 4


def test_neumann_impulse_d2():
    N = 4
    op = StencilOperator.on(LatticeGrid(2, 1.0, N), "neumann")
    out = apply_stencil(op, LatticeField(op.grid, impulse(op.grid.shape, (0, N)))).values.real
    assert out[0, N] == 3 and out[1, N] == -1


def test_constants_are_harmonic_on_the_torus():
    op = StencilOperator.on(LatticeGrid(2, 0.5, 6), FULL)
    assert not np.any(apply_stencil(op, LatticeField(op.grid, np.full(op.grid.shape, 3.0))).values)


def test_stencil_grid_checks():
    grid = LatticeGrid(1, 1.0, 4)
    with pytest.raises(GridMismatchError):
        StencilOperator("dirichlet", grid)
    with pytest.raises(GridMismatchError):
        StencilOperator("neumann", grid.half("dirichlet"))
    op = StencilOperator.on(grid, "dirichlet")
    with pytest.raises(GridMismatchError):
        apply_stencil(op, LatticeField(grid, np.zeros(8)))


def test_symbol_values():
    assert lattice_symbol(1.0, 0.0) == 0
    assert lattice_symbol(1.0, np.pi) == pytest.approx(4.0, rel=1e-15)
    xi = np.linspace(-1, 1, 201)
    X, Y = np.meshgrid(xi, xi)
    ok = X**2 + Y**2 <= 1
    diff = np.abs(lattice_symbol(0.1, X, Y) - continuum_symbol(X, Y))
    assert np.all(diff[ok] <= 0.1**2 * (X**2 + Y**2)[ok] ** 2 / 12 + 1e-15)
    assert psi_lattice_symbol(np.sqrt, 1.0, np.pi) == pytest.approx(2.0)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("d", [1, 2])
def test_stencil_is_symmetric_and_nonnegative(kind, d, rng):
    grid = LatticeGrid(d, 0.4, 6)
    shape = grid.shape if kind == FULL else grid.half(kind).shape
    for _ in range(100):
        v, w = crandn(rng, shape), crandn(rng, shape)
        Av, Aw = stencil_array(kind, v, 0.4), stencil_array(kind, w, 0.4)
        assert abs(np.vdot(Av, w) - np.vdot(v, Aw)) <= 1e-12 * np.linalg.norm(Av) * np.linalg.norm(w)
        q = np.vdot(v, Av)
        assert q.real >= 0 and abs(q.imag) <= 1e-12 * abs(q)


def test_fourier_diagonalization(rng):
    h, N = 0.3, 8
    v = crandn(rng, (2 * N, 2 * N))
    xi = np.fft.fftfreq(2 * N) * 2 * np.pi / h
    sym = lattice_symbol(h, *np.meshgrid(xi, xi, indexing="ij"))
    via_fft = np.fft.ifftn(sym * np.fft.fftn(v))
    assert np.allclose(stencil_array(FULL, v, h), via_fft, atol=1e-12 * np.abs(v).max() / h**2)


@pytest.mark.parametrize("kind, eig", [("dirichlet", dirichlet_eigenvalues), ("neumann", neumann_eigenvalues)])
def test_closed_form_eigenvalues_match_dense_eigensolve(kind, eig):
    for N in (2, 5, 16):
        dense = np.linalg.eigvalsh(dense_matrix(kind, N, 0.5))
        assert np.max(np.abs(np.sort(eig(N, 0.5)) - dense)) <= 1e-12


def test_dirichlet_eigenvalues_example():
    assert np.allclose(dirichlet_eigenvalues(4, 1.0), [2 - np.sqrt(2), 2, 2 + np.sqrt(2)], atol=1e-15)


@given(d=st.integers(1, 3), N=st.integers(2, 6), seed=st.integers(0, 2**31))
def test_dirichlet_intertwining(d, N, seed):
    rng = np.random.default_rng(seed)
    h = 0.5
    u = crandn(rng, LatticeGrid(d, h, N).half("dirichlet").shape)
    odd = lattice_map(N, "odd")
    lhs = stencil_array(FULL, odd.apply(u), h)
    rhs = odd.apply(stencil_array("dirichlet", u, h))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(1.0, np.abs(lhs).max())


@given(d=st.integers(1, 3), N=st.integers(2, 6), seed=st.integers(0, 2**31))
def test_neumann_half_plane_intertwining(d, N, seed):
    rng = np.random.default_rng(seed)
    h = 0.5
    u = crandn(rng, LatticeGrid(d, h, N).half("neumann").shape)
    ext = lattice_map(N, "even-" + HALF_PLANE)
    lhs = stencil_array(FULL, ext.apply(u), h)
    rhs = ext.apply(stencil_array("neumann", u, h))
    assert np.max(np.abs(lhs - rhs)) <= 1e-13 * max(1.0, np.abs(lhs).max())


@pytest.mark.parametrize("d", [1, 2])
def test_wall_copy_defect_sits_on_the_zero_slice(d, rng):
    N, h = 10, 0.5
    u = crandn(rng, LatticeGrid(d, h, N).half("neumann").shape)
    u[N - 3:] = 0  # keep the far wall out of the picture
    ext = lattice_map(N, "even-" + WALL_COPY)
    defect = stencil_array(FULL, ext.apply(u), h) - ext.apply(stencil_array("neumann", u, h))
    assert np.max(np.abs(np.delete(defect, N, axis=0))) <= 1e-13
    # on n_1 = 0 the defect is -(u(1) - u(2)) / h^2
    assert np.allclose(defect[N], -(u[0] - u[1]) / h**2, atol=1e-12)


def test_potential_sampling_example():
    grid = LatticeGrid(2, 0.5, 4).half("dirichlet")
    V = sample_potential(cos_gauss(), grid)
    assert V.values[0, 4] == pytest.approx(np.cos(0.5) * np.exp(-0.25), rel=1e-15)


def test_even_extension_of_potential(rng):
    E = even_extend_potential(cos_gauss())
    x = rng.uniform(0, 3, size=(10, 2))
    assert np.array_equal(E(-x[:, 0], x[:, 1]), cos_gauss()(x[:, 0], x[:, 1]))


def test_holder_ratios():
    rng = np.random.default_rng(5)
    assert holder_ratio(sqrt_sin_gauss(), 2, rng=rng) <= sqrt_sin_gauss().holder_constant
    assert holder_ratio(cos_gauss(), 2, rng=rng) <= cos_gauss().holder_constant
    # the square-root cusp is not Lipschitz
    assert holder_ratio(sqrt_sin_gauss(), 1, theta=1.0, rng=rng) > 10 * sqrt_sin_gauss().holder_constant


@pytest.mark.parametrize("spec", [cos_gauss(), sqrt_sin_gauss()], ids=lambda s: s.name)
def test_lattice_potential_extensions_differ_by_holder_order(spec):
    for h in (0.25, 0.125, 0.0625):
        lattice = LatticeGrid(2, h, int(4 / h))
        gap, where = extension_discrepancy(spec, lattice, WALL_COPY)
        assert where == 0
        assert gap <= spec.holder_constant * h**spec.theta
        half_plane, _ = extension_discrepancy(spec, lattice, HALF_PLANE)
        assert half_plane <= spec.holder_constant * h**spec.theta


def test_torus_potential_is_reflection_even():
    lattice = LatticeGrid(2, 0.25, 16)
    for variant in ("sampled", WALL_COPY):
        W = torus_potential(cos_gauss(), lattice, variant)
        assert np.array_equal(reflect_lattice(W), W)
    with pytest.raises(ValueError):
        torus_potential(cos_gauss(), lattice, "odd")


def test_potential_registry_and_checks():
    assert get_potential("zero").bound == 0
    assert np.all(constant(2.0)(np.zeros(3)) == 2.0)
    with pytest.raises(ValueError):
        get_potential("coulomb")
    with pytest.raises(ValueError):
        type(cos_gauss())("bad", lambda x: x, 1.0, 1.5, 1.0)
