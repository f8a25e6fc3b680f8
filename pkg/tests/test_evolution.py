import math

import numpy as np
import pytest

from vdwwaves.errors import NonFiniteInput, ShapeError, StabilityError
from vdwwaves.evolution import (
    Grid2D,
    WaveField,
    init_field,
    integrate,
    mass,
    residual_zk,
    rhs,
    stable_dt,
    step,
    to_traveling_frame,
    write_snapshots_csv,
)
from vdwwaves.exact import ExactSolutionSpec, boundary, evaluate
from vdwwaves.gas import WaveCoefficients

TWO_PI = 2 * math.pi


def periodic(n=64, m=16, L=TWO_PI):
    return Grid2D(0.0, L, n, 0.0, 1.0, m, bc="periodic")


@pytest.mark.parametrize(
    "kwargs",
    [
        {"theta_max": 0.0},
        {"n_theta": 4},
        {"n_eta": 7},
        {"bc": "neumann"},
    ],
)
def test_grid_rejects(kwargs):
    base = dict(theta_min=0.0, theta_max=1.0, n_theta=16, eta_min=0.0, eta_max=1.0, n_eta=16)
    base.update(kwargs)
    with pytest.raises(ValueError):
        Grid2D(**base)


def test_grid_spacing_and_refinement():
    g = Grid2D(0.0, 1.0, 11, 0.0, 2.0, 9, bc="dirichlet-from-exact")
    assert g.dtheta == pytest.approx(0.1) and g.deta == pytest.approx(0.25)
    r = g.refined()
    assert r.shape == (21, 17)
    assert np.allclose(r.theta[::2], g.theta)
    p = periodic(16, 8, 1.0)
    assert p.dtheta == 1 / 16 and p.theta[-1] < 1.0


def test_wavefield_validation():
    g = periodic(16, 8)
    with pytest.raises(ShapeError):
        WaveField(g, 0.0, np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(NonFiniteInput):
        init_field(g, lambda th, et: np.full_like(th, np.nan))


def test_init_zero():
    f = init_field(periodic(16, 8), lambda th, et: 0 * th)
    assert f.tau == 0.0 and not f.h.any() and not f.g.any()


def test_init_eta_independent_gives_zero_g():
    f = init_field(periodic(32, 8), lambda th, et: np.sin(th))
    assert np.all(f.g == 0.0)


@pytest.mark.parametrize("n", [32, 64])
def test_init_g_quadrature(n):
    grid = periodic(n, 16)
    f = init_field(grid, lambda th, et: np.sin(th) * et)
    TH, _ = grid.mesh()
    want = -np.cos(TH) + math.cos(grid.theta_min)
    # eta wraps around on a periodic grid, so only interior columns see h_eta = sin
    err = np.max(np.abs(f.g[:, 1:-1] - want[:, 1:-1]))
    assert err < 2 * grid.dtheta**2
    assert np.all(f.g[0] == 0.0)


def test_rhs_constant_state_vanishes(ideal):
    f = init_field(periodic(16, 8), lambda th, et: 0 * th + 0.7)
    assert np.max(np.abs(rhs(f, ideal))) < 1e-12


@pytest.mark.parametrize("n", [32, 64, 128])
def test_rhs_heat_symbol(n):
    c = WaveCoefficients(c0=1.0, gamma_hat0=0.0, lambda0=0.0, beta_hat=1.0, q=0.0)
    grid = periodic(n, 8)
    f = init_field(grid, lambda th, et: np.sin(th))
    TH, _ = grid.mesh()
    err = np.max(np.abs(rhs(f, c) + np.sin(TH)))
    assert err < grid.dtheta**2 / 12 * 1.01


@pytest.mark.parametrize("n", [32, 64, 128])
def test_rhs_quadratic_flux(n):
    c = WaveCoefficients(c0=1.0, gamma_hat0=-2.0, lambda0=0.0, beta_hat=0.0, q=0.0)
    grid = periodic(n, 8)
    f = init_field(grid, lambda th, et: np.sin(th))
    TH, _ = grid.mesh()
    err = np.max(np.abs(rhs(f, c) - c.gamma_hat0 * np.sin(TH) * np.cos(TH)))
    assert err < abs(c.gamma_hat0) * grid.dtheta**2


def test_rhs_order_two():
    c = WaveCoefficients(c0=1.0, gamma_hat0=-2.0, lambda0=1.0, beta_hat=0.5, q=0.0)
    errs = []
    for n in (32, 64, 128):
        grid = periodic(n, 8)
        f = init_field(grid, lambda th, et: np.sin(th))
        s, co = np.sin(grid.mesh()[0]), np.cos(grid.mesh()[0])
        exact = c.gamma_hat0 * s * co + c.lambda0 * s**2 * co - c.beta_hat * s
        errs.append(np.max(np.abs(rhs(f, c) - exact)))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 1.95)


def test_zero_stays_zero(ideal):
    f = init_field(periodic(16, 8), lambda th, et: 0 * th)
    for _ in range(5):
        f = step(f, ideal, 1e-3)
    assert not f.h.any()


def test_one_step_exact_wavefan(ideal):
    spec = ExactSolutionSpec("wavefan_plus", k1=1.0)
    grid = Grid2D(0.0, 1.0, 65, 0.0, 1.0, 17, bc="dirichlet-from-exact")
    f = init_field(grid, boundary=boundary(spec, ideal))
    dt = stable_dt(f, ideal)
    f1 = step(f, ideal, dt)
    TH, ET = grid.mesh()
    err = np.max(np.abs(f1.h - evaluate(spec, ideal, dt, TH, ET)))
    assert f1.tau == dt
    assert err < 0.05 * grid.dtheta**2


def test_periodic_mass_per_step(ideal):
    c = ideal.replace(beta_hat=0.05)
    f = init_field(periodic(64, 16, 1.0), lambda th, et: 1.0 + 0.1 * np.sin(2 * np.pi * th) * np.cos(2 * np.pi * et))
    m0 = mass(f)
    f1 = step(f, c, stable_dt(f, c))
    assert abs(mass(f1) - m0) / abs(m0) < 1e-12


def test_integrate_returns_initial_only(ideal):
    f = init_field(periodic(16, 8), lambda th, et: np.sin(th))
    snaps = integrate(f, ideal, 0.0)
    assert len(snaps) == 1 and snaps[0] is f


def test_integrate_lands_on_snapshots(ideal):
    f = init_field(periodic(16, 8), lambda th, et: 0.1 * np.sin(th))
    snaps = integrate(f, ideal, 0.01, snapshot_every=0.004)
    assert [s.tau for s in snaps] == pytest.approx([0.0, 0.004, 0.008, 0.01], abs=1e-15)
    assert snaps[-1].tau == 0.01


def test_dissipation_dominated_decay():
    c = WaveCoefficients(c0=1.0, gamma_hat0=-1.0, lambda0=0.5, beta_hat=2.0, q=0.0)
    f = init_field(periodic(32, 8), lambda th, et: 0.2 * np.sin(th) * (1 + 0.1 * np.cos(2 * np.pi * et)))
    snaps = integrate(f, c, 0.5, snapshot_every=0.05)
    sup = [np.max(np.abs(s.h)) for s in snaps]
    assert np.all(np.diff(sup) <= 0)
    assert sup[-1] < sup[0] * math.exp(-0.9)


def test_wavefan_convergence_ratio(ideal):
    spec = ExactSolutionSpec("wavefan_plus", k1=1.0)
    errs = []
    for n in (32, 64, 128):
        grid = Grid2D(0.0, 1.0, n + 1, 0.0, 1.0, n // 4 + 1, bc="dirichlet-from-exact")
        bnd = boundary(spec, ideal)
        final = integrate(init_field(grid, boundary=bnd), ideal, 0.1)[-1]
        TH, ET = grid.mesh()
        errs.append(np.max(np.abs(final.h - bnd.h(0.1, TH, ET))))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    # pre-asymptotic on the coarsest pair, approaching 4
    assert ratios[0] > 2.5 and ratios[1] > 3.5


def test_burgers_steady_profile():
    # viscous Burgers balance: h = U tanh(U theta / (2 beta)) is steady
    U, beta = 1.0, 0.1
    c = WaveCoefficients(c0=1.0, gamma_hat0=1.0, lambda0=0.0, beta_hat=beta, q=0.0)

    class Steady:
        def h(self, tau, theta, eta):
            return U * np.tanh(U * np.asarray(theta) / (2 * beta)) + 0 * np.asarray(eta)

        def g(self, tau, theta, eta):
            return np.zeros(np.broadcast(theta, eta).shape)

    errs = []
    for n in (41, 81):
        grid = Grid2D(-1.0, 1.0, n, 0.0, 1.0, 9, bc="dirichlet-from-exact")
        bnd = Steady()
        final = integrate(init_field(grid, boundary=bnd), c, 0.2)[-1]
        errs.append(np.max(np.abs(final.h - bnd.h(0, *grid.mesh()))))
    assert errs[1] < errs[0] / 3.5
    assert errs[1] < 5 * (2.0 / 80) ** 2


def test_unstable_step_raises():
    c = WaveCoefficients(c0=1.0, gamma_hat0=-1.0, lambda0=1.0, beta_hat=1.0, q=0.0)
    f = init_field(periodic(32, 8), lambda th, et: np.sin(th))
    with pytest.raises(StabilityError) as info:
        for _ in range(200):
            f = step(f, c, 10.0)
    assert info.value.tau is not None


def test_residual_zk_constant(ideal):
    grid = periodic(16, 8)
    hs = np.full((3,) + grid.shape, ideal.constant_state)
    assert np.all(residual_zk(hs, grid, 0.1, ideal) == 0.0)


def test_residual_zk_shape_errors(ideal):
    grid = periodic(16, 8)
    with pytest.raises(ShapeError):
        residual_zk(np.zeros((2,) + grid.shape), grid, 0.1, ideal)
    with pytest.raises(ShapeError):
        residual_zk(np.zeros((3, 5, 5)), grid, 0.1, ideal)


def test_residual_zk_on_wavefan(real):
    spec = ExactSolutionSpec("wavefan_plus", k1=1.0, k2=0.1)
    c = real.replace(beta_hat=0.2)
    d = 1e-3
    grid = Grid2D(0.0, 10 * d, 11, 0.5, 0.5 + 10 * d, 11, bc="dirichlet-from-exact")
    TH, ET = grid.mesh()
    dtau = d / c.q
    hs = np.array([evaluate(spec, c, k * dtau, TH, ET) for k in range(3)])
    assert np.max(np.abs(residual_zk(hs, grid, dtau, c))) < 1e-6


@pytest.mark.parametrize("n", [16, 32])
def test_residual_zk_converges_on_solver_output(ideal, n):
    c = ideal.replace(beta_hat=0.5)
    res = []
    for m in (n, 2 * n):
        grid = periodic(m, m, 1.0)
        f = init_field(grid, lambda th, et: 0.05 * np.sin(2 * np.pi * th) * np.cos(2 * np.pi * et))
        dt = 0.2 * stable_dt(f, c)
        levels = [f]
        for _ in range(2):
            levels.append(step(levels[-1], c, dt))
        res.append(np.max(np.abs(residual_zk(np.array([s.h for s in levels]), grid, dt, c))))
    assert res[1] < res[0] / 3


def test_mass_values():
    g = Grid2D(0.0, 1.0, 11, 0.0, 1.0, 11, bc="dirichlet-from-exact")
    ones = WaveField(g, 0.0, np.ones(g.shape), np.zeros(g.shape), boundary=object())
    assert mass(ones) == pytest.approx(1.0, abs=1e-14)
    assert mass(WaveField(g, 0.0, np.zeros(g.shape), np.zeros(g.shape), boundary=object())) == 0.0
    p = periodic(64, 8)
    f = init_field(p, lambda th, et: np.sin(th))
    assert abs(mass(f)) < 1e-12


@pytest.mark.parametrize(
    "theta, tau, eta, q, expected",
    [
        (0.0, 0.0, 5.0, 13.65245, (0.0, 5.0)),
        (13.65245, 1.0, 0.0, 13.65245, (0.0, 0.0)),
        (2.0, 1.0, 1.0, 13.65245, (-11.65245, 1.0)),
    ],
)
def test_to_traveling_frame(theta, tau, eta, q, expected):
    X, T = to_traveling_frame(theta, tau, eta, q)
    assert (X, T) == pytest.approx(expected, abs=1e-12)


def test_snapshot_csv(tmp_path, ideal):
    f = init_field(periodic(8, 8), lambda th, et: 0.1 * np.sin(th))
    path = tmp_path / "s.csv"
    write_snapshots_csv(path, [f])
    lines = path.read_text().splitlines()
    assert lines[0] == "tau,theta,eta,h,g"
    assert len(lines) == 65
    row = [float(v) for v in lines[2].split(",")]
    assert row[3] == f.h.ravel()[1]
