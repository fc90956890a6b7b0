import numpy as np
import pytest

from ensf.models.burgers import (
    burgers_initial,
    burgers_step,
    mass,
    step_adaptive,
)
from ensf.models.grid import Grid2D


def unit_grid(n):
    return Grid2D(nx=n, ny=n, x0=-1.0, x1=1.0, y0=-1.0, y1=1.0)


class TestInitial:
    def test_formula_points(self):
        g = unit_grid(8)
        u = burgers_initial(g)
        # center (i=3, j=4): x=-0.125, y=0.125, x+y=0 -> 1/4
        assert u[3, 4] == pytest.approx(0.25, abs=1e-14)
        # x+y = 0.5 -> 1/4 + 1/4 sin(pi/2) = 1/2
        assert u[4, 5] == pytest.approx(0.5, abs=1e-14)

    def test_range(self):
        u = burgers_initial(unit_grid(64))
        assert u.min() >= 0.0 and u.max() <= 0.5

    def test_shape(self):
        g = Grid2D(nx=12, ny=8, x0=-1.0, x1=1.0, y0=-1.0, y1=1.0)
        assert burgers_initial(g).shape == (12, 8)


class TestStep:
    def test_constant_field_fixed_point(self):
        g = unit_grid(16)
        u = np.full((16, 16), 0.3)
        out = burgers_step(u, g, 0.01)
        assert np.allclose(out, u, atol=1e-15)

    def test_mass_conserved(self):
        g = unit_grid(32)
        u = burgers_initial(g)
        m0 = mass(u, g)
        for _ in range(20):
            u = burgers_step(u, g, 0.01)
        assert mass(u, g) == pytest.approx(m0, rel=1e-12, abs=1e-13)

    def test_cfl_violation_reports_number(self):
        g = unit_grid(32)
        u = np.full((32, 32), 2.0)
        with pytest.raises(ValueError, match=r"CFL"):
            burgers_step(u, g, 0.1)  # cfl = 0.1*2*32 = 6.4

    def test_self_convergence_order(self):
        # smooth window: errors between successive dyadic grids should
        # contract at better than first order for the limited scheme
        t_end = 0.2
        sols = {}
        for n in (40, 80, 160):
            g = unit_grid(n)
            u = burgers_initial(g)
            dt = 0.3 / (0.5 * 2 * n)  # cfl ~ 0.3 at max|u|=0.5
            steps = int(np.ceil(t_end / dt))
            dt = t_end / steps
            for _ in range(steps):
                u = burgers_step(u, g, dt)
            sols[n] = u

        def restrict(u):
            return 0.25 * (u[0::2, 0::2] + u[1::2, 0::2] + u[0::2, 1::2] + u[1::2, 1::2])

        e1 = np.abs(sols[40] - restrict(sols[80])).mean()
        e2 = np.abs(sols[80] - restrict(sols[160])).mean()
        order = np.log2(e1 / e2)
        assert order >= 1.8

    def test_shock_regime_stays_finite_and_bounded(self):
        g = unit_grid(40)
        u = burgers_initial(g)
        dt = 0.3 / (0.5 * 2 * 40)
        for _ in range(int(1.0 / dt)):
            u = burgers_step(u, g, dt)
        assert np.all(np.isfinite(u))
        # total variation bounded, not diminishing: extrema may grow by
        # O(Mtvb h^2) per the unlimited band around smooth extrema
        wiggle = 10.0 * g.hx**2
        assert u.max() <= 0.5 + wiggle and u.min() >= -wiggle


class TestAdaptive:
    def test_matches_plain_step_when_cfl_ok(self):
        g = unit_grid(16)
        u = burgers_initial(g)
        assert np.array_equal(step_adaptive(u, g, 0.01), burgers_step(u, g, 0.01))

    def test_substeps_handle_wild_states(self):
        g = unit_grid(16)
        rng = np.random.default_rng(0)
        u = 2.0 * rng.standard_normal((16, 16))  # filter-style init, cfl >> 0.5
        out = step_adaptive(u, g, 0.05)
        assert np.all(np.isfinite(out))

    def test_mass_still_conserved(self):
        g = unit_grid(16)
        rng = np.random.default_rng(1)
        u = 2.0 * rng.standard_normal((16, 16))
        out = step_adaptive(u, g, 0.05)
        assert mass(out, g) == pytest.approx(mass(u, g), rel=1e-10, abs=1e-12)
