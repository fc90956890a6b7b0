import numpy as np
import pytest

from ensf.diagnostics import DiagnosticSeries, ac_energy, kinetic_energy, mass, rmse, sup_norm
from ensf.models.burgers import burgers_initial
from ensf.models.grid import Grid2D
from ensf.models.navier_stokes import NSState, taylor_green_initial
from ensf.rng import stream


class TestRmse:
    def test_zero_for_equal(self):
        x = stream(0).standard_normal(17)
        assert rmse(x, x) == 0.0

    def test_constant_offset(self):
        x = np.zeros(9)
        assert rmse(x + 0.7, x) == pytest.approx(0.7, rel=1e-15)

    def test_three_four(self):
        assert rmse(np.array([3.0, 4.0]), np.zeros(2)) == pytest.approx(
            3.5355339059327378, rel=1e-14
        )

    def test_accepts_2d_fields(self):
        a = np.full((4, 5), 2.0)
        assert rmse(a, np.zeros((4, 5))) == pytest.approx(2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            rmse(np.zeros(3), np.zeros(4))


class TestMass:
    def test_unit_field(self):
        g = Grid2D(nx=8, ny=8, x0=-1, x1=1, y0=-1, y1=1)
        assert mass(np.ones((8, 8)), g) == pytest.approx(4.0, rel=1e-15)

    def test_zero_field(self):
        g = Grid2D(nx=8, ny=8, x0=-1, x1=1, y0=-1, y1=1)
        assert mass(np.zeros((8, 8)), g) == 0.0

    def test_burgers_initial_mass(self):
        # quarter plus sine: the sine sums to zero over the periodic lattice
        g = Grid2D(nx=80, ny=80, x0=-1, x1=1, y0=-1, y1=1)
        assert mass(burgers_initial(g), g) == pytest.approx(1.0, abs=1e-12)


class TestKineticEnergy:
    def test_zero(self):
        g = Grid2D(nx=8, ny=8, x0=0, x1=1, y0=0, y1=1)
        s = NSState(u=np.zeros((8, 8)), v=np.zeros((8, 8)), q=1.0)
        assert kinetic_energy(s, g) == 0.0

    def test_unit_u(self):
        g = Grid2D(nx=8, ny=8, x0=0, x1=1, y0=0, y1=1)
        s = NSState(u=np.ones((8, 8)), v=np.zeros((8, 8)), q=1.0)
        assert kinetic_energy(s, g) == pytest.approx(0.5, rel=1e-14)

    def test_taylor_green_quarter(self):
        g = Grid2D(nx=32, ny=32, x0=0, x1=1, y0=0, y1=1)
        assert kinetic_energy(taylor_green_initial(g), g) == pytest.approx(0.25, rel=0.01)

    def test_channel_shape(self):
        g = Grid2D(nx=8, ny=8, x0=0, x1=1, y0=0, y1=1)
        v = np.zeros((8, 9))
        v[:, 4] = 1.0
        s = NSState(u=np.zeros((8, 8)), v=v, q=1.0)
        # each interior face pair averages to 1/2 on two rows of cells
        assert kinetic_energy(s, g) > 0.0


class TestAcEnergy:
    def test_duplicate_formula_oracle(self):
        g = Grid2D(nx=12, ny=12, x0=-0.5, x1=0.5, y0=-0.5, y1=0.5)
        phi = ac_initial = stream(3).uniform(-0.9, 0.9, (12, 12))
        eps = 0.07
        grad2 = 0.0
        for i in range(11):
            for j in range(12):
                grad2 += ((phi[i + 1, j] - phi[i, j]) / g.hx) ** 2
        for i in range(12):
            for j in range(11):
                grad2 += ((phi[i, j + 1] - phi[i, j]) / g.hy) ** 2
        well = float((0.25 * (1 - phi**2) ** 2).sum())
        expect = g.hx * g.hy * (0.5 * eps**2 * grad2 + well)
        assert ac_energy(phi, g, eps) == pytest.approx(expect, rel=1e-12)


class TestSupNorm:
    def test_constant_negative(self):
        assert sup_norm(np.full(7, -0.3)) == pytest.approx(0.3)

    def test_single_spike(self):
        x = np.zeros(10)
        x[4] = 2.0
        assert sup_norm(x) == 2.0

    def test_dominates_rmse(self):
        for seed in range(5):
            x = stream(seed).standard_normal(50)
            assert sup_norm(x) >= rmse(x, np.zeros(50))


class TestSeries:
    def test_valid(self):
        s = DiagnosticSeries(name="rmse", times=np.array([0.0, 0.1]), values=np.array([1.0, 0.5]))
        assert s.name == "rmse"

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            DiagnosticSeries(name="x", times=np.array([0.0]), values=np.array([1.0, 2.0]))

    def test_times_must_increase(self):
        with pytest.raises(ValueError, match="increas"):
            DiagnosticSeries(
                name="x", times=np.array([0.1, 0.1]), values=np.array([1.0, 2.0])
            )
