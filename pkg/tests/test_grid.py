import numpy as np
import pytest

from ensf.models.grid import Grid2D


def test_spacing():
    g = Grid2D(nx=8, ny=4, x0=-1.0, x1=1.0, y0=0.0, y1=1.0)
    assert g.hx == pytest.approx(0.25)
    assert g.hy == pytest.approx(0.25)
    assert g.extent == (2.0, 1.0)


def test_centers():
    g = Grid2D(nx=4, ny=4, x0=0.0, x1=1.0, y0=0.0, y1=1.0)
    assert np.allclose(g.xc, [0.125, 0.375, 0.625, 0.875])
    x, y = g.center_mesh()
    assert x.shape == (4, 4)
    assert x[1, 0] == pytest.approx(0.375)
    assert y[0, 2] == pytest.approx(0.625)


def test_cell_coords_flatten_order():
    g = Grid2D(nx=4, ny=5, x0=0.0, x1=1.0, y0=0.0, y1=1.0)
    c = g.cell_coords()
    assert c.shape == (20, 2)
    # C-order flatten: index i*ny + j pairs with (xc[i], yc[j])
    assert np.allclose(c[7], [g.xc[1], g.yc[2]])


def test_validation():
    with pytest.raises(ValueError):
        Grid2D(nx=3, ny=8, x0=0.0, x1=1.0, y0=0.0, y1=1.0)
    with pytest.raises(ValueError):
        Grid2D(nx=8, ny=8, x0=1.0, x1=0.0, y0=0.0, y1=1.0)
