import pytest

MINI_BURGERS = """\
[model]
kind = burgers

[grid]
nx = 8
ny = 8
x0 = -1.0
x1 = 1.0
y0 = -1.0
y1 = 1.0

[time]
t_final = 0.05
dt_truth = 0.0025
dt_filter = 0.01

[observation]
kind = identity
fraction = 1.0
noise_std = 0.1

[filter]
method = ensf
ensemble = 30
steps = 160
sigma_n = 0.01

[run]
seed = 0
"""

MINI_NS = """\
[model]
kind = navier_stokes
re = 1000
theta = 5

[grid]
nx = 8
ny = 8
x0 = 0.0
x1 = 1.0
y0 = 0.0
y1 = 1.0

[time]
t_final = 0.03
dt_truth = 0.0025
dt_filter = 0.01

[observation]
kind = tan
fraction = 1.0
noise_std = 0.1

[filter]
method = ensf
ensemble = 12
steps = 160
sigma_n = 0.001

[run]
seed = 0
"""

MINI_AC = """\
[model]
kind = allen_cahn
eps = 0.01
mobility = m2
truth_mobility_noise = 0.5
filter_mobility_noise = 0.1

[grid]
nx = 16
ny = 16
x0 = -0.5
x1 = 0.5
y0 = -0.5
y1 = 0.5

[time]
t_final = 0.12
dt_truth = 0.01
dt_filter = 0.04

[observation]
kind = arctan
fraction = 1.0
noise_std = 0.1

[filter]
method = ensf
ensemble = 12
steps = 160
sigma_n = 0.01

[run]
seed = 0
"""


@pytest.fixture
def write_cfg(tmp_path):
    """Write a config, appending an out dir inside tmp_path.

    All three mini templates end inside their [run] section, so a bare
    `out = ...` line lands in the right place.
    """

    def _write(text, name="exp.cfg", out=None):
        p = tmp_path / name
        if out is None:
            out = str(tmp_path / "run_out")
        p.write_text(text + "out = %s\n" % out)
        return p

    return _write
