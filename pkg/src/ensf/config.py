"""Experiment configuration: flat INI-style files, strictly validated.

Every error is anchored to a file and line so a bad config fails with
`path:line: message`. Unknown sections and keys are rejected outright;
model-specific keys are only legal for their model.
"""

from __future__ import annotations

import configparser
import hashlib
import os
from dataclasses import dataclass

from .models.grid import Grid2D

_MODELS = ("burgers", "navier_stokes", "allen_cahn")
_OBS_KINDS = ("identity", "arctan", "tan")
_METHODS = ("ensf", "letkf")
_MOBILITIES = ("m1", "m2", "m3")
_BCS = ("periodic", "channel")
_FORCINGS = ("none", "cosine_shear")
_INPAINT = ("auto", "on", "off")

_REQUIRED_SECTIONS = ("model", "grid", "time")

# keys legal per section; model-specific ones listed separately
_COMMON_KEYS = {
    "model": {"kind"},
    "grid": {"nx", "ny", "x0", "x1", "y0", "y1"},
    "time": {"t_final", "dt_truth", "dt_filter"},
    "observation": {"kind", "fraction", "noise_std"},
    "filter": {
        "method",
        "ensemble",
        "steps",
        "eps_alpha",
        "eps_beta",
        "inflation",
        "radius",
        "sigma_n",
        "init_scale",
    },
    "inpaint": {"enabled", "threshold", "inflation"},
    "run": {"seed", "out", "snapshot_every"},
}
_MODEL_KEYS = {
    "burgers": set(),
    "navier_stokes": {"nu", "re", "theta", "bc", "forcing", "forcing_noise"},
    "allen_cahn": {"eps", "mobility", "truth_mobility_noise", "filter_mobility_noise"},
}
# sigma_q only makes sense when the state carries the multiplier
_NS_OBS_KEYS = {"sigma_q"}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model_kind: str
    grid: Grid2D
    t_final: float
    dt_truth: float
    dt_filter: float
    substeps: int
    n_filter_steps: int
    # navier_stokes
    nu: float
    theta: float
    bc: str
    forcing: str
    forcing_noise: float
    # allen_cahn
    eps: float
    mobility: str
    truth_mobility_noise: float
    filter_mobility_noise: float
    # observation
    obs_kind: str
    obs_fraction: float
    obs_noise_std: float
    sigma_q: float
    # filter
    method: str
    ensemble: int
    steps: int
    eps_alpha: float
    eps_beta: float
    inflation: float
    radius: float
    sigma_n: float
    init_scale: float
    # inpaint
    inpaint: str
    inpaint_threshold: float
    inpaint_inflation: float
    # run
    seed: int
    out: str
    snapshot_every: int
    source_path: str
    sha256: str

    @property
    def state_dim(self) -> int:
        n = self.grid.nx * self.grid.ny
        if self.model_kind != "navier_stokes":
            return n
        nv = self.grid.nx * (self.grid.ny + 1) if self.bc == "channel" else n
        return n + nv + 1


def _line_of(lines, section, key=None):
    """1-based line of a key inside a section, or of the section header."""
    in_sec = False
    header = 0
    for i, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            if in_sec:
                break
            in_sec = s[1:-1].strip() == section
            if in_sec:
                header = i
            continue
        if in_sec and key is not None:
            name = s.split("=", 1)[0].strip()
            if name == key:
                return i
    return header or 1


class _Loader:
    def __init__(self, path):
        self.path = os.fspath(path)
        try:
            with open(self.path, "rb") as fh:
                raw = fh.read()
        except OSError:
            raise ConfigError("%s: no such config file" % self.path) from None
        self.sha256 = hashlib.sha256(raw).hexdigest()
        text = raw.decode("utf-8")
        self.lines = text.splitlines()
        self.cp = configparser.ConfigParser(
            interpolation=None, inline_comment_prefixes=("#",)
        )
        try:
            self.cp.read_string(text, source=self.path)
        except configparser.Error as exc:
            line = getattr(exc, "lineno", 1) or 1
            raise ConfigError("%s:%d: %s" % (self.path, line, exc.message)) from None

    def fail(self, section, key, msg):
        line = _line_of(self.lines, section, key)
        raise ConfigError("%s:%d: %s" % (self.path, line, msg))

    def has(self, section, key):
        return self.cp.has_option(section, key)

    def get(self, section, key, conv, default):
        if not self.cp.has_option(section, key):
            if default is None:
                self.fail(section, key, "missing required key %s.%s" % (section, key))
            return default
        raw = self.cp.get(section, key)
        try:
            return conv(raw)
        except ValueError:
            self.fail(section, key, "invalid value %r for %s.%s" % (raw, section, key))

    def choice(self, section, key, options, default):
        val = self.get(section, key, str.strip, default)
        if val not in options:
            self.fail(
                section, key, "%s.%s must be one of %s, got %r"
                % (section, key, ", ".join(options), val),
            )
        return val


def _check_keys(ld, model_kind):
    for section in ld.cp.sections():
        if section not in _COMMON_KEYS:
            line = _line_of(ld.lines, section)
            raise ConfigError("%s:%d: unknown section [%s]" % (ld.path, line, section))
        allowed = set(_COMMON_KEYS[section])
        if section == "model":
            allowed |= _MODEL_KEYS[model_kind]
        if section == "observation" and model_kind == "navier_stokes":
            allowed |= _NS_OBS_KEYS
        for key in ld.cp.options(section):
            if key not in allowed:
                ld.fail(section, key, "unknown key %s.%s for model %s"
                        % (section, key, model_kind))


def _int_ratio(big, small):
    n = int(round(big / small))
    if n >= 1 and abs(big - n * small) <= 1e-9 * big:
        return n
    return 0


def load_config(path, seed=None, out=None, method=None, obs_fraction=None) -> ExperimentConfig:
    ld = _Loader(path)

    for section in _REQUIRED_SECTIONS:
        if not ld.cp.has_section(section):
            raise ConfigError("%s:1: missing [%s] section" % (ld.path, section))

    model_kind = ld.choice("model", "kind", _MODELS, None)
    _check_keys(ld, model_kind)

    grid = Grid2D(
        nx=ld.get("grid", "nx", int, None),
        ny=ld.get("grid", "ny", int, None),
        x0=ld.get("grid", "x0", float, None),
        x1=ld.get("grid", "x1", float, None),
        y0=ld.get("grid", "y0", float, None),
        y1=ld.get("grid", "y1", float, None),
    )

    t_final = ld.get("time", "t_final", float, None)
    dt_truth = ld.get("time", "dt_truth", float, None)
    dt_filter = ld.get("time", "dt_filter", float, None)
    for name, val in (("t_final", t_final), ("dt_truth", dt_truth), ("dt_filter", dt_filter)):
        if not val > 0:
            ld.fail("time", name, "time.%s must be > 0" % name)
    substeps = _int_ratio(dt_filter, dt_truth)
    if substeps == 0:
        ld.fail("time", "dt_truth", "dt_truth must divide dt_filter")
    n_filter_steps = _int_ratio(t_final, dt_filter)
    if n_filter_steps == 0:
        ld.fail("time", "t_final", "t_final must be an integer multiple of dt_filter")

    nu = theta = 0.0
    bc, forcing, forcing_noise = "periodic", "none", 0.0
    if model_kind == "navier_stokes":
        has_nu, has_re = ld.has("model", "nu"), ld.has("model", "re")
        if has_nu and has_re:
            ld.fail("model", "re", "give model.re or model.nu, not both")
        if not (has_nu or has_re):
            ld.fail("model", "kind", "navier_stokes needs model.re or model.nu")
        nu = ld.get("model", "nu", float, 0.0) if has_nu else 1.0 / ld.get(
            "model", "re", float, 0.0
        )
        theta = ld.get("model", "theta", float, None)
        if theta is None or not theta > 0:
            ld.fail("model", "theta", "model.theta must be > 0")
        bc = ld.choice("model", "bc", _BCS, "periodic")
        forcing = ld.choice("model", "forcing", _FORCINGS, "none")
        forcing_noise = ld.get("model", "forcing_noise", float, 0.0)

    eps, mobility = 0.01, "m1"
    truth_mob, filter_mob = 0.0, 0.0
    if model_kind == "allen_cahn":
        eps = ld.get("model", "eps", float, 0.01)
        mobility = ld.choice("model", "mobility", _MOBILITIES, "m1")
        truth_mob = ld.get("model", "truth_mobility_noise", float, 0.0)
        filter_mob = ld.get("model", "filter_mobility_noise", float, 0.0)

    obs_kind = ld.choice("observation", "kind", _OBS_KINDS, "identity")
    fraction = ld.get("observation", "fraction", float, 1.0)
    obs_noise = ld.get("observation", "noise_std", float, 0.1)
    sigma_q = ld.get("observation", "sigma_q", float, 0.1)
    if obs_noise < 0:
        ld.fail("observation", "noise_std", "observation.noise_std must be >= 0")

    method_ = ld.choice("filter", "method", _METHODS, "ensf")
    ensemble = ld.get("filter", "ensemble", int, 80)
    steps = ld.get("filter", "steps", int, 300)
    eps_alpha = ld.get("filter", "eps_alpha", float, 0.05)
    eps_beta = ld.get("filter", "eps_beta", float, 0.01)
    inflation = ld.get("filter", "inflation", float, 1.05)
    radius = ld.get("filter", "radius", float, 5.0 * grid.hx)
    sigma_n = ld.get("filter", "sigma_n", float, 0.0)
    init_scale = ld.get("filter", "init_scale", float, 2.0)
    if ensemble < 2:
        ld.fail("filter", "ensemble", "filter.ensemble must be >= 2")
    if steps < 1:
        ld.fail("filter", "steps", "filter.steps must be >= 1")

    inpaint = ld.choice("inpaint", "enabled", _INPAINT, "auto")
    threshold = ld.get("inpaint", "threshold", float, 0.25)
    inp_inflation = ld.get("inpaint", "inflation", float, 3.0)

    seed_ = ld.get("run", "seed", int, 0)
    stem = os.path.splitext(os.path.basename(ld.path))[0]
    out_ = ld.get("run", "out", str.strip, os.path.join("runs", stem))
    snapshot_every = ld.get("run", "snapshot_every", int, 1)
    if snapshot_every < 1:
        ld.fail("run", "snapshot_every", "run.snapshot_every must be >= 1")

    if seed is not None:
        seed_ = int(seed)
    if out is not None:
        out_ = out
    if method is not None:
        if method not in _METHODS:
            raise ConfigError(
                "%s: filter method must be one of %s, got %r"
                % (ld.path, ", ".join(_METHODS), method)
            )
        method_ = method
    if obs_fraction is not None:
        fraction = float(obs_fraction)
    if not (0.0 < fraction <= 1.0):
        raise ConfigError(
            "%s: observation fraction must be in (0, 1], got %r" % (ld.path, fraction)
        )

    return ExperimentConfig(
        model_kind=model_kind,
        grid=grid,
        t_final=t_final,
        dt_truth=dt_truth,
        dt_filter=dt_filter,
        substeps=substeps,
        n_filter_steps=n_filter_steps,
        nu=nu,
        theta=theta,
        bc=bc,
        forcing=forcing,
        forcing_noise=forcing_noise,
        eps=eps,
        mobility=mobility,
        truth_mobility_noise=truth_mob,
        filter_mobility_noise=filter_mob,
        obs_kind=obs_kind,
        obs_fraction=fraction,
        obs_noise_std=obs_noise,
        sigma_q=sigma_q,
        method=method_,
        ensemble=ensemble,
        steps=steps,
        eps_alpha=eps_alpha,
        eps_beta=eps_beta,
        inflation=inflation,
        radius=radius,
        sigma_n=sigma_n,
        init_scale=init_scale,
        inpaint=inpaint,
        inpaint_threshold=threshold,
        inpaint_inflation=inp_inflation,
        seed=seed_,
        out=out_,
        snapshot_every=snapshot_every,
        source_path=ld.path,
        sha256=ld.sha256,
    )
