"""Twin-experiment orchestration.

generate_truth integrates the configured model on the fine time grid and
stores field snapshots at every assimilation time; run_filter replays
those snapshots as synthetic observations and runs either filter against
them. Every random draw descends from the config's master seed through
named streams, so a rerun of the same config is reproducible down to the
bytes of the diagnostics CSV.

On-disk layout under the config's out directory:

    truth/    initial.ensf1, truth_00001.ensf1 ..., diagnostics.csv, manifest.json
    ensf/     mean_00000.ensf1 ...,                 diagnostics.csv, manifest.json
    letkf/    (same shape as ensf/)
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .diagnostics import DiagnosticSeries, ac_energy, kinetic_energy, mass, rmse, sup_norm
from .inpaint import PartialField, _pull_back, biharmonic_inpaint, densify_observation
from .letkf import LETKFConfig, letkf_analysis
from .models.allen_cahn import ac_initial, ac_step
from .models.burgers import burgers_initial, step_adaptive
from .models.grid import Grid2D
from .models.navier_stokes import NSState, ns_pack, ns_step, ns_unpack, taylor_green_initial
from .observe import Observation, ObservationModel, apply, make_mask, perturb
from .rng import stream
from .schedule import DiffusionSchedule
from .score import Ensemble
from .score_filter import EnSFConfig, FilterState, predict, reverse_sample
from .snapshots import Snapshot, read_snapshot, write_snapshot

__all__ = ["RunRecord", "TruthRecord", "compare", "diagnose", "generate_truth", "load_truth", "run_filter"]


@dataclass(frozen=True)
class TruthRecord:
    path: str
    variant: str
    n_steps: int
    params: dict


@dataclass(frozen=True)
class RunRecord:
    path: str
    method: str
    config_sha256: str
    series: dict
    snapshots: tuple
    inpainted: bool


# ---------------------------------------------------------------- helpers


def _variant(model_kind):
    return {"burgers": "scalar", "navier_stokes": "ns", "allen_cahn": "ac"}[model_kind]


def _v_shape(cfg):
    g = cfg.grid
    return (g.nx, g.ny + 1) if cfg.bc == "channel" else (g.nx, g.ny)


def _flatten(cfg, snap):
    if snap.variant == "ns":
        u, v, q = snap.arrays
        return ns_pack(NSState(u=u, v=v, q=float(q[0])))
    return snap.arrays[0].ravel()


def _to_snapshot(cfg, x, time):
    g = cfg.grid
    if cfg.model_kind == "navier_stokes":
        state = ns_unpack(x, g, bc=cfg.bc)
        arrays = (state.u, state.v, np.array([state.q]))
        return Snapshot(variant="ns", time=time, arrays=arrays)
    return Snapshot(
        variant=_variant(cfg.model_kind), time=time, arrays=(x.reshape(g.nx, g.ny),)
    )


def _diag_names(model_kind):
    return {
        "burgers": ("mass",),
        "navier_stokes": ("energy",),
        "allen_cahn": ("energy", "sup_norm"),
    }[model_kind]


def _diag_values(grid, model_kind, eps, bc, x):
    if model_kind == "burgers":
        return (mass(x.reshape(grid.nx, grid.ny), grid),)
    if model_kind == "navier_stokes":
        state = ns_unpack(x, grid, bc=bc)
        return (kinetic_energy(state, grid),)
    phi = x.reshape(grid.nx, grid.ny)
    return (ac_energy(phi, grid, eps), sup_norm(phi))


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_manifest(dirpath, extra):
    files = {}
    for name in sorted(os.listdir(dirpath)):
        if name == "manifest.json":
            continue
        with open(os.path.join(dirpath, name), "rb") as fh:
            files[name] = hashlib.sha256(fh.read()).hexdigest()
    payload = dict(extra)
    payload["files"] = files
    with open(os.path.join(dirpath, "manifest.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _truth_params(cfg):
    g = cfg.grid
    p = {
        "model": cfg.model_kind,
        "nx": g.nx,
        "ny": g.ny,
        "x0": g.x0,
        "x1": g.x1,
        "y0": g.y0,
        "y1": g.y1,
        "t_final": cfg.t_final,
        "dt_truth": cfg.dt_truth,
        "dt_filter": cfg.dt_filter,
    }
    if cfg.model_kind == "navier_stokes":
        p.update(nu=cfg.nu, theta=cfg.theta, bc=cfg.bc, forcing=cfg.forcing)
    if cfg.model_kind == "allen_cahn":
        # the truth trajectory consumes randomness, so the seed is part
        # of its identity; deterministic models can share one truth
        # across filter seeds
        p.update(
            eps=cfg.eps,
            mobility=cfg.mobility,
            truth_mobility_noise=cfg.truth_mobility_noise,
            seed=cfg.seed,
        )
    return p


def _forcing_arrays(cfg):
    if cfg.forcing == "none":
        return None
    g = cfg.grid
    xf = g.x0 + np.arange(g.nx) * g.hx  # u faces, where f1 acts
    xc = g.xc
    f1 = np.tile((-0.5 * np.cos(8.0 * np.pi * xf))[:, None], (1, g.ny))
    f2 = np.tile((0.5 * np.sin(8.0 * np.pi * xc))[:, None], (1, _v_shape(cfg)[1]))
    return f1, f2


# ---------------------------------------------------------------- truth


def _truth_stepper(cfg):
    """Returns (flat initial state, step(state, n) -> state) on model arrays."""
    g = cfg.grid
    if cfg.model_kind == "burgers":
        u0 = burgers_initial(g)

        def step(u, n):
            return step_adaptive(u, g, cfg.dt_truth)

        return u0, step, lambda u: u.ravel()

    if cfg.model_kind == "navier_stokes":
        forcing = _forcing_arrays(cfg)
        if cfg.forcing == "none":
            s0 = taylor_green_initial(g)
        else:
            s0 = NSState(u=np.zeros((g.nx, g.ny)), v=np.zeros(_v_shape(cfg)), q=1.0)

        def step(s, n):
            return ns_step(s, g, cfg.dt_truth, nu=cfg.nu, theta=cfg.theta,
                           forcing=forcing, bc=cfg.bc)

        return s0, step, ns_pack

    phi0 = ac_initial(g, stream(cfg.seed, "truth", "init"))
    scale = cfg.truth_mobility_noise
    state0 = (phi0, None)

    def step(s, n):
        phi, prev = s
        rng = stream(cfg.seed, "truth", n) if scale > 0 else None
        new = ac_step(phi, prev, g, cfg.dt_truth, eps=cfg.eps, mobility=cfg.mobility,
                      noise_scale=scale, rng=rng)
        return new, phi

    return state0, step, lambda s: s[0].ravel()


def generate_truth(cfg: ExperimentConfig) -> TruthRecord:
    outdir = os.path.join(cfg.out, "truth")
    os.makedirs(outdir, exist_ok=True)
    variant = _variant(cfg.model_kind)
    state, step, flat = _truth_stepper(cfg)

    header = ("step", "time") + _diag_names(cfg.model_kind)
    rows = []

    def record(k, x):
        time = k * cfg.dt_filter
        vals = _diag_values(cfg.grid, cfg.model_kind, cfg.eps, cfg.bc, x)
        rows.append((k, float(time)) + vals)
        name = "initial.ensf1" if k == 0 else "truth_%05d.ensf1" % k
        write_snapshot(os.path.join(outdir, name), _to_snapshot(cfg, x, float(time)))

    record(0, flat(state))
    n_total = cfg.n_filter_steps * cfg.substeps
    for n in range(1, n_total + 1):
        try:
            state = step(state, n)
        except Exception as exc:
            raise RuntimeError(
                "truth solver failed at step %d (t=%.6g): %s" % (n, n * cfg.dt_truth, exc)
            ) from exc
        if n % cfg.substeps == 0:
            record(n // cfg.substeps, flat(state))

    _write_csv(os.path.join(outdir, "diagnostics.csv"), header, rows)
    params = _truth_params(cfg)
    _write_manifest(outdir, {
        "kind": "truth",
        "config_sha256": cfg.sha256,
        "variant": variant,
        "n_steps": cfg.n_filter_steps,
        "params": params,
    })
    return TruthRecord(path=outdir, variant=variant, n_steps=cfg.n_filter_steps, params=params)


def load_truth(path) -> TruthRecord:
    manifest = os.path.join(path, "manifest.json")
    if not os.path.isfile(manifest):
        raise RuntimeError("no truth run at %s; run `ensf truth` first" % path)
    with open(manifest) as fh:
        meta = json.load(fh)
    if meta.get("kind") != "truth":
        raise RuntimeError("%s is not a truth run directory" % path)
    return TruthRecord(path=os.fspath(path), variant=meta["variant"],
                       n_steps=meta["n_steps"], params=meta["params"])


def _truth_state(cfg, rec, k):
    name = "initial.ensf1" if k == 0 else "truth_%05d.ensf1" % k
    return _flatten(cfg, read_snapshot(os.path.join(rec.path, name)))


# ---------------------------------------------------------------- filter


def _make_forward(cfg):
    g = cfg.grid
    if cfg.model_kind == "burgers":

        def fwd(x, rng):
            u = x.reshape(g.nx, g.ny)
            if cfg.sigma_n > 0:
                u = u + cfg.sigma_n * rng.standard_normal(u.shape)
            return step_adaptive(u, g, cfg.dt_filter).ravel()

        return fwd

    if cfg.model_kind == "navier_stokes":
        base = _forcing_arrays(cfg)

        def fwd(x, rng):
            if cfg.sigma_n > 0:
                x = x + cfg.sigma_n * rng.standard_normal(x.shape)
            forcing = base
            if base is not None and cfg.forcing_noise > 0:
                f1, f2 = base
                forcing = (
                    f1 + cfg.forcing_noise * rng.standard_normal(f1.shape),
                    f2 + cfg.forcing_noise * rng.standard_normal(f2.shape),
                )
            state = ns_unpack(x, g, bc=cfg.bc)
            # dt_truth substeps, shrunk further while an ensemble member is
            # still wild enough to break the advective CFL bound
            remaining = cfg.dt_filter
            for _ in range(100_000):
                speed = max(np.abs(state.u).max(), np.abs(state.v).max()) * (
                    1.0 / g.hx + 1.0 / g.hy
                )
                sub = min(remaining, cfg.dt_truth)
                if speed > 0:
                    sub = min(sub, 0.45 / speed)
                state = ns_step(state, g, sub, nu=cfg.nu, theta=cfg.theta,
                                forcing=forcing, bc=cfg.bc)
                remaining -= sub
                if remaining <= 1e-14 * cfg.dt_filter:
                    return ns_pack(state)
            raise RuntimeError("substep budget exhausted; velocities keep growing")

        return fwd

    kind, scale = cfg.mobility, cfg.filter_mobility_noise
    if kind == "m1" and scale > 0:
        kind = "m2"  # perturbed constant

    def fwd(x, rng):
        phi = x.reshape(g.nx, g.ny)
        if cfg.sigma_n > 0:
            phi = phi + cfg.sigma_n * rng.standard_normal(phi.shape)
        # analysis states carry no usable BDF history, so each window
        # restarts first-order and builds up second-order inside
        prev = None
        for _ in range(cfg.substeps):
            phi, prev = ac_step(phi, prev, g, cfg.dt_truth, eps=cfg.eps,
                                mobility=kind, noise_scale=scale,
                                rng=rng if scale > 0 else None), phi
        return phi.ravel()

    return fwd


def _letkf_coords(cfg):
    g = cfg.grid
    if cfg.model_kind != "navier_stokes":
        coords = g.cell_coords()
        extent = g.extent if cfg.model_kind == "burgers" else None
        return coords, extent
    xf = g.x0 + np.arange(g.nx) * g.hx
    yf = g.y0 + np.arange(_v_shape(cfg)[1]) * g.hy
    ux, uy = np.meshgrid(xf, g.yc, indexing="ij")
    vx, vy = np.meshgrid(g.xc, yf, indexing="ij")
    far = max(abs(g.x1), abs(g.y1)) + 1e6  # q couples only to its own obs
    coords = np.concatenate([
        np.column_stack([ux.ravel(), uy.ravel()]),
        np.column_stack([vx.ravel(), vy.ravel()]),
        np.array([[far, far]]),
    ])
    extent = g.extent if cfg.bc == "periodic" else (g.extent[0], np.inf)
    return coords, extent


def _densify_ns(cfg, ob, model):
    g = cfg.grid
    nu_size = g.nx * g.ny
    vsh = _v_shape(cfg)
    nv = vsh[0] * vsh[1]
    pulled = np.zeros(nu_size + nv)
    pulled[model.mask] = _pull_back(model.kind, ob.values)
    umask = model.mask[model.mask < nu_size]
    vmask = model.mask[model.mask >= nu_size] - nu_size
    if umask.size == 0 or vmask.size == 0:
        raise RuntimeError("a velocity component has no observations; cannot inpaint")
    vgrid = g if vsh == (g.nx, g.ny) else Grid2D(g.nx, g.ny + 1, g.x0, g.x1, g.y0, g.y1)
    du = biharmonic_inpaint(PartialField(values=pulled[:nu_size], mask=umask, grid=g))
    dv = biharmonic_inpaint(PartialField(values=pulled[nu_size:], mask=vmask, grid=vgrid))
    dense = np.concatenate([du, dv])
    noise = np.full(dense.size, model.noise_std * cfg.inpaint_inflation)
    noise[model.mask] = model.noise_std
    dense_model = ObservationModel(kind="identity", mask=np.arange(dense.size),
                                   noise_std=model.noise_std)
    return Observation(dense, ob.time_index), dense_model, noise


def _check_truth(cfg, rec):
    expect = _truth_params(cfg)
    diffs = sorted(
        k for k in set(expect) | set(rec.params) if expect.get(k) != rec.params.get(k)
    )
    if diffs:
        raise RuntimeError(
            "truth at %s does not match this config (differs on: %s)"
            % (rec.path, ", ".join(diffs))
        )


def run_filter(cfg: ExperimentConfig, truth_path=None) -> RunRecord:
    rec = load_truth(truth_path or os.path.join(cfg.out, "truth"))
    _check_truth(cfg, rec)
    outdir = os.path.join(cfg.out, cfg.method)
    os.makedirs(outdir, exist_ok=True)
    g, d, n_steps = cfg.grid, cfg.state_dim, cfg.n_filter_steps
    is_ns = cfg.model_kind == "navier_stokes"

    obs_dim = d - 1 if is_ns else d
    mask = make_mask(obs_dim, cfg.obs_fraction, stream(cfg.seed, "mask"))
    vel_model = ObservationModel(kind=cfg.obs_kind, mask=mask, noise_std=cfg.obs_noise_std)
    q_model = ObservationModel(kind="identity", mask=np.array([d - 1]),
                               noise_std=cfg.sigma_q) if is_ns else None
    inpainted = cfg.inpaint == "on" or (
        cfg.inpaint == "auto" and cfg.obs_fraction < cfg.inpaint_threshold
    )
    if cfg.method == "letkf":
        inpainted = False  # the baseline assimilates the raw sparse observation

    fwd = _make_forward(cfg)
    members = cfg.init_scale * stream(cfg.seed, "init").standard_normal((cfg.ensemble, d))
    if is_ns:
        members[:, -1] = 1.0  # the multiplier estimate starts at its known value
    state = FilterState(Ensemble(members), step=0, seed=cfg.seed)

    if cfg.method == "ensf":
        sched = DiffusionSchedule(eps_alpha=cfg.eps_alpha, eps_beta=cfg.eps_beta,
                                  n_steps=cfg.steps)
        ensf_cfg = EnSFConfig(ensemble_size=cfg.ensemble, reverse_steps=cfg.steps,
                              schedule=sched)
    else:
        coords, extent = _letkf_coords(cfg)
        letkf_cfg = LETKFConfig(ensemble_size=cfg.ensemble,
                                localization_radius=cfg.radius, inflation=cfg.inflation)
        # the multiplier pass must not inflate a second time
        letkf_q = LETKFConfig(ensemble_size=cfg.ensemble,
                              localization_radius=cfg.radius, inflation=1.0)

    header = ("step", "time", "rmse") + _diag_names(cfg.model_kind)
    rows = []
    snaps = []

    def record(k, mean, xt):
        time = float(k * cfg.dt_filter)
        vals = _diag_values(g, cfg.model_kind, cfg.eps, cfg.bc, mean)
        rows.append((k, time, rmse(mean, xt)) + vals)
        if k % cfg.snapshot_every == 0 or k == n_steps:
            name = "mean_%05d.ensf1" % k
            write_snapshot(os.path.join(outdir, name), _to_snapshot(cfg, mean, time))
            snaps.append(name)

    record(0, state.mean, _truth_state(cfg, rec, 0))

    for k in range(1, n_steps + 1):
        prior = predict(state, fwd)
        xt = _truth_state(cfg, rec, k)
        clean = apply(vel_model, xt)
        ob = perturb(vel_model, clean, stream(cfg.seed, "obs", k), time_index=k)

        if cfg.method == "ensf":
            if inpainted:
                if is_ns:
                    dob, dmodel, dsig = _densify_ns(cfg, ob, vel_model)
                else:
                    dob, dmodel, dsig = densify_observation(ob, vel_model, g,
                                                            cfg.inpaint_inflation)
                obs_l, model_l, sig_l = [dob], [dmodel], [dsig]
            else:
                obs_l, model_l, sig_l = [ob], [vel_model], [None]
            if is_ns:
                obs_l.append(Observation(np.array([1.0]), time_index=k))
                model_l.append(q_model)
                sig_l.append(None)
            r = stream(cfg.seed, "update", k)
            post = reverse_sample(prior.ensemble, obs_l, model_l, ensf_cfg, r,
                                  noise_std=sig_l)
        else:
            post = letkf_analysis(prior.ensemble, ob, vel_model, coords, letkf_cfg,
                                  extent=extent)
            if is_ns:
                post = letkf_analysis(post, Observation(np.array([1.0]), time_index=k),
                                      q_model, coords, letkf_q, extent=extent)
        state = FilterState(post, step=k, seed=cfg.seed)
        record(k, state.mean, xt)

    _write_csv(os.path.join(outdir, "diagnostics.csv"), header, rows)
    _write_manifest(outdir, {
        "kind": "filter",
        "method": cfg.method,
        "config_sha256": cfg.sha256,
        "variant": rec.variant,
        "inpainted": inpainted,
        "truth": os.path.relpath(rec.path, outdir),
    })

    times = np.array([r[1] for r in rows])
    series = {}
    for i, name in enumerate(header[2:], start=2):
        series[name] = DiagnosticSeries(name=name, times=times,
                                        values=np.array([r[i] for r in rows]))
    return RunRecord(path=outdir, method=cfg.method, config_sha256=cfg.sha256,
                     series=series, snapshots=tuple(snaps), inpainted=inpainted)


# ---------------------------------------------------------------- reporting


def _grid_from_params(params):
    return Grid2D(nx=params["nx"], ny=params["ny"], x0=params["x0"], x1=params["x1"],
                  y0=params["y0"], y1=params["y1"])


def diagnose(run_path, truth_path=None) -> str:
    """Recompute the diagnostics CSV from stored mean snapshots.

    Without an explicit truth_path the truth referenced by the run's
    manifest is used.
    """
    manifest_path = os.path.join(run_path, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise RuntimeError("no run at %s" % run_path)
    with open(manifest_path) as fh:
        meta = json.load(fh)
    if truth_path is None:
        truth_path = os.path.normpath(os.path.join(run_path, meta["truth"]))
    rec = load_truth(truth_path)
    params = rec.params
    grid = _grid_from_params(params)
    model_kind = params["model"]
    eps = params.get("eps", 0.01)
    bc = params.get("bc", "periodic")

    names = sorted(n for n in meta["files"] if n.startswith("mean_"))
    header = ("step", "time", "rmse") + _diag_names(model_kind)
    rows = []
    for name in names:
        k = int(name[5:10])
        snap = read_snapshot(os.path.join(run_path, name))
        mean = _snap_flat(snap)
        xt_snap = read_snapshot(os.path.join(
            rec.path, "initial.ensf1" if k == 0 else "truth_%05d.ensf1" % k))
        xt = _snap_flat(xt_snap)
        vals = _diag_values(grid, model_kind, eps, bc, mean)
        rows.append((k, float(snap.time), rmse(mean, xt)) + vals)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def _snap_flat(snap):
    if snap.variant == "ns":
        u, v, q = snap.arrays
        return ns_pack(NSState(u=u, v=v, q=float(q[0])))
    return snap.arrays[0].ravel()


def _read_series(path):
    with open(os.path.join(path, "diagnostics.csv")) as fh:
        lines = fh.read().splitlines()
    header = lines[0].split(",")
    cols = {h: [] for h in header}
    for line in lines[1:]:
        for h, v in zip(header, line.split(",")):
            cols[h].append(float(v))
    return header, cols


def compare(path_a, path_b) -> str:
    """Tabulate final and mean value of every shared diagnostic column."""
    name_a = os.path.basename(os.path.normpath(path_a))
    name_b = os.path.basename(os.path.normpath(path_b))
    if name_a == name_b:
        name_a, name_b = path_a, path_b
    header_a, cols_a = _read_series(path_a)
    header_b, cols_b = _read_series(path_b)
    shared = [h for h in header_a if h in header_b and h not in ("step", "time")]
    if not shared:
        raise RuntimeError("runs share no diagnostic columns")
    width = max(12, len(name_a) + 8, len(name_b) + 8)
    head = "%-10s %*s %*s %*s %*s" % (
        "column", width, "final(%s)" % name_a, width, "mean(%s)" % name_a,
        width, "final(%s)" % name_b, width, "mean(%s)" % name_b)
    lines = [head, "-" * len(head)]
    for h in shared:
        a, b = cols_a[h], cols_b[h]
        lines.append("%-10s %*.6g %*.6g %*.6g %*.6g" % (
            h, width, a[-1], width, float(np.mean(a)),
            width, b[-1], width, float(np.mean(b))))
    return "\n".join(lines) + "\n"
