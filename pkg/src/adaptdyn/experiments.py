"""Config-driven experiment runner with named presets.

Each preset reproduces one of the standard numerical experiments as a
deterministic, CSV-emitting run: a coefficient field is built once,
checked against the structural hypotheses (failing fast if they do not
hold), and the sweep members are integrated and written out together with
a JSON manifest describing every file produced.  Runs are seed-free: the
whole pipeline is deterministic, so identical configs give byte-identical
CSVs on the same platform.
"""

import configparser
import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .coefficients import (
    DnaParams,
    build_dna_coefficients,
    check_hypotheses,
    cos8_environment,
)
from .errors import ConfigConflictError, GridMismatchError, HypothesisFailure
from .grid import QuadratureSpec, default_quadrature, make_grid
from .solver import SimConfig, default_initial_state, simulate
from .spectral import fitness_landscape, landscape_to_csv

PRESETS = (
    "fig3_ratio",
    "fig4_eps_sweep",
    "fig5_dsweep",
    "fig6_p_stable",
    "fig7_p_varying",
    "landscape_x",
    "landscape_p",
    "custom",
)

_FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one experiment (post preset expansion)."""

    preset: str = "custom"
    profile: str = "desk"
    run_id: str = "run"
    out_dir: str = "out"
    workers: int = 1
    dna: DnaParams = dc_field(default_factory=DnaParams)
    x_max: float = 10.0
    nx: int = 1001
    quad_rule: str = "simpson"
    quad_ns: int = 12000
    quad_s_max: Optional[float] = None
    quad_tail_tol: float = 1e-12
    init_kind: str = "gaussian"
    init_center: float = 3.0
    init_width: float = 10.0
    init_amplitude: float = 0.2
    init_a: float = 1.0
    init_c: float = 0.0
    epsilon: float = 0.001
    d1: float = 1.0
    d2: float = 1.0
    dt: Optional[float] = None
    t_end: float = 10.0
    record_every: int = 1000

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.profile not in ("desk", "full"):
            raise ValueError(f"profile must be 'desk' or 'full', got {self.profile!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def quadrature(self):
        if self.quad_s_max is None:
            return default_quadrature(
                self.dna.gamma_d, ns=self.quad_ns, rule=self.quad_rule
            )
        return QuadratureSpec(
            rule=self.quad_rule,
            s_max=self.quad_s_max,
            ns=self.quad_ns,
            tail_tol=self.quad_tail_tol,
        )


@dataclass(frozen=True)
class _Member:
    tag: str
    epsilon: float
    d1: float
    d2: float
    env: str = "stable"  # or "cos8"
    t_end: float = 10.0
    dt: Optional[float] = None
    record_every: int = 1000
    record_ratio_dev: bool = False


# preset-pinned fields: a config file may repeat these values but never
# change them
_FORCED = {
    "fig3_ratio": {
        ("dna", "variable"): "X",
        ("sim", "d1"): 1.0,
        ("sim", "d2"): 1.0,
        ("init", "kind"): "gaussian",
        ("init", "center"): 3.0,
        ("init", "width"): 10.0,
        ("init", "amplitude"): 0.2,
    },
    "fig4_eps_sweep": {
        ("dna", "variable"): "X",
        ("dna", "p_fixed"): 3.0,
        ("sim", "d1"): 1.0,
        ("sim", "d2"): 1.0,
        ("sim", "epsilon"): None,  # swept, not settable
    },
    "fig5_dsweep": {
        ("dna", "variable"): "X",
        ("dna", "p_fixed"): 3.0,
        ("sim", "epsilon"): 0.001,
        ("sim", "d1"): None,  # swept
        ("sim", "d2"): None,
    },
    "fig6_p_stable": {
        ("dna", "variable"): "P",
        ("dna", "x_fixed"): 2.0,
        ("sim", "epsilon"): None,  # swept
    },
    "fig7_p_varying": {
        ("dna", "variable"): "P",
        ("dna", "x_fixed"): 2.0,
        ("sim", "d1"): 1.0,
        ("sim", "d2"): 1.0,
        ("sim", "epsilon"): 0.001,
    },
    "landscape_x": {("dna", "variable"): "X"},
    "landscape_p": {("dna", "variable"): "P"},
    "custom": {},
}

# sweep values per preset/profile
_FIG4_EPS = {"desk": (0.05, 0.01, 0.001), "full": (0.05, 0.01, 0.001, 0.0001)}
_FIG5_DPAIRS = ((1.0, 1.0), (0.5, 1.5), (0.05, 1.95), (0.0, 2.0))
_FIG6_EPS = (0.01, 0.001)

# desk horizons are calibrated so the qualitative conclusions (drift
# directions, concentration onto the fitness argmax) are already visible;
# full horizons rerun the same experiments at publication scale
_PRESET_DEFAULTS = {
    "fig3_ratio": {
        "desk": {"epsilon": 0.03, "dt": 0.699 / 24, "t_end": 0.699,
                 "record_every": 6, "nx": 1001},
        "full": {"epsilon": 0.03, "dt": 0.699 / 24, "t_end": 0.699,
                 "record_every": 6, "nx": 2001},
    },
    # the broad eps = 0.05 member carries a fat right tail; the wider
    # domain keeps the truncation-boundary monitor silent at 1e-8
    "fig4_eps_sweep": {
        "desk": {"t_end": 40.0, "x_max": 13.0, "nx": 1301},
        "full": {"t_end": 60.0, "x_max": 13.0, "nx": 2601},
    },
    "fig5_dsweep": {
        "desk": {"t_end": 50.0, "nx": 1001},
        "full": {"t_end": 60.0, "nx": 2001},
    },
    # at the publication horizon the stable heterogeneity run keeps
    # drifting right, so the full profile needs the doubled trait window
    # to keep the truncation monitor silent
    "fig6_p_stable": {
        "desk": {"t_end": 50.0, "nx": 1001, "init_center": 4.0},
        "full": {"t_end": 300.0, "x_max": 25.0, "nx": 5001,
                 "init_center": 4.0},
    },
    "fig7_p_varying": {
        "desk": {"t_end": 50.0, "nx": 1001, "init_center": 4.0},
        "full": {"t_end": 300.0, "x_max": 25.0, "nx": 5001,
                 "init_center": 4.0},
    },
    "landscape_x": {"desk": {"nx": 1001}, "full": {"nx": 2001}},
    "landscape_p": {"desk": {"nx": 1001}, "full": {"nx": 2001}},
    "custom": {"desk": {}, "full": {}},
}


def preset_config(preset, profile="desk", **overrides):
    """Expand a preset name into a full ExperimentConfig."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}")
    kwargs = {"preset": preset, "profile": profile, "run_id": preset}
    kwargs.update(_PRESET_DEFAULTS[preset][profile])
    if preset in ("fig6_p_stable", "fig7_p_varying", "landscape_p"):
        kwargs["dna"] = DnaParams(variable="P")
    for (section, key), value in _FORCED[preset].items():
        if value is None or section == "dna":
            continue
        kwargs[_config_attr(section, key)] = value
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


def members_for(cfg):
    """Sweep members of a config's preset."""
    base = {"t_end": cfg.t_end, "record_every": cfg.record_every}
    if cfg.preset == "fig3_ratio":
        return [
            _Member("ratio", cfg.epsilon, 1.0, 1.0, dt=cfg.dt,
                    record_ratio_dev=True, **base)
        ]
    if cfg.preset == "fig4_eps_sweep":
        return [
            _Member(f"eps{eps:g}", eps, 1.0, 1.0,
                    record_every=_cadence(cfg.t_end, eps), t_end=cfg.t_end)
            for eps in _FIG4_EPS[cfg.profile]
        ]
    if cfg.preset == "fig5_dsweep":
        return [
            _Member(f"d{d1:g}_{d2:g}", cfg.epsilon, d1, d2,
                    record_every=_cadence(cfg.t_end, cfg.epsilon),
                    t_end=cfg.t_end)
            for d1, d2 in _FIG5_DPAIRS
        ]
    if cfg.preset == "fig6_p_stable":
        return [
            _Member(f"eps{eps:g}", eps, 1.0, 1.0,
                    record_every=_cadence(cfg.t_end, eps), t_end=cfg.t_end)
            for eps in _FIG6_EPS
        ]
    if cfg.preset == "fig7_p_varying":
        cadence = _cadence(cfg.t_end, cfg.epsilon)
        return [
            _Member("stable", cfg.epsilon, 1.0, 1.0,
                    record_every=cadence, t_end=cfg.t_end),
            _Member("varying", cfg.epsilon, 1.0, 1.0, env="cos8",
                    record_every=cadence, t_end=cfg.t_end),
        ]
    if cfg.preset == "custom":
        return [
            _Member("run", cfg.epsilon, cfg.d1, cfg.d2, dt=cfg.dt, **base)
        ]
    return []  # landscape presets evaluate, they do not integrate


def _cadence(t_end, epsilon):
    steps = max(1, int(round(t_end / epsilon)))
    return max(1, steps // 10)


# ---------------------------------------------------------------------------
# config file I/O (flat key/value text with sections)

_SCHEMA = {
    ("experiment", "preset"): str,
    ("experiment", "profile"): str,
    ("experiment", "run_id"): str,
    ("experiment", "out_dir"): str,
    ("experiment", "workers"): int,
    ("dna", "alpha_m"): float,
    ("dna", "mu_a"): float,
    ("dna", "sigma"): float,
    ("dna", "beta_m"): float,
    ("dna", "gamma_d"): float,
    ("dna", "gamma_a"): float,
    ("dna", "delta"): float,
    ("dna", "D"): float,
    ("dna", "variable"): str,
    ("dna", "p_fixed"): float,
    ("dna", "x_fixed"): float,
    ("grid", "x_max"): float,
    ("grid", "nx"): int,
    ("quad", "rule"): str,
    ("quad", "ns"): int,
    ("quad", "s_max"): float,
    ("quad", "tail_tol"): float,
    ("init", "kind"): str,
    ("init", "center"): float,
    ("init", "width"): float,
    ("init", "amplitude"): float,
    ("init", "a"): float,
    ("init", "c"): float,
    ("sim", "epsilon"): float,
    ("sim", "d1"): float,
    ("sim", "d2"): float,
    ("sim", "dt"): float,
    ("sim", "t_end"): float,
    ("sim", "record_every"): int,
}

_ATTR_BY_SECTION = {
    "experiment": lambda key: key,
    "dna": lambda key: ("dna", key),
    "grid": lambda key: {"x_max": "x_max", "nx": "nx"}[key],
    "quad": lambda key: f"quad_{key}",
    "init": lambda key: f"init_{key}",
    "sim": lambda key: {"epsilon": "epsilon", "d1": "d1", "d2": "d2",
                        "dt": "dt", "t_end": "t_end",
                        "record_every": "record_every"}[key],
}


def _config_attr(section, key):
    attr = _ATTR_BY_SECTION[section](key)
    return attr if isinstance(attr, str) else None


def load_config(path):
    """Parse a config file; unknown keys are rejected, preset-forced fields
    may not be changed."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case-sensitive (D vs d)
    with open(path) as fh:
        parser.read_file(fh)

    entries = {}
    for section in parser.sections():
        for key, raw in parser[section].items():
            if (section, key) not in _SCHEMA:
                raise ValueError(f"unknown config key [{section}] {key}")
            if raw.strip() == "":
                continue
            entries[(section, key)] = _SCHEMA[(section, key)](raw)

    preset = entries.get(("experiment", "preset"), "custom")
    profile = entries.get(("experiment", "profile"), "desk")
    forced = _FORCED.get(preset)
    if forced is None:
        raise ValueError(f"unknown preset {preset!r}")
    for (section, key), value in entries.items():
        if (section, key) in forced:
            want = forced[(section, key)]
            if want is None or value != want:
                raise ConfigConflictError(f"{section}.{key}", value, want)

    cfg = preset_config(preset, profile)
    dna_kwargs = {}
    cfg_kwargs = {}
    for (section, key), value in entries.items():
        if section == "experiment" and key in ("preset", "profile"):
            continue
        if section == "dna":
            dna_kwargs[key] = value
        else:
            cfg_kwargs[_config_attr(section, key)] = value
    if dna_kwargs:
        cfg_kwargs["dna"] = replace(cfg.dna, **dna_kwargs)
    return replace(cfg, **cfg_kwargs)


def save_config(cfg, path):
    """Serialize a config so load_config reads back an identical one."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    parser["experiment"] = {
        "preset": cfg.preset,
        "profile": cfg.profile,
        "run_id": cfg.run_id,
        "out_dir": cfg.out_dir,
        "workers": str(cfg.workers),
    }
    parser["dna"] = {
        key: repr(getattr(cfg.dna, key)) if isinstance(getattr(cfg.dna, key), float)
        else str(getattr(cfg.dna, key))
        for key in ("alpha_m", "mu_a", "sigma", "beta_m", "gamma_d", "gamma_a",
                    "delta", "D", "variable", "p_fixed", "x_fixed")
    }
    parser["grid"] = {"x_max": repr(cfg.x_max), "nx": str(cfg.nx)}
    quad = {"rule": cfg.quad_rule, "ns": str(cfg.quad_ns),
            "tail_tol": repr(cfg.quad_tail_tol)}
    if cfg.quad_s_max is not None:
        quad["s_max"] = repr(cfg.quad_s_max)
    parser["quad"] = quad
    parser["init"] = {
        "kind": cfg.init_kind,
        "center": repr(cfg.init_center),
        "width": repr(cfg.init_width),
        "amplitude": repr(cfg.init_amplitude),
        "a": repr(cfg.init_a),
        "c": repr(cfg.init_c),
    }
    sim = {
        "epsilon": repr(cfg.epsilon),
        "d1": repr(cfg.d1),
        "d2": repr(cfg.d2),
        "t_end": repr(cfg.t_end),
        "record_every": str(cfg.record_every),
    }
    if cfg.dt is not None:
        sim["dt"] = repr(cfg.dt)
    parser["sim"] = sim
    with open(path, "w") as fh:
        parser.write(fh)


# ---------------------------------------------------------------------------
# CSV and manifest emission

_BASE_SERIES = ["t", "N", "argmax_x", "max_n1", "ratio_dev"]


def write_series_csv(path, series):
    # base schema first, then any per-step diagnostics columns
    columns = _BASE_SERIES + [c for c in series if c not in _BASE_SERIES]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in zip(*(series[c] for c in columns)):
            writer.writerow([_FLOAT_FMT % v for v in row])


def read_series_csv(path):
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in data.dtype.names}


def write_snapshot_csv(path, grid, state):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "n1", "n2"])
        for x, a, b in zip(grid.nodes, state.n1, state.n2):
            writer.writerow([_FLOAT_FMT % x, _FLOAT_FMT % a, _FLOAT_FMT % b])


def _time_tag(t):
    tag = f"{t:.6f}".rstrip("0").rstrip(".")
    return tag if tag else "0"


def _build_field(cfg):
    grid = make_grid(cfg.x_max, cfg.nx)
    return build_dna_coefficients(cfg.dna, grid, cfg.quadrature())


def _execute_member(args):
    """Run one sweep member and emit its CSVs (worker-safe)."""
    field, member, out_dir, run_prefix, mass_bounds, init_kw = args
    out_dir = Path(out_dir)
    run_id = f"{run_prefix}_{member.tag}"
    if member.env == "cos8":
        field = field.with_environment(cos8_environment)
    sim = SimConfig(
        epsilon=member.epsilon,
        d1=member.d1,
        d2=member.d2,
        dt=member.dt,
        t_end=member.t_end,
        record_every=member.record_every,
        record_ratio_dev=member.record_ratio_dev,
        mass_bounds=mass_bounds,
    )
    init = default_initial_state(field.grid, member.epsilon, **init_kw)
    start = time.perf_counter()
    traj = simulate(init, field, sim)
    wall = time.perf_counter() - start

    series_file = f"{run_id}_series.csv"
    write_series_csv(out_dir / series_file, traj.series)
    snap_files = {}
    for snap in traj.snapshots:
        name = f"{run_id}_snap_{_time_tag(snap.t)}.csv"
        write_snapshot_csv(out_dir / name, field.grid, snap)
        snap_files[_time_tag(snap.t)] = name
    return {
        "run_id": run_id,
        "tag": member.tag,
        "epsilon": member.epsilon,
        "d1": member.d1,
        "d2": member.d2,
        "env": member.env,
        "t_end": member.t_end,
        "dt": member.dt if member.dt is not None else member.epsilon,
        "series": series_file,
        "snapshots": snap_files,
        "snapshot_times": [snap.t for snap in traj.snapshots],
        "boundary_flag": traj.boundary_flag,
        "mass_flag_count": len(traj.mass_flags),
        "wall_time_s": wall,
    }


def _figure_kinds(cfg, member_entries):
    kinds = []
    if cfg.preset == "fig3_ratio":
        kinds.append({"kind": "series", "member": member_entries[0]["run_id"]})
        kinds.append({"kind": "snapshots_overlay",
                      "member": member_entries[0]["run_id"]})
    elif cfg.preset in ("fig4_eps_sweep", "fig5_dsweep", "fig6_p_stable"):
        for entry in member_entries:
            kinds.append({"kind": "snapshots_overlay", "member": entry["run_id"],
                          "overlay": cfg.preset != "fig5_dsweep"})
    elif cfg.preset == "fig7_p_varying":
        kinds.append({"kind": "comparison",
                      "members": [e["run_id"] for e in member_entries]})
    elif cfg.preset in ("landscape_x", "landscape_p"):
        kinds.append({"kind": "landscape"})
    elif member_entries:
        kinds.append({"kind": "series", "member": member_entries[0]["run_id"]})
    return kinds


def _config_echo(cfg):
    echo = {}
    parser_sections = {
        "experiment": {"preset": cfg.preset, "profile": cfg.profile,
                       "run_id": cfg.run_id, "out_dir": cfg.out_dir,
                       "workers": cfg.workers},
        "dna": {k: getattr(cfg.dna, k) for k in
                ("alpha_m", "mu_a", "sigma", "beta_m", "gamma_d", "gamma_a",
                 "delta", "D", "variable", "p_fixed", "x_fixed")},
        "grid": {"x_max": cfg.x_max, "nx": cfg.nx},
        "quad": {"rule": cfg.quad_rule, "ns": cfg.quad_ns,
                 "s_max": cfg.quad_s_max, "tail_tol": cfg.quad_tail_tol},
        "init": {"kind": cfg.init_kind, "center": cfg.init_center,
                 "width": cfg.init_width, "amplitude": cfg.init_amplitude,
                 "a": cfg.init_a, "c": cfg.init_c},
        "sim": {"epsilon": cfg.epsilon, "d1": cfg.d1, "d2": cfg.d2,
                "dt": cfg.dt, "t_end": cfg.t_end,
                "record_every": cfg.record_every},
    }
    for section, body in parser_sections.items():
        echo[section] = dict(body)
    return echo


def run_experiment(cfg):
    """Execute a configured experiment end to end.

    Builds the coefficient field, fails fast if the hypothesis checks do
    not pass, integrates the sweep members (in parallel when workers > 1),
    and writes all CSVs plus the JSON manifest.  Returns the manifest dict.
    """
    start = time.perf_counter()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    field = _build_field(cfg)
    members = members_for(cfg)
    probe_d = (
        (members[0].d1, members[0].d2) if members else (cfg.d1, cfg.d2)
    )
    report = check_hypotheses(field, *probe_d)
    if not report.all_ok:
        raise HypothesisFailure(report)

    coeff_file = f"{cfg.run_id}_coefficients.csv"
    field.to_csv(out_dir / coeff_file)
    values, _ = fitness_landscape(field)
    landscape_file = f"{cfg.run_id}_landscape.csv"
    landscape_to_csv(out_dir / landscape_file, field.grid.nodes, values)

    init_kw = {"kind": cfg.init_kind}
    if cfg.init_kind == "gaussian":
        init_kw.update(center=cfg.init_center, width=cfg.init_width,
                       amplitude=cfg.init_amplitude)
    else:
        init_kw.update(a=cfg.init_a, c=cfg.init_c)
    mass_bounds = (report.c_N, report.C_N)
    jobs = [
        (field, member, str(out_dir), cfg.run_id, mass_bounds, init_kw)
        for member in members
    ]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            member_entries = list(pool.map(_execute_member, jobs))
    else:
        member_entries = [_execute_member(job) for job in jobs]

    outputs = [coeff_file, landscape_file]
    for entry in member_entries:
        outputs.append(entry["series"])
        outputs.extend(entry["snapshots"].values())

    manifest = {
        "run_id": cfg.run_id,
        "preset": cfg.preset,
        "profile": cfg.profile,
        "config": _config_echo(cfg),
        "hypothesis": report.to_dict(),
        "grid": {"x_max": cfg.x_max, "nx": cfg.nx},
        "coefficients": coeff_file,
        "landscape": landscape_file,
        "members": member_entries,
        "figures": _figure_kinds(cfg, member_entries),
        "outputs": outputs,
        "wall_time_s": time.perf_counter() - start,
    }
    manifest_file = out_dir / f"{cfg.run_id}_manifest.json"
    with open(manifest_file, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    manifest["manifest_path"] = str(manifest_file)
    return manifest


def load_manifest(path):
    with open(path) as fh:
        manifest = json.load(fh)
    manifest["manifest_path"] = str(path)
    return manifest


def _drift_sign(ts, argmax_x):
    """Sign of the argmax displacement over the late half of a run."""
    half = ts >= ts[-1] / 2
    late = argmax_x[half]
    return int(np.sign(late[-1] - late[0]))


def compare_runs(manifest_a, manifest_b, member_a=0, member_b=0):
    """Summarise the argmax trajectories of two runs.

    Reports final concentration nodes, their distance in grid nodes, and
    the sign of each run's late-time argmax drift.  Requires both runs to
    share the grid.
    """
    if isinstance(manifest_a, (str, Path)):
        manifest_a = load_manifest(manifest_a)
    if isinstance(manifest_b, (str, Path)):
        manifest_b = load_manifest(manifest_b)
    if manifest_a["grid"] != manifest_b["grid"]:
        raise GridMismatchError(
            f"grids differ: {manifest_a['grid']} vs {manifest_b['grid']}"
        )
    dx = manifest_a["grid"]["x_max"] / (manifest_a["grid"]["nx"] - 1)

    def series_of(manifest, index):
        entry = manifest["members"][index]
        base = Path(manifest["manifest_path"]).parent
        return entry, read_series_csv(base / entry["series"])

    entry_a, series_a = series_of(manifest_a, member_a)
    entry_b, series_b = series_of(manifest_b, member_b)
    final_a = float(series_a["argmax_x"][-1])
    final_b = float(series_b["argmax_x"][-1])

    same_length = series_a["t"].size == series_b["t"].size
    max_diff = None
    if same_length:
        max_diff = max(
            float(np.max(np.abs(series_a[c] - series_b[c])))
            for c in ("t", "N", "argmax_x", "max_n1")
        )
    return {
        "run_a": entry_a["run_id"],
        "run_b": entry_b["run_id"],
        "final_argmax_a": final_a,
        "final_argmax_b": final_b,
        "final_node_distance": int(round(abs(final_a - final_b) / dx)),
        "drift_sign_a": _drift_sign(series_a["t"], series_a["argmax_x"]),
        "drift_sign_b": _drift_sign(series_b["t"], series_b["argmax_x"]),
        "identical": bool(same_length and max_diff == 0.0),
        "series_max_abs_diff": max_diff,
    }
