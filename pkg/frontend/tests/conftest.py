"""Self-contained fixtures mimicking the runner's file contract.

Everything is fabricated with numpy so this suite runs without the solver
package installed; the schemas (manifest keys, CSV headers, snapshot file
naming) mirror the runner's documented output contract.
"""

import csv
import json

import numpy as np
import pytest


def _time_tag(t):
    tag = f"{t:.6f}".rstrip("0").rstrip(".")
    return tag or "0"


def _write_csv(path, header, columns):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow(["%.17g" % v for v in row])


def _write_member(out_dir, run_id, times, centers, with_ratio_dev):
    x = np.linspace(0.0, 10.0, 201)
    t_series = np.linspace(0.0, times[-1], 50)[1:]
    argmax = 3.0 - 0.02 * t_series
    ratio = (2.0 * np.exp(-t_series) + 0.05) if with_ratio_dev \
        else np.full_like(t_series, np.nan)
    series_name = f"{run_id}_series.csv"
    _write_csv(
        out_dir / series_name,
        ["t", "N", "argmax_x", "max_n1", "ratio_dev"],
        [t_series, 0.8 + 0.01 * np.tanh(t_series), argmax,
         0.2 + 0.1 * t_series, ratio],
    )
    snapshots = {}
    for t, c in zip(times, centers):
        width = 10.0 / (1.0 + t)
        n1 = 0.3 * np.exp(-width * (x - c) ** 2)
        n2 = 0.6 * n1
        name = f"{run_id}_snap_{_time_tag(t)}.csv"
        _write_csv(out_dir / name, ["x", "n1", "n2"], [x, n1, n2])
        snapshots[_time_tag(t)] = name
    return {
        "run_id": run_id,
        "tag": run_id.rsplit("_", 1)[-1],
        "epsilon": 0.01,
        "d1": 1.0,
        "d2": 1.0,
        "env": "stable",
        "t_end": float(times[-1]),
        "dt": 0.01,
        "series": series_name,
        "snapshots": snapshots,
        "snapshot_times": [float(t) for t in times],
        "boundary_flag": False,
        "mass_flag_count": 0,
        "wall_time_s": 0.1,
    }


def _write_landscape(out_dir, run_id):
    trait = np.linspace(0.0, 10.0, 201)
    r_h = 0.85 + 0.02 * np.exp(-((trait - 1.9) ** 2))
    name = f"{run_id}_landscape.csv"
    _write_csv(out_dir / name, ["trait", "r_H"], [trait, r_h])
    return name


def make_manifest(out_dir, run_id, member_specs, figures):
    """Fabricate a manifest plus all files it references."""
    out_dir.mkdir(parents=True, exist_ok=True)
    members = [
        _write_member(out_dir, f"{run_id}_{tag}", times, centers, ratio)
        for tag, times, centers, ratio in member_specs
    ]
    manifest = {
        "run_id": run_id,
        "preset": run_id,
        "profile": "desk",
        "config": {},
        "hypothesis": {"h1_ok": True, "h2_ok": True, "h3_ok": True},
        "grid": {"x_max": 10.0, "nx": 201},
        "coefficients": None,
        "landscape": _write_landscape(out_dir, run_id),
        "members": members,
        "figures": figures,
        "outputs": [],
        "wall_time_s": 1.0,
    }
    path = out_dir / f"{run_id}_manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return path


@pytest.fixture
def fixture_root(tmp_path):
    return tmp_path


@pytest.fixture
def ratio_manifest(fixture_root):
    """fig3-shaped: one member, finite ratio_dev, series + overlay figure."""
    return make_manifest(
        fixture_root / "ratio",
        "figratio",
        [("ratio", [0.0, 0.35, 0.699], [3.0, 2.9, 2.8], True)],
        [
            {"kind": "series", "member": "figratio_ratio"},
            {"kind": "snapshots_overlay", "member": "figratio_ratio"},
        ],
    )


@pytest.fixture
def sweep_manifest(fixture_root):
    """fig4-shaped: one overlay figure per sweep member."""
    member_specs = [
        (f"eps{eps:g}", [0.0, 20.0, 40.0], [3.0, 2.5, 2.0], False)
        for eps in (0.05, 0.01, 0.001)
    ]
    figures = [
        {"kind": "snapshots_overlay", "member": f"figsweep_eps{eps:g}",
         "overlay": True}
        for eps in (0.05, 0.01, 0.001)
    ]
    return make_manifest(fixture_root / "sweep", "figsweep", member_specs,
                         figures)


@pytest.fixture
def pair_manifest(fixture_root):
    """fig7-shaped: two members compared on one axis."""
    return make_manifest(
        fixture_root / "pair",
        "figpair",
        [
            ("stable", [0.0, 25.0, 50.0], [4.0, 4.5, 5.0], False),
            ("varying", [0.0, 25.0, 50.0], [4.0, 3.0, 1.5], False),
        ],
        [{"kind": "comparison",
          "members": ["figpair_stable", "figpair_varying"]}],
    )


@pytest.fixture
def landscape_manifest(fixture_root):
    """landscape-shaped: no members, a single curve."""
    return make_manifest(fixture_root / "land", "figland", [],
                         [{"kind": "landscape"}])


@pytest.fixture
def empty_manifest(fixture_root):
    return make_manifest(fixture_root / "empty", "figempty", [], [])
