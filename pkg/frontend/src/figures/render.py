"""Render figures from run manifests and their CSV outputs.

Strictly a read-only consumer of the runner's file contract: a manifest
JSON listing members, each with a scalar series CSV
(t, N, argmax_x, max_n1, ratio_dev) and snapshot CSVs (x, n1, n2), plus a
landscape CSV (trait, r_H).  Nothing here recomputes dynamics.

Output is deterministic: SVG hash salts are pinned and date metadata is
suppressed, so re-rendering reproduces the same bytes.
"""

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "figures"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FORMATS = ("png", "svg")

KINDS = ("snapshots_overlay", "series", "landscape_overlay", "comparison")
_KIND_ALIASES = {"landscape": "landscape_overlay"}


@dataclass(frozen=True)
class FigureSpec:
    """One figure request.

    kind: snapshots_overlay | series | landscape_overlay | comparison
    inputs: manifest path(s); comparison takes two, the rest one
    member: run_id of the sweep member to draw (default: first)
    times: snapshot times to draw (default: an even selection)
    rescale_overlay: map the fitness curve affinely onto the density axis
    out: output path stem (extensions are appended per format)
    """

    kind: str
    inputs: tuple
    out: str
    member: str = ""
    times: tuple = ()
    rescale_overlay: bool = True

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one manifest input is required")


def load_spec(path):
    with open(path) as fh:
        raw = json.load(fh)
    raw["inputs"] = tuple(raw.get("inputs", ()))
    raw["times"] = tuple(raw.get("times", ()))
    return FigureSpec(**raw)


# ---------------------------------------------------------------------------
# manifest / CSV access

def _load_manifest(path):
    path = Path(path)
    with open(path) as fh:
        manifest = json.load(fh)
    manifest["_dir"] = path.parent
    return manifest


def _member_entry(manifest, run_id):
    members = manifest["members"]
    if not members:
        raise ValueError("manifest has no sweep members")
    if not run_id:
        return members[0]
    for entry in members:
        if entry["run_id"] == run_id:
            return entry
    known = ", ".join(e["run_id"] for e in members)
    raise ValueError(f"no member {run_id!r}; manifest has: {known}")


def _read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    data = np.asarray(rows)
    return {name: data[:, k] for k, name in enumerate(header)}


def _snapshot_cadence(entry):
    times = entry["snapshot_times"]
    gaps = np.diff(times)
    return float(gaps.max()) if gaps.size else 0.0


def _select_times(entry, requested, max_default=5):
    available = list(entry["snapshot_times"])
    if not requested:
        if len(available) <= max_default:
            return available
        idx = np.linspace(0, len(available) - 1, max_default).astype(int)
        return [available[k] for k in idx]
    cadence = _snapshot_cadence(entry)
    chosen = []
    for t in requested:
        gaps = [abs(t - a) for a in available]
        best = int(np.argmin(gaps))
        if gaps[best] > cadence + 1e-12:
            raise ValueError(
                f"no snapshot within one cadence of t={t}; "
                f"available times: {available}"
            )
        chosen.append(available[best])
    return chosen


def _snapshot(manifest, entry, t):
    tag = f"{t:.6f}".rstrip("0").rstrip(".") or "0"
    name = entry["snapshots"][tag]
    return _read_csv(manifest["_dir"] / name)


def rescale_to(values, lo, hi):
    """Affine map of a curve onto [lo, hi]; argmax abscissa is unchanged."""
    values = np.asarray(values, dtype=float)
    span = values.max() - values.min()
    if span == 0.0:
        return np.full_like(values, (lo + hi) / 2.0)
    return lo + (values - values.min()) * (hi - lo) / span


def _save(fig, out_stem):
    out_stem = Path(out_stem)
    out_stem.parent.mkdir(parents=True, exist_ok=True)
    written = []
    for ext in FORMATS:
        target = out_stem.with_suffix(f".{ext}")
        fig.savefig(target, metadata={"Date": None} if ext == "svg" else None)
        written.append(str(target))
    plt.close(fig)
    return written


# ---------------------------------------------------------------------------
# figure kinds

def _fig_series(manifest, spec):
    entry = _member_entry(manifest, spec.member)
    series = _read_csv(manifest["_dir"] / entry["series"])
    fig, ax = plt.subplots(figsize=(6, 4))
    dev = series.get("ratio_dev")
    if dev is not None and np.isfinite(dev).any():
        keep = np.isfinite(dev)
        ax.plot(series["t"][keep], dev[keep], lw=2)
        ax.set_ylabel("sup-norm distance of n1/n2 from q")
    else:
        ax.plot(series["t"], series["N"], lw=2)
        ax.set_ylabel("total mass N(t)")
    ax.set_xlabel("t")
    ax.set_title(entry["run_id"])
    fig.tight_layout()
    return fig


def _fig_snapshots(manifest, spec):
    entry = _member_entry(manifest, spec.member)
    times = _select_times(entry, spec.times)
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for t in times:
        snap = _snapshot(manifest, entry, t)
        ax.plot(snap["x"], snap["n1"], lw=1.6, label=f"t = {t:g}")
    if spec.rescale_overlay and manifest.get("landscape"):
        land = _read_csv(manifest["_dir"] / manifest["landscape"])
        lo, hi = ax.get_ylim()
        ax.plot(land["trait"], rescale_to(land["r_H"], lo, hi),
                "k--", lw=1.2, label="fitness (rescaled)")
    ax.set_xlabel("trait")
    ax.set_ylabel("n1 density")
    ax.set_title(entry["run_id"])
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def _fig_landscape(manifest, spec):
    land = _read_csv(manifest["_dir"] / manifest["landscape"])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(land["trait"], land["r_H"], lw=2)
    k = int(np.argmax(land["r_H"]))
    ax.axvline(land["trait"][k], color="gray", ls=":", lw=1)
    ax.set_xlabel("trait")
    ax.set_ylabel("Hamiltonian fitness")
    ax.set_title(manifest["run_id"])
    fig.tight_layout()
    return fig


def _fig_comparison(manifests, spec):
    """Final snapshots of several runs on one axis.

    One manifest: draw every member (or just spec.member when given).
    Several manifests: draw every member of each.
    """
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for manifest in manifests:
        entries = manifest["members"]
        if spec.member and len(manifests) == 1:
            entries = [_member_entry(manifest, spec.member)]
        for entry in entries:
            t_last = entry["snapshot_times"][-1]
            snap = _snapshot(manifest, entry, t_last)
            ax.plot(snap["x"], snap["n1"], lw=1.8,
                    label=f"{entry['run_id']} (t = {t_last:g})")
    ax.set_xlabel("trait")
    ax.set_ylabel("n1 density")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render(spec):
    """Render one figure; returns the list of files written (png + svg)."""
    manifests = [_load_manifest(p) for p in spec.inputs]
    if spec.kind == "series":
        fig = _fig_series(manifests[0], spec)
    elif spec.kind == "snapshots_overlay":
        fig = _fig_snapshots(manifests[0], spec)
    elif spec.kind == "landscape_overlay":
        fig = _fig_landscape(manifests[0], spec)
    else:
        fig = _fig_comparison(manifests, spec)
    return _save(fig, spec.out)


def render_all(manifest_path, out_dir=None):
    """Render every figure the manifest declares; returns written files.

    An empty declaration list renders nothing and only warns.
    """
    manifest = _load_manifest(manifest_path)
    declared = manifest.get("figures", [])
    if not declared:
        warnings.warn(f"manifest {manifest['run_id']} declares no figures",
                      stacklevel=2)
        return []
    out_dir = Path(out_dir) if out_dir else manifest["_dir"]
    written = []
    for k, decl in enumerate(declared):
        kind = _KIND_ALIASES.get(decl["kind"], decl["kind"])
        member = decl.get("member", "")
        stem = out_dir / f"{manifest['run_id']}_fig{k}_{kind}"
        spec = FigureSpec(
            kind=kind,
            inputs=(str(manifest_path),),
            out=str(stem),
            member=member,
            rescale_overlay=bool(decl.get("overlay", True)),
        )
        written.extend(render(spec))
    return written
