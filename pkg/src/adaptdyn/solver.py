"""Semi-implicit time integration of the scaled two-type system.

Diffusion is advanced with Crank-Nicolson, the reaction terms (growth,
conversion and the nonlocal mass) explicitly, with the mass taken at the
old step.  Both ends carry reflecting boundaries implemented with mirrored
ghost values, which makes the discrete diffusion operator conservative
under the trapezoid mass: with zero reaction the total mass is preserved
to round-off, and the mass diagnostics below rely on that.
"""

import warnings
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import BlowupError, PositivityError
from .grid import integrate_on_grid

_DT_RATIO_BAND = (0.1, 10.0)


@dataclass(frozen=True)
class SimConfig:
    """Run parameters for one simulation.

    dt defaults to epsilon: the scheme stays robust down to small scaling
    parameters as long as the step keeps the same order of magnitude.
    positivity_tol is relative to the current max density; undershoots
    beyond it abort the run rather than being clipped, because clipping
    would silently corrupt the mass series.
    """

    epsilon: float
    d1: float = 1.0
    d2: float = 1.0
    dt: Optional[float] = None
    t_end: float = 1.0
    record_every: int = 100
    positivity_tol: float = 1e-12
    mass_bounds: Optional[tuple] = None
    monitor_tol: float = 0.05
    burn_in: float = 1.0
    stat_tol: float = 1e-9
    record_ratio_dev: bool = False
    conc_window: Optional[float] = None
    allow_any_dt: bool = False

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.d1 < 0 or self.d2 < 0 or (self.d1, self.d2) == (0, 0):
            raise ValueError("need d1, d2 >= 0 and not both zero")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        step = self.step
        if self.t_end < step:
            raise ValueError("t_end must cover at least one step")
        ratio = step / self.epsilon
        if not self.allow_any_dt and not (
            _DT_RATIO_BAND[0] <= ratio <= _DT_RATIO_BAND[1]
        ):
            raise ValueError(
                f"dt/epsilon = {ratio:.3g} outside {_DT_RATIO_BAND}; "
                "pass allow_any_dt=True to override"
            )
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.conc_window is not None and self.conc_window < 0:
            raise ValueError("conc_window must be >= 0")

    @property
    def step(self):
        return self.epsilon if self.dt is None else self.dt


@dataclass(frozen=True, eq=False)
class PopulationState:
    """Density pair at one instant, with the total mass cached."""

    t: float
    n1: np.ndarray
    n2: np.ndarray
    N: float

    @classmethod
    def from_densities(cls, t, n1, n2, grid):
        n1 = np.asarray(n1, dtype=float)
        n2 = np.asarray(n2, dtype=float)
        N = integrate_on_grid(n1, grid) + integrate_on_grid(n2, grid)
        return cls(t, n1, n2, N)


@dataclass
class Trajectory:
    """Recorded output of one run: dense scalar series, sparse snapshots."""

    grid: object
    snapshots: list = dc_field(default_factory=list)
    series: dict = dc_field(default_factory=dict)
    mass_flags: list = dc_field(default_factory=list)
    boundary_flag: bool = False

    @property
    def final(self):
        return self.snapshots[-1]


def gaussian_state(grid, center, width, amplitude):
    """Both populations started on amplitude * exp(-width (x - center)^2)."""
    profile = amplitude * np.exp(-width * (grid.nodes - center) ** 2)
    return PopulationState.from_densities(0.0, profile, profile.copy(), grid)


def hopf_cole_gaussian_state(grid, epsilon, a, c):
    """Sharp data exp((-a x^2 - c) / epsilon), the canonical concentrated
    initial envelope for small-epsilon runs."""
    profile = np.exp((-a * grid.nodes ** 2 - c) / epsilon)
    return PopulationState.from_densities(0.0, profile, profile.copy(), grid)


def default_initial_state(grid, epsilon, kind="gaussian", **params):
    if kind == "gaussian":
        for name, value in (("center", 3.0), ("width", 10.0), ("amplitude", 0.2)):
            params.setdefault(name, value)
        if params["width"] <= 0 or params["amplitude"] < 0:
            raise ValueError("width must be positive and amplitude >= 0")
        return gaussian_state(grid, **params)
    if kind == "hopf_cole_gaussian":
        for name, value in (("a", 1.0), ("c", 0.0)):
            params.setdefault(name, value)
        if params["a"] <= 0:
            raise ValueError("a must be positive")
        return hopf_cole_gaussian_state(grid, epsilon, **params)
    raise ValueError(f"unknown initial-state kind {kind!r}")


class _Stepper:
    """Pre-factored Crank-Nicolson machinery for one (field, config) pair."""

    def __init__(self, field, cfg):
        self.field = field
        self.cfg = cfg
        grid = field.grid
        self.dx = grid.dx
        self.dt = cfg.step
        self.tw = grid.trapezoid_weights()
        self.c1 = cfg.epsilon * cfg.d1 * self.dt / 2.0
        self.c2 = cfg.epsilon * cfg.d2 * self.dt / 2.0
        self.ab1 = self._banded(self.c1, grid.nx)
        self.ab2 = self._banded(self.c2, grid.nx)

    def _banded(self, c, nx):
        if c == 0.0:
            return None
        r = c / self.dx ** 2
        ab = np.zeros((3, nx))
        ab[1, :] = 1.0 + 2.0 * r
        ab[0, 1:] = -r
        ab[2, :-1] = -r
        ab[0, 1] = -2.0 * r   # mirrored ghost at the left end
        ab[2, -2] = -2.0 * r  # mirrored ghost at the right end
        return ab

    def _laplacian(self, n):
        out = np.empty_like(n)
        out[1:-1] = n[2:] - 2.0 * n[1:-1] + n[:-2]
        out[0] = 2.0 * (n[1] - n[0])
        out[-1] = 2.0 * (n[-2] - n[-1])
        return out / self.dx ** 2

    def advance(self, n1, n2, t):
        """One step from time t; returns the new density pair."""
        f = self.field
        cfg = self.cfg
        N = float(self.tw @ n1 + self.tw @ n2)
        r1 = f.r1_at(t)
        rea1 = n1 * (r1 - N) + f.delta1 * n2
        rea2 = n2 * (f.r2 - N) + f.delta2 * n1
        rhs1 = n1 + self.c1 * self._laplacian(n1) + (self.dt / cfg.epsilon) * rea1
        rhs2 = n2 + self.c2 * self._laplacian(n2) + (self.dt / cfg.epsilon) * rea2
        # finite-ness is checked by _guard afterwards; skipping scipy's own
        # check keeps the per-step cost down and lets blow-ups surface as
        # BlowupError instead of an opaque linear-algebra error
        new1 = rhs1 if self.ab1 is None else solve_banded(
            (1, 1), self.ab1, rhs1, check_finite=False)
        new2 = rhs2 if self.ab2 is None else solve_banded(
            (1, 1), self.ab2, rhs2, check_finite=False)
        self._guard(new1, 1)
        self._guard(new2, 2)
        return new1, new2

    def _guard(self, n, species):
        lo = n.min()
        if not np.isfinite(lo) or not np.isfinite(n.max()):
            raise BlowupError(f"non-finite density in n{species}")
        tol = self.cfg.positivity_tol * max(n.max(), 0.0)
        if lo < -tol:
            raise PositivityError(species, int(np.argmin(n)), float(lo), tol)


def cn_step(state, field, cfg, _stepper=None):
    """Advance one state by a single step (pure: returns a new state)."""
    stepper = _Stepper(field, cfg) if _stepper is None else _stepper
    n1, n2 = stepper.advance(state.n1, state.n2, state.t)
    return PopulationState.from_densities(state.t + cfg.step, n1, n2, field.grid)


def _ratio_dev_quick(n1, n2, q):
    mask = n2 > 1e-12 * n2.max()
    if not mask.any():
        return np.nan
    return float(np.max(np.abs(n1[mask] / n2[mask] - q[mask])))


_EDGE_DENSITY_RATIO = 1e-8


def simulate(init, field, cfg):
    """Run the two-type system to t_end and record series and snapshots.

    The mass monitor only flags excursions (it never aborts): after the
    burn-in time, masses outside the widened band
    (c_N (1 - tol), C_N (1 + tol)) are appended to mass_flags.
    A warning is raised if a density touches the truncation boundary,
    which would mean the domain is too short for the run.
    """
    stepper = _Stepper(field, cfg)
    nsteps = int(round(cfg.t_end / cfg.step))
    if nsteps < 1:
        raise ValueError("no steps to take")
    q_static = None
    if cfg.record_ratio_dev:
        if cfg.d1 != cfg.d2:
            raise ValueError(
                "per-step ratio_dev recording needs d1 == d2 (the momentum-"
                "free ratio); use diagnostics.ratio_deviation on snapshots "
                "otherwise"
            )
        from .spectral import ratio_q

        q_static = ratio_q(1, field.r1, field.r2, field.delta1, field.delta2)

    traj = Trajectory(grid=field.grid)
    traj.snapshots.append(init)
    nodes = field.grid.nodes
    t_arr = np.empty(nsteps)
    n_arr = np.empty(nsteps)
    argmax_arr = np.empty(nsteps)
    max_arr = np.empty(nsteps)
    dev_arr = np.full(nsteps, np.nan)
    conc_x_arr = conc_frac_arr = None
    if cfg.conc_window is not None:
        conc_x_arr = np.empty(nsteps)
        conc_frac_arr = np.empty(nsteps)

    n1, n2 = init.n1, init.n2
    t = init.t
    for k in range(nsteps):
        n1, n2 = stepper.advance(n1, n2, t)
        t = init.t + (k + 1) * cfg.step
        N = float(stepper.tw @ n1 + stepper.tw @ n2)
        j = int(np.argmax(n1))
        t_arr[k] = t
        n_arr[k] = N
        argmax_arr[k] = nodes[j]
        max_arr[k] = n1[j]
        if q_static is not None:
            dev_arr[k] = _ratio_dev_quick(n1, n2, q_static)
        if conc_x_arr is not None:
            total = n1 + n2
            jc = int(np.argmax(total))
            near = np.abs(nodes - nodes[jc]) <= cfg.conc_window
            weighted = stepper.tw * total
            conc_x_arr[k] = nodes[jc]
            conc_frac_arr[k] = min(weighted[near].sum() / weighted.sum(), 1.0)
        if cfg.mass_bounds is not None and t >= cfg.burn_in:
            c_N, C_N = cfg.mass_bounds
            if not (c_N * (1 - cfg.monitor_tol) <= N <= C_N * (1 + cfg.monitor_tol)):
                traj.mass_flags.append((t, N))
        if (k + 1) % cfg.record_every == 0 or k == nsteps - 1:
            traj.snapshots.append(
                PopulationState.from_densities(t, n1.copy(), n2.copy(), field.grid)
            )

    traj.series = {
        "t": t_arr,
        "N": n_arr,
        "argmax_x": argmax_arr,
        "max_n1": max_arr,
        "ratio_dev": dev_arr,
    }
    if conc_x_arr is not None:
        traj.series["conc_x"] = conc_x_arr
        traj.series["conc_frac"] = conc_frac_arr
    for n, label in ((n1, "n1"), (n2, "n2")):
        if n[-1] > _EDGE_DENSITY_RATIO * n.max():
            traj.boundary_flag = True
            warnings.warn(
                f"{label} reaches the truncation boundary "
                f"({n[-1]:.2e} vs max {n.max():.2e}); enlarge x_max",
                stacklevel=2,
            )
    return traj


def solve_effective_scalar(w0, field, epsilon, cfg=None, r_infty=None):
    """Relax the merged-population equation to its stationary profile.

    The single density w follows the same semi-implicit scheme with the
    ratio-weighted fitness; stepping stops once the per-step change rate
    drops below stat_tol (or at t_end).  Assumes the equal-mutation
    reduction, where the merged fitness is momentum-free.
    """
    from .spectral import effective_fitness_r_infty

    if cfg is None:
        cfg = SimConfig(epsilon=epsilon, d1=1.0, d2=1.0, t_end=1e4,
                        record_every=10 ** 9)
    if r_infty is None:
        r_infty = effective_fitness_r_infty(field)
    scalar_field = replace(
        field,
        r1=np.asarray(r_infty, dtype=float),
        delta1=np.full(field.grid.nx, 1e-300),
        delta2=np.full(field.grid.nx, 1e-300),
        env=None,
        alpha_part=None,
    )
    stepper = _Stepper(scalar_field, cfg)
    zero = np.zeros(field.grid.nx)
    traj = Trajectory(grid=field.grid)
    w = np.asarray(w0, dtype=float)
    traj.snapshots.append(PopulationState.from_densities(0.0, w.copy(), zero, field.grid))
    nsteps = int(round(cfg.t_end / cfg.step))
    ts, Ns, mx = [], [], []
    t = 0.0
    for k in range(nsteps):
        new_w, _ = stepper.advance(w, zero, t)
        t = (k + 1) * cfg.step
        change = float(np.max(np.abs(new_w - w))) / cfg.step
        w = new_w
        ts.append(t)
        Ns.append(integrate_on_grid(w, field.grid))
        mx.append(float(w.max()))
        if change < cfg.stat_tol:
            break
    traj.snapshots.append(PopulationState.from_densities(t, w, zero, field.grid))
    traj.series = {
        "t": np.asarray(ts),
        "N": np.asarray(Ns),
        "argmax_x": np.full(len(ts), np.nan),
        "max_n1": np.asarray(mx),
        "ratio_dev": np.full(len(ts), np.nan),
    }
    return traj
