"""Acceptance suite: every criterion prints one PASS line when it holds.

Run with  pytest tests/test_acceptance.py -v -s  to see the lines live.
The desk-profile presets are executed through the real runner so these
checks cover the whole pipeline, not just the numerical kernels.
"""

import math

import numpy as np
import pytest

from adaptdyn import (
    DnaParams,
    PopulationState,
    QuadratureSpec,
    SimConfig,
    build_dna_coefficients,
    check_hypotheses,
    check_identities,
    cumulative_alpha,
    cumulative_beta,
    alpha_kernel,
    beta_kernel,
    default_quadrature,
    delta2_bounds,
    effective_fitness_r_infty,
    eigen_residual,
    fitness_landscape,
    gaussian_state,
    make_field,
    make_grid,
    preset_config,
    ratio_deviation,
    ratio_q,
    run_experiment,
    simulate,
    solve_effective_scalar,
)
from adaptdyn.diagnostics import concentration
from adaptdyn.experiments import _time_tag, read_series_csv

WORKERS = 2


def _ok(criterion, detail):
    print(f"PASS criterion {criterion}: {detail}")


# ---------------------------------------------------------------------------
# shared heavy fixtures

@pytest.fixture(scope="module")
def outdirs(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def _run_preset(name, outdirs, **overrides):
    cfg = preset_config(name, "desk", out_dir=str(outdirs / name),
                        workers=WORKERS, **overrides)
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def fig3(outdirs):
    return _run_preset("fig3_ratio", outdirs)


@pytest.fixture(scope="module")
def fig4(outdirs):
    return _run_preset("fig4_eps_sweep", outdirs)


@pytest.fixture(scope="module")
def fig5(outdirs):
    return _run_preset("fig5_dsweep", outdirs)


@pytest.fixture(scope="module")
def fig6(outdirs):
    return _run_preset("fig6_p_stable", outdirs)


@pytest.fixture(scope="module")
def fig7(outdirs):
    return _run_preset("fig7_p_varying", outdirs)


@pytest.fixture(scope="module")
def mass_run(dna_field):
    """Two-type run at epsilon 0.01 reused by criteria 5 and 10."""
    report = check_hypotheses(dna_field, 1.0, 1.0)
    cfg = SimConfig(epsilon=0.01, t_end=30.0, record_every=10 ** 9,
                    mass_bounds=(report.c_N, report.C_N))
    init = gaussian_state(dna_field.grid, 3.0, 10.0, 0.2)
    return report, simulate(init, dna_field, cfg)


def _series(manifest, tag):
    entry = next(m for m in manifest["members"] if m["tag"] == tag)
    base = manifest["manifest_path"].rsplit("/", 1)[0]
    return entry, read_series_csv(f"{base}/{entry['series']}")


def _final_snapshot(manifest, tag, grid):
    entry = next(m for m in manifest["members"] if m["tag"] == tag)
    base = manifest["manifest_path"].rsplit("/", 1)[0]
    t_last = entry["snapshot_times"][-1]
    name = entry["snapshots"][_time_tag(t_last)]
    data = np.genfromtxt(f"{base}/{name}", delimiter=",", names=True)
    return PopulationState.from_densities(
        t_last, data["n1"], data["n2"], grid
    )


# ---------------------------------------------------------------------------
# criterion 1: closed-form spectral identities

def test_criterion_1_spectral_identities(dna_field):
    rng = np.random.default_rng(1)
    n = 1000
    r1 = rng.uniform(-5, 5, n)
    r2 = rng.uniform(-5, 5, n)
    dl1 = rng.uniform(1e-6, 5, n)
    dl2 = rng.uniform(1e-6, 5, n)
    worst_identity = 0.0
    worst_eigen = 0.0
    worst_recip = 0.0
    for k in range(n):
        d1, d2 = rng.uniform(0, 3, 2)
        rho = rng.uniform(-4, 4)
        N = rng.uniform(0, 3)
        worst_identity = max(
            worst_identity,
            check_identities(r1[k], r2[k], dl1[k], dl2[k], d1, d2, rho),
        )
        worst_eigen = max(
            worst_eigen,
            float(eigen_residual(r1[k], r2[k], dl1[k], dl2[k], d1, d2, rho, N)),
        )
        q1 = ratio_q(1, r1[k], r2[k], dl1[k], dl2[k], d1, d1, rho)
        q2 = ratio_q(2, r1[k], r2[k], dl1[k], dl2[k], d1, d1, rho)
        worst_recip = max(worst_recip, abs(q1 * q2 - 1.0))
    assert worst_identity < 1e-10
    assert worst_eigen < 1e-12
    assert worst_recip < 1e-12

    r_inf = effective_fitness_r_infty(dna_field)
    rh, _ = fitness_landscape(dna_field)
    gap = float(np.abs(r_inf - rh).max())
    assert gap < 1e-12
    _ok(1, f"identities {worst_identity:.2e}, eigen {worst_eigen:.2e}, "
           f"reciprocity {worst_recip:.2e}, merged-fitness gap {gap:.2e}")


# ---------------------------------------------------------------------------
# criterion 2: quadrature oracles

def test_criterion_2_quadrature_oracles(params):
    # steep logistic behaves like a hard onset at the trait value: the
    # conversion coefficient then has the closed form D b e^{-g x}/(g + b)
    step_params = DnaParams(alpha_m=0.0, p_fixed=200.0)
    grid = make_grid(4.0, 33)
    quad = QuadratureSpec(
        rule="simpson",
        s_max=default_quadrature(step_params.gamma_d).s_max,
        ns=160_000,
    )
    field = build_dna_coefficients(step_params, grid, quad)
    g, b, D = step_params.gamma_d, step_params.beta_m, step_params.D
    closed = D * b * np.exp(-g * grid.nodes) / (g + b)
    sel = grid.nodes >= 0.5
    worst = float(np.abs(field.delta2 - closed)[sel].max())
    assert worst < 1e-6

    s = np.linspace(0.05, 9.0, 101)
    h = 1e-5
    fd_a = (cumulative_alpha(s + h, params) - cumulative_alpha(s - h, params)) / (2 * h)
    err_a = float(np.abs(fd_a - alpha_kernel(s, params)).max())
    fd_b = (cumulative_beta(2.0, s + h, params)
            - cumulative_beta(2.0, s - h, params)) / (2 * h)
    err_b = float(np.abs(fd_b - beta_kernel(2.0, s, params)).max())
    assert err_a < 1e-6 and err_b < 1e-6
    _ok(2, f"steep-onset oracle {worst:.2e}, derivative checks "
           f"{err_a:.2e}/{err_b:.2e}")


# ---------------------------------------------------------------------------
# criterion 3: two-sided conversion-coefficient bounds

def test_criterion_3_conversion_bounds(dna_field, params):
    lower, upper = delta2_bounds(dna_field.grid.nodes, params)
    assert np.all(lower <= dna_field.delta2 + 1e-15)
    assert np.all(dna_field.delta2 <= upper + 1e-15)
    assert params.D <= 1.0 and dna_field.delta2.max() < 1.0
    _ok(3, f"envelope holds at all {dna_field.grid.nx} nodes, "
           f"max delta2 {dna_field.delta2.max():.4f} < 1")


# ---------------------------------------------------------------------------
# criterion 4: conservation and second-order diffusion

# the reference heat mode spans the whole domain, so touching the
# reflecting boundary is the point, not a truncation problem
@pytest.mark.filterwarnings("ignore:n. reaches the truncation boundary")
def test_criterion_4_solver_order_and_conservation():
    grid = make_grid(5.0, 201)
    init = gaussian_state(grid, 2.5, 6.0, 1.0)
    field = make_field(grid, init.N, init.N, 1e-300, 1e-300)
    cfg = SimConfig(epsilon=0.05, d1=1.3, d2=0.4, t_end=1.0,
                    record_every=10 ** 9)
    traj = simulate(init, field, cfg)
    drift = abs(traj.series["N"][-1] - init.N) / init.N
    assert drift < 1e-10

    L, eps, d, t_end = 2.0, 0.1, 1.0, 0.5

    def mode_error(nx, dt):
        g = make_grid(L, nx)
        n0 = 1.0 + 0.5 * np.cos(np.pi * g.nodes / L)
        init = PopulationState.from_densities(0.0, n0, n0.copy(), g)
        f = make_field(g, init.N, init.N, 1e-300, 1e-300)
        c = SimConfig(epsilon=eps, d1=d, d2=d, dt=dt, t_end=t_end,
                      allow_any_dt=True, record_every=10 ** 9)
        out = simulate(init, f, c)
        exact = 1.0 + 0.5 * np.cos(np.pi * g.nodes / L) * math.exp(
            -eps * d * (np.pi / L) ** 2 * t_end
        )
        return np.abs(out.final.n1 - exact).max()

    factor = mode_error(41, 0.025) / mode_error(81, 0.0125)
    assert factor >= 3.5
    _ok(4, f"mass drift {drift:.2e}/unit time, refinement factor {factor:.2f}")


# ---------------------------------------------------------------------------
# criterion 5: mass stays in the hypothesis band

def test_criterion_5_mass_band(mass_run):
    report, traj = mass_run
    assert not traj.mass_flags
    late = traj.series["t"] >= 1.0
    N = traj.series["N"][late]
    assert np.all(N >= 0.95 * report.c_N)
    assert np.all(N <= 1.05 * report.C_N)
    _ok(5, f"N in [{N.min():.4f}, {N.max():.4f}] within "
           f"[{0.95 * report.c_N:.4f}, {1.05 * report.C_N:.4f}] for t >= 1")


# ---------------------------------------------------------------------------
# criterion 6: fast ratio relaxation

def test_criterion_6_ratio_relaxation(fig3, dna_field):
    entry, series = _series(fig3, "ratio")
    grid = dna_field.grid
    init = gaussian_state(grid, 3.0, 10.0, 0.2)
    dev0 = ratio_deviation(init, dna_field)

    t = series["t"]
    dev = series["ratio_dev"]
    final_idx = int(np.argmin(np.abs(t - 0.699)))
    assert t[final_idx] == pytest.approx(0.699, abs=1e-9)
    assert dev[final_idx] < 0.10 * dev0

    window = np.where((t >= 0.1) & (t <= 0.699))[0]
    samples = window[np.linspace(0, window.size - 1, 10).astype(int)]
    assert np.all(np.diff(dev[samples]) < 0)
    _ok(6, f"deviation {dev0:.3f} -> {dev[final_idx]:.4f} "
           f"({dev[final_idx] / dev0:.1%}), decreasing at 10 samples")


# ---------------------------------------------------------------------------
# criteria 7 and 11: concentration onto the fitness argmax, mass monotone

def _fwhm(xs, n):
    above = np.where(n >= n.max() / 2)[0]
    return xs[above[-1]] - xs[above[0]]


def test_criterion_7_concentration(fig4):
    # judge the run against its own emitted landscape and grid
    grid = make_grid(fig4["grid"]["x_max"], fig4["grid"]["nx"])
    base = fig4["manifest_path"].rsplit("/", 1)[0]
    land = np.genfromtxt(f"{base}/{fig4['landscape']}", delimiter=",",
                         names=True)
    x_star = land["trait"][int(np.argmax(land["r_H"]))]

    entry, series = _series(fig4, "eps0.001")
    final_x = series["argmax_x"][-1]
    node_gap = abs(final_x - x_star) / grid.dx
    assert node_gap <= 3.0

    final = _final_snapshot(fig4, "eps0.001", grid)
    _, fraction = concentration(final, grid, 0.5)
    assert fraction > 0.9

    widths = [
        _fwhm(grid.nodes, _final_snapshot(fig4, f"eps{eps:g}", grid).n1)
        for eps in (0.05, 0.01, 0.001)
    ]
    assert widths[0] > widths[1] > widths[2]
    _ok(7, f"argmax gap {node_gap:.1f} nodes, mass fraction {fraction:.3f}, "
           f"FWHM {widths[0]:.2f} > {widths[1]:.2f} > {widths[2]:.2f}")


def test_criterion_11_mass_monotone(fig4):
    _, series = _series(fig4, "eps0.001")
    late = series["t"] >= 1.0
    dN = np.diff(series["N"][late])
    pos = dN[dN > 0].sum()
    neg = -dN[dN < 0].sum()
    assert neg < 0.05 * pos
    _ok(11, f"negative variation {neg:.2e} vs positive {pos:.2e} "
            f"({neg / pos if pos else 0:.2%})")


# ---------------------------------------------------------------------------
# criterion 8: robustness to splitting the mutation budget

def test_criterion_8_mutation_split(fig5, dna_field):
    grid = dna_field.grid
    _, sym = _series(fig5, "d1_1")
    _, skew = _series(fig5, "d0_2")
    gap = abs(sym["argmax_x"][-1] - skew["argmax_x"][-1]) / grid.dx
    assert gap <= 3.0

    # the zero-mutation-in-type-1 run may reach no waypoint earlier
    start = sym["argmax_x"][0]
    target = sym["argmax_x"][-1]
    waypoints = np.linspace(start, target, 7)[1:]
    for w in waypoints:
        t_sym = sym["t"][np.argmax(sym["argmax_x"] <= w)] \
            if np.any(sym["argmax_x"] <= w) else np.inf
        t_skew = skew["t"][np.argmax(skew["argmax_x"] <= w)] \
            if np.any(skew["argmax_x"] <= w) else np.inf
        assert t_skew >= t_sym - 1e-12, f"waypoint {w}"
    _ok(8, f"final argmax gap {gap:.1f} nodes, "
           f"{len(waypoints)} waypoints reached no earlier")


# ---------------------------------------------------------------------------
# criterion 9: drift directions of the heterogeneity trait

def test_criterion_9_drift_directions(fig6, fig7):
    for tag in ("eps0.01", "eps0.001"):
        _, series = _series(fig6, tag)
        t = series["t"]
        x = series["argmax_x"]
        half = np.where(t >= t[-1] / 2)[0]
        checkpoints = half[np.linspace(0, half.size - 1, 6).astype(int)]
        assert np.all(np.diff(x[checkpoints]) > 0), tag

    _, stable = _series(fig7, "stable")
    _, varying = _series(fig7, "varying")
    k_half = int(np.argmin(np.abs(varying["t"] - varying["t"][-1] / 2)))
    left = varying["argmax_x"][-1] < varying["argmax_x"][k_half]
    assert left
    assert stable["argmax_x"][-1] > stable["argmax_x"][k_half]
    _ok(9, f"stable drifts right (to {stable['argmax_x'][-1]:.2f}), "
           f"periodic environment drifts left "
           f"({varying['argmax_x'][k_half]:.2f} -> "
           f"{varying['argmax_x'][-1]:.2f})")


# ---------------------------------------------------------------------------
# criterion 10: merged-population reduction consistency

def test_criterion_10_scalar_reduction(mass_run, dna_field):
    _, traj = mass_run
    n_two = traj.series["N"][-1]
    w0 = 0.2 * np.exp(-10 * (dna_field.grid.nodes - 3.0) ** 2)
    scalar = solve_effective_scalar(w0, dna_field, 0.01)
    n_scalar = scalar.series["N"][-1]
    rel = abs(n_two - n_scalar) / n_scalar
    assert rel < 0.02
    _ok(10, f"two-type N {n_two:.5f} vs merged stationary N {n_scalar:.5f} "
            f"({rel:.3%})")
