"""Coefficient quadruples (r1, r2, delta1, delta2) for the two-type system.

The application models a cell population handling DNA damage: type 1 are
healthy cells feeding a damaged pool (constant damage rate D), type 2 are
cells that resumed division with unrepaired damage.  Damaged cells repair
at a Gaussian-in-age rate and override the damage checkpoint at a logistic
rate; integrating the damaged pool out in age yields the effective growth
and conversion coefficients built here.

Two trait choices are supported: the checkpoint-override timing (variable
X, logistic steepness frozen) or the timing heterogeneity (variable P,
timing frozen).
"""

import csv
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

from .grid import Grid, integrate_semi_infinite

VARIABLE_X = "X"
VARIABLE_P = "P"


@dataclass(frozen=True)
class DnaParams:
    """Rates of the damage/repair/override cascade.

    alpha_m, mu_a, sigma: peak, centre and variance parameter of the
    Gaussian repair rate in time-since-damage.
    beta_m: peak override rate; the logistic steepness is p_fixed when the
    trait is the timing x, and the timing is x_fixed when the trait is the
    steepness p.
    gamma_d / gamma_a: death rates of damaged / override cells.
    delta: post-override repair rate (conversion back to healthy).
    D: constant damage rate.
    """

    alpha_m: float = 0.5
    mu_a: float = 1.0
    sigma: float = 0.25
    beta_m: float = 0.5
    gamma_d: float = 0.1
    gamma_a: float = 0.35
    delta: float = 0.1
    D: float = 0.3
    variable: str = VARIABLE_X
    p_fixed: float = 3.0
    x_fixed: float = 2.0

    def __post_init__(self):
        for name in ("alpha_m", "mu_a", "beta_m", "gamma_a", "delta", "D"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        # gamma_d > 0 is what makes the memory integrals truncatable
        if not self.gamma_d > 0:
            raise ValueError("gamma_d must be positive")
        if not (self.D < 1 and self.gamma_a < 1):
            raise ValueError("the reduction assumes D < 1 and gamma_a < 1")
        if self.variable not in (VARIABLE_X, VARIABLE_P):
            raise ValueError(f"variable must be 'X' or 'P', got {self.variable!r}")
        if self.variable == VARIABLE_X and not self.p_fixed > 0:
            raise ValueError("p_fixed must be positive when the trait is x")
        if self.x_fixed < 0:
            raise ValueError("x_fixed must be >= 0")


def alpha_kernel(s, params):
    """Repair rate at time s since damage (peak-normalised in time).

    Any environmental modulation multiplies this from outside; the kernel
    itself is the stationary-environment shape.
    """
    s = np.asarray(s, dtype=float)
    return params.alpha_m * np.exp(-((s - params.mu_a) ** 2) / (2 * params.sigma))


def _steepness_and_centre(trait, params):
    """Logistic (p, x) pair for the active trait choice."""
    if params.variable == VARIABLE_X:
        return params.p_fixed, trait
    return trait, params.x_fixed


def beta_kernel(trait, s, params):
    """Checkpoint-override rate at time s since damage for the given trait."""
    s = np.asarray(s, dtype=float)
    p, x = _steepness_and_centre(np.asarray(trait, dtype=float), params)
    # exp argument clipped: the sigmoid saturates far before the clip bites
    z = np.clip(-p * (s - x), -700.0, 700.0)
    return params.beta_m / (1.0 + np.exp(z))


def cumulative_alpha(s, params):
    """Exact antiderivative of alpha_kernel from 0 to s (error function form)."""
    s = np.asarray(s, dtype=float)
    root = np.sqrt(2 * params.sigma)
    return (
        params.alpha_m
        * np.sqrt(np.pi * params.sigma / 2)
        * (erf((s - params.mu_a) / root) + erf(params.mu_a / root))
    )


def _softplus(y):
    return np.logaddexp(0.0, y)


def cumulative_beta(trait, s, params):
    """Exact antiderivative of beta_kernel from 0 to s.

    Uses the overflow-safe softplus form; the steepness-zero limit (flat
    override rate beta_m/2) is taken explicitly so a trait grid may start
    at p = 0.
    """
    s = np.asarray(s, dtype=float)
    p, x = _steepness_and_centre(np.asarray(trait, dtype=float), params)
    p, x, s = np.broadcast_arrays(np.asarray(p, dtype=float), x, s)
    p_safe = np.where(p == 0, 1.0, p)
    general = (params.beta_m / p_safe) * (
        _softplus(p_safe * (s - x)) - _softplus(-p_safe * x)
    )
    return np.where(p == 0, params.beta_m * s / 2.0, general)


def alpha_exposure_limit(params):
    """Total repair exposure over an unbounded damage age."""
    root = np.sqrt(2 * params.sigma)
    return (
        params.alpha_m
        * np.sqrt(np.pi * params.sigma / 2)
        * (1.0 + erf(params.mu_a / root))
    )


def cos8_environment(t):
    """Periodic repair-suppression factor: cos(pi*t/5)^8, period 5, peak 1."""
    return np.cos(np.pi * np.asarray(t, dtype=float) / 5.0) ** 8


@dataclass(frozen=True, eq=False)
class CoefficientField:
    """Sampled coefficient quadruple on a grid.

    r1 holds the stationary-environment values.  When env is set, the
    repair contribution inside r1 (alpha_part, precomputed once) is
    modulated multiplicatively at evaluation time; recomputing the full
    memory integral per step would make long runs intractable.
    """

    grid: Grid
    r1: np.ndarray
    r2: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    env: Optional[Callable[[float], float]] = None
    alpha_part: Optional[np.ndarray] = None
    dna: Optional[DnaParams] = dc_field(default=None, repr=False)

    def __post_init__(self):
        for name in ("r1", "r2", "delta1", "delta2"):
            arr = getattr(self, name)
            if arr.shape != (self.grid.nx,):
                raise ValueError(f"{name} must have length {self.grid.nx}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if np.any(self.delta1 <= 0) or np.any(self.delta2 <= 0):
            raise ValueError("delta1 and delta2 must be strictly positive everywhere")
        if self.env is not None and self.alpha_part is None:
            raise ValueError("environment modulation needs the stored alpha_part")

    def r1_at(self, t):
        """r1 sampled at time t (equal to r1 when no environment is set)."""
        if self.env is None:
            return self.r1
        return (self.r1 - self.alpha_part) + float(self.env(t)) * self.alpha_part

    def with_environment(self, env):
        return replace(self, env=env)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "r1", "r2", "delta1", "delta2"])
            for x, a, b, c, d in zip(
                self.grid.nodes, self.r1, self.r2, self.delta1, self.delta2
            ):
                writer.writerow([f"{v:.17g}" for v in (x, a, b, c, d)])


def make_field(grid, r1, r2, delta1, delta2, env=None, alpha_part=None, dna=None):
    """Coefficient field from arrays or scalars (scalars are broadcast)."""
    def expand(v):
        arr = np.asarray(v, dtype=float)
        if arr.ndim == 0:
            arr = np.full(grid.nx, float(arr))
        return arr

    ap = None if alpha_part is None else expand(alpha_part)
    return CoefficientField(
        grid, expand(r1), expand(r2), expand(delta1), expand(delta2),
        env=env, alpha_part=ap, dna=dna,
    )


_CHUNK = 256


def build_dna_coefficients(params, grid, quad, env=None):
    """Sample the four damage-cascade coefficients on the grid.

    The damaged-pool age profile is integrated out analytically (exact
    exposure antiderivatives in the exponent), leaving one outer quadrature
    in the damage age per node; there is no nested quadrature.
    """
    traits = grid.nodes
    i_alpha = np.empty(grid.nx)
    i_beta = np.empty(grid.nx)
    for lo in range(0, grid.nx, _CHUNK):
        block = traits[lo:lo + _CHUNK, None]

        def survival(s):
            return np.exp(
                -params.gamma_d * s
                - cumulative_alpha(s, params)
                - cumulative_beta(block, s[None, :], params)
            )

        i_alpha[lo:lo + _CHUNK] = integrate_semi_infinite(
            lambda s: alpha_kernel(s, params)[None, :] * survival(s), quad
        )
        i_beta[lo:lo + _CHUNK] = integrate_semi_infinite(
            lambda s: beta_kernel(block, s[None, :], params) * survival(s), quad
        )

    alpha_part = params.D * i_alpha
    r1 = (1.0 - params.D) + alpha_part
    r2 = np.full(grid.nx, 1.0 - params.gamma_a - params.delta)
    delta1 = np.full(grid.nx, params.delta)
    delta2 = params.D * i_beta
    return CoefficientField(
        grid, r1, r2, delta1, delta2, env=env, alpha_part=alpha_part, dna=params
    )


@dataclass
class HypothesisReport:
    """Outcome of the structural checks on a coefficient field.

    c_N and C_N are the realized extremes of the cross sums r_i + delta_j
    (i != j) over the grid; the total mass of any run is expected to
    settle between them.  For damage-cascade fields the two analytic floor
    readings for c_N are reported side by side (the death-rate reading and
    the repair-rate reading) rather than silently picking one.
    """

    h1_ok: bool
    h2_ok: bool
    h3_ok: bool
    c_N: float
    C_N: float
    violations: list
    floor_death_rate: Optional[float] = None
    floor_repair_rate: Optional[float] = None
    ceiling: Optional[float] = None

    @property
    def all_ok(self):
        return self.h1_ok and self.h2_ok and self.h3_ok

    def summary(self):
        bits = [
            f"H1={'ok' if self.h1_ok else 'FAIL'}",
            f"H2={'ok' if self.h2_ok else 'FAIL'}",
            f"H3={'ok' if self.h3_ok else 'FAIL'}",
            f"c_N={self.c_N:.6g}",
            f"C_N={self.C_N:.6g}",
        ]
        if self.violations:
            bits.append(f"{len(self.violations)} violation(s)")
        return " ".join(bits)

    def to_dict(self):
        return {
            "h1_ok": self.h1_ok,
            "h2_ok": self.h2_ok,
            "h3_ok": self.h3_ok,
            "c_N": self.c_N,
            "C_N": self.C_N,
            "floor_death_rate": self.floor_death_rate,
            "floor_repair_rate": self.floor_repair_rate,
            "ceiling": self.ceiling,
            "violations": [list(v) for v in self.violations],
        }


# growth-rate exponent for the positivity-decay check on delta_i; the
# lower decay bound on delta2 guarantees a margin below 2*gamma_d + 1
_GROWTH_MARGIN = 1.0


def check_hypotheses(field, d1, d2):
    """Check mutation coefficients (H1), coupling positivity and decay (H2)
    and the uniform cross-sum band (H3) on a sampled field."""
    violations = []

    h1_ok = d1 >= 0 and d2 >= 0 and (d1, d2) != (0, 0)
    if not h1_ok:
        violations.append(("H1", -1, f"(d1, d2) = ({d1}, {d2})"))

    h2_ok = True
    for name, arr in (("delta1", field.delta1), ("delta2", field.delta2)):
        bad = np.where(arr <= 0)[0]
        if bad.size:
            h2_ok = False
            violations.append(("H2", int(bad[0]), f"{name} <= 0"))
    for name in ("r1", "r2", "delta1", "delta2"):
        arr = getattr(field, name)
        bad = np.where(~np.isfinite(arr))[0]
        if bad.size:
            h2_ok = False
            violations.append(("H2", int(bad[0]), f"{name} non-finite"))
    # decay-compensated growth: delta_i * exp(C x) must climb on the last
    # log-decade of the grid, C chosen above the certified decay rate
    if h2_ok and field.dna is not None:
        growth_rate = 2 * field.dna.gamma_d + _GROWTH_MARGIN
        x = field.grid.nodes
        tail = x >= field.grid.x_max / 10
        for name, arr in (("delta1", field.delta1), ("delta2", field.delta2)):
            compensated = arr[tail] * np.exp(growth_rate * x[tail])
            if not np.all(np.diff(compensated) > 0):
                h2_ok = False
                violations.append(
                    ("H2", int(np.argmax(tail)), f"{name} decays too fast")
                )

    cross_a = field.r1 + field.delta2
    cross_b = field.r2 + field.delta1
    c_N = float(min(cross_a.min(), cross_b.min()))
    C_N = float(max(cross_a.max(), cross_b.max()))
    h3_ok = bool(c_N > 0 and np.isfinite(C_N))
    if not h3_ok:
        violations.append(("H3", int(np.argmin(np.minimum(cross_a, cross_b))),
                           f"min cross sum {c_N:.6g} <= 0"))

    floor_death = floor_repair = ceiling = None
    if field.dna is not None:
        p = field.dna
        floor_death = min(1 - p.gamma_a, 1 - p.D)
        floor_repair = min(1 - p.delta, 1 - p.D)
        ceiling = 2 + p.D

    return HypothesisReport(
        h1_ok, h2_ok, h3_ok, c_N, C_N, violations,
        floor_death_rate=floor_death,
        floor_repair_rate=floor_repair,
        ceiling=ceiling,
    )


def decay_constants(params, sample=None):
    """Certify the override-exposure decay constants (kappa, K1, K2).

    kappa: infimum over a log-spaced trait sample of the mean override
    exposure accumulated between ages x and 2x, per unit trait.
    K1, K2: exposure accumulated before age x/2 is below K1*exp(-K2*x);
    the candidate pair is verified on the sample before being returned.
    Only meaningful when the trait is the timing x.
    """
    if params.variable != VARIABLE_X:
        raise ValueError("decay constants apply to the timing-trait field only")
    if sample is None:
        sample = np.logspace(-6, 1, 200)
    early = cumulative_beta(sample, 2 * sample, params) - cumulative_beta(
        sample, sample, params
    )
    kappa = float(np.min(early / sample))
    if kappa <= 0:
        raise ValueError("could not certify a positive kappa")
    K2 = params.p_fixed / 2.0
    K1 = 2.0 * np.log(2.0) * params.beta_m / params.p_fixed
    head = cumulative_beta(sample, sample / 2, params)
    if not np.all(head <= K1 * np.exp(-K2 * sample) + 1e-15):
        raise ValueError("could not certify the (K1, K2) decay pair")
    return kappa, K1, K2


def delta2_bounds(x, params, constants=None):
    """Two-sided envelope for the conversion coefficient delta2 at trait x.

    lower: D * exp(-A_inf) * (1 - exp(-kappa*x)) * exp(-2*gamma_d*x)
    upper: (1 + K1) * exp(-min(gamma_d/2, K2) * x)
    with A_inf the total repair exposure and (kappa, K1, K2) certified
    numerically from the exact exposure antiderivative.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("trait values must be >= 0")
    kappa, K1, K2 = decay_constants(params) if constants is None else constants
    a_inf = alpha_exposure_limit(params)
    lower = (
        params.D
        * np.exp(-a_inf)
        * (1.0 - np.exp(-kappa * x))
        * np.exp(-2.0 * params.gamma_d * x)
    )
    upper = (1.0 + K1) * np.exp(-min(params.gamma_d / 2.0, K2) * x)
    return lower, upper
