"""Observables of the small-mutation limit computed from simulation states.

The log transform u = epsilon*ln(n) turns a near-Dirac density into a
smooth negative phase whose zero set marks the concentration points; the
functions here track how far a finite-epsilon run sits from the limiting
picture (ratio relaxation, mass concentration, phase-equation residual).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateStateError
from .spectral import effective_hamiltonian, ratio_q

DENSITY_FLOOR = 1e-300
ADMISSIBLE_RATIO = 1e-12


@dataclass(frozen=True)
class HopfCole:
    """Log-transformed densities; floored flags mark nodes that underflowed
    (their u values are floor artifacts, not dynamics)."""

    u1: np.ndarray
    u2: np.ndarray
    floored1: np.ndarray
    floored2: np.ndarray


@dataclass(frozen=True)
class DiagnosticsReport:
    ratio_dev: float
    conc_node: int
    conc_mass_fraction: float
    u1: np.ndarray
    u2: np.ndarray
    hj_residual: Optional[float] = None

    def __post_init__(self):
        if not self.ratio_dev >= 0:
            raise ValueError("ratio_dev must be >= 0")
        if not 0.0 <= self.conc_mass_fraction <= 1.0:
            raise ValueError("mass fraction must lie in [0, 1]")


def hopf_cole(state, epsilon):
    """u_i = epsilon * ln(max(n_i, floor)) with underflowed nodes flagged."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    f1 = state.n1 < DENSITY_FLOOR
    f2 = state.n2 < DENSITY_FLOOR
    u1 = epsilon * np.log(np.maximum(state.n1, DENSITY_FLOOR))
    u2 = epsilon * np.log(np.maximum(state.n2, DENSITY_FLOOR))
    return HopfCole(u1, u2, f1, f2)


def _centered_gradient(u, dx):
    g = np.empty_like(u)
    g[1:-1] = (u[2:] - u[:-2]) / (2 * dx)
    g[0] = (u[1] - u[0]) / dx
    g[-1] = (u[-1] - u[-2]) / dx
    return g


def ratio_deviation(state, field, d1=1.0, d2=1.0, epsilon=None):
    """Sup-norm distance between n1/n2 and the asymptotic ratio.

    Restricted to nodes where n2 is resolvable (above 1e-12 of its max);
    below that the quotient is numerical noise.  At equal mutation
    coefficients the target ratio is momentum-free; otherwise it is
    evaluated at the local phase gradient of population 2, which requires
    epsilon.
    """
    mask = state.n2 > ADMISSIBLE_RATIO * state.n2.max()
    if not mask.any():
        raise DegenerateStateError("no admissible nodes: n2 is identically tiny")
    if d1 == d2:
        q = np.asarray(
            ratio_q(1, field.r1, field.r2, field.delta1, field.delta2)
        )
    else:
        if epsilon is None:
            raise ValueError("epsilon is needed to form the phase gradient")
        hc = hopf_cole(state, epsilon)
        rho = _centered_gradient(hc.u2, field.grid.dx)
        q = np.asarray(
            ratio_q(1, field.r1, field.r2, field.delta1, field.delta2,
                    d1, d2, rho)
        )
    ratios = state.n1[mask] / state.n2[mask]
    return float(np.max(np.abs(ratios - q[mask])))


def concentration(state, grid, window):
    """Argmax node of the summed density (smallest-index tie break) and the
    mass fraction within +/- window trait units of it."""
    if window < 0:
        raise ValueError("window must be >= 0")
    if not state.N > 0:
        raise DegenerateStateError("zero-mass state has no concentration point")
    total = state.n1 + state.n2
    node = int(np.argmax(total))
    tw = grid.trapezoid_weights()
    near = np.abs(grid.nodes - grid.nodes[node]) <= window
    fraction = float((tw[near] * total[near]).sum() / (tw * total).sum())
    return node, min(fraction, 1.0)


_ACTIVE_BAND = 2.0


def hj_residual(state_a, state_b, field, d1, d2, epsilon, N):
    """Median front-equation residual between two nearby snapshots.

    Compares the discrete phase rate (u_b - u_a)/dt against the effective
    Hamiltonian evaluated at the centered phase gradient of the midpoint,
    over interior nodes of the active region (phase within 2 units of its
    max).  The median is reported because the gradient is unreliable at
    the spike tip at finite dx; this is a consistency probe, not a
    convergence certificate.
    """
    dt = state_b.t - state_a.t
    if not dt > 0:
        raise ValueError("snapshots must be time-ordered and distinct")
    u_a = hopf_cole(state_a, epsilon).u1
    u_b = hopf_cole(state_b, epsilon).u1
    u_mid = 0.5 * (u_a + u_b)
    rate = (u_b - u_a) / dt
    rho = _centered_gradient(u_mid, field.grid.dx)
    ham = effective_hamiltonian(
        field.r1, field.r2, field.delta1, field.delta2, d1, d2, rho, N
    )
    active = u_mid > u_mid.max() - _ACTIVE_BAND
    active[[0, -1]] = False
    if not active.any():
        raise DegenerateStateError("no interior nodes in the active region")
    return float(np.median(np.abs(rate - ham)[active]))


def compute_report(state_a, state_b, field, d1, d2, epsilon, window=0.5):
    """Bundle the standard observables for a snapshot pair."""
    hc = hopf_cole(state_b, epsilon)
    node, fraction = concentration(state_b, field.grid, window)
    return DiagnosticsReport(
        ratio_dev=ratio_deviation(state_b, field, d1, d2, epsilon),
        conc_node=node,
        conc_mass_fraction=fraction,
        u1=hc.u1,
        u2=hc.u2,
        hj_residual=hj_residual(state_a, state_b, field, d1, d2, epsilon,
                                state_b.N),
    )
