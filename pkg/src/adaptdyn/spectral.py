"""Spectral objects of the small-mutation limit.

For momentum rho and mass N the relevant matrix is rho^2*diag(d1, d2)
plus the reaction matrix [[r1 - N, delta1], [delta2, r2 - N]].  Its
principal eigenvalue (the one with a positive eigenvector) drives the
limiting front dynamics; its mass- and kinetic-free part is the
Hamiltonian fitness whose argmax predicts the selected trait.  The
population ratio n1/n2 relaxes to the positive root q1 of the coupling
quadratic, and the principal eigenvector is (1, q2) = (1, 1/q1).
"""

import csv
from dataclasses import dataclass

import numpy as np


def _gap(r1, r2, d1, d2, rho):
    """Signed fitness gap Delta_1 = (d1 - d2) rho^2 + (r1 - r2)."""
    return (d1 - d2) * np.asarray(rho, dtype=float) ** 2 + (r1 - r2)


def _disc(gap, delta1, delta2):
    """sqrt(gap^2 + 4 delta1 delta2), cancellation-free."""
    return np.hypot(gap, 2.0 * np.sqrt(delta1 * delta2))


def _check_deltas(delta1, delta2):
    if np.any(np.asarray(delta1) <= 0) or np.any(np.asarray(delta2) <= 0):
        raise ValueError("delta1 and delta2 must be strictly positive")


def hamiltonian_fitness(r1, r2, delta1, delta2, d1=1.0, d2=1.0, rho=0.0):
    """Mass-free part of the principal eigenvalue.

    Momentum enters only through the (d1 - d2) rho^2 shift of the gap, so
    at equal mutation coefficients the landscape is momentum-free.
    """
    _check_deltas(delta1, delta2)
    gap = _gap(r1, r2, d1, d2, rho)
    return (r1 + r2 + _disc(gap, delta1, delta2)) / 2.0


def effective_hamiltonian(r1, r2, delta1, delta2, d1, d2, rho, N):
    """Principal eigenvalue: mean kinetic term plus fitness minus mass."""
    return (
        (d1 + d2) / 2.0 * np.asarray(rho, dtype=float) ** 2
        + hamiltonian_fitness(r1, r2, delta1, delta2, d1, d2, rho)
        - N
    )


def _positive_root(gap, delta_i, delta_j):
    """Positive root of  delta_i + gap*X - delta_j*X^2.

    Conjugate form when the gap is negative, so the result keeps full
    relative accuracy when 4*delta_i*delta_j is much smaller than gap^2.
    """
    disc = _disc(gap, delta_i, delta_j)
    gap, disc, delta_i, delta_j = np.broadcast_arrays(gap, disc, delta_i, delta_j)
    straight = (gap + disc) / (2.0 * delta_j)
    with np.errstate(divide="ignore", invalid="ignore"):
        conjugate = 2.0 * delta_i / (disc - gap)
    return np.where(gap >= 0, straight, conjugate)


def ratio_q(i, r1, r2, delta1, delta2, d1=1.0, d2=1.0, rho=0.0):
    """Asymptotic population ratio n_i/n_j at the given momentum."""
    _check_deltas(delta1, delta2)
    if i == 1:
        gap = _gap(r1, r2, d1, d2, rho)
        return _positive_root(gap, delta1, delta2)
    if i == 2:
        gap = _gap(r2, r1, d2, d1, rho)
        return _positive_root(gap, delta2, delta1)
    raise ValueError("population index must be 1 or 2")


def ratio_q_plus(i, r1, r2, delta1, delta2, d1=1.0, d2=1.0, rho=0.0):
    """Upper envelope of ratio_q: the linear term outside the square root
    is dropped when this population mutates slower than the other."""
    _check_deltas(delta1, delta2)
    d_i, d_j = (d1, d2) if i == 1 else (d2, d1)
    if d_i >= d_j:
        return ratio_q(i, r1, r2, delta1, delta2, d1, d2, rho)
    if i == 1:
        gap = _gap(r1, r2, d1, d2, rho)
        return _disc(gap, delta1, delta2) / (2.0 * delta2)
    gap = _gap(r2, r1, d2, d1, rho)
    return _disc(gap, delta2, delta1) / (2.0 * delta1)


def eigenvector_psi(r1, r2, delta1, delta2, d1, d2, rho):
    """Principal eigenvector normalised to a unit first component.

    The second component carries the asymptotic fraction of population 2
    relative to population 1, i.e. q2 at the same momentum.
    """
    psi2 = ratio_q(2, r1, r2, delta1, delta2, d1, d2, rho)
    return np.ones_like(np.asarray(psi2, dtype=float)), psi2


@dataclass(frozen=True)
class SpectralPoint:
    """Limit quantities at one node, momentum and mass."""

    r_H: float
    H: float
    q1: float
    q2: float
    psi: tuple

    def __post_init__(self):
        if not (self.q1 > 0 and self.q2 > 0):
            raise ValueError("population ratios must be positive")


def spectral_point(r1, r2, delta1, delta2, d1, d2, rho, N):
    rh = float(hamiltonian_fitness(r1, r2, delta1, delta2, d1, d2, rho))
    H = float(effective_hamiltonian(r1, r2, delta1, delta2, d1, d2, rho, N))
    q1 = float(ratio_q(1, r1, r2, delta1, delta2, d1, d2, rho))
    q2 = float(ratio_q(2, r1, r2, delta1, delta2, d1, d2, rho))
    psi1, psi2 = eigenvector_psi(r1, r2, delta1, delta2, d1, d2, rho)
    return SpectralPoint(rh, H, q1, q2, (float(psi1), float(psi2)))


def check_identities(r1, r2, delta1, delta2, d1, d2, rho):
    """Largest relative residual of the closed-form ratio identities.

    With both populations at the shared momentum rho, the exact relations
    are, for (i, j) in {(1, 2), (2, 1)}:

        r_j + delta_j * q_i        = r_H + (d_i - d_j) rho^2 / 2
        1 / q_i                    = q_j
        r_i + delta_i / q_i        = r_H - (d_i - d_j) rho^2 / 2

    Both sides reduce to the bare r_H relations when d_i = d_j; at unequal
    mutation coefficients the kinetic half-gap term is what makes them
    exact (each side then equals the principal eigenvalue minus that
    population's own kinetic term, plus the mass).
    """
    rh = hamiltonian_fitness(r1, r2, delta1, delta2, d1, d2, rho)
    rho2 = np.asarray(rho, dtype=float) ** 2
    scale = 1.0 + np.abs(rh) + (d1 + d2) / 2.0 * rho2
    worst = 0.0
    for i, (ri, rj, di, dj, qi, qj) in (
        (1, (r1, r2, delta1, delta2,
             ratio_q(1, r1, r2, delta1, delta2, d1, d2, rho),
             ratio_q(2, r1, r2, delta1, delta2, d1, d2, rho))),
        (2, (r2, r1, delta2, delta1,
             ratio_q(2, r1, r2, delta1, delta2, d1, d2, rho),
             ratio_q(1, r1, r2, delta1, delta2, d1, d2, rho))),
    ):
        half_kin = ((d1 - d2) if i == 1 else (d2 - d1)) * rho2 / 2.0
        res1 = np.abs(rj + dj * qi - (rh + half_kin))
        res2 = np.abs(1.0 / qi - qj) / (1.0 + np.abs(qj))
        res3 = np.abs(ri + di / qi - (rh - half_kin))
        worst = max(
            worst,
            float(np.max(res1 / scale)),
            float(np.max(res2)),
            float(np.max(res3 / scale)),
        )
    return worst


def eigen_residual(r1, r2, delta1, delta2, d1, d2, rho, N):
    """Relative residual of the principal eigen-pair, componentwise."""
    psi1, psi2 = eigenvector_psi(r1, r2, delta1, delta2, d1, d2, rho)
    H = effective_hamiltonian(r1, r2, delta1, delta2, d1, d2, rho, N)
    rho2 = np.asarray(rho, dtype=float) ** 2
    row1 = (d1 * rho2 + r1 - N) * psi1 + delta1 * psi2 - H * psi1
    row2 = delta2 * psi1 + (d2 * rho2 + r2 - N) * psi2 - H * psi2
    scale = 1.0 + np.abs(H) * np.maximum(np.abs(psi1), np.abs(psi2))
    return np.maximum(np.abs(row1), np.abs(row2)) / scale


def fitness_landscape(field, d1=1.0, d2=1.0, rho=0.0):
    """Hamiltonian fitness sampled on the field's grid, with its argmax node.

    Ties break to the smallest node index.
    """
    values = hamiltonian_fitness(
        field.r1, field.r2, field.delta1, field.delta2, d1, d2, rho
    )
    return values, int(np.argmax(values))


def effective_fitness_r_infty(field, node=None):
    """Ratio-weighted mean fitness of the merged population (momentum-free).

    Algebraically identical to the Hamiltonian fitness at equal mutation
    coefficients; exposed separately because the scalar reduction solves a
    single equation with this growth rate.
    """
    if node is None:
        r1, r2 = field.r1, field.r2
        dl1, dl2 = field.delta1, field.delta2
    else:
        r1, r2 = field.r1[node], field.r2[node]
        dl1, dl2 = field.delta1[node], field.delta2[node]
    q = ratio_q(1, r1, r2, dl1, dl2, 1.0, 1.0, 0.0)
    return q / (1.0 + q) * (r1 + dl2) + 1.0 / (1.0 + q) * (r2 + dl1)


def landscape_to_csv(path, traits, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trait", "r_H"])
        for t, v in zip(traits, values):
            writer.writerow([f"{t:.17g}", f"{v:.17g}"])
