"""Expected distance of the outermost node an anchor detects at each hop.

Hop 1 has the closed form 3n/(3n+1) R.  For hop m > 1 the outermost
distance r follows the max-of-n law F(r) = (r / mR)^(3 n_m), and a relay
must sit in the lens shared by the anchor's (m-1)-hop ball (radius
UB_{m-1}) and the candidate's radio ball (radius R).  The relay weight is
``1 - (1 - CS/S)^eps`` with S the (m-1)-hop ball volume and eps half the
population of hop band m-1.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .quadrature import weighted_radius_moments


def p_outermost_first_hop(r_delta, R, n1):
    r = np.asarray(r_delta, dtype=float)
    if np.any((r < 0) | (r > R)):
        raise DomainError(f"r_delta must lie in [0, R={R}]")
    return (r**3 / R**3) ** n1


def p_outermost_multi_hop(r_delta, R, m, n_im):
    r = np.asarray(r_delta, dtype=float)
    top = m * R
    if np.any((r < 0) | (r > top)):
        raise DomainError(f"r_delta must lie in [0, m*R={top}]")
    return (r**3 / top**3) ** n_im


def lens_plane(r_delta, R, ub_prev):
    """Coordinate of the plane where the two spheres intersect."""
    return (r_delta**2 + ub_prev**2 - R**2) / (2.0 * r_delta)


def communal_space(r_delta, R, ub_prev):
    """Volume of ball(0, ub_prev) intersected with ball((r_delta, 0, 0), R).

    Proper lenses are the sum of two caps split at the intersection plane
    x = r_j: the candidate's cap over [r_delta - R, r_j] and the anchor
    ball's cap over [r_j, ub_prev].
    """
    if R <= 0 or ub_prev <= 0:
        raise DomainError("radii must be positive")
    d = np.asarray(r_delta, dtype=float)
    if np.any(d < 0):
        raise DomainError("r_delta must be nonnegative")
    out = np.zeros(d.shape)
    inside = d <= abs(ub_prev - R)
    out[inside] = 4.0 / 3.0 * math.pi * min(R, ub_prev) ** 3
    proper = ~inside & (d < ub_prev + R)
    if np.any(proper):
        x = d[proper]
        rj = lens_plane(x, R, ub_prev)
        a = x - R
        # int_a^rj pi (R^2 - (s - x)^2) ds
        cap_far = math.pi * (R**2 * (rj - a) - ((rj - x) ** 3 - (a - x) ** 3) / 3.0)
        # int_rj^ub pi (ub^2 - s^2) ds
        cap_near = math.pi * (ub_prev**2 * (ub_prev - rj) - (ub_prev**3 - rj**3) / 3.0)
        out[proper] = cap_far + cap_near
    return out if out.ndim else float(out)


def relay_probability(cs, s_prev, epsilon):
    cs = np.asarray(cs, dtype=float)
    if epsilon < 0:
        raise DomainError("epsilon must be nonnegative")
    if np.any(cs > s_prev * (1.0 + 1e-12)):
        raise RuntimeError("communal space exceeds the detection volume")
    if epsilon == 0:
        return np.zeros(cs.shape) if cs.ndim else 0.0
    frac = np.clip(cs / s_prev, 0.0, 1.0)
    out = 1.0 - (1.0 - frac) ** epsilon
    return out if out.ndim else float(out)


def band_epsilon(census_row, m: int) -> float:
    """Half the number of nodes found at exactly hop m - 1 (n[0] is 0)."""
    n = census_row
    below = n[m - 2] if m >= 2 else 0
    return (n[m - 1] - below) / 2.0


def relay_weight(R: float, ub_prev: float, epsilon: float):
    """Relay-presence probability as a function of the candidate's distance.

    Returns ``(weight, kinks)``; kinks are the radii where the lens switches
    between containment, proper intersection and disjointness.
    """
    s_prev = 4.0 / 3.0 * math.pi * ub_prev**3

    def weight(r):
        return relay_probability(communal_space(r, R, ub_prev), s_prev, epsilon)

    return weight, (abs(ub_prev - R), ub_prev + R)


def max_observed_hop(census_row) -> int:
    n = np.asarray(census_row)
    grew = np.flatnonzero(np.diff(n) > 0)
    return int(grew[-1] + 1) if len(grew) else 0


def first_hop_bound(n1: int, R: float) -> float:
    return 3.0 * n1 / (3.0 * n1 + 1.0) * R


def upper_bounds(census_row, R: float, normalize: bool = True) -> np.ndarray:
    """UB for every hop index; entry 0 and hops beyond the anchor's reach are NaN."""
    n = np.asarray(census_row, dtype=np.int64)
    top = max_observed_hop(n)
    ub = np.full(len(n), np.nan)
    for m in range(1, top + 1):
        ub[m] = _upper_bound_step(n, R, m, ub[m - 1], normalize)
        if not np.isfinite(ub[m]):
            break
    return ub


def upper_bound(census_row, R: float, m: int, normalize: bool = True) -> float:
    if m < 1:
        raise DomainError("hop index must be >= 1")
    n = np.asarray(census_row)
    if m >= len(n) or n[m] == 0:
        return math.nan
    return float(upper_bounds(n[: m + 1], R, normalize)[m])


def _upper_bound_step(n, R, m, ub_prev, normalize):
    if n[m] == 0:
        return math.nan
    if m == 1:
        m0, m1 = weighted_radius_moments(None, 0.0, R, float(n[1]))
        return m1 / m0 if normalize else m1
    eps = band_epsilon(n, m)
    if eps <= 0 or not np.isfinite(ub_prev):
        return math.nan
    weight, kinks = relay_weight(R, ub_prev, eps)
    top = m * R
    # the weight vanishes past ub_prev + R; condition the max-law on that support
    hi = min(top, ub_prev + R)
    m0, m1 = weighted_radius_moments(weight, 0.0, hi, float(n[m]), kinks)
    if normalize:
        if m0 <= 0:
            return math.nan
        value = m1 / m0
    else:
        value = m1 * (hi / top) ** (3 * n[m])
    return float(min(max(value, ub_prev), top))
