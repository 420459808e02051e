"""Conformal contact forms u^(2/n) * theta and their curvature and volume data.

A state holds the positive conformal factor u at one flow time.  The
Webster scalar curvature comes from the conformal transformation law

    -(2 + 2/n) Lap(u) + R_base u = R u^(1 + 2/n)

which on the flat background reduces (n = 1) to R = -4 Lap(u) / u^3.  The
conformal sub-Laplacian is kept in divergence form with weight u^2,

    Lap_u f = u^(-(2n+2)/n) * div(u^2 grad f),

never by expanding derivatives of u: that choice makes integration by parts
against the conformal volume element u^((2n+2)/n) exact on the grid (zero
mean and self-adjointness hold to rounding), which is what the downstream
time-derivative identity checks rest on.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import PositivityError
from .geometry import (
    BaseGeometry,
    integrate_base,
    pullback_z_shift,
    sub_laplacian_base,
    weighted_div_form,
)

DEFAULT_U_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class ConformalState:
    """Conformal factor u > 0 on a geometry at flow time t."""

    geom: BaseGeometry
    u: np.ndarray
    t: float = 0.0

    def __post_init__(self) -> None:
        u = np.asarray(self.u, dtype=float)
        if u.shape != self.geom.shape:
            raise ValueError(f"u has shape {u.shape}, expected {self.geom.shape}")
        if not np.all(np.isfinite(u)):
            raise ValueError("u contains non-finite values")
        if u.min() <= 0.0:
            raise ValueError(f"u must be positive everywhere (min={u.min()})")
        object.__setattr__(self, "u", u)

    @property
    def n(self) -> int:
        return self.geom.n


def _webster_raw(geom: BaseGeometry, u: np.ndarray, u_floor: float) -> np.ndarray:
    if u.min() <= u_floor:
        raise PositivityError(
            f"conformal factor at/below floor: min u = {u.min()} <= {u_floor}"
        )
    n = geom.n
    rhs = -(2.0 + 2.0 / n) * sub_laplacian_base(geom, u) + geom.r_base * u
    return u ** (-(1.0 + 2.0 / n)) * rhs


def webster_curvature(state: ConformalState, u_floor: float = DEFAULT_U_FLOOR) -> np.ndarray:
    """Webster scalar curvature of the conformal contact form.

    Refuses states whose minimum of u is at or below `u_floor` instead of
    returning huge values; the unnormalized flow may legitimately drive u
    toward zero and that must fail loudly.
    """
    return _webster_raw(state.geom, state.u, u_floor)


def conformal_volume_element(state: ConformalState) -> np.ndarray:
    """Pointwise density u^((2n+2)/n) of the conformal volume form."""
    n = state.n
    return state.u ** ((2.0 * n + 2.0) / n)


def integrate_conformal(state: ConformalState, f: np.ndarray) -> float:
    """Integral of f against the conformal volume form."""
    return integrate_base(state.geom, np.asarray(f) * conformal_volume_element(state))


def conformal_sub_laplacian(state: ConformalState, f: np.ndarray) -> np.ndarray:
    """Sub-Laplacian of the conformal contact form, in divergence form.

    Reduces exactly to the background sub-Laplacian at u = 1, and its
    conformal integral vanishes to rounding for every f because the u powers
    cancel against the volume element.
    """
    n = state.n
    u = state.u
    return u ** (-(2.0 * n + 2.0) / n) * weighted_div_form(state.geom, u * u, f)


def scale_state(state: ConformalState, sigma: float) -> ConformalState:
    """The state of sigma * theta: u -> sigma^(n/2) u.

    Pointwise curvature scales by sigma^(-1) and total volume by
    sigma^(n+1).
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    factor = float(sigma) ** (state.n / 2.0)
    return dataclasses.replace(state, u=factor * state.u)


def pullback_state(state: ConformalState, m: int) -> ConformalState:
    """Pull the state back by a central translation of m lattice steps.

    A bijective relabeling: curvature commutes with it exactly and every
    conformal integral is invariant.
    """
    return dataclasses.replace(state, u=pullback_z_shift(state.geom, state.u, m))
