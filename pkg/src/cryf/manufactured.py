"""Closed-form fields on the nilmanifold with exact frame derivatives.

Used as oracles when measuring consistency orders of the difference
operators.  The first three cases are pulled back from the (x, y) torus and
never touch the twisted direction; the theta field is a Gaussian theta sum

    f = sum_m exp(-kappa (x+m-1/2)^2) cos(2 pi (z + m y)),

the standard way to write a smooth function on the twisted quotient with
genuine dependence on the central direction (the sum over m absorbs the
x-wrap shear exactly).
"""

from __future__ import annotations

import numpy as np

from .geometry import BaseGeometry

TWO_PI = 2.0 * np.pi


def sin_mode_x(geom: BaseGeometry):
    """f = sin(2 pi x); sub-Laplacian is -4 pi^2 f (pure X^2 term)."""
    x, _, _ = geom.coords()
    f = np.sin(TWO_PI * x) + np.zeros(geom.shape)
    return f, -4.0 * np.pi**2 * f


def sin_mode_y(geom: BaseGeometry):
    """f = sin(2 pi y); sub-Laplacian is -4 pi^2 f (the x d/dz part of Y is inert)."""
    _, y, _ = geom.coords()
    f = np.sin(TWO_PI * y) + np.zeros(geom.shape)
    return f, -4.0 * np.pi**2 * f


def cos_product_xy(geom: BaseGeometry):
    """f = cos(2 pi x) cos(2 pi y); sub-Laplacian is -8 pi^2 f."""
    x, y, _ = geom.coords()
    f = np.cos(TWO_PI * x) * np.cos(TWO_PI * y) + np.zeros(geom.shape)
    return f, -8.0 * np.pi**2 * f


UNTWISTED_CASES = (
    ("sin_2pi_x", sin_mode_x),
    ("sin_2pi_y", sin_mode_y),
    ("cos_2pi_x_cos_2pi_y", cos_product_xy),
)


class ThetaField:
    """Theta-sum test field and its exact frame derivatives / sub-Laplacian."""

    __slots__ = ("f", "lap", "xf", "yf", "zf")

    def __init__(self, f, lap, xf, yf, zf):
        self.f = f
        self.lap = lap
        self.xf = xf
        self.yf = yf
        self.zf = zf


def theta_field(geom: BaseGeometry, kappa: float = 12.0, m_range: int = 4) -> ThetaField:
    """Smooth z-dependent quotient function built from a truncated theta sum.

    kappa controls the Gaussian width 1/sqrt(2 kappa); with the default the
    |m| > m_range tail is far below double-precision resolution, so the
    truncation is exact for numerical purposes.  Exact identities used:

        X f = sum_m E_m' cos(p_m)
        Y f = -2 pi sum_m (m + x) E_m sin(p_m)
        Z f = -2 pi sum_m E_m sin(p_m)
        (X^2 + Y^2) f = sum_m [E_m'' - 4 pi^2 (m+x)^2 E_m] cos(p_m)

    with E_m = exp(-kappa (x+m-1/2)^2) and p_m = 2 pi (z + m y).
    """
    x, y, z = geom.coords()
    f = np.zeros(geom.shape)
    lap = np.zeros(geom.shape)
    xf = np.zeros(geom.shape)
    yf = np.zeros(geom.shape)
    zf = np.zeros(geom.shape)
    for m in range(-m_range, m_range + 1):
        c = x + m - 0.5
        env = np.exp(-kappa * c * c)
        d_env = -2.0 * kappa * c * env
        dd_env = (4.0 * kappa**2 * c * c - 2.0 * kappa) * env
        phase = TWO_PI * (z + m * y)
        cosp = np.cos(phase)
        sinp = np.sin(phase)
        f += env * cosp
        lap += (dd_env - 4.0 * np.pi**2 * (m + x) ** 2 * env) * cosp
        xf += d_env * cosp
        yf += -TWO_PI * (m + x) * env * sinp
        zf += -TWO_PI * env * sinp
    return ThetaField(f, lap, xf, yf, zf)
