"""Initial-data presets for flow runs and identity checks."""

from __future__ import annotations

import numpy as np

from .conformal import ConformalState
from .errors import ConfigurationError
from .geometry import BaseGeometry, _shift_x, _shift_y, _shift_z

PRESETS = ("constant", "single_mode_y", "single_mode_x", "random_smooth")

_CLAMP_MIN = 1e-6


def seven_point_smooth(geom: BaseGeometry, f: np.ndarray, passes: int) -> np.ndarray:
    """Average each point with its six lattice neighbors (twisted wraps included)."""
    for _ in range(passes):
        acc = f.copy()
        acc += _shift_x(geom, f, 1)
        acc += _shift_x(geom, f, -1)
        acc += _shift_y(f, 1)
        acc += _shift_y(f, -1)
        acc += _shift_z(f, 1)
        acc += _shift_z(f, -1)
        f = acc / 7.0
    return f


def make_initial_state(geom: BaseGeometry, preset: str, *, c: float = 1.0,
                       epsilon: float = 0.1, seed: int = 0, amplitude: float = 0.2,
                       smoothing_passes: int = 2) -> ConformalState:
    """Build the conformal factor for a named preset.

    random_smooth draws seeded uniform noise in [1-amplitude, 1+amplitude]
    (numpy PCG64 via default_rng, so runs are reproducible bit for bit),
    applies the 7-point average `smoothing_passes` times, then clamps to a
    small positive floor.
    """
    if preset not in PRESETS:
        raise ConfigurationError(f"unknown preset {preset!r}; choose from {PRESETS}")
    if preset == "constant":
        if not c > 0.0:
            raise ConfigurationError(f"constant preset needs c > 0, got {c}")
        u = np.full(geom.shape, float(c))
    elif preset in ("single_mode_y", "single_mode_x"):
        if not c - abs(epsilon) > 0.0:
            raise ConfigurationError(
                f"mode preset needs c - |epsilon| > 0, got c={c}, epsilon={epsilon}"
            )
        x, y, _ = geom.coords()
        coord = y if preset == "single_mode_y" else x
        u = c + epsilon * np.sin(2.0 * np.pi * coord) + np.zeros(geom.shape)
    else:
        if not (0.0 < amplitude < 1.0):
            raise ConfigurationError(
                f"random_smooth needs amplitude in (0, 1), got {amplitude}"
            )
        if smoothing_passes < 0:
            raise ConfigurationError("smoothing_passes must be >= 0")
        rng = np.random.default_rng(seed)
        u = rng.uniform(1.0 - amplitude, 1.0 + amplitude, size=geom.shape)
        u = seven_point_smooth(geom, u, smoothing_passes)
        u = np.maximum(u, _CLAMP_MIN)
    return ConformalState(geom, u, 0.0)
