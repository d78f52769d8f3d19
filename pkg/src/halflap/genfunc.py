"""Generating functions with orthonormal integer translates.

Both built-ins are per-axis products of a real, even, nonnegative window
b(t); the Fourier transform is (2 pi)^{-d/2} prod_j b(xi_j).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np
from scipy import signal

from .errors import ValidationError

SQRT_HALF = np.sqrt(0.5)


def shannon_window(t):
    """Indicator of [-pi, pi]; the two edge points carry 1/sqrt(2).

    The edge value keeps the window even and makes the periodization
    identity hold at every point, not only almost everywhere.
    """
    a = np.abs(np.asarray(t, dtype=float))
    return np.where(a < np.pi, 1.0, np.where(a == np.pi, SQRT_HALF, 0.0))


def quintic_profile(s):
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10 - 15 * s + 6 * s**2)


def septic_profile(s):
    s = np.clip(s, 0.0, 1.0)
    return s**4 * (35 - 84 * s + 70 * s**2 - 20 * s**3)


# The decay of phi_0 is fixed by the first derivative of b that jumps at
# |t| = 4 pi/3: third derivative for the quintic profile (|phi_0| ~ |x|^-4),
# fourth derivative for the septic one (|phi_0| ~ |x|^-5).
MEYER_PROFILES = {"quintic": (quintic_profile, 4.0), "septic": (septic_profile, 5.0)}


def meyer_window(t, profile=quintic_profile):
    a = np.abs(np.asarray(t, dtype=float))
    inner = np.cos(0.5 * np.pi * profile(3 * a / (2 * np.pi) - 1))
    return np.where(a <= 2 * np.pi / 3, 1.0, np.where(a <= 4 * np.pi / 3, inner, 0.0))


@dataclass(frozen=True)
class GeneratingFunction:
    name: str
    window: Callable = field(repr=False)
    support_radius: float
    window_lower_bound: float
    decay_exponent: float
    spatial: Callable | None = field(default=None, repr=False)
    breakpoints: tuple = ()
    reflection_even: bool = True
    notes: tuple = ()

    def fourier(self, *xi):
        """phi_0 hat at the points (xi_1, ..., xi_d)."""
        return (2 * np.pi) ** (-len(xi) / 2) * self.window_product(*xi)

    def window_product(self, *t):
        out = 1.0
        for x in t:
            out = out * self.window(x)
        return out

    def profile(self, x):
        """One-dimensional phi_0(x), by closed form or by quadrature of the window."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.spatial is not None:
            return self.spatial(x)
        edges = (0.0, *self.breakpoints, self.support_radius)
        nodes, weights = np.polynomial.legendre.leggauss(512)
        out = np.zeros_like(x)
        for a, b in zip(edges[:-1], edges[1:]):
            xi = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            w = 0.5 * (b - a) * weights * self.window(xi)
            out += np.cos(np.multiply.outer(x, xi)) @ w
        return out / np.pi

    def c0(self, d):
        return self.window_lower_bound * (2 * np.pi) ** (-d / 2)

    def satisfies_decay(self, d):
        return self.decay_exponent > d


def make_shannon():
    return GeneratingFunction(
        name="shannon",
        window=shannon_window,
        support_radius=np.pi,
        window_lower_bound=1.0,
        decay_exponent=1.0,
        spatial=np.sinc,
        notes=("decay exponent 1 does not exceed d: no potential rate follows",),
    )


def make_meyer(profile="quintic"):
    prof, tau = MEYER_PROFILES[profile]
    return GeneratingFunction(
        name="meyer" if profile == "quintic" else f"meyer-{profile}",
        window=partial(meyer_window, profile=prof),
        support_radius=4 * np.pi / 3,
        window_lower_bound=1.0,
        decay_exponent=tau,
        breakpoints=(2 * np.pi / 3,),
    )


GENERATORS = {
    "shannon": make_shannon,
    "meyer": make_meyer,
    "meyer-septic": partial(make_meyer, "septic"),
}


def get(name):
    try:
        return GENERATORS[name]()
    except KeyError:
        raise ValueError(f"unknown generating function {name!r}; choose from {sorted(GENERATORS)}") from None


def validate_orthonormality(g, grid_points=1001, d=1):
    """sup over sampled xi in [-pi, pi]^d of |sum_k |phi_hat(xi + 2 pi k)|^2 - (2 pi)^{-d}|."""
    if grid_points < 3:
        raise ValueError("need at least 3 grid points")
    t = np.linspace(-np.pi, np.pi, grid_points)
    # |k_j| <= 2 is exact for supports inside [-3 pi, 3 pi]
    per_axis = sum(g.window(t + 2 * np.pi * k) ** 2 for k in range(-2, 3))
    total = per_axis
    for _ in range(d - 1):
        total = np.multiply.outer(total, per_axis)
    return float(np.max(np.abs(total - 1.0)) * (2 * np.pi) ** (-d))


def validate_support_and_lower_bound(g, d=1, samples=2001):
    """Check supp phi_hat in [-3pi/2, 3pi/2]^d and |phi_hat| >= c_0 on [-pi/2, pi/2]^d.

    Returns ``(ok, c0_measured)``; raises ValidationError listing offending
    frequencies when a check fails.
    """
    t = np.linspace(-3 * np.pi, 3 * np.pi, samples)
    outside = t[(np.abs(t) > 1.5 * np.pi) & (g.window(t) != 0)]
    if outside.size:
        raise ValidationError("window is nonzero outside [-3pi/2, 3pi/2]", outside[:10].tolist())
    inner = np.linspace(-np.pi / 2, np.pi / 2, samples)
    low = np.min(np.abs(g.window(inner)))
    if low <= 0:
        bad = inner[g.window(inner) == 0]
        raise ValidationError("phi_hat vanishes on [-pi/2, pi/2]", bad[:10].tolist())
    # product structure: the minimum over the cube is the 1d minimum to the d-th power
    return True, float(low**d * (2 * np.pi) ** (-d / 2))


def estimate_decay(g, x_min=1.0, x_max=100.0, samples=6000):
    """Minus the log-log slope of the envelope of |phi_0| over [x_min, x_max].

    The envelope is the set of local maxima of |phi_0| on a uniform sample;
    oscillating profiles have zeros that would wreck a plain fit.
    """
    x = np.linspace(x_min, x_max, samples)
    y = np.abs(g.profile(x))
    peaks = signal.argrelmax(y)[0]
    if peaks.size < 3:
        raise ValidationError("too few envelope peaks to fit decay", x[peaks].tolist())
    slope = np.polyfit(np.log(x[peaks]), np.log(y[peaks]), 1)[0]
    return float(-slope)


def certificate(g, d=1):
    """Run every validation and collect the results in one dict."""
    ok, c0 = validate_support_and_lower_bound(g, d)
    return {
        "name": g.name,
        "d": d,
        "orthonormality_deviation": validate_orthonormality(g, 1001 if d == 1 else 101, d),
        "support_ok": ok,
        "support_radius": g.support_radius,
        "c0_measured": c0,
        "decay_exponent_declared": g.decay_exponent,
        "decay_exponent_measured": estimate_decay(g),
        "satisfies_decay_assumption": g.satisfies_decay(d),
        "notes": list(g.notes),
    }
