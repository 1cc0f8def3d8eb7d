"""Reference values computed independently of the package internals.

Everything here is brute force on numpy arrays: dense residual scans,
10^6-point trapezoid rules and closed-form integrals of the mode profiles.
"""

import math

import numpy as np

REF = dict(a=1.0, b=0.2, V=60.0)


def even_residual_np(E, a, b, V, n=1):
    alpha = np.sqrt(2.0 * (V - E))
    return np.arctan(np.sqrt(E) / np.sqrt(V - E) / np.tanh(b * alpha)) - n * np.pi + (a - b) * np.sqrt(2.0 * E)


def odd_residual_np(E, a, b, V, n=1):
    alpha = np.sqrt(2.0 * (V - E))
    return np.arctan(np.sqrt(E) / np.sqrt(V - E) * np.tanh(b * alpha)) - n * np.pi + (a - b) * np.sqrt(2.0 * E)


def scan_roots(residual, a, b, V, n=1, points=1_000_000, tol=1e-12):
    """All sign changes of the residual on a uniform grid over (0, V), each
    refined by plain bisection to ``tol``."""
    E = np.linspace(0.0, V, points + 2)[1:-1]
    r = residual(E, a, b, V, n)
    idx = np.nonzero(np.sign(r[:-1]) * np.sign(r[1:]) < 0)[0]
    roots = []
    for i in idx:
        lo, hi = E[i], E[i + 1]
        flo = residual(lo, a, b, V, n)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            fm = residual(mid, a, b, V, n)
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    return roots


def profile_np(E, parity, x, a, b, V):
    """Unnormalized profile written directly with cosh/sinh (moderate V only)."""
    k, alpha = math.sqrt(2 * E), math.sqrt(2 * (V - E))
    y = np.abs(x)
    S = math.sin(k * (a - b))
    if parity == "even":
        inner = S * np.cosh(alpha * y) / math.cosh(alpha * b)
        u = np.where(y > b, np.sin(k * (a - y)), inner)
    else:
        inner = S * np.sinh(alpha * y) / math.sinh(alpha * b)
        u = -np.sign(x) * np.where(y > b, np.sin(k * (a - y)), inner)
    return u


def norm_squared_closed_form(E, parity, a, b, V):
    """Integral of the unnormalized profile squared over [-a, a], analytically."""
    k, alpha = math.sqrt(2 * E), math.sqrt(2 * (V - E))
    L = a - b
    outer = L / 2 - math.sin(2 * k * L) / (4 * k)
    S2 = math.sin(k * L) ** 2
    if parity == "even":
        inner = S2 / math.cosh(alpha * b) ** 2 * (b / 2 + math.sinh(2 * alpha * b) / (4 * alpha))
    else:
        inner = S2 / math.sinh(alpha * b) ** 2 * (math.sinh(2 * alpha * b) / (4 * alpha) - b / 2)
    return 2 * (outer + inner)


def trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def cumulative_trapezoid(y, x):
    return np.concatenate([[0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])


def grid_with_edges(a, b, points=1_000_001):
    """Uniform grid on [-a, a] with the barrier edges inserted."""
    return np.unique(np.concatenate([np.linspace(-a, a, points), [-b, b]]))


def invert_cumulative(F, x, target):
    """Linear interpolation of the inverse of a tabulated increasing F."""
    return float(np.interp(target, F, x))


def rk4_fixed(v, x0, t0, t1, dt):
    """Classical fixed-step RK4; used as a tiny-step reference integrator."""
    n = max(1, int(math.ceil((t1 - t0) / dt)))
    h = (t1 - t0) / n
    x, t = x0, t0
    for _ in range(n):
        k1 = v(x, t)
        k2 = v(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = v(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = v(x + h * k3, t + h)
        x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return x
