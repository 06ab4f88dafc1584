"""Shared test oracles, independent of the implementation paths they check."""

from __future__ import annotations

import numpy as np


def fine_step_response(a, b, u, t_s, substeps=10_000):
    """Propagate dx/dt = A x + B u over one sample with RK4 on a fine grid.

    Input held constant (zero-order hold); starts from the origin. Returns
    the state after t_s, i.e. the oracle for one column combination of the
    discretized update x+ = A_d x0 + B_d u with x0 = 0 ... callers pass an
    initial state explicitly.
    """
    h = t_s / substeps

    def deriv(x):
        return a @ x + b @ u

    x = np.zeros(a.shape[0])
    for _ in range(substeps):
        k1 = deriv(x)
        k2 = deriv(x + 0.5 * h * k1)
        k3 = deriv(x + 0.5 * h * k2)
        k4 = deriv(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def fine_step_from(a, b, x0, u, t_s, substeps=10_000):
    """Same oracle with a nonzero initial state."""
    h = t_s / substeps

    def deriv(x):
        return a @ x + b @ u

    x = np.asarray(x0, dtype=float).copy()
    for _ in range(substeps):
        k1 = deriv(x)
        k2 = deriv(x + 0.5 * h * k1)
        k3 = deriv(x + 0.5 * h * k2)
        k4 = deriv(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def poly_mat_multiply(n_coeffs, m_coeffs):
    """Coefficient list of N(q) M(q) by direct convolution.

    ``n_coeffs``: list of row vectors; ``m_coeffs``: list of matrices.
    """
    deg = len(n_coeffs) + len(m_coeffs) - 2
    out = [np.zeros((n_coeffs[0].shape[0] if n_coeffs[0].ndim > 1 else 1,
                     m_coeffs[0].shape[1])) for _ in range(deg + 1)]
    for i, n_i in enumerate(n_coeffs):
        for j, m_j in enumerate(m_coeffs):
            out[i + j] = out[i + j] + np.atleast_2d(n_i) @ m_j
    return out


def impulse_response_by_division(numerator, denominator, n_samples):
    """Long-division series of num(q)/den(q) acting causally.

    Both polynomials are given as coefficient lists in increasing powers of
    q with deg(num) <= deg(den) = d. The causal recursion
    a_d r[k] = sum_i num_i u[k - d + i] - sum_{j<d} a_j r[k - d + j] is
    unrolled directly for a unit impulse input.
    """
    num = np.asarray(numerator, dtype=float)
    den = np.asarray(denominator, dtype=float)
    d = den.size - 1
    u = np.zeros(n_samples + d)
    u[0] = 1.0
    r = np.zeros(n_samples + d)
    for k in range(n_samples):
        acc = 0.0
        for i in range(num.size):
            idx = k - d + i
            if idx >= 0:
                acc += num[i] * u[idx]
        for j in range(d):
            idx = k - d + j
            if idx >= 0:
                acc -= den[j] * r[idx]
        r[k] = acc / den[d]
    return r[:n_samples]


def random_stable_continuous(rng, order):
    """Random Hurwitz-stable A (shifted spectrum) plus input matrix."""
    a = rng.standard_normal((order, order))
    # push eigenvalues into the open left half plane
    radius = max(abs(np.linalg.eigvals(a)))
    a = a - (radius + 0.5) * np.eye(order)
    b = rng.standard_normal((order, max(1, order // 2)))
    return a, b
