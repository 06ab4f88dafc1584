"""Both detectors: the static bad-data residual and the realized dynamic
diagnosis filter.

The dynamic filter r_D = a(q)^-1 N(q) L(q) y is realized as a causal IIR
recursion with denominator a(q) = (q - p)^d_N / (1 - p)^d_N, whose only
root is the pole p and whose value at q = 1 is exactly 1, so a constant
input y passes with the DC gain N(1) L y.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .dae import PolynomialMatrix
from .design import FilterDesign
from .errors import DimensionError, StabilityError
from .linalg import weighted_range_projector


def static_residual(y, c, r_y=None) -> np.ndarray:
    """Bad-data residual (I - P) y, optionally noise-weighted.

    With a diagonal measurement covariance ``r_y`` the projector becomes
    the weighted least-squares one, C (C' R^-1 C)^-1 C' R^-1.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    weights = None
    if r_y is not None:
        r_arr = np.asarray(r_y, dtype=float)
        diag = np.diag(r_arr) if r_arr.ndim == 2 else r_arr
        if np.any(diag <= 0):
            raise ValueError("measurement covariance diagonal must be positive")
        weights = 1.0 / diag
    proj = weighted_range_projector(c, weights)
    if y.size != proj.shape[0]:
        raise DimensionError(
            f"measurement vector has length {y.size}, expected {proj.shape[0]}")
    return y - proj @ y


def denominator_coefficients(pole: float, d_n: int) -> np.ndarray:
    """Coefficients a_0..a_dN of (q - p)^d_N / (1 - p)^d_N in powers of q."""
    if not 0.0 < pole < 1.0:
        raise StabilityError(f"filter pole must lie in (0, 1), got {pole}")
    raw = np.array([comb(d_n, j) * (-pole) ** (d_n - j)
                    for j in range(d_n + 1)])
    # raw.sum() equals (1 - pole)**d_n by the binomial theorem; dividing by
    # the computed sum keeps a(1) = 1 at machine precision for any degree
    return raw / raw.sum()


class RealizedFilter:
    """Streaming realization of r_D[k] = a(q)^-1 N(q) L y[k].

    Holds the last d_N measurement vectors and residual values; one `step`
    per sample. The first `warmup` outputs are produced with zero-filled
    delay lines.
    """

    def __init__(self, numerator_rows: np.ndarray, pole: float, d_n: int):
        rows = np.atleast_2d(np.asarray(numerator_rows, dtype=float))
        if rows.shape[0] != d_n + 1:
            raise DimensionError(
                f"need {d_n + 1} numerator rows, got {rows.shape[0]}")
        self.numerator = rows
        self.pole = float(pole)
        self.d_n = int(d_n)
        self.denominator = denominator_coefficients(pole, d_n)
        self.warmup = d_n
        self.reset()

    def reset(self) -> None:
        n_y = self.numerator.shape[1]
        self._y_hist = [np.zeros(n_y) for _ in range(self.d_n + 1)]
        self._r_hist = [0.0] * self.d_n

    def step(self, y) -> float:
        """Advance one sample and return r_D[k]."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.size != self.numerator.shape[1]:
            raise DimensionError(
                f"measurement vector has length {y.size}, expected "
                f"{self.numerator.shape[1]}")
        self._y_hist = self._y_hist[1:] + [y]
        a = self.denominator
        num = sum(self.numerator[i] @ self._y_hist[i]
                  for i in range(self.d_n + 1))
        fb = sum(a[j] * self._r_hist[j] for j in range(self.d_n))
        r = (num - fb) / a[self.d_n]
        self._r_hist = self._r_hist[1:] + [r]
        return float(r)


def realize_filter(design: FilterDesign, l_poly: PolynomialMatrix) -> RealizedFilter:
    """Wire a designed coefficient row to the measurement map L(q)."""
    l0 = l_poly.coeffs[0]
    blocks = design.blocks()
    if blocks.shape[1] != l0.shape[0]:
        raise DimensionError(
            f"coefficient blocks of length {blocks.shape[1]} do not match "
            f"L with {l0.shape[0]} rows")
    return RealizedFilter(blocks @ l0, design.pole, design.d_n)


def steady_state_gain(design: FilterDesign, ffb, alpha) -> float:
    """Settled filter output under a constant basis attack: -N(1) F F_b' alpha."""
    ffb = np.asarray(ffb, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    n_at_one = design.blocks().sum(axis=0)
    return float(-(n_at_one @ (ffb @ alpha)))
