"""Self-contained dense linear-programming solver.

Two-phase primal simplex on a dense tableau with Bland's rule. Problem
sizes in this package are tiny (tens of variables, a few hundred rows), so
the implementation favours robustness and determinism over speed:

* every inequality is normalised to a nonnegative right-hand side, so rows
  that become ``<=`` get a slack that doubles as the starting basis and only
  the remaining rows need artificial variables in phase 1;
* Bland's smallest-index rule is used for both entering and leaving
  variables, which rules out cycling;
* a hard pivot cap converts a hypothetical stall into an error instead of
  an infinite loop.

Free variables are split into positive/negative parts internally; the
public model keeps explicit (possibly infinite) bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, IterationLimitError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
MAX_ITER = 10 ** 6


@dataclass(frozen=True)
class LpProblem:
    """max/min c'x subject to A_eq x = b_eq, A_ge x >= b_ge, lo <= x <= up."""

    sense: str
    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    a_ge: np.ndarray | None = None
    b_ge: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        if not np.all(np.isfinite(c)):
            raise ValueError("cost vector contains non-finite entries")
        object.__setattr__(self, "c", c)
        n = c.size
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")

        def norm_rows(a, b, what):
            if a is None and b is None:
                return None, None
            a = np.atleast_2d(np.asarray(a, dtype=float))
            b = np.atleast_1d(np.asarray(b, dtype=float))
            if a.shape != (b.size, n):
                raise DimensionError(
                    f"{what}: matrix {a.shape} incompatible with "
                    f"{n} variables / {b.size} rhs entries")
            if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
                raise ValueError(f"{what}: non-finite constraint data")
            return a, b

        a_eq, b_eq = norm_rows(self.a_eq, self.b_eq, "equality block")
        a_ge, b_ge = norm_rows(self.a_ge, self.b_ge, "inequality block")
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "a_ge", a_ge)
        object.__setattr__(self, "b_ge", b_ge)

        lower = (np.full(n, -np.inf) if self.lower is None
                 else np.atleast_1d(np.asarray(self.lower, dtype=float)))
        upper = (np.full(n, np.inf) if self.upper is None
                 else np.atleast_1d(np.asarray(self.upper, dtype=float)))
        if lower.size != n or upper.size != n:
            raise DimensionError("bound vectors must match the variable count")
        if np.any(lower > upper):
            bad = int(np.argmax(lower > upper))
            raise ValueError(f"lower bound exceeds upper bound at variable {bad}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n_vars(self) -> int:
        return self.c.size


@dataclass(frozen=True)
class LpSolution:
    status: str
    value: float | None
    x: np.ndarray | None
    iterations: int

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def solve_lp(problem: LpProblem) -> LpSolution:
    """Solve an ``LpProblem``, returning status, optimum, and primal point."""
    n = problem.n_vars
    minimize_c = problem.c if problem.sense == "min" else -problem.c

    # --- variable transform to x' >= 0 ------------------------------------
    # Each original variable becomes one or two nonnegative columns plus a
    # constant offset:  x_j = offset_j + col_pos - col_neg.
    col_of = []           # per variable: (pos_col, neg_col or None)
    offsets = np.zeros(n)
    flip = np.ones(n)     # -1 when substituting x = u - x'
    extra_upper_rows = []  # (var_index, cap) rows for two-sided bounds
    ncols = 0
    for j in range(n):
        lo, up = problem.lower[j], problem.upper[j]
        if np.isfinite(lo):
            offsets[j] = lo
            col_of.append((ncols, None))
            ncols += 1
            if np.isfinite(up):
                extra_upper_rows.append((j, up - lo))
        elif np.isfinite(up):
            offsets[j] = up
            flip[j] = -1.0
            col_of.append((ncols, None))
            ncols += 1
        else:
            col_of.append((ncols, ncols + 1))
            ncols += 2

    def expand(row):
        out = np.zeros(ncols)
        for j in range(n):
            pos, neg = col_of[j]
            out[pos] += flip[j] * row[j]
            if neg is not None:
                out[neg] -= row[j]
        return out

    cost = expand(minimize_c)

    rows = []   # (coeffs over x', rhs, kind) with kind in {"eq", "ge", "le"}
    if problem.a_eq is not None:
        for a_row, b_val in zip(problem.a_eq, problem.b_eq):
            rows.append((expand(a_row), b_val - a_row @ offsets, "eq"))
    if problem.a_ge is not None:
        for a_row, b_val in zip(problem.a_ge, problem.b_ge):
            rows.append((expand(a_row), b_val - a_row @ offsets, "ge"))
    for j, cap in extra_upper_rows:
        a_row = np.zeros(n)
        a_row[j] = 1.0
        # x_j - lo <= cap, already shifted: the expanded column is +1
        rows.append((expand(a_row), cap, "le"))

    # Normalise to nonnegative rhs; >= rows with positive rhs need surplus +
    # artificial, everything that lands as <= gets a basis-ready slack.
    m = len(rows)
    coeff = np.zeros((m, ncols))
    rhs = np.zeros(m)
    kinds = []
    for i, (a_row, b_val, kind) in enumerate(rows):
        if b_val < 0:
            a_row, b_val = -a_row, -b_val
            kind = {"ge": "le", "le": "ge", "eq": "eq"}[kind]
        coeff[i] = a_row
        rhs[i] = b_val
        kinds.append(kind)

    n_slack = sum(k != "eq" for k in kinds)
    n_art = sum(k != "le" for k in kinds)
    total = ncols + n_slack + n_art
    tab = np.zeros((m, total + 1))
    tab[:, :ncols] = coeff
    tab[:, -1] = rhs
    basis = np.empty(m, dtype=int)
    s_at, a_at = ncols, ncols + n_slack
    art_cols = []
    for i, kind in enumerate(kinds):
        if kind == "le":
            tab[i, s_at] = 1.0
            basis[i] = s_at
            s_at += 1
        elif kind == "ge":
            tab[i, s_at] = -1.0
            s_at += 1
            tab[i, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1
        else:
            tab[i, a_at] = 1.0
            basis[i] = a_at
            art_cols.append(a_at)
            a_at += 1

    iterations = 0

    def run_simplex(obj_row):
        """Bland-rule simplex on (tab, basis); returns 'optimal'/'unbounded'."""
        nonlocal iterations
        while True:
            if iterations >= MAX_ITER:
                raise IterationLimitError(
                    f"simplex exceeded {MAX_ITER} pivots")
            entering = -1
            for j in range(total):
                if obj_row[j] < -PIVOT_TOL:
                    entering = j
                    break
            if entering < 0:
                return "optimal"
            col = tab[:, entering]
            ratio_best = np.inf
            leave = -1
            for i in range(m):
                if col[i] > PIVOT_TOL:
                    r = tab[i, -1] / col[i]
                    if (r < ratio_best - PIVOT_TOL
                            or (abs(r - ratio_best) <= PIVOT_TOL
                                and (leave < 0 or basis[i] < basis[leave]))):
                        ratio_best = r
                        leave = i
            if leave < 0:
                return "unbounded"
            piv = tab[leave, entering]
            tab[leave] /= piv
            factors = tab[:, entering].copy()
            factors[leave] = 0.0
            tab[:, :] -= np.outer(factors, tab[leave])
            obj_row -= obj_row[entering] * tab[leave]
            basis[leave] = entering
            iterations += 1

    # --- phase 1 -----------------------------------------------------------
    if art_cols:
        obj = np.zeros(total + 1)
        for col in art_cols:
            obj[col] = 1.0
        for i in range(m):
            if basis[i] in art_cols:
                obj -= tab[i]
        status = run_simplex(obj)
        if status != "optimal" or -obj[-1] > FEAS_TOL:
            return LpSolution(INFEASIBLE, None, None, iterations)
        # Drive leftover artificials out of the basis; a row with no usable
        # pivot is redundant and can stay (its rhs is ~0).
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                for j in range(ncols + n_slack):
                    if abs(tab[i, j]) > PIVOT_TOL:
                        piv = tab[i, j]
                        tab[i] /= piv
                        factors = tab[:, j].copy()
                        factors[i] = 0.0
                        tab -= np.outer(factors, tab[i])
                        basis[i] = j
                        break
        for col in art_cols:
            tab[:, col] = 0.0

    # --- phase 2 -----------------------------------------------------------
    obj = np.zeros(total + 1)
    obj[:ncols] = cost
    for i in range(m):
        if obj[basis[i]] != 0.0:
            obj -= obj[basis[i]] * tab[i]
    status = run_simplex(obj)
    if status == "unbounded":
        return LpSolution(UNBOUNDED, None, None, iterations)

    xprime = np.zeros(total)
    for i in range(m):
        xprime[basis[i]] = tab[i, -1]
    x = offsets.copy()
    for j in range(n):
        pos, neg = col_of[j]
        x[j] += flip[j] * xprime[pos]
        if neg is not None:
            x[j] -= xprime[neg]
    value = float(minimize_c @ x)
    if problem.sense == "max":
        value = -value
    return LpSolution(OPTIMAL, value, x, iterations)
