"""Maximin diagnosis-filter design.

The detectability game is: the designer picks stacked filter coefficients
Nbar with Nbar @ Hbar = 0 and ||Nbar||_inf <= eta, the attacker picks
coefficients alpha in the polytope {A a >= b}, and the payoff is
J = max_j |N_j (F F_b') alpha|. The exact finite reformulation is bilinear,
so the design solves one small LP per (coefficient block, sign) pair: pin
block j with sign s to a supporting row of the polytope,

    max  b' lam   s.t.  s * N_j F F_b' = lam' A,  lam >= 0,  Nbar feasible,

whose optimum gamma' lower-bounds the game value and certifies detection of
every admissible attack whenever it is positive. The equality Nbar Hbar = 0
is eliminated by parameterizing Nbar = theta @ Z over an orthonormal null
basis Z, which keeps the LPs small and feasibility structural.

`brute_force_gamma` estimates the true game value directly on instances
with at most three free parameters (grid over the coefficient ball, attack
polytope sampled at vertices and edges) and returns a propagated
grid-resolution tolerance, giving an independent check of the LP route.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import lp
from .errors import DimensionError, EmptyAttackSetError, ValidationError
from .linalg import RANK_TOL, left_null_basis

DECOUPLE_TOL = 1e-8


@dataclass(frozen=True)
class FeasibleSetBasis:
    """Orthonormal rows of `z` span {Nbar : Nbar @ Hbar = 0}."""

    z: np.ndarray
    eta: float
    d_n: int

    def __post_init__(self):
        if self.eta <= 0:
            raise ValidationError(f"eta must be > 0, got {self.eta}")
        z = np.atleast_2d(np.asarray(self.z, dtype=float))
        if z.shape[1] % (self.d_n + 1) != 0:
            raise DimensionError(
                f"stacked width {z.shape[1]} not divisible by d_n+1 = {self.d_n + 1}")
        object.__setattr__(self, "z", z)

    @property
    def n_free(self) -> int:
        return self.z.shape[0]

    @property
    def n_rows(self) -> int:
        """Block length n_r of each coefficient N_j."""
        return self.z.shape[1] // (self.d_n + 1)

    def block(self, j: int) -> np.ndarray:
        """Columns of `z` belonging to coefficient block j."""
        n_r = self.n_rows
        return self.z[:, j * n_r:(j + 1) * n_r]


@dataclass(frozen=True)
class LpIndexReport:
    block: int
    sign: int
    status: str
    gamma: float
    wall_time: float


@dataclass(frozen=True)
class FilterDesign:
    """A designed residual generator with its detectability certificate."""

    nbar: np.ndarray
    d_n: int
    pole: float
    gamma: float
    kind: str                      # "robust" | "steady-state"
    index: tuple[int, int] | None  # (block, sign) for the robust design
    multiplier: np.ndarray | None  # lam (robust) or z (steady-state)
    table: tuple[LpIndexReport, ...] = field(default_factory=tuple)
    diagnostic: str = ""

    def blocks(self) -> np.ndarray:
        n_r = self.nbar.size // (self.d_n + 1)
        return self.nbar.reshape(self.d_n + 1, n_r)


def feasible_basis(hbar, eta: float, d_n: int,
                   tol: float = RANK_TOL) -> FeasibleSetBasis:
    """Null-space parameterization of the decoupling constraint."""
    z = left_null_basis(hbar, tol)
    return FeasibleSetBasis(z=z, eta=eta, d_n=d_n)


def _norm_ball_rows(basis: FeasibleSetBasis):
    """A_ge rows encoding ||theta @ Z||_inf <= eta over (theta, extra) vars."""
    z = basis.z
    m = z.shape[1]
    return np.vstack([z.T, -z.T]), -basis.eta * np.ones(2 * m)


def solve_lp_i(block: int, sign: int, basis: FeasibleSetBasis, ffb,
               a_pol, b_pol):
    """One relaxation LP: pin coefficient `block` with `sign`.

    Returns ``(gamma_i, nbar, lam, solution)``; infeasibility degrades to a
    zero certificate with the zero filter, matching the convention that the
    relaxation only ever under-promises.
    """
    ffb = np.asarray(ffb, dtype=float)
    a_pol = np.atleast_2d(np.asarray(a_pol, dtype=float))
    b_pol = np.atleast_1d(np.asarray(b_pol, dtype=float))
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not 0 <= block <= basis.d_n:
        raise ValueError(f"block {block} outside 0..{basis.d_n}")
    n_z = basis.n_free
    n_b = b_pol.size
    d = a_pol.shape[1]
    gain_j = basis.block(block) @ ffb          # (n_z, d)
    if gain_j.shape[1] != d:
        raise DimensionError("polytope A and attack gain disagree on dimension")

    a_eq = np.hstack([sign * gain_j.T, -a_pol.T])
    b_eq = np.zeros(d)
    ball_a, ball_b = _norm_ball_rows(basis)
    a_ge = np.hstack([ball_a, np.zeros((ball_a.shape[0], n_b))])
    cost = np.concatenate([np.zeros(n_z), b_pol])
    lower = np.concatenate([np.full(n_z, -np.inf), np.zeros(n_b)])
    problem = lp.LpProblem("max", cost, a_eq=a_eq, b_eq=b_eq,
                           a_ge=a_ge, b_ge=ball_b, lower=lower)
    sol = lp.solve_lp(problem)
    if not sol.is_optimal:
        zeros = np.zeros(basis.z.shape[1])
        return 0.0, zeros, np.zeros(n_b), sol
    theta = sol.x[:n_z]
    lam = sol.x[n_z:]
    return float(sol.value), theta @ basis.z, lam, sol


def design_robust(basis: FeasibleSetBasis, ffb, a_pol, b_pol,
                  pole: float = 0.8) -> FilterDesign:
    """Run all 2(d_n+1) relaxation LPs and keep the best certificate.

    Ties break toward the smallest block index, then the +1 sign, so the
    returned design is deterministic. A positive gamma certifies detection
    of every attack in the polytope; gamma = 0 means no single-block
    certificate exists and the result carries a diagnostic instead.
    """
    best = None
    rows = []
    for j in range(basis.d_n + 1):
        for s in (1, -1):
            start = time.perf_counter()
            gamma_i, nbar_i, lam_i, sol = solve_lp_i(j, s, basis, ffb,
                                                     a_pol, b_pol)
            elapsed = time.perf_counter() - start
            rows.append(LpIndexReport(j, s, sol.status, gamma_i, elapsed))
            # ties (within solver noise) keep the earlier index
            if sol.is_optimal and (
                    best is None
                    or gamma_i > best[0] + 1e-9 * max(1.0, abs(best[0]))):
                best = (gamma_i, j, s, nbar_i, lam_i)
    if best is None or best[0] <= 0.0:
        nbar = np.zeros(basis.z.shape[1])
        note = ("no relaxation index yields a positive certificate; "
                "every admissible attack direction can null this filter family")
        gamma = 0.0 if best is None else max(best[0], 0.0)
        index = None if best is None else (best[1], best[2])
        mult = None if best is None else best[4]
        return FilterDesign(nbar, basis.d_n, pole, gamma, "robust",
                            index, mult, tuple(rows), note)
    gamma, j, s, nbar, lam = best
    return FilterDesign(nbar, basis.d_n, pole, gamma, "robust",
                        (j, s), lam, tuple(rows))


def evaluate_payoff(nbar, ffb, alpha, d_n: int) -> float:
    """Detection payoff J = max_j |N_j F F_b' alpha|."""
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    ffb = np.asarray(ffb, dtype=float)
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    n_r = nbar.size // (d_n + 1)
    blocks = nbar.reshape(d_n + 1, n_r)
    return float(np.abs(blocks @ (ffb @ alpha)).max())


def worst_case_alpha(nbar, ffb, d_n: int, a_pol, b_pol):
    """Attacker's best reply: minimize the payoff over the polytope.

    Epigraph LP over (alpha, t): min t subject to
    -t <= N_j F F_b' alpha <= t for every block and A alpha >= b.
    Raises ``EmptyAttackSetError`` when the polytope is empty.
    """
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    ffb = np.asarray(ffb, dtype=float)
    a_pol = np.atleast_2d(np.asarray(a_pol, dtype=float))
    b_pol = np.atleast_1d(np.asarray(b_pol, dtype=float))
    n_r = nbar.size // (d_n + 1)
    d = a_pol.shape[1]
    gains = nbar.reshape(d_n + 1, n_r) @ ffb   # (d_n+1, d)

    rows = []
    rhs = []
    for g in gains:
        rows.append(np.concatenate([-g, [1.0]]))   # t - g a >= 0
        rhs.append(0.0)
        rows.append(np.concatenate([g, [1.0]]))    # t + g a >= 0
        rhs.append(0.0)
    a_ge = np.vstack([np.array(rows),
                      np.hstack([a_pol, np.zeros((b_pol.size, 1))])])
    b_ge = np.concatenate([rhs, b_pol])
    cost = np.zeros(d + 1)
    cost[-1] = 1.0
    lower = np.concatenate([np.full(d, -np.inf), [0.0]])
    problem = lp.LpProblem("min", cost, a_ge=a_ge, b_ge=b_ge, lower=lower)
    sol = lp.solve_lp(problem)
    if sol.status == lp.INFEASIBLE:
        raise EmptyAttackSetError("empty attack set: {A a >= b} has no points")
    if not sol.is_optimal:
        raise ValidationError(f"inner minimization ended with {sol.status}")
    alpha = sol.x[:d]
    return alpha, float(sol.value)


def design_steady_state(basis: FeasibleSetBasis, fbar, a_pol, b_pol,
                        pole: float = 0.8) -> FilterDesign:
    """Maximize the certified steady-state residual magnitude.

    Single LP over (theta, z >= 0): max b'z with Nbar @ Fbar = z'A and the
    usual feasible-set constraints. The symmetry of the feasible set makes
    the one-sided equality lossless. mu = 0 means no decoupled filter can
    hold a nonzero steady-state alert over the whole polytope.
    """
    fbar = np.asarray(fbar, dtype=float)
    a_pol = np.atleast_2d(np.asarray(a_pol, dtype=float))
    b_pol = np.atleast_1d(np.asarray(b_pol, dtype=float))
    n_z = basis.n_free
    n_b = b_pol.size
    gain = basis.z @ fbar                      # (n_z, d)
    start = time.perf_counter()
    a_eq = np.hstack([gain.T, -a_pol.T])
    b_eq = np.zeros(a_pol.shape[1])
    ball_a, ball_b = _norm_ball_rows(basis)
    a_ge = np.hstack([ball_a, np.zeros((ball_a.shape[0], n_b))])
    cost = np.concatenate([np.zeros(n_z), b_pol])
    lower = np.concatenate([np.full(n_z, -np.inf), np.zeros(n_b)])
    problem = lp.LpProblem("max", cost, a_eq=a_eq, b_eq=b_eq,
                           a_ge=a_ge, b_ge=ball_b, lower=lower)
    sol = lp.solve_lp(problem)
    elapsed = time.perf_counter() - start
    row = LpIndexReport(-1, 0, sol.status, sol.value or 0.0, elapsed)
    if not sol.is_optimal:
        return FilterDesign(np.zeros(basis.z.shape[1]), basis.d_n, pole, 0.0,
                            "steady-state", None, None, (row,),
                            f"steady-state LP ended with {sol.status}")
    theta = sol.x[:n_z]
    z = sol.x[n_z:]
    mu = max(0.0, float(sol.value))
    note = "" if mu > 0 else (
        "mu = 0: every decoupled filter has zero worst-case steady-state "
        "gain over this attack polytope (transient-only detection)")
    return FilterDesign(theta @ basis.z, basis.d_n, pole, mu, "steady-state",
                        None, z, (row,), note)


def check_reformulation_feasible(nbar, beta, lam, ffb, a_pol,
                           tol: float = DECOUPLE_TOL) -> bool:
    """Check the finite-reformulation constraints for a candidate point.

    Verifies sum_i (beta_{2i} - beta_{2i+1}) N_i F F_b' = lam' A, the simplex
    conditions on beta, and lam >= 0, all within ``tol``.
    """
    nbar = np.atleast_1d(np.asarray(nbar, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    ffb = np.asarray(ffb, dtype=float)
    a_pol = np.atleast_2d(np.asarray(a_pol, dtype=float))
    if beta.size % 2 != 0:
        return False
    d_n = beta.size // 2 - 1
    if nbar.size % (d_n + 1) != 0:
        return False
    blocks = nbar.reshape(d_n + 1, nbar.size // (d_n + 1))
    weights = beta[0::2] - beta[1::2]
    lhs = weights @ (blocks @ ffb)
    rhs = lam @ a_pol
    if np.abs(lhs - rhs).max(initial=0.0) > tol:
        return False
    if abs(beta.sum() - 1.0) > tol:
        return False
    if beta.min(initial=0.0) < -tol or lam.min(initial=0.0) < -tol:
        return False
    return True


def beta_for_index(block: int, sign: int, d_n: int) -> np.ndarray:
    """Unit simplex vertex selecting (block, sign) in the reformulation."""
    beta = np.zeros(2 * (d_n + 1))
    beta[2 * block + (0 if sign > 0 else 1)] = 1.0
    return beta


# --------------------------------------------------------------------------
# brute-force oracle
# --------------------------------------------------------------------------

_UNBOUNDED_PROBES = 512


def polytope_vertices(a_pol, b_pol, tol: float = 1e-9) -> np.ndarray:
    """Vertices of {a : A a >= b} by basic-solution enumeration.

    Raises if the set looks unbounded (a recession direction survives a
    deterministic + randomized probe) or has no vertices.
    """
    a_pol = np.atleast_2d(np.asarray(a_pol, dtype=float))
    b_pol = np.atleast_1d(np.asarray(b_pol, dtype=float))
    m, d = a_pol.shape
    if m < d:
        raise ValidationError("fewer constraints than dimensions: unbounded")

    probes = [np.eye(d)[i] for i in range(d)]
    probes += [-p for p in probes]
    for i, j in combinations(range(d), 2):
        for si in (1, -1):
            for sj in (1, -1):
                v = np.zeros(d)
                v[i], v[j] = si, sj
                probes.append(v / np.sqrt(2))
    rng = np.random.default_rng(20240311)
    extra = rng.standard_normal((_UNBOUNDED_PROBES, d))
    probes += list(extra / np.linalg.norm(extra, axis=1, keepdims=True))
    scale = max(1.0, np.abs(a_pol).max())
    for r in probes:
        if np.all(a_pol @ r >= -1e-10 * scale):
            raise ValidationError(
                "attack polytope appears unbounded (recession direction found)")

    verts = []
    bscale = max(1.0, np.abs(b_pol).max())
    for rows in combinations(range(m), d):
        sub = a_pol[list(rows)]
        if np.linalg.matrix_rank(sub, tol=1e-12) < d:
            continue
        cand = np.linalg.solve(sub, b_pol[list(rows)])
        if np.all(a_pol @ cand >= b_pol - tol * bscale):
            verts.append(cand)
    if not verts:
        raise ValidationError("attack polytope has no vertices (empty?)")
    verts = np.array(verts)
    # dedupe
    keep = []
    for v in verts:
        if not any(np.allclose(v, w, atol=1e-9) for w in keep):
            keep.append(v)
    return np.array(keep)


def brute_force_gamma(basis: FeasibleSetBasis, ffb, a_pol, b_pol,
                      points_per_axis: int = 21, edge_samples: int = 5,
                      seed: int = 7):
    """Grid/sampling estimate of the exact maximin value on tiny instances.

    The coefficient ball is gridded through its bounding box (grid points
    outside the ball are radially rescaled onto it), and the attacker side
    is sampled at polytope vertices, edge points, and interior mixtures.
    Returns ``(gamma_bf, tolerance)``. The certified direction is one-sided:
    ``gamma_exact <= gamma_bf + tolerance``, where ``tolerance`` propagates
    the grid resolution through the payoff's Lipschitz constant (the
    alpha-side sampling can only over-estimate the inner minimum, which
    never violates that bound).
    """
    ffb = np.asarray(ffb, dtype=float)
    n_z = basis.n_free
    if n_z > 3:
        raise ValidationError(
            f"brute force supports at most 3 free parameters, got {n_z}")
    if n_z == 0:
        return 0.0, 0.0
    d_n = basis.d_n
    n_r = basis.n_rows
    eta = basis.eta

    verts = polytope_vertices(a_pol, b_pol)
    rng = np.random.default_rng(seed)
    samples = [verts]
    if len(verts) > 1:
        fracs = np.linspace(0.0, 1.0, edge_samples + 2)[1:-1]
        edges = [(1 - t) * verts[i] + t * verts[j]
                 for i, j in combinations(range(len(verts)), 2) for t in fracs]
        samples.append(np.array(edges))
        mix = rng.dirichlet(np.ones(len(verts)), size=32) @ verts
        samples.append(mix)
    alphas = np.vstack(samples)

    # per-alpha gradient matrices: G[a] has rows theta-gradients per block
    gains = np.stack([basis.block(j) @ ffb for j in range(d_n + 1)])  # (d_n+1, n_z, d)
    grad = np.einsum("jzd,ad->ajz", gains, alphas)   # (n_alpha, d_n+1, n_z)

    # grid the bounding box of {theta : ||theta Z||_inf <= eta}
    big = (d_n + 1) * n_r
    radius = np.sqrt(big) * eta
    npts = max(points_per_axis, int(np.ceil(20.0 * radius / eta)) + 1)
    axis = np.linspace(-radius, radius, npts)
    mesh = np.meshgrid(*([axis] * n_z), indexing="ij")
    thetas = np.stack([m.ravel() for m in mesh], axis=1)   # (G, n_z)

    # (n_alpha * (d_n+1), n_z) stacked gradients for one matmul per chunk
    flat_grad = grad.reshape(-1, n_z)
    n_alpha = alphas.shape[0]
    gamma_bf = 0.0
    for lo in range(0, thetas.shape[0], 8192):
        chunk = thetas[lo:lo + 8192]
        # rescale infeasible grid points onto the ball (payoff is linear in
        # theta, so scaling the point scales the payoff)
        norms = np.abs(chunk @ basis.z).max(axis=1)
        scales = np.minimum(1.0, eta / np.maximum(norms, 1e-300))
        payoff = np.abs(chunk @ flat_grad.T).reshape(len(chunk), n_alpha,
                                                     d_n + 1).max(axis=2)
        inner_min = (payoff * scales[:, None]).min(axis=1)
        gamma_bf = max(gamma_bf, float(inner_min.max()))

    # propagated grid tolerance (vertices dominate both convex maxima)
    vert_grad = grad[:len(verts)]
    lipschitz = np.abs(vert_grad).sum(axis=2).max()
    j_ub = eta * np.abs(ffb @ verts.T).sum(axis=0).max()
    z_colsum = np.abs(basis.z).sum(axis=0).max()
    h = axis[1] - axis[0] if npts > 1 else 0.0
    tolerance = 0.5 * h * (lipschitz + z_colsum * j_ub / eta)
    return gamma_bf, float(tolerance)
