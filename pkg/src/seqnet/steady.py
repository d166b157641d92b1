"""The three positive steady states of the fully open sequestration network.

At zero outflow on the epsilon slots the states are known in closed form:
(1, ..., 1), the delta state, and a state at infinity that becomes the
finite point xi after the change of variables ``phi``.  Each branch is then
followed to a positive epsilon by Newton continuation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from ._numeric import as_array, is_exact
from .massaction import (
    ModelParams,
    conservation_substitute,
    eps_slots,
    jacobian_p,
    phi_map,
    sequestration_jacobian,
    sequestration_rhs,
    stamp_eps,
    system_p,
)
from .region import RegionCheck, RegionError, _core, _shared_records, check_mss

log = logging.getLogger(__name__)

BRANCHES = ("all-ones", "delta", "boundary")

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
MAX_HALVINGS = 40
DEGENERACY_TOL = 1e-9
STEP_MAX_ITER = 12  # Newton cap inside a continuation step; a good predictor needs far fewer


# --------------------------------------------------------------- linear algebra


def tridiagonal_matrix(a: Sequence, b: Sequence) -> np.ndarray:
    """Assemble the matrix with diagonal (a_1+b_1, ..., a_{n-1}+b_{n-1}, a_n),
    superdiagonal (a_2, ..., a_n) and subdiagonal (b_1, ..., b_{n-1})."""
    a, b = list(a), list(b)
    n = len(a)
    if len(b) != n - 1:
        raise ValueError("need len(b) == len(a) - 1")
    exact = is_exact(a, b)
    T = as_array(np.zeros((n, n)), exact)
    for i in range(n):
        T[i, i] = a[i] + (b[i] if i < n - 1 else 0)
        if i < n - 1:
            T[i, i + 1] = a[i + 1]
            T[i + 1, i] = b[i]
    return T


def tridiagonal_det(a: Sequence, b: Sequence):
    """Determinant of :func:`tridiagonal_matrix`: the product of the a_i."""
    out = 1
    for v in a:
        out = out * v
    return out


def tridiagonal_eliminate(a: Sequence, b: Sequence) -> np.ndarray:
    """Row-reduce :func:`tridiagonal_matrix` from the last row upwards,
    subtracting row i+1 from row i.  The result is lower bidiagonal with
    diagonal a, so its determinant is visible without the closed form."""
    T = tridiagonal_matrix(a, b)
    for i in range(T.shape[0] - 2, -1, -1):
        T[i, :] = T[i, :] - T[i + 1, :]
    return T


def det_J_closed_form(params: ModelParams, r, x):
    """det J for the inflow-substituted system when every epsilon slot except
    r_{n+2} is zero."""
    m, n = params.m, params.n
    R = [None, *list(r)]
    for j in eps_slots(n):
        if R[j] != 0:
            raise ValueError(f"closed-form determinant needs r{j} = 0, got {R[j]}")
    X = [None, *x]
    prod = 1
    for i in range(2, n):
        prod = prod * R[i] * X[i]
    return prod * ((m - 1) * R[1] * R[n] * X[1] - (R[n] + R[1] * X[2]) * R[n + 2])


def equilibrate(J) -> np.ndarray:
    """Row and column scaling of J towards unit max-norms (Ruiz iteration).

    Scaling rows and columns leaves det J = 0 or not unchanged, and removes
    the spread of scales between coordinates (x_n grows like 1/eps on the
    boundary branch).
    """
    J = np.array(J, dtype=float)
    sc = _row_col_scales(J)
    return J if sc is None else sc[2]


def is_nondegenerate(J) -> bool:
    """sigma_min > tol * sigma_max for the equilibrated J.

    Unlike a bare determinant threshold, whose scale grows like ||J||^n, this
    is invariant under rescaling the coordinates.
    """
    J = np.asarray(J, dtype=float)
    if J.size == 0 or not np.all(np.isfinite(J)):
        return False
    s = np.linalg.svd(equilibrate(J), compute_uv=False)
    return bool(s[-1] > DEGENERACY_TOL * (1.0 + s[0]))


# ------------------------------------------------------------ closed-form branches


@dataclass(frozen=True)
class BranchPoint:
    values: tuple
    kind: str  # "delta" or "xi"

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def delta_branch(params: ModelParams, core: Sequence):
    """The two finite steady states at zero epsilon: (1, ..., 1) and delta.

    Raises :class:`RegionError` naming the first violated inequality when delta
    is not a positive point distinct from (1, ..., 1).
    """
    params.require_bistable_family()
    check = check_mss(params, core)
    bad = [rec for rec in check.records if rec.id in ("separation", "production", "delta") and not rec.satisfied]
    if bad:
        raise RegionError(RegionCheck(check.theorem, tuple(bad)))
    m, n = params.m, params.n
    exact = is_exact(core)
    R = [None, *list(core[:n]), None, core[n]]
    delta = [None] * (n + 1)
    delta[1] = (R[1] + R[n]) * R[n + 2] / ((m - 1) * R[1] * R[n])
    delta[2] = ((m - 1) * R[1] - R[n + 2]) * R[n] / (R[1] * R[n + 2])
    for i in range(3, n + 1):
        sgn = 1 if i % 2 == 0 else -1
        num = (m - 1) * R[1] * (R[i - 1] + sgn * m * R[n]) - sgn * m * (R[1] + R[n]) * R[n + 2]
        delta[i] = num / ((m - 1) * R[1] * R[i - 1] * delta[i - 1])
    one = Fraction(1) if exact else 1.0
    ones = BranchPoint(tuple([one] * n), "delta")
    return ones, BranchPoint(tuple(delta[1:]), "delta")


def _stable_quadratic_roots(a, b, c):
    """Roots of a y^2 + b y + c with the cancellation-free formula."""
    disc = b * b - 4 * a * c
    sq = math.sqrt(float(disc))
    q = -0.5 * (float(b) + math.copysign(sq, float(b)))
    return q / float(a), float(c) / q


def boundary_branch(params: ModelParams, core: Sequence) -> BranchPoint:
    """The point xi solving g = 0 (the boundary state in phi coordinates)."""
    params.require_bistable_family()
    m, n = params.m, params.n
    R = _core(params, core)
    # xi_1 is a quadratic root (irrational in general), so only n = 3 stays exact
    if n > 3 or not is_exact(core):
        R = [None if v is None else float(v) for v in R]
    if n == 3:
        xi = [(R[1] + R[3]) / R[3], (R[1] + R[2] + R[5]) / R[2], (m - 1) * R[1] - R[5]]
        if not xi[2] > 0:
            raise RegionError(
                RegionCheck("multistationarity", tuple(r for r in _shared_records(params, _core(params, core)) if r.id == "production"))
            )
        return BranchPoint(tuple(xi), "xi")
    # positive root of r1 rn y^2 + (r1 r_{n+2} + rn r_{n+2} - r1 r_{n-2} - r1 rn) y - (r1 + rn) r_{n+2}
    a = R[1] * R[n]
    b = R[1] * R[n + 2] + R[n] * R[n + 2] - R[1] * R[n - 2] - R[1] * R[n]
    c = -(R[1] + R[n]) * R[n + 2]
    roots = _stable_quadratic_roots(a, b, c)
    pos = [t for t in roots if t > 0]
    # the product of the roots is c / a < 0: exactly one positive root
    assert len(pos) == 1, roots
    y1 = pos[0]
    xi = [None] * (n + 1)
    xi[1] = y1
    xi[2] = (R[1] + R[n + 2] - R[n - 2]) / (R[1] * y1 + R[n + 2])
    for i in range(3, n - 1):
        sgn = 1 if i % 2 == 0 else -1
        xi[i] = (R[i - 1] - sgn * R[n - 2]) / (R[i - 1] * xi[i - 1])
    xi[n - 1] = (R[n - 2] + R[n - 1]) / R[n - 1]
    xi[n] = m * R[n] * (y1 - 1) - R[n - 2]
    if not all(v > 0 for v in xi[1:]):
        relevant = [
            rec
            for rec in _shared_records(params, _core(params, core))
            if rec.id in ("xi2", "xi") or (rec.id == "delta" and rec.index == n - 1)
        ]
        failing = tuple(rec for rec in relevant if not rec.satisfied)
        raise RegionError(RegionCheck("multistationarity", failing or tuple(relevant)))
    return BranchPoint(tuple(xi[1:]), "xi")


def h1_quadratic(params: ModelParams, core: Sequence):
    """Coefficients (a, b, c) of the quadratic whose positive root is xi_1 (n > 3)."""
    n = params.n
    R = _core(params, core)
    return (
        R[1] * R[n],
        R[1] * R[n + 2] + R[n] * R[n + 2] - R[1] * R[n - 2] - R[1] * R[n],
        -(R[1] + R[n]) * R[n + 2],
    )


# ------------------------------------------------------------------------ Newton


class NewtonError(RuntimeError):
    pass


class SingularJacobianError(NewtonError):
    pass


class ConvergenceError(NewtonError):
    pass


class PositivityError(NewtonError):
    pass


def _row_col_scales(J: np.ndarray, sweeps: int = 30):
    rs = np.ones(J.shape[0])
    cs = np.ones(J.shape[1])
    B = J.copy()
    for _ in range(sweeps):
        rows = np.sqrt(np.max(np.abs(B), axis=1))
        cols = np.sqrt(np.max(np.abs(B), axis=0))
        if np.any(rows == 0) or np.any(cols == 0):
            return None
        B = B / rows[:, None] / cols[None, :]
        rs /= rows
        cs /= cols
        if np.all(np.abs(rows - 1) < 0.1) and np.all(np.abs(cols - 1) < 0.1):
            break
    return rs, cs, B


def _scaled_solve(J: np.ndarray, b: np.ndarray, max_cond: float = 1e14):
    """Solve J s = b through the equilibrated matrix; None when that matrix
    is numerically singular.  Scaling leaves the solution unchanged and only
    removes the spread of magnitudes between coordinates."""
    sc = _row_col_scales(J)
    if sc is None:
        return None
    rs, cs, B = sc
    if not np.all(np.isfinite(B)) or np.linalg.cond(B) > max_cond:
        return None
    return cs * np.linalg.solve(B, rs * b)


def newton_refine(
    F: Callable[[np.ndarray], np.ndarray],
    JF: Callable[[np.ndarray], np.ndarray],
    x0: Sequence[float],
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
    positive: bool = True,
    stall_limit: int | None = None,
) -> tuple[np.ndarray, int]:
    """Newton's method with step halving to stay in the positive orthant.

    Returns ``(x, iterations)`` with ``max|F(x)| < tol``.  With
    ``stall_limit`` set, gives up after that many iterations in a row
    without a new smallest residual.
    """
    x = np.array(x0, dtype=float)
    best = np.inf
    stalled = 0
    for it in range(max_iter + 1):
        fx = np.asarray(F(x), dtype=float)
        if not np.all(np.isfinite(fx)):
            raise ConvergenceError(f"non-finite residual at iteration {it}")
        res = np.max(np.abs(fx))
        if res < tol:
            return x, it
        if it == max_iter:
            break
        if stall_limit is not None:
            stalled = stalled + 1 if res >= best else 0
            best = min(best, res)
            if stalled >= stall_limit:
                raise ConvergenceError(f"residual stopped decreasing at iteration {it} (|F| = {res:.3e})")
        J = np.asarray(JF(x), dtype=float)
        if not np.all(np.isfinite(J)):
            raise SingularJacobianError(f"non-finite Jacobian at iteration {it}")
        step = _scaled_solve(J, -fx)
        if step is None:
            raise SingularJacobianError(f"singular Jacobian at iteration {it}")
        t = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = x + t * step
            if not positive or np.all(trial > 0):
                break
            t *= 0.5
        else:
            raise PositivityError("iterate left the positive orthant after 40 halvings")
        x = trial
    raise ConvergenceError(f"no convergence in {max_iter} iterations (|F| = {np.max(np.abs(fx)):.3e})")


# ----------------------------------------------------------------- steady states


@dataclass(frozen=True)
class SteadyState:
    x: tuple[float, ...]
    residual_norm: float
    det_J: float
    nondegenerate: bool
    branch: str
    eps: float
    y: tuple[float, ...] | None = None  # phi coordinates of a boundary state

    def as_array(self) -> np.ndarray:
        return np.array(self.x, dtype=float)

    def to_dict(self) -> dict:
        out = {
            "x": list(self.x),
            "residual": self.residual_norm,
            "detJ": self.det_J,
            "nondegenerate": self.nondegenerate,
            "branch": self.branch,
            "eps": self.eps,
        }
        if self.y is not None:
            out["y"] = list(self.y)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SteadyState":
        return cls(
            x=tuple(d["x"]),
            residual_norm=d["residual"],
            det_J=d["detJ"],
            nondegenerate=d["nondegenerate"],
            branch=d["branch"],
            eps=d["eps"],
            y=tuple(d["y"]) if d.get("y") is not None else None,
        )


def residual_tolerance(r) -> float:
    return 1e-10 * (1.0 + max(abs(float(v)) for v in r))


def make_state(params: ModelParams, r, x, branch: str, eps: float, y=None) -> SteadyState:
    x = np.asarray(x, dtype=float)
    rf = [float(v) for v in r]
    res = float(np.max(np.abs(sequestration_rhs(params, rf, x))))
    J = sequestration_jacobian(params, rf, x)
    return SteadyState(
        x=tuple(float(v) for v in x),
        residual_norm=res,
        det_J=float(np.linalg.det(J)),
        nondegenerate=is_nondegenerate(J),
        branch=branch,
        eps=float(eps),
        y=None if y is None else tuple(float(v) for v in y),
    )


class ContinuationError(RuntimeError):
    def __init__(self, message: str, last_eps: float, last_point):
        super().__init__(message)
        self.last_eps = last_eps
        self.last_point = last_point


@dataclass
class ContinuationTrace:
    steps: list[tuple[float, bool]] = field(default_factory=list)


def full_rates(params: ModelParams, core: Sequence, eps) -> list:
    """The 3n rate vector for the given core rates and epsilon."""
    return list(conservation_substitute(params, stamp_eps(params, core, eps)).values)


def _branch_system(params: ModelParams, core: Sequence, branch: str):
    """(F(z, eps), JF(z, eps), z0) for continuation of one branch."""
    core_f = [float(v) for v in core]
    if branch == "boundary":
        z0 = boundary_branch(params, core_f).as_float()

        def F(z, eps):
            return system_p(params, stamp_eps(params, core_f, eps), z)

        def JF(z, eps):
            return jacobian_p(params, stamp_eps(params, core_f, eps), z)

        return F, JF, z0

    if branch == "delta":
        z0 = delta_branch(params, core_f)[1].as_float()
    elif branch == "all-ones":
        z0 = np.ones(params.n)
    else:
        raise ValueError(f"unknown branch {branch!r}")

    def F(z, eps):
        r = stamp_eps(params, core_f, eps)
        return _rhs_front(params, r, z)

    def JF(z, eps):
        return sequestration_jacobian(params, stamp_eps(params, core_f, eps), z)

    return F, JF, z0


def _rhs_front(params: ModelParams, r_front, x):
    """Inflow-substituted right-hand side without the positivity check on the
    derived inflow rates (continuation may probe negative epsilon)."""
    m, n = params.m, params.n
    R = [None, *r_front]
    tail = [R[1] + R[n] + R[n + 1]] + [R[i - 1] + R[i] + R[n + i] for i in range(2, n)]
    tail.append(R[n - 1] - m * R[n] + R[2 * n])
    return sequestration_rhs(params, list(r_front) + tail, x)


def continue_in_eps(
    params: ModelParams,
    core: Sequence,
    branch: str,
    eps_target: float,
    steps: int = 20,
    trace: ContinuationTrace | None = None,
) -> SteadyState:
    """Follow one zero-epsilon branch to ``eps_target``.

    The schedule has ``steps`` geometric values from eps_target * 1e-3 to
    eps_target; a failed Newton solve inserts the midpoint of the current
    interval, down to 1e-6 of the scheduled step.  The boundary branch is
    followed in phi coordinates and mapped back once at the end.
    """
    params.require_bistable_family()
    eps_target = float(eps_target)
    if not eps_target > 0:
        raise ValueError("eps_target must be positive")
    r_target = full_rates(params, [float(v) for v in core], eps_target)

    if branch == "all-ones":
        state = make_state(params, r_target, np.ones(params.n), branch, eps_target)
        if trace is not None:
            trace.steps.append((eps_target, True))
        return state

    F, JF, z = _branch_system(params, core, branch)
    try:
        newton_refine(lambda v: F(v, 0.0), lambda v: JF(v, 0.0), z)
    except NewtonError as exc:
        raise ContinuationError(f"{branch} branch point is not a regular root: {exc}", 0.0, z) from exc

    schedule = np.geomspace(eps_target * 1e-3, eps_target, steps)
    eps_prev = 0.0
    for target in schedule:
        min_gap = 1e-6 * (target - eps_prev)
        h = target - eps_prev
        while eps_prev < target:
            eps_next = target if eps_prev + h >= target else eps_prev + h
            z_new = _continuation_step(F, JF, z, eps_prev, eps_next)
            if trace is not None:
                trace.steps.append((float(eps_next), z_new is not None))
            if z_new is None:
                h = 0.5 * (eps_next - eps_prev)
                if h < min_gap:
                    raise ContinuationError(
                        f"{branch} continuation stalled at eps = {eps_prev:.6g}", eps_prev, z
                    )
                continue
            z, eps_prev = z_new, eps_next
            h *= 2.0

    if branch == "boundary":
        y = z
        x = phi_map(y, eps_target)
        x = _polish(params, r_target, x)
        return make_state(params, r_target, x, branch, eps_target, y=y)
    x = _polish(params, r_target, z)
    return make_state(params, r_target, x, branch, eps_target)


def _continuation_step(F, JF, z, eps0, eps1):
    """Tangent predictor plus Newton corrector; None on failure."""
    h = 1e-7 * max(1.0, abs(eps0))
    try:
        dF = (np.asarray(F(z, eps0 + h)) - np.asarray(F(z, eps0 - h))) / (2 * h)
        tangent = _scaled_solve(np.asarray(JF(z, eps0), dtype=float), -dF)
        guess = z if tangent is None else z + (eps1 - eps0) * tangent
        if not np.all(guess > 0):
            guess = z
    except np.linalg.LinAlgError:
        guess = z
    for start in (guess, z):
        try:
            sol, _ = newton_refine(
                lambda v: F(v, eps1), lambda v: JF(v, eps1), start, max_iter=STEP_MAX_ITER,
                stall_limit=3,
            )
        except NewtonError:
            continue
        # a large jump means Newton landed on another branch
        if np.max(np.abs(sol - z) / (1.0 + np.abs(z))) < 1.0:
            return sol
    return None


def _polish(params: ModelParams, r, x):
    rf = [float(v) for v in r]
    try:
        x2, _ = newton_refine(
            lambda v: sequestration_rhs(params, rf, v),
            lambda v: sequestration_jacobian(params, rf, v),
            x,
            max_iter=8,
        )
        return x2
    except NewtonError:
        return np.asarray(x, dtype=float)


def three_states(params: ModelParams, core: Sequence, eps: float, steps: int = 20, trace=None):
    """(all-ones, delta, boundary) steady states at the given epsilon."""
    return tuple(continue_in_eps(params, core, b, eps, steps, trace) for b in BRANCHES)
