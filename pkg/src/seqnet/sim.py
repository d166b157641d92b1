"""Numerical integration of the mass-action dynamics.

Used to corroborate stability verdicts: trajectories started near a stable
steady state should return to it.  The explicit integrator is an embedded
Dormand-Prince 5(4) pair.  States on the boundary branch are stiff (x_n
grows like 1/eps while the slowest decay rate shrinks like eps), so the
``"stiff"`` method hands the problem to scipy's BDF code instead.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .eigen import eigenvalues
from .massaction import ModelParams, jacobian, ode_rhs, sequestration_jacobian, sequestration_rhs
from .network import ReactionNetwork

RTOL = 1e-8
ATOL = 1e-10
T_MAX = 1e4
TARGET_TOL = 1e-8
STIFFNESS_RATIO = 1e3

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    np.zeros(0),
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_A = [np.asarray(row, dtype=float) for row in _A]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


@dataclass
class Trajectory:
    times: list[float]
    states: list[np.ndarray]
    terminal: str  # "converged", "max-time" or "left-domain"
    target: int | None = None  # index into the registered targets when converged
    message: str = ""
    method: str = "dopri5"

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path_or_buf=None) -> str | None:
        """Header ``t,x1,...,xn`` and one row per accepted step."""
        n = len(self.states[0])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t"] + [f"x{i}" for i in range(1, n + 1)])
        for t, x in zip(self.times, self.states):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in x])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w") as fh:
                fh.write(text)
        return None

    def summary(self) -> dict:
        return {
            "terminal": self.terminal,
            "target": self.target,
            "t_final": self.times[-1],
            "x_final": [float(v) for v in self.final],
            "steps": len(self.times) - 1,
            "method": self.method,
            "message": self.message,
        }


def _system(model, r):
    """(f, J) float callables for a ReactionNetwork or ModelParams."""
    if isinstance(model, ModelParams):
        return _fast_sequestration(model, r)
    if isinstance(model, ReactionNetwork):
        if model.tag is not None and model.extended:
            return _system(ModelParams(*model.tag), r)
        rf = [float(v) for v in r]
        return (
            lambda x: np.asarray(ode_rhs(model, rf, x), dtype=float),
            lambda x: np.asarray(jacobian(model, rf, x), dtype=float),
        )
    raise TypeError("model must be a ReactionNetwork or ModelParams")


def _fast_sequestration(params: ModelParams, r):
    """Vectorised float versions of the closed-form right-hand side and Jacobian."""
    m, n = params.m, params.n
    R = np.array([float(v) for v in r])
    if R.size != 3 * n:
        raise ValueError(f"expected 3n = {3 * n} rates, got {R.size}")
    pair = R[: n - 1]  # X_i + X_{i+1} -> 0
    prod = R[n - 1]  # X_1 -> m X_n
    out = R[n : 2 * n]
    inflow = R[2 * n :]
    idx = np.arange(n)

    def f(x):
        v = pair * x[:-1] * x[1:]
        dx = inflow - out * x
        dx[:-1] -= v
        dx[1:] -= v
        dx[0] -= prod * x[0]
        dx[-1] += m * prod * x[0]
        return dx

    def jac(x):
        J = np.zeros((n, n))
        J[idx, idx] = -out
        J[idx[:-1], idx[:-1]] -= pair * x[1:]
        J[idx[1:], idx[1:]] -= pair * x[:-1]
        J[idx[:-1], idx[1:]] = -pair * x[:-1]
        J[idx[1:], idx[:-1]] = -pair * x[1:]
        J[0, 0] -= prod
        J[n - 1, 0] += m * prod
        return J

    return f, jac


def _distance(x, target) -> float:
    """Max relative deviation max_i |x_i - t_i| / (1 + |t_i|)."""
    return float(np.max(np.abs(x - target) / (1.0 + np.abs(target))))


def _hit(x, targets, tol):
    for k, tgt in enumerate(targets):
        if _distance(x, tgt) < tol:
            return k
    return None


def is_stiff(J) -> bool:
    lam = eigenvalues(np.asarray(J, dtype=float))
    re = np.abs(lam.real)
    re = re[re > 0]
    if re.size == 0:
        return False
    return bool(re.max() / re.min() > STIFFNESS_RATIO)


def dopri5(
    f: Callable,
    x0,
    t_max: float,
    rtol: float = RTOL,
    atol: float = ATOL,
    targets: Sequence = (),
    target_tol: float = TARGET_TOL,
    max_steps: int = 1_000_000,
    record: bool = True,
) -> Trajectory:
    """Adaptive Dormand-Prince 5(4) with positivity enforced by step halving."""
    x = np.array(x0, dtype=float)
    targets = [np.asarray(t, dtype=float) for t in targets]
    t = 0.0
    times, states = [0.0], [x.copy()]
    k = _hit(x, targets, target_tol)
    if k is not None:
        return Trajectory(times, states, "converged", k)
    if t_max <= 0:
        return Trajectory(times, states, "max-time")
    fx = f(x)
    scale = atol + rtol * np.abs(x)
    d0, d1 = np.linalg.norm(x / scale), np.linalg.norm(fx / scale)
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, t_max)
    K = np.empty((7, x.size))
    for _ in range(max_steps):
        if h < 1e-14 * max(1.0, t):
            return Trajectory(
                times, states, "left-domain", message=f"step size underflow at t = {t:.6g}"
            )
        h = min(h, t_max - t)
        K[0] = fx
        finite = True
        for i in range(1, 7):
            K[i] = f(x + h * (_A[i] @ K[:i]))
            if not np.all(np.isfinite(K[i])):
                finite = False
                break
        x_new = x + h * (_B5 @ K) if finite else None
        if x_new is None or not np.all(np.isfinite(x_new)) or not np.all(x_new > 0):
            h *= 0.5
            continue
        err_vec = h * (_E @ K) / (atol + rtol * np.maximum(np.abs(x), np.abs(x_new)))
        err = math.sqrt(float(np.mean(err_vec**2)))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue
        t += h
        x = x_new
        fx = K[6]  # first-same-as-last
        if record:
            times.append(t)
            states.append(x.copy())
        k = _hit(x, targets, target_tol)
        if k is not None or t >= t_max:
            if not record:
                times.append(t)
                states.append(x.copy())
            return Trajectory(times, states, "converged" if k is not None else "max-time", k)
        h *= min(5.0, 0.9 * err ** -0.2) if err > 0 else 5.0
    return Trajectory(times, states, "max-time", message="step budget exhausted")


def stiff_integrate(
    f: Callable,
    jac: Callable,
    x0,
    t_max: float,
    rtol: float = RTOL,
    atol: float = ATOL,
    targets: Sequence = (),
    target_tol: float = TARGET_TOL,
) -> Trajectory:
    """BDF integration with the analytic Jacobian; stops on reaching a target
    or a coordinate reaching zero."""
    x0 = np.array(x0, dtype=float)
    targets = [np.asarray(t, dtype=float) for t in targets]
    k = _hit(x0, targets, target_tol)
    if k is not None:
        return Trajectory([0.0], [x0], "converged", k, method="stiff")
    if t_max <= 0:
        return Trajectory([0.0], [x0], "max-time", method="stiff")
    events = []
    for tgt in targets:
        def ev(t, x, tgt=tgt):
            return _distance(x, tgt) - target_tol

        ev.terminal = True
        ev.direction = -1
        events.append(ev)

    def wall(t, x):
        return float(np.min(x))

    wall.terminal = True
    wall.direction = -1
    events.append(wall)
    sol = solve_ivp(
        lambda t, x: f(x),
        (0.0, t_max),
        x0,
        method="BDF",
        jac=lambda t, x: jac(x),
        rtol=rtol,
        atol=atol,
        events=events,
    )
    times = [float(v) for v in sol.t]
    states = [sol.y[:, i].copy() for i in range(sol.y.shape[1])]
    for j, hits in enumerate(sol.t_events):
        if len(hits):
            if j == len(targets):
                return Trajectory(times, states, "left-domain", message="a coordinate reached 0", method="stiff")
            return Trajectory(times, states, "converged", j, method="stiff")
    if sol.status < 0:
        return Trajectory(times, states, "left-domain", message=sol.message, method="stiff")
    return Trajectory(times, states, "max-time", method="stiff")


def integrate(
    model,
    r,
    x0,
    t_max: float = T_MAX,
    rtol: float = RTOL,
    atol: float = ATOL,
    targets: Sequence = (),
    target_tol: float = TARGET_TOL,
    method: str = "auto",
    record: bool = True,
) -> Trajectory:
    """Integrate x' = f(x) from x0.

    ``model`` is a ReactionNetwork or ModelParams (the fully open sequestration
    network).  Integration stops when the state is within ``target_tol``
    (max relative deviation) of a registered target.  ``method`` is
    ``"dopri5"``, ``"stiff"`` or ``"auto"``, which picks the stiff solver when
    the eigenvalue real parts of J(x0) spread over more than three decades.
    """
    x0 = np.array(x0, dtype=float)
    if not np.all(x0 > 0):
        raise ValueError("initial state must be positive")
    f, jac = _system(model, r)
    if method == "auto":
        method = "stiff" if is_stiff(jac(x0)) else "dopri5"
    if method == "dopri5":
        return dopri5(f, x0, t_max, rtol, atol, targets, target_tol, record=record)
    if method == "stiff":
        return stiff_integrate(f, jac, x0, t_max, rtol, atol, targets, target_tol)
    raise ValueError(f"unknown method {method!r}")


def relaxation_time(model, r, x) -> float:
    """1 / (smallest |Re lambda|) of the Jacobian at x (inf if some Re >= 0)."""
    _, jac = _system(model, r)
    lam = eigenvalues(jac(np.asarray(x, dtype=float)))
    if np.max(lam.real) >= 0:
        return math.inf
    return 1.0 / float(np.min(np.abs(lam.real)))


@dataclass
class BasinCount:
    target: int
    samples: int
    returned: int = 0
    other: dict[int, int] = field(default_factory=dict)
    unresolved: int = 0
    left_domain: int = 0

    @property
    def fraction(self) -> float:
        return self.returned / self.samples if self.samples else float("nan")

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "samples": self.samples,
            "returned": self.returned,
            "other": {str(k): v for k, v in self.other.items()},
            "unresolved": self.unresolved,
            "left_domain": self.left_domain,
        }


def basin_probe(
    model,
    r,
    targets: Sequence,
    radius: float = 1e-4,
    samples: int = 50,
    seed: int | None = 0,
    t_max: float | None = None,
    relative: bool = True,
    method: str = "stiff",
    rtol: float = RTOL,
    atol: float = ATOL,
    which: Sequence[int] | None = None,
) -> list[BasinCount]:
    """Integrate from ``samples`` random points around each target.

    Points are uniform in the max-norm ball of the given radius, measured
    relative to each coordinate (x_i (1 + radius u_i)) when ``relative`` so
    that tiny coordinates stay positive.  All targets are registered for
    termination, so a trajectory that settles at a different target is
    counted under ``other``.  ``t_max=None`` uses max(1e4, 40 relaxation
    times of the target).  ``which`` restricts probing to some targets
    (all remain registered); counts come back in the order probed.  The
    stiff solver is the default because it is far cheaper over the long
    horizons slow modes need; pass ``method="dopri5"`` for the explicit pair.
    """
    rng = np.random.default_rng(seed)
    tg = [np.asarray(t, dtype=float) for t in targets]
    out = []
    for k in range(len(tg)) if which is None else which:
        x_star = tg[k]
        count = BasinCount(k, samples)
        if samples <= 0:
            out.append(count)
            continue
        horizon = t_max
        if horizon is None:
            tau = relaxation_time(model, r, x_star)
            horizon = T_MAX if not math.isfinite(tau) else max(T_MAX, 40.0 * tau)
        for _ in range(samples):
            u = rng.uniform(-1.0, 1.0, size=x_star.size)
            x0 = x_star * (1.0 + radius * u) if relative else x_star + radius * u
            if not np.all(x0 > 0):
                count.left_domain += 1
                continue
            tr = integrate(model, r, x0, horizon, rtol, atol, tg, method=method, record=False)
            if tr.terminal == "converged":
                if tr.target == k:
                    count.returned += 1
                else:
                    count.other[tr.target] = count.other.get(tr.target, 0) + 1
            elif tr.terminal == "left-domain":
                count.left_domain += 1
            else:
                count.unresolved += 1
        out.append(count)
    return out
