"""End-to-end bistability witnesses.

A witness run picks core rates, sets every epsilon slot to a common value,
derives the inflow rates that keep (1, ..., 1) a steady state, follows the
three branches to that epsilon and classifies each state.  If this fails the
epsilon is shrunk and the round repeated.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ._numeric import to_fraction
from .eigen import eigenvalues
from .massaction import ModelParams, RateError, RateVector, conservation_substitute, stamp_eps
from .region import RegionCheck, RegionError, canonical_rates, check_bistability, sample_region
from .stability import StabilityReport, classify_state
from .steady import (
    ContinuationError,
    ContinuationTrace,
    NewtonError,
    SteadyState,
    is_nondegenerate,
    residual_tolerance,
    three_states,
)
from .massaction import sequestration_jacobian, sequestration_rhs

log = logging.getLogger(__name__)

EPS0 = Fraction(1, 10)
SHRINK = Fraction(1, 10)
MAX_ROUNDS = 12
DISTINCT_TOL = 1e-6


def _exact_eps(v) -> Fraction:
    """Decimal reading of a float (0.006 -> 3/500), exact for Fractions and ints."""
    if isinstance(v, float):
        return Fraction(repr(v))
    return to_fraction(v)


@dataclass
class WitnessResult:
    params: ModelParams
    core: tuple
    r: RateVector | None
    eps: float | None
    states: tuple[SteadyState, ...]
    reports: tuple[StabilityReport, ...]
    bistable: bool
    theorem: str = "bistability"
    trace: list[tuple[float, bool]] = field(default_factory=list)
    message: str = ""

    @property
    def stable_branches(self) -> list[str]:
        return [s.branch for s, rep in zip(self.states, self.reports) if rep.stable]

    @property
    def stable_indices(self) -> list[int]:
        """1-based positions of the stable states (1 = all-ones, 2 = delta, 3 = boundary)."""
        return [i + 1 for i, rep in enumerate(self.reports) if rep.stable]

    def to_dict(self) -> dict:
        exact = self.r is not None and self.r.exact
        return {
            "schema": "seqnet/1",
            "m": self.params.m,
            "n": self.params.n,
            "core": [str(v) for v in self.core],
            "r": None if self.r is None else [float(v) for v in self.r],
            "r_exact": [str(to_fraction(v)) for v in self.r] if exact else None,
            "eps": self.eps,
            "theorem": self.theorem,
            "states": [s.to_dict() for s in self.states],
            "reports": [rep.to_dict() for rep in self.reports],
            "bistable": self.bistable,
            "stable": self.stable_indices,
            "trace": [[e, ok] for e, ok in self.trace],
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WitnessResult":
        params = ModelParams(d["m"], d["n"])
        if d.get("r_exact"):
            r = RateVector(tuple(Fraction(v) for v in d["r_exact"]), "conservation")
        elif d.get("r") is not None:
            r = RateVector(tuple(d["r"]), "conservation")
        else:
            r = None
        return cls(
            params=params,
            core=tuple(Fraction(v) for v in d["core"]),
            r=r,
            eps=d["eps"],
            states=tuple(SteadyState.from_dict(s) for s in d["states"]),
            reports=tuple(StabilityReport.from_dict(q) for q in d["reports"]),
            bistable=d["bistable"],
            theorem=d.get("theorem", "bistability"),
            trace=[(e, ok) for e, ok in d.get("trace", [])],
            message=d.get("message", ""),
        )


def verify_witness(w: WitnessResult) -> list[str]:
    """Independent re-check of a bistable witness; returns the list of problems."""
    problems = []
    if not w.bistable:
        return ["witness is not marked bistable"]
    p = w.params
    n = p.n
    r = list(w.r.values)
    R = [None, *[to_fraction(v) for v in r]]
    # inflow rates must be the conservation values exactly
    want = [R[1] + R[n] + R[n + 1]] + [R[i - 1] + R[i] + R[n + i] for i in range(2, n)]
    want.append(R[n - 1] - p.m * R[n] + R[2 * n])
    if [R[2 * n + k] for k in range(1, n + 1)] != want:
        problems.append("inflow rates do not satisfy the conservation equalities")
    rf = [float(v) for v in r]
    tol = residual_tolerance(rf)
    stable = 0
    for s, rep in zip(w.states, w.reports):
        x = np.array(s.x)
        if not np.all(x > 0):
            problems.append(f"{s.branch} state is not positive")
        res = float(np.max(np.abs(sequestration_rhs(p, rf, x))))
        if res >= tol:
            problems.append(f"{s.branch} residual {res:.3e} >= {tol:.3e}")
        J = sequestration_jacobian(p, rf, x)
        if not is_nondegenerate(J):
            problems.append(f"{s.branch} state is degenerate")
        if rep.stable:
            stable += 1
            if max(z.real for z in eigenvalues(J)) >= 0:
                problems.append(f"{s.branch} state marked stable has an eigenvalue with Re >= 0")
    if stable < 2:
        problems.append(f"only {stable} stable states")
    return problems


def _choose_core(params: ModelParams, mode: str, core, seed):
    """(core rates, theorem name) for the requested rate source."""
    if mode == "canonical":
        return canonical_rates(params, "bistability"), "bistability"
    if mode == "alt":
        return canonical_rates(params, "alt"), "bistability-alt"
    if mode == "sampled":
        return sample_region(params, seed), "bistability"
    if mode == "user":
        if core is None:
            raise ValueError("user mode needs core rates")
        check = check_bistability(params, core)
        if check.all_satisfied:
            return list(core), "bistability"
        alt = check_bistability(params, core, alt=True)
        if alt.all_satisfied:
            return list(core), "bistability-alt"
        raise RegionError(check)
    raise ValueError(f"unknown mode {mode!r}")


def _pairwise_distinct(states: Sequence[SteadyState]) -> bool:
    xs = [s.as_array() for s in states]
    return all(
        np.max(np.abs(xs[i] - xs[j])) > DISTINCT_TOL
        for i in range(len(xs))
        for j in range(i + 1, len(xs))
    )


def attempt(params: ModelParams, core, eps, theorem: str = "bistability", steps: int = 20):
    """One round at a fixed epsilon.  Returns a WitnessResult (possibly not bistable)."""
    eps_q = _exact_eps(eps)
    # floats are taken at their exact binary value so the inflow rates
    # satisfy the conservation equalities exactly
    core_in = [to_fraction(v) for v in core]
    trace = ContinuationTrace()
    r = conservation_substitute(params, stamp_eps(params, core_in, eps_q))
    states = three_states(params, core_in, float(eps_q), steps, trace)
    reports = tuple(classify_state(params, r.values, s.x) for s in states)
    stable = sum(rep.stable for rep in reports)
    ok = (
        stable >= 2
        and all(s.nondegenerate for s in states)
        and _pairwise_distinct(states)
        and all(s.residual_norm < residual_tolerance(r.as_float()) for s in states)
    )
    verdicts = ", ".join(f"{s.branch}: {rep.verdict}" for s, rep in zip(states, reports))
    return WitnessResult(
        params, tuple(core), r, float(eps_q), states, reports, ok, theorem,
        [(float(eps_q), ok)], verdicts,
    )


def find_witness(
    params: ModelParams,
    mode: str = "canonical",
    core: Sequence | None = None,
    seed: int | None = None,
    eps0=EPS0,
    shrink=SHRINK,
    max_rounds: int = MAX_ROUNDS,
    steps: int = 20,
) -> WitnessResult:
    """Search for a bistability witness.

    ``mode`` is ``canonical``, ``alt`` (canonical rates for the reversed
    stability inequality), ``sampled`` (uses ``seed``) or ``user`` (uses
    ``core`` = (r_1, ..., r_n, r_{n+2}), validated against the standard and
    then the reversed inequality).  Epsilon runs through eps0 * shrink^k,
    k = 0 .. max_rounds-1; the first bistable round is returned.
    """
    params.require_bistable_family()
    core, theorem = _choose_core(params, mode, core, seed)
    eps = _exact_eps(eps0)
    shrink = _exact_eps(shrink)
    if not (eps > 0 and 0 < shrink < 1):
        raise ValueError("need eps0 > 0 and 0 < shrink < 1")
    trace: list[tuple[float, bool]] = []
    last = None
    stall = None  # a branch could not be followed past this epsilon
    for _ in range(max_rounds):
        if stall is not None and eps > stall:
            # the same branch path would stall again
            trace.append((float(eps), False))
            eps *= shrink
            continue
        try:
            res = attempt(params, core, eps, theorem, steps)
        except (ContinuationError, NewtonError, RateError, np.linalg.LinAlgError) as exc:
            log.info("eps = %s failed: %s", float(eps), exc)
            trace.append((float(eps), False))
            last = str(exc)
            if isinstance(exc, ContinuationError) and exc.last_eps > 0:
                stall = Fraction(exc.last_eps)
        else:
            trace.append((float(eps), res.bistable))
            res.trace = trace
            if res.bistable:
                return res
            last = res.message
        eps *= shrink
    return WitnessResult(
        params, tuple(core), None, None, (), (), False, theorem, trace,
        f"no bistable round in {max_rounds} tries; last: {last}",
    )


# ---------------------------------------------------------------- sweep


def _thread_cap(workers: int | None) -> int:
    cap = os.environ.get("SEQNET_THREADS")
    w = workers or 1
    if cap:
        try:
            w = min(w, max(1, int(cap))) if workers else max(1, int(cap))
        except ValueError:
            pass
    return max(1, w)


def _sweep_cell(m, n, mode, seed, kwargs) -> dict:
    cell = {"m": m, "n": n, "mode": mode, "seed": seed}
    try:
        res = find_witness(ModelParams(m, n), mode=mode, seed=seed, **kwargs)
    except (ValueError, RegionError) as exc:
        cell.update(ok=False, bistable=False, error=str(exc))
        return cell
    cell.update(
        ok=True,
        bistable=res.bistable,
        eps=res.eps,
        states_found=len(res.states),
        stable_count=sum(rep.stable for rep in res.reports),
        stable=res.stable_indices,
        error=None if res.bistable else res.message,
    )
    return cell


def sweep(
    grid: Iterable[tuple[int, int]],
    modes: Sequence[str] = ("canonical",),
    seeds: Sequence[int | None] = (None,),
    workers: int | None = None,
    **kwargs,
) -> list[dict]:
    """find_witness over every (m, n) x mode x seed cell.

    Counts only the three constructed branches, so ``states_found`` is a
    lower bound on the number of steady states.  Invalid cells are recorded
    with an error rather than raised.
    """
    cells = [
        (m, n, mode, seed if mode == "sampled" else None)
        for m, n in grid
        for mode in modes
        for seed in (seeds if mode == "sampled" else (None,))
    ]
    w = _thread_cap(workers)
    if w == 1:
        return [_sweep_cell(*c, kwargs) for c in cells]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(lambda c: _sweep_cell(*c, kwargs), cells))
