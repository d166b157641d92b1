"""Parameter inequalities for multistationarity and bistability, the
explicit bistability region, canonical rate choices and a reproducible
sampler.

All inequalities are decided in exact rational arithmetic: float inputs
are converted to the Fraction equal to their binary value first.

Core rates are the n+1 numbers (r_1, ..., r_n, r_{n+2}).  Inequality ids:

=====================  =============================================
``separation``         (r_1 + r_n) r_{n+2} != (m-1) r_1 r_n
``inflow``             r_{n-1} > m r_n
``production``         (m-1) r_1 > r_{n+2}
``delta[i]``           (m-1) r_1 (r_{i-1} + (-1)^i m r_n)
                       > (-1)^i m (r_1 + r_n) r_{n+2},  i = 3..n
``xi2``                r_1 + r_{n+2} > r_{n-2}            (n > 3)
``xi[i]``              r_i > r_{n-2},  i = 3, 5, ..., n-4  (n > 3)
``ones-stable``        (r_1 + r_n) r_{n+2} > (m-1) r_1 r_n
``delta-stable``       (r_1 + r_n) r_{n+2} < (m-1) r_1 r_n
=====================  =============================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import to_fraction
from .massaction import ModelParams

THEOREMS = ("multistationarity", "bistability", "bistability-alt")


@dataclass(frozen=True)
class InequalityRecord:
    id: str
    lhs: Fraction
    rhs: Fraction
    relation: str  # ">" or "!="
    formula: str
    index: int | None = None

    @property
    def satisfied(self) -> bool:
        if self.relation == ">":
            return self.lhs > self.rhs
        return self.lhs != self.rhs

    @property
    def strictness(self) -> str:
        return "not-equal" if self.relation == "!=" else "strict"

    @property
    def label(self) -> str:
        return self.id if self.index is None else f"{self.id}[{self.index}]"

    def to_dict(self) -> dict:
        return {
            "id": self.label,
            "formula": self.formula,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "lhs_exact": str(self.lhs),
            "rhs_exact": str(self.rhs),
            "relation": self.relation,
            "strictness": self.strictness,
            "satisfied": self.satisfied,
        }


@dataclass(frozen=True)
class RegionCheck:
    theorem: str
    records: tuple[InequalityRecord, ...] = field(default_factory=tuple)

    @property
    def all_satisfied(self) -> bool:
        return all(rec.satisfied for rec in self.records)

    def __bool__(self):
        return self.all_satisfied

    def failed(self) -> list[InequalityRecord]:
        return [rec for rec in self.records if not rec.satisfied]

    def record(self, label: str) -> InequalityRecord:
        for rec in self.records:
            if rec.label == label:
                return rec
        raise KeyError(label)

    def to_dict(self) -> dict:
        return {
            "schema": "seqnet/1",
            "theorem": self.theorem,
            "all_satisfied": self.all_satisfied,
            "records": [rec.to_dict() for rec in self.records],
        }


class RegionError(ValueError):
    def __init__(self, check: RegionCheck):
        names = ", ".join(f"{r.label}: {r.formula}" for r in check.failed())
        super().__init__(f"rates fail the {check.theorem} conditions ({names})")
        self.check = check


def _core(params: ModelParams, core: Sequence) -> list:
    params.require_bistable_family()
    core = list(core)
    if len(core) != params.n + 1:
        raise ValueError(
            f"expected n+1 = {params.n + 1} core rates (r1..r{params.n}, r{params.n + 2}), got {len(core)}"
        )
    vals = [to_fraction(v) for v in core]
    for j, v in enumerate(vals):
        if v <= 0:
            label = j + 1 if j < params.n else params.n + 2
            raise ValueError(f"rate r{label} must be positive, got {core[j]}")
    # R[i] = r_i for 1 <= i <= n, R[n+2] = r_{n+2}
    return [None, *vals[: params.n], None, vals[params.n]]


def _shared_records(params: ModelParams, R: list) -> list[InequalityRecord]:
    m, n = params.m, params.n
    recs = [
        InequalityRecord("inflow", R[n - 1], m * R[n], ">", f"r{n - 1} > m*r{n}"),
        InequalityRecord("production", (m - 1) * R[1], R[n + 2], ">", f"(m-1)*r1 > r{n + 2}"),
    ]
    for i in range(3, n + 1):
        sgn = 1 if i % 2 == 0 else -1
        recs.append(
            InequalityRecord(
                "delta",
                (m - 1) * R[1] * (R[i - 1] + sgn * m * R[n]),
                sgn * m * (R[1] + R[n]) * R[n + 2],
                ">",
                f"(m-1)*r1*(r{i - 1} {'+' if sgn > 0 else '-'} m*r{n}) > "
                f"{'' if sgn > 0 else '-'}m*(r1+r{n})*r{n + 2}",
                index=i,
            )
        )
    if n > 3:
        recs.append(
            InequalityRecord("xi2", R[1] + R[n + 2], R[n - 2], ">", f"r1 + r{n + 2} > r{n - 2}")
        )
        for i in range(3, n - 3, 2):
            recs.append(InequalityRecord("xi", R[i], R[n - 2], ">", f"r{i} > r{n - 2}", index=i))
    return recs


def _ones_product(params: ModelParams, R: list):
    """((r_1 + r_n) r_{n+2}, (m-1) r_1 r_n)."""
    m, n = params.m, params.n
    return (R[1] + R[n]) * R[n + 2], (m - 1) * R[1] * R[n]


def check_mss(params: ModelParams, core: Sequence) -> RegionCheck:
    """Conditions under which three nondegenerate steady states are constructed."""
    R = _core(params, core)
    n = params.n
    a, b = _ones_product(params, R)
    sep = InequalityRecord("separation", a, b, "!=", f"(r1+r{n})*r{n + 2} != (m-1)*r1*r{n}")
    return RegionCheck("multistationarity", (sep, *_shared_records(params, R)))


def check_bistability(params: ModelParams, core: Sequence, alt: bool = False) -> RegionCheck:
    """Bistability conditions; ``alt=True`` uses the reversed stability
    inequality, for which the stable pair is the delta state and the
    boundary state."""
    R = _core(params, core)
    n = params.n
    a, b = _ones_product(params, R)
    if alt:
        stab = InequalityRecord(
            "delta-stable", b, a, ">", f"(r1+r{n})*r{n + 2} < (m-1)*r1*r{n}"
        )
        theorem = "bistability-alt"
    else:
        stab = InequalityRecord("ones-stable", a, b, ">", f"(r1+r{n})*r{n + 2} > (m-1)*r1*r{n}")
        theorem = "bistability"
    return RegionCheck(theorem, (*_shared_records(params, R), stab))


def in_region_set(params: ModelParams, core: Sequence) -> bool:
    """Membership in the explicit triangular description of the bistability region.

    For n = 3 the description is only r_5 < (m-1) r_1 and r_2 > m r_3; it
    omits the stability inequality, so it is a strict superset of the
    bistability set there.  Use :func:`in_region_set_closed` for a
    description that is equivalent for every odd n.
    """
    R = _core(params, core)
    m, n = params.m, params.n
    if n == 3:
        return R[5] < (m - 1) * R[1] and R[2] > m * R[3]
    if not R[n + 2] < (m - 1) * R[1]:
        return False
    if not R[n] < R[1] * R[n + 2] / ((m - 1) * R[1] - R[n + 2]):
        return False
    if not R[n - 1] > m * R[n]:
        return False
    lower = m * ((R[1] + R[n]) * R[n + 2] - (m - 1) * R[1] * R[n]) / ((m - 1) * R[1])
    if not lower < R[n - 2] < R[1] + R[n + 2]:
        return False
    return all(R[i] > R[n - 2] for i in range(3, n - 3, 2))


def in_region_set_closed(params: ModelParams, core: Sequence) -> bool:
    """Triangular description including the r_n bound for n = 3 as well."""
    R = _core(params, core)
    m, n = params.m, params.n
    if n > 3:
        return in_region_set(params, core)
    return (
        R[5] < (m - 1) * R[1]
        and R[3] < R[1] * R[5] / ((m - 1) * R[1] - R[5])
        and R[2] > m * R[3]
    )


def canonical_rates(params: ModelParams, mode: str = "bistability") -> list[Fraction]:
    """Explicit core rates (r_1, ..., r_n, r_{n+2}) inside the requested region.

    ``mode`` is ``"mss"`` or ``"bistability"`` (identical choices) or
    ``"alt"`` for the reversed stability inequality.
    """
    params.require_bistable_family()
    m, n = params.m, params.n
    if mode not in ("mss", "bistability", "alt"):
        raise ValueError(f"unknown mode {mode!r}")
    F = Fraction
    if mode == "alt":
        if n == 3:
            return [F(3), F(3 * m), F(2), F(m - 1)]
        R = {1: 3, n - 2: m, n - 1: 3 * m, n: 2}
        for i in range(2, n - 2, 2):
            R[i] = m
        for i in range(3, n - 3, 2):
            R[i] = m + 1
        return [F(R[i]) for i in range(1, n + 1)] + [F(m - 1)]
    if n == 3:
        return [F(2), F(m + 1), F(1), F(m - 1)]
    R = {1: 2, n - 2: m, n - 1: m + 1, n: 1}
    for i in range(2, n - 2, 2):
        R[i] = 1
    for i in range(3, n - 3, 2):
        R[i] = m + 1
    return [F(R[i]) for i in range(1, n + 1)] + [F(m - 1)]


def _open_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    while True:
        v = rng.uniform(lo, hi)
        if lo < v < hi:
            return float(v)


def sample_region(
    params: ModelParams, seed: int | np.random.Generator | None = None, max_tries: int = 1000
) -> list[float]:
    """Draw core rates from the bistability region following its triangular order.

    Unconstrained rates come from [0.1, 10]; one-sided constraints use a
    window of width 10.  Every draw is checked exactly and redrawn on the
    (rare) floating-point boundary miss, so the result always passes
    :func:`check_bistability`.
    """
    params.require_bistable_family()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m, n = params.m, params.n
    for _ in range(max_tries):
        R: dict[int, float] = {}
        R[1] = _open_uniform(rng, 0.1, 10.0)
        R[n + 2] = _open_uniform(rng, 0.0, (m - 1) * R[1])
        R[n] = _open_uniform(rng, 0.0, R[1] * R[n + 2] / ((m - 1) * R[1] - R[n + 2]))
        R[n - 1] = _open_uniform(rng, m * R[n], m * R[n] + 10.0)
        if n > 3:
            lower = m * ((R[1] + R[n]) * R[n + 2] - (m - 1) * R[1] * R[n]) / ((m - 1) * R[1])
            R[n - 2] = _open_uniform(rng, max(lower, 0.0), R[1] + R[n + 2])
            for i in range(3, n - 3, 2):
                R[i] = _open_uniform(rng, R[n - 2], R[n - 2] + 10.0)
            for i in range(2, n - 2, 2):
                R[i] = _open_uniform(rng, 0.1, 10.0)
        core = [R[i] for i in range(1, n + 1)] + [R[n + 2]]
        if check_bistability(params, core).all_satisfied:
            return core
    raise RuntimeError("could not draw a rate vector inside the region")  # pragma: no cover
