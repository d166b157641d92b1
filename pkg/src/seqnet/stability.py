"""Local stability of steady states.

A Jacobian is certified stable when a positive diagonal similarity D makes
D J D^-1 column diagonally dominant with a negative diagonal (and J is
nonsingular): every Gershgorin column disc of the scaled matrix then lies
in the closed left half plane and touches the imaginary axis only at 0.
Certificates are checked in exact rational arithmetic.  When no
certificate is found the verdict falls back to numerical eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import to_fraction
from .eigen import balance, eigenvalues
from .massaction import ModelParams, sequestration_jacobian
from .steady import is_nondegenerate

MODES = ("row", "column")
VERDICTS = ("certified-stable", "eigen-stable", "unstable", "degenerate")
FLOAT_MARGIN = 1e-10
EIGEN_TOL = 1e-9


@dataclass(frozen=True)
class GershgorinDisc:
    center: object
    radius: object
    mode: str
    index: int

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        return abs(z - float(self.center)) <= float(self.radius) + tol

    def to_dict(self) -> dict:
        return {
            "center": float(self.center),
            "radius": float(self.radius),
            "mode": self.mode,
            "index": self.index,
        }


def _square(A) -> np.ndarray:
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


def _check_mode(mode: str):
    if mode not in MODES:
        raise ValueError(f"mode must be 'row' or 'column', got {mode!r}")


def gershgorin_discs(A, mode: str = "row") -> list[GershgorinDisc]:
    """Disc i has center a_ii and radius the off-diagonal absolute sum of row
    (or column) i."""
    A = _square(A)
    _check_mode(mode)
    M = A if mode == "row" else A.T
    n = M.shape[0]
    discs = []
    for i in range(n):
        radius = sum((abs(M[i, j]) for j in range(n) if j != i), 0 * abs(M[i, i]))
        discs.append(GershgorinDisc(M[i, i], radius, mode, i + 1))
    return discs


def in_disc_union(z: complex, discs: Sequence[GershgorinDisc], tol: float = 0.0) -> bool:
    return any(d.contains(z, tol) for d in discs)


def is_diagonally_dominant(A, mode: str = "row") -> tuple[bool, object]:
    """(|a_ii| >= off-diagonal sum for every i, minimum slack).

    Exact when A holds Fractions or integers.
    """
    discs = gershgorin_discs(A, mode)
    if not discs:
        return True, 0
    slack = [abs(d.center) - d.radius for d in discs]
    margin = min(slack)
    return bool(margin >= 0), margin


def dominance_verdict(A) -> str:
    """'negative-real-parts' when A is row or column diagonally dominant with
    negative diagonal; 'inconclusive' otherwise.  The conclusion covers the
    nonzero eigenvalues only."""
    A = _square(A)
    if not all(A[i, i] < 0 for i in range(A.shape[0])):
        return "inconclusive"
    for mode in MODES:
        if is_diagonally_dominant(A, mode)[0]:
            return "negative-real-parts"
    return "inconclusive"


# ---------------------------------------------------------------- scalings


@dataclass(frozen=True)
class ScalingMatrix:
    d: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(self.d))
        if not all(v > 0 for v in self.d):
            raise ValueError("scaling entries must be positive")

    def apply(self, A) -> np.ndarray:
        """D A D^-1 (entry (i, j) is d_i a_ij / d_j)."""
        A = _square(A)
        n = A.shape[0]
        if n != len(self.d):
            raise ValueError("scaling size does not match the matrix")
        out = np.empty_like(A)
        for i in range(n):
            for j in range(n):
                out[i, j] = A[i, j] if i == j else self.d[i] * A[i, j] / self.d[j]
        return out

    def to_dict(self) -> dict:
        return {"name": self.name, "d": [float(v) for v in self.d]}


def _exact_inputs(params: ModelParams, r, x):
    R = [None, *[to_fraction(v) for v in list(r)[: 2 * params.n]]]
    X = [None, *[to_fraction(v) for v in x]]
    if any(v <= 0 for v in X[1:]):
        raise ValueError("scalings need a positive state")
    return R, X


def scaling_all_ones(params: ModelParams, r, x) -> ScalingMatrix:
    """D = diag(alpha, 1, ..., 1) with alpha = 1 + r_{n+2} / (r_1 x_1).

    Columns 2..n of D J D^-1 are exactly balanced when the epsilon slots
    vanish (strictly dominant when they are positive).  Column 1 is strictly
    dominant iff (r_1 x_2 + r_n) r_{n+2} / x_1 > (m-1) r_1 r_n, which at
    x = (1, ..., 1) is the ones-stable inequality and at the delta state is
    the delta-stable inequality.
    """
    n = params.n
    R, X = _exact_inputs(params, r, x)
    alpha = 1 + R[n + 2] / (R[1] * X[1])
    return ScalingMatrix((alpha,) + (Fraction(1),) * (n - 1), "all-ones")


def scaling_boundary(params: ModelParams, r, x) -> ScalingMatrix:
    """Scaling for the boundary state, balancing every column except the first
    (and, for n > 3, column n-2, which is dominant because d_{n-1} < 1).

    n = 3: D = diag(d_1, 1, d_3).  n > 3: D = diag(d_1, 1, ..., 1, d_{n-1}, d_n).
    """
    n = params.n
    R, X = _exact_inputs(params, r, x)
    if n == 3:
        r1, r2, r5, r6 = R[1], R[2], R[5], R[6]
        x1, x2, x3 = X[1], X[2], X[3]
        d1 = (r1 * r2 * x1 * x2 + r1 * r6 * x1 + r2 * r5 * x2 + r2 * r6 * x3 + r5 * r6) / (
            r1 * x1 * (r2 * x2 + r6)
        )
        d3 = r2 * x2 / (r2 * x2 + r6)
        return ScalingMatrix((d1, Fraction(1), d3), "boundary")
    a, b = R[n - 1] * X[n - 1], R[n - 2] * X[n - 2]
    e1, e2 = R[2 * n - 1], R[2 * n]
    c = R[n - 1] * X[n]
    denom = a * b + e2 * b + e2 * c + e1 * a + e2 * e1
    d1 = (R[1] * X[1] + R[n + 2]) / (R[1] * X[1])
    d_pen = (a * b + e2 * b) / denom
    d_last = a * b / denom
    return ScalingMatrix((d1,) + (Fraction(1),) * (n - 3) + (d_pen, d_last), "boundary")


def scaling_comparison(J) -> ScalingMatrix | None:
    """Scaling read off the comparison matrix M (|a_ii| on the diagonal,
    -|a_ij| off it).

    Column j of D J D^-1 is dominant iff (M^T d)_j >= 0, so d solving
    M^T d = 1 works whenever it is positive, i.e. whenever M is a
    nonsingular M-matrix.  Returns None otherwise.  The float solution is
    rounded to rationals and the caller re-checks it exactly.
    """
    A = np.asarray(J, dtype=float)
    M = -np.abs(A)
    np.fill_diagonal(M, np.abs(np.diag(A)))
    try:
        d = np.linalg.solve(M.T, np.ones(A.shape[0]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(d)) or not np.all(d > 0):
        return None
    d = d / d.max()
    return ScalingMatrix(tuple(Fraction(float(v)).limit_denominator(10**12) for v in d), "comparison")


def balanced_columns(params: ModelParams, scaling: ScalingMatrix) -> list[int]:
    """1-based columns a scaling balances exactly when the epsilon slots vanish."""
    n = params.n
    if scaling.name == "all-ones":
        return list(range(2, n + 1))
    if scaling.name == "boundary":
        return [2, 3] if n == 3 else [2, n - 1, n]
    return []


def column_slack(A) -> list:
    """|a_jj| - sum_{i != j} |a_ij| for every column j."""
    return [abs(d.center) - d.radius for d in gershgorin_discs(A, "column")]


# ---------------------------------------------------------------- reports


@dataclass(frozen=True)
class Certificate:
    scaling: ScalingMatrix
    margin: object  # min column slack of the scaled matrix
    exact: bool


@dataclass(frozen=True)
class StabilityReport:
    verdict: str
    discs: tuple[GershgorinDisc, ...]
    scaling: ScalingMatrix | None
    eigenvalues: tuple[complex, ...]
    dominant_margin: float | None
    nondegenerate: bool = True
    exact_certificate: bool = False

    @property
    def stable(self) -> bool:
        return self.verdict in ("certified-stable", "eigen-stable")

    @property
    def max_real_part(self) -> float:
        return max(z.real for z in self.eigenvalues) if self.eigenvalues else float("-inf")

    def to_dict(self) -> dict:
        return {
            "schema": "seqnet/1",
            "verdict": self.verdict,
            "discs": [d.to_dict() for d in self.discs],
            "scaling": self.scaling.to_dict() if self.scaling else None,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "dominant_margin": None if self.dominant_margin is None else float(self.dominant_margin),
            "nondegenerate": self.nondegenerate,
            "exact_certificate": self.exact_certificate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StabilityReport":
        sc = d.get("scaling")
        return cls(
            verdict=d["verdict"],
            discs=tuple(
                GershgorinDisc(q["center"], q["radius"], q["mode"], q["index"]) for q in d["discs"]
            ),
            scaling=ScalingMatrix(tuple(sc["d"]), sc["name"]) if sc else None,
            eigenvalues=tuple(complex(re, im) for re, im in d["eigenvalues"]),
            dominant_margin=d["dominant_margin"],
            nondegenerate=d.get("nondegenerate", True),
            exact_certificate=d.get("exact_certificate", False),
        )


def try_certificate(J, scaling: ScalingMatrix, exact: bool = True) -> Certificate | None:
    """Column dominance of D J D^-1 with a negative diagonal, or None."""
    if exact:
        A = np.array([[to_fraction(v) for v in row] for row in np.asarray(J).tolist()], dtype=object)
        d = ScalingMatrix(tuple(to_fraction(v) for v in scaling.d), scaling.name)
    else:
        A = np.asarray(J, dtype=float)
        d = ScalingMatrix(tuple(float(v) for v in scaling.d), scaling.name)
    S = d.apply(A)
    n = S.shape[0]
    if not all(S[i, i] < 0 for i in range(n)):
        return None
    ok, margin = is_diagonally_dominant(S, "column")
    if not exact:
        ok = margin > -FLOAT_MARGIN * max(1.0, float(np.max(np.abs(S))))
    return Certificate(d, margin, exact) if ok else None


def classify(
    J,
    scalings: Sequence[ScalingMatrix] = (),
    tol: float = EIGEN_TOL,
    exact: bool = True,
    comparison: bool = True,
) -> StabilityReport:
    """Stability verdict for a Jacobian.

    Certificates are tried with D = I first, then with each given scaling
    and finally (``comparison=True``) with :func:`scaling_comparison`.  A certificate counts only if J is also nondegenerate.
    Otherwise eigenvalues decide, with a dead band of tol * ||B||_inf around
    the imaginary axis reported as degenerate (B is the balanced J).  A
    nondegenerate J whose determinant has sign (-1)^(n+1) is unstable
    whatever the band says.
    """
    J = _square(J)
    Jf = np.asarray(J, dtype=float)
    n = Jf.shape[0]
    lam = tuple(complex(z) for z in eigenvalues(Jf)) if n else ()
    nondeg = bool(n) and is_nondegenerate(Jf)
    discs = tuple(gershgorin_discs(Jf, "column"))

    candidates = [ScalingMatrix((Fraction(1),) * n, "identity"), *scalings]
    if comparison and n:
        sc = scaling_comparison(Jf)
        if sc is not None:
            candidates.append(sc)
    best = None
    for sc in candidates:
        cert = try_certificate(J, sc, exact=exact)
        if cert is not None:
            best = cert
            break

    # balancing is a similarity, so this norm is the scale the spectrum lives on
    scale = float(np.max(np.sum(np.abs(balance(Jf)), axis=1))) if n else 0.0
    band = tol * scale
    maxre = max((z.real for z in lam), default=float("-inf"))
    if best is not None and nondeg:
        S = best.scaling.apply(Jf)
        return StabilityReport(
            "certified-stable",
            tuple(gershgorin_discs(S, "column")),
            best.scaling,
            lam,
            best.margin,
            nondeg,
            best.exact,
        )
    # a Hurwitz matrix has det of sign (-1)^n; the other sign forces a
    # positive real eigenvalue
    wrong_sign = nondeg and np.linalg.det(Jf) * (-1) ** n < 0
    if maxre > band or wrong_sign:
        verdict = "unstable"
    elif maxre < -band and nondeg:
        verdict = "eigen-stable"
    else:
        verdict = "degenerate"
    margin = min(column_slack(Jf)) if n else None
    return StabilityReport(verdict, discs, None, lam, margin, nondeg, False)


def state_scalings(params: ModelParams, r, x) -> list[ScalingMatrix]:
    """The closed-form scalings applicable at a positive state."""
    out = []
    for build in (scaling_all_ones, scaling_boundary):
        try:
            out.append(build(params, r, x))
        except (ValueError, ZeroDivisionError):
            pass
    return out


def classify_state(params: ModelParams, r, x, exact: bool = True) -> StabilityReport:
    """Build the Jacobian at (r, x) and classify it, trying both scalings.

    With ``exact=True`` floats are read as the rationals they represent, so
    the certificate is a statement about exactly these numbers.
    """
    if exact:
        rr = [to_fraction(v) for v in list(r)[: 2 * params.n]]
        xx = [to_fraction(v) for v in x]
    else:
        rr = [float(v) for v in list(r)[: 2 * params.n]]
        xx = [float(v) for v in x]
    J = sequestration_jacobian(params, rr, xx)
    return classify(J, state_scalings(params, rr, xx), exact=exact)
