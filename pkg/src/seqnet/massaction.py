"""Mass-action right-hand side, Jacobian, inflow substitution and the
coordinate change that exposes the boundary steady state.

Every function accepts floats or ``fractions.Fraction`` values.  When any
input is a Fraction the computation is carried out exactly and numpy object
arrays of Fractions are returned; otherwise float arrays.

Rate vectors are 0-based sequences holding r_1, r_2, ...; the helper
``_one_based`` gives a padded view so formulas read with the usual indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import as_array, is_exact, zeros
from .network import ReactionNetwork


class RateError(ValueError):
    """Rate constants violate a required sign condition."""


@dataclass(frozen=True)
class ModelParams:
    m: int
    n: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m}")
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")

    def require_bistable_family(self) -> "ModelParams":
        """Bistability machinery needs m >= 2 and odd n >= 3."""
        if self.m < 2:
            raise ValueError(f"m must be >= 2 for multistationarity, got {self.m}")
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"n must be odd and >= 3 for multistationarity, got {self.n}")
        return self


@dataclass(frozen=True)
class RateVector:
    """The 3n rate constants r_1..r_{3n}.

    ``mode`` is ``"conservation"`` when r_{2n+1}..r_{3n} were derived by
    :func:`conservation_substitute` (so x = (1, ..., 1) is a steady state).
    """

    values: tuple
    mode: str = "free"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.mode not in ("free", "conservation"):
            raise ValueError(f"unknown rate mode {self.mode!r}")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, j):
        return self.values[j]

    def __iter__(self):
        return iter(self.values)

    def r(self, j: int):
        """1-based access: ``rates.r(j)`` is r_j."""
        return self.values[j - 1]

    @property
    def exact(self) -> bool:
        return is_exact(self.values)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])


def _values(r) -> list:
    if isinstance(r, RateVector):
        return list(r.values)
    return list(r)


def _one_based(r) -> list:
    return [None, *_values(r)]


def eps_slots(n: int) -> list[int]:
    """1-based indices of the outflow rates set to a common epsilon: n+1, n+3, ..., 2n."""
    return [n + 1] + list(range(n + 3, 2 * n + 1))


def stamp_eps(params: ModelParams, core: Sequence, eps) -> list:
    """Build r_1..r_{2n} from the core rates (r_1..r_n, r_{n+2}) with every
    epsilon slot set to ``eps``."""
    n = params.n
    core = list(core)
    if len(core) != n + 1:
        raise ValueError(f"expected n+1 = {n + 1} core rates (r1..r{n}, r{n + 2}), got {len(core)}")
    out = core[:n] + [eps] * n
    out[n + 1] = core[n]
    return out


def core_of(params: ModelParams, r) -> list:
    """(r_1, ..., r_n, r_{n+2}) extracted from a longer rate vector."""
    v = _values(r)
    return v[: params.n] + [v[params.n + 1]]


def conservation_substitute(params: ModelParams, r_front: Sequence) -> RateVector:
    """Complete r_1..r_{2n} with inflow rates that make (1, ..., 1) a steady state."""
    n, m = params.n, params.m
    front = _values(r_front)
    if len(front) != 2 * n:
        raise ValueError(f"expected 2n = {2 * n} rates, got {len(front)}")
    for j, v in enumerate(front, start=1):
        if v < 0:
            raise RateError(f"r{j} = {v} is negative")
    R = [None, *front]
    tail = [R[1] + R[n] + R[n + 1]]
    tail += [R[i - 1] + R[i] + R[n + i] for i in range(2, n)]
    tail.append(R[n - 1] - m * R[n] + R[2 * n])
    for k, v in enumerate(tail, start=1):
        if not v > 0:
            if k == n:
                raise RateError(
                    f"r{3 * n} = r{n - 1} - m*r{n} + r{2 * n} = {v} is not positive"
                )
            raise RateError(f"derived inflow rate r{2 * n + k} = {v} is not positive")
    return RateVector(tuple(front + tail), mode="conservation")


# ------------------------------------------------------------------ generic


def _check_dims(net: ReactionNetwork, r, x):
    if len(r) != net.n_reactions:
        raise ValueError(f"network has {net.n_reactions} reactions but {len(r)} rates were given")
    if len(x) != net.n_species:
        raise ValueError(f"network has {net.n_species} species but x has length {len(x)}")


def reaction_rates(net: ReactionNetwork, r, x) -> np.ndarray:
    """Mass-action fluxes r_j * prod_i x_i^alpha_ij."""
    r, x = _values(r), list(x)
    _check_dims(net, r, x)
    exact = is_exact(r, x)
    v = []
    for rj, reac in zip(r, net.reactions):
        term = rj
        for i, a in reac.reactants.items():
            term = term * x[i - 1] ** a
        v.append(term)
    return as_array(v, exact)


def ode_rhs(net: ReactionNetwork, r, x) -> np.ndarray:
    """f(x) = N v(x) for an arbitrary mass-action network."""
    from .network import stoichiometric_matrix

    v = reaction_rates(net, r, x)
    N = stoichiometric_matrix(net)
    if v.dtype == object:
        return np.array(
            [sum((int(N[i, j]) * v[j] for j in range(len(v))), Fraction(0)) for i in range(N.shape[0])],
            dtype=object,
        )
    return N @ v


def jacobian(net: ReactionNetwork, r, x) -> np.ndarray:
    """Analytic Jacobian of :func:`ode_rhs` with respect to x."""
    from .network import stoichiometric_matrix

    r, x = _values(r), list(x)
    _check_dims(net, r, x)
    exact = is_exact(r, x)
    s = net.n_species
    N = stoichiometric_matrix(net)
    # dv/dx: flux j differentiated by species k
    dv = zeros((net.n_reactions, s), exact)
    for j, (rj, reac) in enumerate(zip(r, net.reactions)):
        for k, ak in reac.reactants.items():
            term = rj * ak * x[k - 1] ** (ak - 1)
            for i, a in reac.reactants.items():
                if i != k:
                    term = term * x[i - 1] ** a
            dv[j, k - 1] = term
    if exact:
        J = zeros((s, s), True)
        for i in range(s):
            for k in range(s):
                J[i, k] = sum((int(N[i, j]) * dv[j, k] for j in range(len(r))), Fraction(0))
        return J
    return N @ dv


# ------------------------------------------------------------ K~_{m,n} closed forms


def sequestration_rhs(params: ModelParams, r, x) -> np.ndarray:
    """Right-hand side of the fully open extension written out term by term."""
    m, n = params.m, params.n
    R = _one_based(r)
    if len(R) - 1 != 3 * n:
        raise ValueError(f"expected 3n = {3 * n} rates, got {len(R) - 1}")
    if len(x) != n:
        raise ValueError(f"expected {n} concentrations, got {len(x)}")
    X = [None, *x]
    f = [-R[1] * X[1] * X[2] - R[n] * X[1] - R[n + 1] * X[1] + R[2 * n + 1]]
    for i in range(2, n):
        f.append(
            -R[i - 1] * X[i - 1] * X[i] - R[i] * X[i] * X[i + 1] - R[n + i] * X[i] + R[2 * n + i]
        )
    f.append(-R[n - 1] * X[n - 1] * X[n] + m * R[n] * X[1] - R[2 * n] * X[n] + R[3 * n])
    return as_array(f, is_exact(R[1:], x))


def sequestration_jacobian(params: ModelParams, r, x) -> np.ndarray:
    """Tridiagonal Jacobian of the fully open extension plus the (n, 1) corner m*r_n.

    Only r_1..r_{2n} are read, so a length-2n vector is accepted too.
    """
    m, n = params.m, params.n
    R = _one_based(r)
    if len(R) - 1 < 2 * n:
        raise ValueError(f"expected at least 2n = {2 * n} rates, got {len(R) - 1}")
    X = [None, *x]
    exact = is_exact(R[1:], x)
    J = zeros((n, n), exact)
    J[0, 0] = -R[1] * X[2] - R[n] - R[n + 1]
    J[0, 1] = -R[1] * X[1]
    for i in range(2, n):
        J[i - 1, i - 2] = -R[i - 1] * X[i]
        J[i - 1, i - 1] = -R[i - 1] * X[i - 1] - R[i] * X[i + 1] - R[n + i]
        J[i - 1, i] = -R[i] * X[i]
    J[n - 1, 0] = J[n - 1, 0] + m * R[n]
    J[n - 1, n - 2] = J[n - 1, n - 2] - R[n - 1] * X[n]
    J[n - 1, n - 1] = -R[n - 1] * X[n - 1] - R[2 * n]
    return J


# ------------------------------------------------------- coordinate change phi


def phi_map(y, r2n) -> np.ndarray:
    """x = (y_1, ..., y_{n-2}, r_{2n} y_{n-1} / y_n, y_n / r_{2n})."""
    y = list(y)
    if y[-1] == 0:
        raise ZeroDivisionError("phi_map needs y_n != 0")
    if r2n == 0:
        raise ZeroDivisionError("phi_map needs r_{2n} != 0")
    x = y[:-2] + [r2n * y[-2] / y[-1], y[-1] / r2n]
    return as_array(x, is_exact(y, [r2n]))


def phi_jacobian(y, r2n) -> np.ndarray:
    """Jacobian of :func:`phi_map`: identity block plus a 2x2 block with
    determinant 1 / y_n."""
    y = list(y)
    n = len(y)
    if y[-1] == 0 or r2n == 0:
        raise ZeroDivisionError("phi_jacobian needs y_n != 0 and r_{2n} != 0")
    exact = is_exact(y, [r2n])
    Jphi = zeros((n, n), exact)
    one = Fraction(1) if exact else 1.0
    for i in range(n - 2):
        Jphi[i, i] = one
    Jphi[n - 2, n - 2] = r2n / y[-1]
    Jphi[n - 2, n - 1] = -r2n * y[-2] / y[-1] ** 2
    Jphi[n - 1, n - 1] = one / r2n
    return Jphi


def system_p(params: ModelParams, r_front, y) -> np.ndarray:
    """f(phi(y)) for the inflow-substituted system, with rates r_1..r_{2n}.

    The products x_{n-1} x_n = y_{n-1} and r_{2n} x_n = y_n are cancelled
    symbolically, so the map stays defined when r_{2n} = 0.
    """
    m, n = params.m, params.n
    R = _one_based(r_front)
    if len(R) - 1 != 2 * n:
        raise ValueError(f"expected 2n = {2 * n} rates, got {len(R) - 1}")
    y = list(y)
    if y[-1] == 0:
        raise ZeroDivisionError("system_p needs y_n != 0")
    Y = [None, *y]
    # x with x_n left out: it only enters through the cancelled products
    X = [None, *y[: n - 2], R[2 * n] * Y[n - 1] / Y[n]]
    prod_last = Y[n - 1]  # x_{n-1} x_n
    p = [-R[1] * X[1] * X[2] - R[n] * X[1] - R[n + 1] * X[1] + R[1] + R[n] + R[n + 1]]
    for i in range(2, n - 1):
        p.append(
            -R[i - 1] * X[i - 1] * X[i]
            - R[i] * X[i] * X[i + 1]
            - R[n + i] * X[i]
            + R[i - 1] + R[i] + R[n + i]
        )
    p.append(
        -R[n - 2] * X[n - 2] * X[n - 1]
        - R[n - 1] * prod_last
        - R[2 * n - 1] * X[n - 1]
        + R[n - 2] + R[n - 1] + R[2 * n - 1]
    )
    p.append(-R[n - 1] * prod_last + m * R[n] * X[1] - Y[n] + R[n - 1] - m * R[n] + R[2 * n])
    return as_array(p, is_exact(R[1:], y))


def jacobian_p(params: ModelParams, r_front, y) -> np.ndarray:
    """Jacobian of :func:`system_p`; equals J(phi(y)) @ phi_jacobian(y) when r_{2n} != 0."""
    n = params.n
    R = _one_based(r_front)
    y = list(y)
    Y = [None, *y]
    exact = is_exact(R[1:], y)
    xn1 = R[2 * n] * Y[n - 1] / Y[n]
    # x_n only enters columns n-1 and n, which are rebuilt below
    x = y[: n - 2] + [xn1, 0]
    Jp = sequestration_jacobian(params, R[1:], x)
    if not exact:
        Jp = Jp.astype(float)
    s = R[2 * n] / Y[n]
    xm2 = Y[n - 2]  # x_{n-2}
    col = zeros(n, exact)
    col[n - 3] = -R[n - 2] * xm2 * s
    col[n - 2] = (-R[n - 2] * xm2 - R[2 * n - 1]) * s - R[n - 1]
    col[n - 1] = -R[n - 1]
    Jp[:, n - 2] = 0
    Jp[:, n - 1] = 0
    for i in range(n):
        Jp[i, n - 2] = col[i]
        Jp[i, n - 1] = -(Y[n - 1] / Y[n]) * col[i]
    Jp[n - 2, n - 1] = Jp[n - 2, n - 1] - R[n - 1] * Y[n - 1] / Y[n]
    Jp[n - 1, n - 1] = Jp[n - 1, n - 1] - R[n - 1] * Y[n - 1] / Y[n] - 1
    return Jp


def system_g(params: ModelParams, core, y) -> np.ndarray:
    """The polynomial system p with every epsilon slot at zero, written out
    explicitly from the core rates (r_1, ..., r_n, r_{n+2})."""
    params.require_bistable_family()
    m, n = params.m, params.n
    core = list(core)
    R = [None, *core[:n]] + [None, core[n]]  # R[n+2] = r_{n+2}
    Y = [None, *y]
    exact = is_exact(core, y)
    if n == 3:
        g = [
            R[1] + R[3] - R[3] * Y[1],
            R[1] + R[2] + R[5] - R[2] * Y[2],
            R[2] - m * R[3] - R[2] * Y[2] + m * R[3] * Y[1] - Y[3],
        ]
        return as_array(g, exact)
    g = [
        R[1] + R[n] - R[n] * Y[1] - R[1] * Y[1] * Y[2],
        R[1] + R[2] + R[n + 2] - R[1] * Y[1] * Y[2] - R[2] * Y[2] * Y[3] - R[n + 2] * Y[2],
    ]
    for i in range(3, n - 2):
        g.append(R[i - 1] + R[i] - R[i - 1] * Y[i - 1] * Y[i] - R[i] * Y[i] * Y[i + 1])
    g.append(R[n - 3] + R[n - 2] - R[n - 3] * Y[n - 3] * Y[n - 2])
    g.append(R[n - 2] + R[n - 1] - R[n - 1] * Y[n - 1])
    g.append(R[n - 1] - m * R[n] + m * R[n] * Y[1] - R[n - 1] * Y[n - 1] - Y[n])
    return as_array(g, exact)


def jacobian_g(params: ModelParams, core, y) -> np.ndarray:
    params.require_bistable_family()
    m, n = params.m, params.n
    core = list(core)
    R = [None, *core[:n]] + [None, core[n]]
    Y = [None, *y]
    exact = is_exact(core, y)
    J = zeros((n, n), exact)
    if n == 3:
        J[0, 0] = -R[3]
        J[1, 1] = -R[2]
        J[2, 0] = m * R[3]
        J[2, 1] = -R[2]
        J[2, 2] = -1
        return J
    J[0, 0] = -R[1] * Y[2] - R[n]
    J[0, 1] = -R[1] * Y[1]
    J[1, 0] = -R[1] * Y[2]
    J[1, 1] = -R[1] * Y[1] - R[2] * Y[3] - R[n + 2]
    J[1, 2] = -R[2] * Y[2]
    for i in range(3, n - 2):
        J[i - 1, i - 2] = -R[i - 1] * Y[i]
        J[i - 1, i - 1] = -R[i - 1] * Y[i - 1] - R[i] * Y[i + 1]
        J[i - 1, i] = -R[i] * Y[i]
    J[n - 3, n - 4] = -R[n - 3] * Y[n - 2]
    J[n - 3, n - 3] = -R[n - 3] * Y[n - 3]
    J[n - 2, n - 2] = -R[n - 1]
    J[n - 1, 0] = m * R[n]
    J[n - 1, n - 2] = -R[n - 1]
    J[n - 1, n - 1] = -1
    return J


def det_jacobian_g(params: ModelParams, core, y):
    """Closed-form determinant of :func:`jacobian_g`."""
    params.require_bistable_family()
    n = params.n
    core = list(core)
    R = [None, *core[:n]] + [None, core[n]]
    Y = [None, *y]
    if n == 3:
        return -R[2] * R[3]
    prod = R[n - 1]
    for i in range(2, n - 2):
        prod = prod * R[i] * Y[i]
    return -prod * (R[n] * R[n + 2] + R[1] * R[n] * Y[1] + R[1] * R[n + 2] * Y[2])


def alternating_sum(params: ModelParams, f) -> object:
    """sum_j (-1)^{j-1} f_j."""
    return sum(v if j % 2 == 0 else -v for j, v in enumerate(f))
