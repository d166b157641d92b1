"""Reaction networks: sequestration networks K_{m,n}, their fully open
extensions, stoichiometry and a small text grammar.

A network file holds one reaction per line::

    # fully open extension of K_{2,3}
    X1 + X2 -> 0 ; r1
    X2 + X3 -> 0 ; r2
    X1 -> 2 X3 ; r3
    X1 -> 0 ; r4
    ...

The zero complex is written ``0``; empty sides are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np


class NetworkError(ValueError):
    """Invalid network construction."""


class NetworkSyntaxError(NetworkError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Species:
    index: int
    name: str = ""

    def __post_init__(self):
        if self.index < 1:
            raise NetworkError(f"species index must be >= 1, got {self.index}")
        if not self.name:
            object.__setattr__(self, "name", f"X{self.index}")


@dataclass(frozen=True)
class Reaction:
    """A mass-action reaction ``sum a_i X_i -> sum b_i X_i`` with rate r_j.

    ``reactants`` and ``products`` map 1-based species indices to
    stoichiometric coefficients; zero coefficients are dropped.
    """

    reactants: Mapping[int, int]
    products: Mapping[int, int]
    rate_index: int

    def __post_init__(self):
        for side in (self.reactants, self.products):
            for i, c in side.items():
                if c < 0:
                    raise NetworkError(f"negative coefficient {c} for species {i}")
        object.__setattr__(
            self, "reactants", {i: c for i, c in sorted(self.reactants.items()) if c}
        )
        object.__setattr__(
            self, "products", {i: c for i, c in sorted(self.products.items()) if c}
        )
        if not self.reactants and not self.products:
            raise NetworkError("reaction 0 -> 0 is not allowed")
        if self.rate_index < 1:
            raise NetworkError(f"rate index must be >= 1, got {self.rate_index}")

    def __hash__(self):
        return hash(
            (tuple(self.reactants.items()), tuple(self.products.items()), self.rate_index)
        )


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[Species, ...]
    reactions: tuple[Reaction, ...]
    tag: tuple[int, int] | None = None
    extended: bool = False

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(
            self, "reactions", tuple(sorted(self.reactions, key=lambda r: r.rate_index))
        )
        idx = [s.index for s in self.species]
        if idx != list(range(1, len(idx) + 1)):
            raise NetworkError("species indices must be contiguous 1..s")
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise NetworkError("species names must be unique")
        labels = [r.rate_index for r in self.reactions]
        if len(set(labels)) != len(labels):
            raise NetworkError("duplicate rate index")
        if labels != list(range(1, len(labels) + 1)):
            raise NetworkError("rate indices must be a permutation of 1..#reactions")
        s = len(self.species)
        for r in self.reactions:
            for i in (*r.reactants, *r.products):
                if not 1 <= i <= s:
                    raise NetworkError(f"reaction r{r.rate_index} references unknown species {i}")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def reactant_matrix(self) -> np.ndarray:
        """Integer matrix of reactant coefficients alpha_{ij} (species x reactions)."""
        A = np.zeros((self.n_species, self.n_reactions), dtype=int)
        for j, r in enumerate(self.reactions):
            for i, c in r.reactants.items():
                A[i - 1, j] = c
        return A

    def product_matrix(self) -> np.ndarray:
        B = np.zeros((self.n_species, self.n_reactions), dtype=int)
        for j, r in enumerate(self.reactions):
            for i, c in r.products.items():
                B[i - 1, j] = c
        return B


def build_sequestration(m: int, n: int) -> ReactionNetwork:
    """K_{m,n}: X_i + X_{i+1} -> 0 (rate r_i, i = 1..n-1) and X1 -> m Xn (rate r_n).

    Rate labels follow the mass-action system of the fully open extension,
    f_1 = -r_1 x_1 x_2 - r_n x_1 - ..., f_n = ... + m r_n x_1 - ...
    """
    if int(m) != m or m < 1:
        raise NetworkError(f"production factor m must be an integer >= 1, got {m}")
    if int(n) != n or n < 2:
        raise NetworkError(f"order n must be an integer >= 2, got {n}")
    species = tuple(Species(i) for i in range(1, n + 1))
    reactions = [Reaction({i: 1, i + 1: 1}, {}, i) for i in range(1, n)]
    reactions.append(Reaction({1: 1}, {n: m}, n))
    return ReactionNetwork(species, tuple(reactions), tag=(m, n))


def fully_open_extension(net: ReactionNetwork) -> ReactionNetwork:
    """Append outflows X_i -> 0 (r_{n+i}) then inflows 0 -> X_i (r_{2n+i})."""
    if net.tag is None:
        raise NetworkError("fully_open_extension expects a network built by build_sequestration")
    if net.extended:
        raise NetworkError("network is already a fully open extension")
    m, n = net.tag
    reactions = list(net.reactions)
    reactions += [Reaction({i: 1}, {}, n + i) for i in range(1, n + 1)]
    reactions += [Reaction({}, {i: 1}, 2 * n + i) for i in range(1, n + 1)]
    return ReactionNetwork(net.species, tuple(reactions), tag=(m, n), extended=True)


def sequestration_extension(m: int, n: int) -> ReactionNetwork:
    return fully_open_extension(build_sequestration(m, n))


def stoichiometric_matrix(net: ReactionNetwork) -> np.ndarray:
    """Integer matrix with (i, j) entry beta_ij - alpha_ij; columns in rate order."""
    return net.product_matrix() - net.reactant_matrix()


def exact_rank(M) -> int:
    """Rank of an integer/rational matrix by fraction-exact Gaussian elimination."""
    rows = [[Fraction(v) for v in row] for row in np.asarray(M).tolist()]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        p = rows[rank]
        for i in range(rank + 1, len(rows)):
            if rows[i][col]:
                f = rows[i][col] / p[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], p)]
        rank += 1
    return rank


# ---------------------------------------------------------------- grammar

_RATE = re.compile(r"\s*r(\d+)\s*$")
_TERM = re.compile(r"\s*(?:(\d+)\s*\*?\s*)?([A-Za-z_][A-Za-z0-9_]*)\s*$")


def _parse_complex(text: str, lineno: int, col0: int, names: dict[str, int]) -> dict[int, int]:
    if not text.strip():
        raise NetworkSyntaxError("empty complex (write 0 for the zero complex)", lineno, col0 + 1)
    if text.strip() == "0":
        return {}
    out: dict[int, int] = {}
    offset = 0
    for chunk in text.split("+"):
        col = col0 + offset + (len(chunk) - len(chunk.lstrip())) + 1
        offset += len(chunk) + 1
        mt = _TERM.match(chunk)
        if mt is None:
            raise NetworkSyntaxError(f"bad term {chunk.strip()!r}", lineno, col)
        coeff = int(mt.group(1)) if mt.group(1) else 1
        name = mt.group(2)
        if name not in names:
            raise NetworkSyntaxError(f"unknown species {name!r}", lineno, col)
        if coeff == 0:
            raise NetworkSyntaxError("zero coefficient", lineno, col)
        out[names[name]] = out.get(names[name], 0) + coeff
    return out


def parse_network(text: str, species: Sequence[str] | None = None) -> ReactionNetwork:
    """Parse the reaction grammar.

    Species names are taken from ``species`` when given; otherwise every name
    must have the form ``X<i>`` and the species set is X1..X<max i>.
    Rate labels must form a permutation of 1..#reactions.
    """
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if line.strip():
            lines.append((lineno, line))

    if species is None:
        found = set()
        for lineno, line in lines:
            for mt in re.finditer(r"[A-Za-z_][A-Za-z0-9_]*", line.split(";", 1)[0]):
                tok = mt.group(0)
                if not re.fullmatch(r"X([1-9]\d*)", tok):
                    raise NetworkSyntaxError(f"unknown species {tok!r}", lineno, mt.start() + 1)
                found.add(int(tok[1:]))
        species = [f"X{i}" for i in range(1, max(found, default=0) + 1)]
    names = {name: i for i, name in enumerate(species, start=1)}

    reactions = []
    seen: dict[int, int] = {}
    for lineno, line in lines:
        if ";" not in line:
            raise NetworkSyntaxError("missing '; r<j>' rate label", lineno, len(line) + 1)
        body, label = line.split(";", 1)
        ml = _RATE.match(label)
        if ml is None:
            raise NetworkSyntaxError(f"bad rate label {label.strip()!r}", lineno, len(body) + 2)
        j = int(ml.group(1))
        if j in seen:
            raise NetworkSyntaxError(
                f"duplicate rate label r{j} (first on line {seen[j]})", lineno, len(body) + 2
            )
        seen[j] = lineno
        if body.count("->") != 1:
            raise NetworkSyntaxError("expected exactly one '->'", lineno, 1)
        lhs, rhs = body.split("->")
        reactants = _parse_complex(lhs, lineno, 0, names)
        products = _parse_complex(rhs, lineno, len(lhs) + 2, names)
        try:
            reactions.append(Reaction(reactants, products, j))
        except NetworkError as exc:
            raise NetworkSyntaxError(str(exc), lineno, 1) from None

    if sorted(seen) != list(range(1, len(seen) + 1)):
        raise NetworkError("rate labels must be a permutation of r1..r%d" % len(seen))
    return ReactionNetwork(tuple(Species(i, nm) for nm, i in names.items()), tuple(reactions))


def _format_complex(side: Mapping[int, int], species: Sequence[Species]) -> str:
    if not side:
        return "0"
    terms = []
    for i, c in side.items():
        name = species[i - 1].name
        terms.append(name if c == 1 else f"{c} {name}")
    return " + ".join(terms)


def format_network(net: ReactionNetwork) -> str:
    lines = []
    if net.tag is not None:
        m, n = net.tag
        lines.append(f"# {'fully open extension of ' if net.extended else ''}K_{{{m},{n}}}")
    for r in net.reactions:
        lines.append(
            f"{_format_complex(r.reactants, net.species)} -> "
            f"{_format_complex(r.products, net.species)} ; r{r.rate_index}"
        )
    return "\n".join(lines) + "\n"


def same_structure(a: ReactionNetwork, b: ReactionNetwork) -> bool:
    """Species names and reactions agree (tags are metadata and ignored)."""
    return (
        [s.name for s in a.species] == [s.name for s in b.species]
        and a.reactions == b.reactions
    )


def network_to_dict(net: ReactionNetwork) -> dict:
    return {
        "schema": "seqnet/1",
        "species": [s.name for s in net.species],
        "tag": list(net.tag) if net.tag else None,
        "extended": net.extended,
        "reactions": [
            {
                "rate": f"r{r.rate_index}",
                "reactants": {net.species[i - 1].name: c for i, c in r.reactants.items()},
                "products": {net.species[i - 1].name: c for i, c in r.products.items()},
            }
            for r in net.reactions
        ],
    }
