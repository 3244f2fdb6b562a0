"""Symmetry-sector bases for driven lattice models.

A configuration is a tuple of per-site integer labels: boson occupations
0..n_max, spin-1 magnetic labels -1/0/1, composite rung labels for two-leg
ladders (2*m_a + m_b with m in {0,1}) and composite light-matter labels for
coupled cavity sites (2*n_photons + s with s in {0,1}). Each label carries a
conserved charge (particle number, magnetization, excitation number); bases
enumerate all configurations of fixed total charge in lexicographic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptySectorError,
    NotInSectorError,
    SizeLimitError,
)

Configuration = tuple  # tuple[int, ...] of length L

SIZE_LIMIT = 10**7  # refuse to materialize sectors larger than this

SQRT_HALF = 1.0 / math.sqrt(2.0)


def _as_charge(value) -> tuple:
    """Normalize a scalar or sequence charge to a tuple."""
    if isinstance(value, tuple):
        return value
    if isinstance(value, (list, np.ndarray)):
        return tuple(int(v) for v in value)
    return (int(value),)


@dataclass(frozen=True)
class LocalSpace:
    """Single-site label set and the conserved charge carried by each label.

    labels are model-meaningful integers, listed in ascending order; charges
    are tuples so that multi-component conservation laws (one per ladder leg)
    fit the same interface.
    """

    name: str
    labels: tuple
    charges: tuple  # tuple of charge tuples, aligned with labels

    def __post_init__(self):
        if len(self.labels) != len(self.charges):
            raise ValueError("labels and charges must align")
        if list(self.labels) != sorted(self.labels):
            raise ValueError("labels must be ascending")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def n_charge(self) -> int:
        return len(self.charges[0])

    def code_of(self, label: int) -> int:
        """Index of a label inside the label list."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise NotInSectorError(f"label {label} not in local space {self.name}")

    def charge_of(self, label: int) -> tuple:
        return self.charges[self.code_of(label)]

    # ---- factories ----------------------------------------------------

    @staticmethod
    def boson(n_max: int) -> "LocalSpace":
        if n_max < 1:
            raise ValueError("n_max must be >= 1")
        labels = tuple(range(n_max + 1))
        return LocalSpace("boson", labels, tuple((n,) for n in labels))

    @staticmethod
    def spin1() -> "LocalSpace":
        return LocalSpace("spin1", (-1, 0, 1), ((-1,), (0,), (1,)))

    @staticmethod
    def jch(n_max_photons: int) -> "LocalSpace":
        """Cavity + two-level system site; label = 2*n_photons + s."""
        if n_max_photons < 1:
            raise ValueError("n_max_photons must be >= 1")
        labels = []
        charges = []
        for n in range(n_max_photons + 1):
            for s in (0, 1):
                labels.append(2 * n + s)
                charges.append((n + s,))
        return LocalSpace("jch", tuple(labels), tuple(charges))

    @staticmethod
    def ladder_rung() -> "LocalSpace":
        """Two spin-1/2 leg sites per rung; label = 2*m_a + m_b."""
        labels = (0, 1, 2, 3)
        charges = tuple((label >> 1, label & 1) for label in labels)
        return LocalSpace("ladder", labels, charges)


def jch_label(n_photons: int, s: int) -> int:
    return 2 * n_photons + s


def split_jch_label(label: int) -> tuple:
    return label >> 1, label & 1


def reflection(config: Configuration) -> Configuration:
    """Spatial reflection |m1..mL> -> |mL..m1>."""
    return tuple(reversed(config))


def _count_sector(space: LocalSpace, L: int, charge: tuple) -> int:
    """Dynamic-programming count of configurations before materializing."""
    nc = space.n_charge
    mins = tuple(min(q[i] for q in space.charges) for i in range(nc))
    maxs = tuple(max(q[i] for q in space.charges) for i in range(nc))
    ways = {(0,) * nc: 1}
    for placed in range(L):
        rest = L - placed - 1
        nxt: dict = {}
        for acc, cnt in ways.items():
            for q in space.charges:
                key = tuple(a + b for a, b in zip(acc, q))
                # keep only accumulations the remaining sites can still close
                feasible = all(
                    k + rest * lo <= c <= k + rest * hi
                    for k, lo, hi, c in zip(key, mins, maxs, charge)
                )
                if feasible:
                    nxt[key] = nxt.get(key, 0) + cnt
        ways = nxt
    return ways.get(charge, 0)


@dataclass(frozen=True)
class SectorBasis:
    """Ordered configuration basis of one total-charge sector."""

    space: LocalSpace
    L: int
    charge: tuple
    configs: tuple
    lookup: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.configs)

    @property
    def local_dim(self) -> int:
        return self.space.dim

    def _key(self, config: Configuration) -> int:
        d = self.space.dim
        key = 0
        for label in config:
            key = key * d + self.space.code_of(label)
        return key

    def index_of(self, config: Configuration) -> int:
        config = tuple(config)
        if len(config) != self.L:
            raise NotInSectorError(
                f"config length {len(config)} != lattice size {self.L}"
            )
        try:
            return self.lookup[self._key(config)]
        except (KeyError, NotInSectorError):
            raise NotInSectorError(f"config {config} not in sector {self.charge}")

    def codes(self) -> np.ndarray:
        """(dim, L) array of per-site label codes, for product-space embedding."""
        code = {lab: i for i, lab in enumerate(self.space.labels)}
        return np.array([[code[l] for l in c] for c in self.configs], dtype=np.int64)

    def occupations(self) -> np.ndarray:
        """(dim, L) per-site occupation numbers.

        Occupation is the total site charge shifted so the lowest label maps
        to 0 (bosons: n, spin-1: m+1, rungs and cavity sites: excitations).
        """
        scalar = {lab: sum(q) for lab, q in zip(self.space.labels, self.space.charges)}
        base = min(scalar.values())
        return np.array(
            [[scalar[l] - base for l in c] for c in self.configs], dtype=np.int64
        )

    def reflect_permutation(self) -> np.ndarray:
        """Index permutation implementing spatial reflection."""
        return np.array(
            [self.index_of(reflection(c)) for c in self.configs], dtype=np.int64
        )


def enumerate_sector(L: int, charge, space: LocalSpace) -> SectorBasis:
    """All configurations of length L with the given total charge.

    Lexicographic order on label vectors; deterministic. Raises
    EmptySectorError for impossible charges and SizeLimitError when the
    count exceeds the hard guard, both before any materialization.
    """
    if L < 2:
        raise ValueError("lattice size must be >= 2")
    charge = _as_charge(charge)
    if len(charge) != space.n_charge:
        raise ValueError(
            f"charge has {len(charge)} components, space needs {space.n_charge}"
        )
    count = _count_sector(space, L, charge)
    if count == 0:
        raise EmptySectorError(f"sector {charge} of {space.name}^{L} is empty")
    if count > SIZE_LIMIT:
        raise SizeLimitError(f"sector dimension {count} exceeds {SIZE_LIMIT}")

    # per-site reachable charge bounds for pruning
    mins = tuple(min(q[i] for q in space.charges) for i in range(space.n_charge))
    maxs = tuple(max(q[i] for q in space.charges) for i in range(space.n_charge))

    configs = []
    stack = [((), (0,) * space.n_charge)]
    # depth-first with the label loop reversed so pops come out lexicographic
    while stack:
        prefix, acc = stack.pop()
        depth = len(prefix)
        if depth == L:
            if acc == charge:
                configs.append(prefix)
            continue
        rest = L - depth - 1
        for label, q in zip(reversed(space.labels), reversed(space.charges)):
            nxt = tuple(a + b for a, b in zip(acc, q))
            feasible = all(
                n + rest * lo <= c <= n + rest * hi
                for n, lo, hi, c in zip(nxt, mins, maxs, charge)
            )
            if feasible:
                stack.append((prefix + (label,), nxt))

    assert len(configs) == count
    basis = SectorBasis(space, L, charge, tuple(configs), {})
    for i, c in enumerate(configs):
        basis.lookup[basis._key(c)] = i
    return basis


def index_of(basis: SectorBasis, config: Configuration) -> int:
    return basis.index_of(config)


@dataclass(frozen=True)
class ParityBasis:
    """Reflection-symmetrized basis of one parity block.

    members holds (rep_index, partner_index, normalization) triples over the
    parent sector basis; self-symmetric members have partner == rep and
    normalization 1, paired members use 1/sqrt(2). matrix rows are the
    symmetrized vectors expressed over the parent basis.
    """

    parent: SectorBasis
    sign: int
    members: tuple
    matrix: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.members)

    def configs(self) -> tuple:
        return tuple(self.parent.configs[m[0]] for m in self.members)

    def index_of(self, config: Configuration) -> int:
        """Member whose representative or partner equals the configuration."""
        idx = self.parent.index_of(config)
        for k, (rep, partner, _) in enumerate(self.members):
            if idx in (rep, partner):
                return k
        raise NotInSectorError(f"config {config} has no member in parity {self.sign}")

    def expand(self, amps: np.ndarray) -> np.ndarray:
        """Parity-block coordinates -> full sector coordinates."""
        return self.matrix.T @ amps

    def project(self, amps: np.ndarray) -> np.ndarray:
        """Full sector coordinates -> parity-block coordinates."""
        return self.matrix @ amps


def parity_project(basis: SectorBasis, sign: int) -> ParityBasis:
    """Orthonormal reflection-eigenbasis of one parity block."""
    if sign not in (+1, -1):
        raise ValueError("parity sign must be +1 or -1")
    perm = basis.reflect_permutation()
    members = []
    rows = []
    for i in range(basis.dim):
        r = int(perm[i])
        if r == i:
            if sign == +1:
                members.append((i, i, 1.0))
                row = np.zeros(basis.dim)
                row[i] = 1.0
                rows.append(row)
        elif r > i:
            members.append((i, r, SQRT_HALF))
            row = np.zeros(basis.dim)
            row[i] = SQRT_HALF
            row[r] = sign * SQRT_HALF
            rows.append(row)
    matrix = np.array(rows) if rows else np.zeros((0, basis.dim))
    return ParityBasis(basis, sign, tuple(members), matrix)


def symmetrized_state(basis: SectorBasis, config: Configuration, sign: int = +1):
    """Normalized reflection eigenvector built from one configuration."""
    i = basis.index_of(config)
    r = basis.index_of(reflection(tuple(config)))
    v = np.zeros(basis.dim, dtype=complex)
    if i == r:
        if sign == -1:
            raise ValueError(f"{config} is self-symmetric, no odd combination")
        v[i] = 1.0
    else:
        v[i] = SQRT_HALF
        v[r] = sign * SQRT_HALF
    return v


def bose_hubbard_dimension(L: int, N: int) -> int:
    """Unconstrained boson sector count (N+L-1)! / (N! (L-1)!)."""
    return math.comb(N + L - 1, N)
