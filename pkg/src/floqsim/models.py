"""Driven lattice models: static part, hopping operator, drive descriptor.

All models share the structure H(t) = hbar*H0 + hop_sign*hbar*J0*cos(W*t)*h_hop
over a fixed symmetry sector, with hbar = 1. H0 is diagonal in the
configuration basis for every model except the coupled-cavity lattice, whose
static part is block-local (one light-matter block per site); a one-time
rotation into the local polariton eigenbasis diagonalizes it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .basis import (
    LocalSpace,
    SectorBasis,
    enumerate_sector,
    jch_label,
    split_jch_label,
)
from .errors import NonDiagonalStaticError


@dataclass(frozen=True)
class DriveSpec:
    """Periodic hopping drive J(t) = J0 cos((1 + delta_Omega) * Omega * t)."""

    J0: float
    Omega: float
    hop_sign: int = -1
    delta_Omega: float = 0.0  # relative detuning, dimensionless

    def __post_init__(self):
        if self.J0 <= 0:
            raise ValueError("J0 must be positive")
        if self.Omega <= 0:
            raise ValueError("Omega must be positive")
        if self.hop_sign not in (+1, -1):
            raise ValueError("hop_sign must be +1 or -1")

    @property
    def omega_eff(self) -> float:
        """Actual drive angular frequency including the detuning."""
        return self.Omega * (1.0 + self.delta_Omega)

    @property
    def period(self) -> float:
        """True period of the (possibly detuned) drive."""
        return 2.0 * math.pi / self.omega_eff

    def amplitude(self, t: float) -> float:
        return self.J0 * math.cos(self.omega_eff * t)


@dataclass(frozen=True)
class DrivenModel:
    """A driven Hamiltonian over one symmetry sector.

    Exactly one of h0_diag / h0_block is set. h_hop is the bare hopping
    operator (drive amplitude and sign excluded). frame records the local
    basis the matrices are expressed in; frame_matrix, when present, maps
    frame coordinates to bare coordinates.
    """

    kind: str
    basis: SectorBasis
    h_hop: sp.csr_matrix = field(repr=False)
    drive: DriveSpec
    params: dict
    h0_diag: Optional[np.ndarray] = field(default=None, repr=False)
    h0_block: Optional[sp.csr_matrix] = field(default=None, repr=False)
    frame: str = "bare"
    frame_matrix: Optional[sp.csr_matrix] = field(default=None, repr=False)

    def __post_init__(self):
        if (self.h0_diag is None) == (self.h0_block is None):
            raise ValueError("exactly one of h0_diag / h0_block must be set")

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def static_is_diagonal(self) -> bool:
        return self.h0_diag is not None

    def static_energies(self) -> np.ndarray:
        if not self.static_is_diagonal:
            raise NonDiagonalStaticError(
                f"{self.kind} static part is block-local in frame '{self.frame}'; "
                "rotate with to_polariton_frame first"
            )
        return self.h0_diag

    def h0_matrix(self) -> sp.csr_matrix:
        if self.static_is_diagonal:
            return sp.diags(self.h0_diag, format="csr")
        return self.h0_block


def _assemble(basis: SectorBasis, moves) -> sp.csr_matrix:
    """Build a Hermitian operator from a per-config move generator.

    moves(config) yields (new_config, amplitude) pairs for the raising half
    of the operator; the conjugate half is added by symmetrization.
    """
    rows, cols, vals = [], [], []
    for c_idx, config in enumerate(basis.configs):
        for new_config, amp in moves(config):
            r_idx = basis.index_of(new_config)
            rows.append(r_idx)
            cols.append(c_idx)
            vals.append(amp)
    half = sp.csr_matrix(
        (vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=float
    )
    return (half + half.T).tocsr()


# ---------------------------------------------------------------------------
# Bose-Hubbard chain
# ---------------------------------------------------------------------------

def default_n_max(L: int, N: int) -> int:
    """Occupation cutoff policy: full (N) for small lattices, 2 beyond L=6."""
    return N if L <= 6 else 2


def build_bose_hubbard(
    L: int,
    N: int,
    n_max: Optional[int],
    U: float,
    omega: float,
    drive: DriveSpec,
) -> DrivenModel:
    """Softcore bosons with on-site interaction and driven hopping."""
    if n_max is None:
        n_max = default_n_max(L, N)
    basis = enumerate_sector(L, N, LocalSpace.boson(n_max))

    h0 = np.array(
        [
            sum(omega * n + 0.5 * U * n * (n - 1) for n in c)
            for c in basis.configs
        ],
        dtype=float,
    )

    def moves(config):
        # boson hop j -> j+1 with amplitude sqrt(n_j (n_{j+1}+1))
        for j in range(L - 1):
            nj, nk = config[j], config[j + 1]
            if nj > 0 and nk < n_max:
                new = list(config)
                new[j] -= 1
                new[j + 1] += 1
                yield tuple(new), math.sqrt(nj * (nk + 1))

    return DrivenModel(
        kind="bose_hubbard",
        basis=basis,
        h_hop=_assemble(basis, moves),
        drive=drive,
        params={"U": U, "omega": omega, "N": N, "n_max": n_max},
        h0_diag=h0,
    )


# ---------------------------------------------------------------------------
# Spin-1 XXZ chain with single-ion anisotropy
# ---------------------------------------------------------------------------

def _spin1_ladder_amp(m: int, up: bool) -> float:
    # <m+-1| S^+- |m> = sqrt(2 - m(m +- 1)) for spin 1
    return math.sqrt(2 - m * (m + 1)) if up else math.sqrt(2 - m * (m - 1))


def build_spin1_xxz(L: int, U: float, drive: DriveSpec) -> DrivenModel:
    """Spin-1 chain, anisotropy (U/2) sum_j (S^z_j)^2, driven XX exchange."""
    basis = enumerate_sector(L, 0, LocalSpace.spin1())

    h0 = np.array(
        [0.5 * U * sum(m * m for m in c) for c in basis.configs], dtype=float
    )

    def moves(config):
        # S^+_j S^-_{j+1} moves one magnetization quantum j+1 -> j
        for j in range(L - 1):
            mj, mk = config[j], config[j + 1]
            if mj < 1 and mk > -1:
                new = list(config)
                new[j] += 1
                new[j + 1] -= 1
                yield tuple(new), _spin1_ladder_amp(mj, True) * _spin1_ladder_amp(
                    mk, False
                )

    return DrivenModel(
        kind="spin1_xxz",
        basis=basis,
        h_hop=_assemble(basis, moves),
        drive=drive,
        params={"U": U},
        h0_diag=h0,
    )


# ---------------------------------------------------------------------------
# Coupled cavity array (photon hopping between light-matter sites)
# ---------------------------------------------------------------------------

def chi(n: int, g: float, Delta: float) -> float:
    """Local light-matter splitting sqrt(Delta^2/4 + g^2 n)."""
    return math.sqrt(0.25 * Delta * Delta + g * g * n)


def polariton_energy(n: int, branch: int, omega: float, g: float, Delta: float):
    """Dressed-level energy n*omega + Delta/2 + branch*chi(n); n=0 -> 0."""
    if n == 0:
        return 0.0
    return n * omega + 0.5 * Delta + branch * chi(n, g, Delta)


def polariton_coefficients(n: int, branch: int, g: float, Delta: float) -> tuple:
    """(gamma, rho) of |n,branch> = gamma|s=0,n> + rho|s=1,n-1>, n >= 1."""
    theta = math.atan2(2.0 * g * math.sqrt(n), Delta)
    if branch == +1:
        return math.sin(0.5 * theta), math.cos(0.5 * theta)
    return math.cos(0.5 * theta), -math.sin(0.5 * theta)


def polariton_hop_coefficient(
    n: int, alpha: int, alpha_p: int, g: float, Delta: float
) -> float:
    """Photon-hop matrix element between dressed levels n-1 and n.

    t_n^{alpha alpha'} = sqrt(n) gamma_{(n-1)alpha} gamma_{n alpha'}
                       + sqrt(n-1) rho_{(n-1)alpha} rho_{n alpha'}
    with the n-1 = 0 state entering as gamma=1, rho=0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        # level 0 is the bare vacuum: gamma=1, rho=0, branch label ignored
        gm, rm = 1.0, 0.0
    else:
        gm, rm = polariton_coefficients(n - 1, alpha, g, Delta)
    gp, rp = polariton_coefficients(n, alpha_p, g, Delta)
    return math.sqrt(n) * gm * gp + math.sqrt(n - 1) * rm * rp


def build_jch(
    L: int,
    n_excitations: int,
    n_max_photons: int,
    g: float,
    omega: float,
    omega0: float,
    drive: DriveSpec,
) -> DrivenModel:
    """Cavity lattice with local light-matter coupling and photon hopping.

    The static part is stored block-local (not diagonal): each site
    contributes omega*n_ph + omega0*s + g(|s=1,n-1><s=0,n| + h.c.).
    """
    basis = enumerate_sector(L, n_excitations, LocalSpace.jch(n_max_photons))
    Delta = omega0 - omega
    D = basis.dim

    rows, cols, vals = [], [], []
    for c_idx, config in enumerate(basis.configs):
        diag = 0.0
        for j, label in enumerate(config):
            n_ph, s = split_jch_label(label)
            diag += omega * n_ph + omega0 * s
            # local exchange g a sigma^+ : (n_ph, s=0) -> (n_ph - 1, s=1)
            if s == 0 and n_ph > 0:
                new = list(config)
                new[j] = jch_label(n_ph - 1, 1)
                r_idx = basis.index_of(tuple(new))
                amp = g * math.sqrt(n_ph)
                rows.extend((r_idx, c_idx))
                cols.extend((c_idx, r_idx))
                vals.extend((amp, amp))
        rows.append(c_idx)
        cols.append(c_idx)
        vals.append(diag)
    h0_block = sp.csr_matrix((vals, (rows, cols)), shape=(D, D), dtype=float)
    # symmetric duplicates were added once per direction; csr sums duplicates
    h0_block.sum_duplicates()

    def moves(config):
        # photon hop j -> j+1, TLS untouched
        for j in range(L - 1):
            nj, sj = split_jch_label(config[j])
            nk, sk = split_jch_label(config[j + 1])
            if nj > 0 and nk < n_max_photons:
                new = list(config)
                new[j] = jch_label(nj - 1, sj)
                new[j + 1] = jch_label(nk + 1, sk)
                yield tuple(new), math.sqrt(nj * (nk + 1))

    return DrivenModel(
        kind="jch",
        basis=basis,
        h_hop=_assemble(basis, moves),
        drive=drive,
        params={
            "g": g,
            "omega": omega,
            "omega0": omega0,
            "Delta": Delta,
            "N": n_excitations,
            "n_max_photons": n_max_photons,
        },
        h0_block=h0_block,
    )


def _local_polariton_columns(space: LocalSpace, g: float, Delta: float) -> dict:
    """Per-label expansion of the dressed local states over bare labels.

    Key: dressed label (same slot encoding as bare). Value: list of
    (bare_label, coefficient). Slot (n, s=0) hosts the lower branch of level
    n, slot (n-1, s=1) the upper branch; the vacuum and the top truncation
    slot are passed through unchanged.
    """
    n_levels = max(split_jch_label(l)[0] for l in space.labels) + 1  # photons+1
    cols = {jch_label(0, 0): [(jch_label(0, 0), 1.0)]}
    for n in range(1, n_levels + 1):
        lower_slot = jch_label(n, 0) if n < n_levels else None
        upper_slot = jch_label(n - 1, 1)
        bare_photon = jch_label(n, 0)  # |s=0, n>
        bare_tls = jch_label(n - 1, 1)  # |s=1, n-1>
        if lower_slot is None:
            # top truncated level: single bare state, kept as-is
            cols[upper_slot] = [(bare_tls, 1.0)]
            continue
        gm, rm = polariton_coefficients(n, -1, g, Delta)
        gp, rp = polariton_coefficients(n, +1, g, Delta)
        cols[lower_slot] = [(bare_photon, gm), (bare_tls, rm)]
        cols[upper_slot] = [(bare_photon, gp), (bare_tls, rp)]
    return cols


def polariton_frame_matrix(model: DrivenModel) -> sp.csr_matrix:
    """Sector-basis unitary V with columns = product dressed states."""
    if model.kind != "jch":
        raise ValueError("polariton frame applies to the cavity lattice only")
    basis = model.basis
    cols = _local_polariton_columns(
        basis.space, model.params["g"], model.params["Delta"]
    )
    rows_i, cols_i, vals = [], [], []
    for c_idx, config in enumerate(basis.configs):
        # expand the product over sites; entries stay within the same sector
        expansion = [((), 1.0)]
        for label in config:
            expansion = [
                (prefix + (bare,), coeff * w)
                for prefix, coeff in expansion
                for bare, w in cols[label]
            ]
        for bare_config, coeff in expansion:
            if abs(coeff) < 1e-15:
                continue
            rows_i.append(basis.index_of(bare_config))
            cols_i.append(c_idx)
            vals.append(coeff)
    D = basis.dim
    return sp.csr_matrix((vals, (rows_i, cols_i)), shape=(D, D), dtype=float)


def to_polariton_frame(model: DrivenModel) -> DrivenModel:
    """Rotate a cavity-lattice model into the local dressed eigenbasis.

    The static part becomes exactly diagonal; the hopping operator is
    conjugated with the same unitary (exact, no branch truncation).
    """
    V = polariton_frame_matrix(model)
    omega = model.params["omega"]
    g = model.params["g"]
    Delta = model.params["Delta"]
    n_levels = model.params["n_max_photons"] + 1

    energies = []
    for config in model.basis.configs:
        e = 0.0
        for label in config:
            n_ph, s = split_jch_label(label)
            if s == 0:
                e += polariton_energy(n_ph, -1, omega, g, Delta)
            elif n_ph == n_levels - 1:
                # top truncated slot: bare TLS-excited state
                e += omega * n_ph + (omega + Delta)
            else:
                e += polariton_energy(n_ph + 1, +1, omega, g, Delta)
        energies.append(e)
    h0_diag = np.array(energies, dtype=float)

    h_hop_rot = (V.T @ model.h_hop @ V).tocsr()
    h_hop_rot.data[np.abs(h_hop_rot.data) < 1e-14] = 0.0
    h_hop_rot.eliminate_zeros()

    return replace(
        model,
        h_hop=h_hop_rot,
        h0_diag=h0_diag,
        h0_block=None,
        frame="polariton",
        frame_matrix=V,
    )


# ---------------------------------------------------------------------------
# Two-leg spin-1/2 ladder with rung Ising coupling
# ---------------------------------------------------------------------------

def build_spin_ladder(
    L: int,
    U: float,
    drive: DriveSpec,
    charge: Optional[tuple] = None,
    rung_coupling: Optional[float] = None,
) -> DrivenModel:
    """Two-leg ladder: driven intra-leg XX hopping, static rung sz*sz.

    Each leg's flip number is conserved separately; charge is a (N_a, N_b)
    pair, default half filling per leg. The rung coefficient multiplies
    sum_j sz_a sz_b with sz = +-1 and defaults to U/2; both conventions for
    it appear in the source material, so it stays configurable.
    """
    if charge is None:
        charge = (L // 2, L // 2)
    if rung_coupling is None:
        rung_coupling = 0.5 * U
    basis = enumerate_sector(L, charge, LocalSpace.ladder_rung())

    def sz(m: int) -> int:
        return 2 * m - 1

    h0 = np.array(
        [
            rung_coupling * sum(sz(l >> 1) * sz(l & 1) for l in c)
            for c in basis.configs
        ],
        dtype=float,
    )

    def moves(config):
        # one flip moves along one leg; amplitude 1
        for j in range(L - 1):
            aj, bj = config[j] >> 1, config[j] & 1
            ak, bk = config[j + 1] >> 1, config[j + 1] & 1
            if aj == 1 and ak == 0:
                new = list(config)
                new[j] = ((aj - 1) << 1) | bj
                new[j + 1] = ((ak + 1) << 1) | bk
                yield tuple(new), 1.0
            if bj == 1 and bk == 0:
                new = list(config)
                new[j] = (aj << 1) | (bj - 1)
                new[j + 1] = (ak << 1) | (bk + 1)
                yield tuple(new), 1.0

    return DrivenModel(
        kind="spin_ladder",
        basis=basis,
        h_hop=_assemble(basis, moves),
        drive=drive,
        params={"U": U, "rung_coupling": rung_coupling, "charge": charge},
        h0_diag=h0,
    )


# ---------------------------------------------------------------------------
# Time-dependent Hamiltonian
# ---------------------------------------------------------------------------

def hamiltonian_at(model: DrivenModel, t: float) -> sp.csr_matrix:
    """H(t) = H0 + hop_sign * J0 cos(omega_eff t) * h_hop, sparse Hermitian."""
    amp = model.drive.hop_sign * model.drive.amplitude(t)
    return (model.h0_matrix() + amp * model.h_hop).tocsr()
