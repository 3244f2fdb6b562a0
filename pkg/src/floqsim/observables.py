"""Diagnostics over evolved states: populations, localization, entanglement.

All quantities are pure functions of StateVector inputs. Parity-frame states
are expanded back to the configuration basis where the definition requires
it (participation ratio, configuration counts, occupations), because the
localization measures count configurations, not symmetrized pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .basis import ParityBasis, SectorBasis
from .errors import (
    BasisMismatchError,
    CutOutOfRangeError,
    SizeLimitError,
)
from .models import DrivenModel
from .propagate import StateVector, _require_same_basis

EMBED_LIMIT = 10**8  # full product-space entries allowed transiently


def _sector_amps(psi: StateVector):
    """(sector_basis, amplitudes over configurations) for any frame."""
    if isinstance(psi.basis, ParityBasis):
        return psi.basis.parent, psi.basis.expand(psi.amps)
    return psi.basis, psi.amps


def populations(psi: StateVector, targets: Sequence[StateVector]) -> np.ndarray:
    """P_j = |<target_j | psi>|^2 for orthonormal target states."""
    out = np.empty(len(targets))
    for j, target in enumerate(targets):
        _require_same_basis(psi.basis, target.basis)
        out[j] = abs(np.vdot(target.amps, psi.amps)) ** 2
    return out


def participation_ratio(psi: StateVector) -> float:
    """PR = 1 / sum_l |c_l|^4 over the configuration basis; in [1, dim]."""
    _, amps = _sector_amps(psi)
    p = np.abs(amps) ** 2
    return float(1.0 / np.sum(p * p))


def configuration_count(psi: StateVector, threshold: float = 1e-3) -> int:
    """Number of configurations with population above the threshold."""
    _, amps = _sector_amps(psi)
    return int(np.count_nonzero(np.abs(amps) ** 2 > threshold))


def von_neumann_entropy(psi: StateVector, cut: int) -> float:
    """Bipartite entanglement entropy across sites 1..cut | cut+1..L.

    The sector state is embedded into the full product space (transiently),
    reshaped across the cut, and reduced by singular values. Invariant under
    local-basis rotations, so bare and dressed frames agree.
    """
    basis, amps = _sector_amps(psi)
    L, d = basis.L, basis.local_dim
    if not 1 <= cut < L:
        raise CutOutOfRangeError(f"cut {cut} outside 1..{L - 1}")
    if d**L > EMBED_LIMIT:
        raise SizeLimitError(f"product space {d}^{L} exceeds the embed guard")
    codes = basis.codes()
    weights = d ** np.arange(L - 1, -1, -1, dtype=np.int64)
    flat = codes @ weights
    full = np.zeros(d**L, dtype=complex)
    full[flat] = amps
    sigma = np.linalg.svd(full.reshape(d**cut, d ** (L - cut)), compute_uv=False)
    p = sigma[sigma > 1e-12] ** 2
    return float(max(-np.sum(p * np.log(p)), 0.0))


def loschmidt_echo(psi0: StateVector, psi_t: StateVector) -> float:
    """|<psi(0)|psi(t)>|^2."""
    _require_same_basis(psi0.basis, psi_t.basis)
    return float(abs(np.vdot(psi0.amps, psi_t.amps)) ** 2)


def site_occupations(psi: StateVector) -> np.ndarray:
    """<n_j> per site (occupation = site charge above the lowest label)."""
    basis, amps = _sector_amps(psi)
    p = np.abs(amps) ** 2
    return p @ basis.occupations()


def autocorrelations(
    psi0: StateVector, psi_t: StateVector, model: DrivenModel
) -> np.ndarray:
    """C_j(t) = (2<n_j(t)> - 1)(2<n_j(0)> - 1) per site."""
    _require_same_basis(psi0.basis, psi_t.basis)
    n0 = site_occupations(psi0)
    nt = site_occupations(psi_t)
    return (2.0 * nt - 1.0) * (2.0 * n0 - 1.0)


def static_energy(psi: StateVector, model: DrivenModel) -> float:
    """<psi| H0 |psi> including the uniform local-frequency term."""
    basis, amps = _sector_amps(psi)
    if not _sector_basis_matches(basis, model.basis):
        raise BasisMismatchError("state basis does not match the model")
    return float(np.real(np.vdot(amps, model.h0_matrix() @ amps)))


def _sector_basis_matches(a: SectorBasis, b: SectorBasis) -> bool:
    return a is b or a.configs == b.configs


@dataclass(frozen=True)
class ObservableSeries:
    """Per-time named values with a uniform key set."""

    times: tuple
    records: tuple  # tuple of dicts

    def __post_init__(self):
        if len(self.times) != len(self.records):
            raise ValueError("times and records must align")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must strictly increase")
        keys = None
        for rec in self.records:
            if keys is None:
                keys = set(rec)
            elif set(rec) != keys:
                raise ValueError("records carry differing key sets")

    @property
    def keys(self) -> list:
        return list(self.records[0]) if self.records else []

    def column(self, name: str) -> np.ndarray:
        return np.array([rec[name] for rec in self.records])


def heating_rate_series(
    states: Sequence[StateVector], model: DrivenModel
) -> ObservableSeries:
    """Stroboscopic energies eps_n = <H0> and per-period rates.

    heat_rate at entry n is (eps_n - eps_{n-1}) / T; the first entry is 0.
    """
    T = model.drive.period
    eps = np.array([static_energy(s, model) for s in states])
    rate = np.zeros_like(eps)
    rate[1:] = np.diff(eps) / T
    times = tuple(s.t for s in states)
    records = tuple(
        {"eps_n": float(e), "heat_rate": float(r)} for e, r in zip(eps, rate)
    )
    return ObservableSeries(times, records)
