"""Config-driven experiment runner: runs, frequency sweeps, stability scans.

Experiments are described by TOML files (hand-editable presets mirroring the
reference figure parameters). Every run writes one CSV per observable family
plus a JSON manifest recording the resolved drive, basis dimension, and the
convergence evidence behind the numbers. CSV content is deterministic:
identical configs give byte-identical files regardless of worker count.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import observables as obs
from .basis import symmetrized_state
from .errors import ConfigError
from .floquet import fractional_weight, resonance_weight
from .models import (
    DriveSpec,
    DrivenModel,
    build_bose_hubbard,
    build_jch,
    build_spin1_xxz,
    build_spin_ladder,
    chi,
    jch_label,
    to_polariton_frame,
)
from .propagate import (
    StateVector,
    basis_state,
    continuous_evolve,
    period_propagator,
    sparse_evolve,
    stroboscopic_evolve,
)

MODEL_KINDS = ("bose_hubbard", "spin1_xxz", "jch", "spin_ladder")
OBSERVABLE_NAMES = (
    "populations",
    "pr",
    "config_count",
    "entropy",
    "echo",
    "heating",
    "autocorr",
)
HOP_SIGNS = {"bose_hubbard": -1, "jch": -1, "spin1_xxz": +1, "spin_ladder": +1}
FLOAT_FMT = "%.12g"


def worker_count(n_tasks: int) -> int:
    """Worker cap from FLOQSIM_THREADS (default: available cores)."""
    env = os.environ.get("FLOQSIM_THREADS")
    if env is None:
        cap = os.cpu_count() or 1
    else:
        try:
            cap = int(env)
        except ValueError:
            cap = 0
        if cap < 1:
            raise ConfigError(f"FLOQSIM_THREADS: positive integer required, got {env!r}")
    return max(1, min(cap, n_tasks))


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Validated description of one simulation run."""

    model: str
    L: int
    charge: object = None  # N / total S_z / excitation count / per-leg pair
    n_max: Optional[int] = None
    J0: float = 0.01
    U: float = 0.4
    omega: float = 1.0
    g: float = 0.4
    Delta: float = 0.0
    rung_coupling: Optional[float] = None
    drive: object = "integer"  # "integer" | "fractional" | explicit Omega
    delta_omega_rel: float = 0.0
    periods: int = 40
    steps_per_period: int = 256
    sampling: str = "stroboscopic"  # or "continuous"
    samples_per_period: int = 4
    method: str = "auto"  # "dense" | "sparse" | "auto"
    observables: tuple = ("populations",)
    cut: int = 1
    threshold: float = 1e-3
    initial: Optional[tuple] = None
    label: str = "run"
    # frequency-sweep labels (m_j, m_k, m_l) and hop branch
    sweep_m: tuple = (1, 1, 1)
    sweep_branch: int = +1
    # stability-scan settings
    deltas: tuple = ()
    probe_period: Optional[int] = None

    def resolved_omega(self) -> float:
        if isinstance(self.drive, (int, float)):
            if self.drive <= 0:
                raise ConfigError("drive: explicit frequency must be positive")
            return float(self.drive)
        if self.model == "jch":
            # energy cost of moving one excitation out of the uniform
            # dressed state: 2 chi(1) - chi(2) - Delta/2
            base = 2.0 * chi(1, self.g, self.Delta) - chi(2, self.g, self.Delta)
            base -= 0.5 * self.Delta
        else:
            base = self.U
        if self.drive == "integer":
            return base
        if self.drive == "fractional":
            return 0.5 * base
        raise ConfigError(f"drive: unknown kind {self.drive!r}")


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"{name}: expected a table")
    return value


def config_from_dict(data: dict, label: str = "run") -> ExperimentConfig:
    """Build and validate an ExperimentConfig from parsed TOML data."""
    model_tab = _section(data, "model")
    params = _section(data, "parameters")
    drive_tab = _section(data, "drive")
    evo = _section(data, "evolution")
    obs_tab = _section(data, "observables")
    sweep_tab = _section(data, "sweep")
    stab_tab = _section(data, "stability")

    kind = model_tab.get("kind")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"model.kind: must be one of {MODEL_KINDS}, got {kind!r}")
    L = model_tab.get("L")
    if not isinstance(L, int) or L < 2:
        raise ConfigError("model.L: integer >= 2 required")

    charge = model_tab.get("N", model_tab.get("sz", model_tab.get("excitations")))
    if kind == "spin_ladder" and charge is not None and not isinstance(charge, int):
        charge = tuple(charge)

    n_max = model_tab.get("n_max")
    if n_max is not None and (not isinstance(n_max, int) or n_max < 1):
        raise ConfigError("model.n_max: integer >= 1 required")

    drive_kind = drive_tab.get("kind", "integer")
    if "omega" in drive_tab:
        drive_kind = float(drive_tab["omega"])
    elif drive_kind not in ("integer", "fractional"):
        raise ConfigError(
            f"drive.kind: 'integer', 'fractional' or drive.omega, got {drive_kind!r}"
        )

    names = tuple(obs_tab.get("names", ("populations",)))
    for name in names:
        if name not in OBSERVABLE_NAMES:
            raise ConfigError(
                f"observables.names: unknown {name!r}, choose from {OBSERVABLE_NAMES}"
            )

    sampling = evo.get("sampling", "stroboscopic")
    if sampling not in ("stroboscopic", "continuous"):
        raise ConfigError("evolution.sampling: 'stroboscopic' or 'continuous'")
    method = evo.get("method", "auto")
    if method not in ("auto", "dense", "sparse"):
        raise ConfigError("evolution.method: 'auto', 'dense' or 'sparse'")

    cfg = ExperimentConfig(
        model=kind,
        L=L,
        charge=charge,
        n_max=n_max,
        J0=float(params.get("J0", 0.01)),
        U=float(params.get("U", 40 * float(params.get("J0", 0.01)))),
        omega=float(params.get("omega", 1.0)),
        g=float(params.get("g", 40 * float(params.get("J0", 0.01)))),
        Delta=float(params.get("Delta", 0.0)),
        rung_coupling=params.get("rung_coupling"),
        drive=drive_kind,
        delta_omega_rel=float(drive_tab.get("delta_omega_rel", 0.0)),
        periods=int(evo.get("periods", 40)),
        steps_per_period=int(evo.get("steps_per_period", 256)),
        sampling=sampling,
        samples_per_period=int(evo.get("samples_per_period", 4)),
        method=method,
        observables=names,
        cut=int(obs_tab.get("cut", max(1, L // 2))),
        threshold=float(obs_tab.get("threshold", 1e-3)),
        initial=tuple(model_tab["initial"]) if "initial" in model_tab else None,
        label=str(data.get("label", label)),
        sweep_m=(
            int(sweep_tab.get("m_j", 1)),
            int(sweep_tab.get("m_k", 1)),
            int(sweep_tab.get("m_l", 1)),
        ),
        sweep_branch=int(sweep_tab.get("branch", +1)),
        deltas=tuple(float(d) for d in stab_tab.get("deltas", ())),
        probe_period=stab_tab.get("probe_period"),
    )

    for fname in ("J0", "U", "omega", "g"):
        if getattr(cfg, fname) <= 0:
            raise ConfigError(f"parameters.{fname}: must be positive")
    if cfg.periods < 0:
        raise ConfigError("evolution.periods: must be >= 0")
    if not 1 <= cfg.cut < cfg.L:
        raise ConfigError(f"observables.cut: must lie in 1..{cfg.L - 1}")
    return cfg


def config_from_toml(path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error in {path}: {exc}")
    return config_from_dict(data, label=path.stem)


# ---------------------------------------------------------------------------
# Model assembly
# ---------------------------------------------------------------------------

def default_initial(cfg: ExperimentConfig) -> tuple:
    if cfg.initial is not None:
        return cfg.initial
    if cfg.model == "bose_hubbard":
        return (1,) * cfg.L
    if cfg.model == "spin1_xxz":
        return (0,) * cfg.L
    if cfg.model == "jch":
        return (jch_label(1, 0),) * cfg.L  # one lower-branch excitation per site
    if cfg.model == "spin_ladder":
        # alternate the excited leg along the ladder
        return tuple(2 if j % 2 == 0 else 1 for j in range(cfg.L))
    raise ConfigError(f"model.kind: {cfg.model!r}")


def build_model(cfg: ExperimentConfig) -> DrivenModel:
    """DrivenModel for a config; cavity lattices arrive polariton-framed."""
    drive = DriveSpec(
        J0=cfg.J0,
        Omega=cfg.resolved_omega(),
        hop_sign=HOP_SIGNS[cfg.model],
        delta_Omega=cfg.delta_omega_rel,
    )
    initial = default_initial(cfg)
    if len(initial) != cfg.L:
        raise ConfigError("model.initial: length must equal model.L")

    if cfg.model == "bose_hubbard":
        N = cfg.charge if cfg.charge is not None else sum(initial)
        model = build_bose_hubbard(cfg.L, N, cfg.n_max, cfg.U, cfg.omega, drive)
    elif cfg.model == "spin1_xxz":
        model = build_spin1_xxz(cfg.L, cfg.U, drive)
    elif cfg.model == "jch":
        n_exc = (
            cfg.charge
            if cfg.charge is not None
            else sum((l >> 1) + (l & 1) for l in initial)
        )
        n_ph = cfg.n_max if cfg.n_max is not None else n_exc
        model = build_jch(
            cfg.L, n_exc, n_ph, cfg.g, cfg.omega, cfg.omega + cfg.Delta, drive
        )
        model = to_polariton_frame(model)
    elif cfg.model == "spin_ladder":
        charge = cfg.charge
        if charge is None:
            charge = tuple(
                int(sum((l >> i) & 1 for l in initial)) for i in (1, 0)
            )
        model = build_spin_ladder(
            cfg.L, cfg.U, drive, charge=charge, rung_coupling=cfg.rung_coupling
        )
    else:
        raise ConfigError(f"model.kind: {cfg.model!r}")
    return model


def initial_state(cfg: ExperimentConfig, model: DrivenModel) -> StateVector:
    return basis_state(model.basis, default_initial(cfg))


def default_targets(cfg: ExperimentConfig, model: DrivenModel) -> list:
    """(name, StateVector) population targets.

    Three-site models get the full named state ladder of the reference
    dynamics (uniform state plus symmetrized transfer states); larger
    lattices track the initial configuration only.
    """
    basis = model.basis

    def sym(config):
        return StateVector(symmetrized_state(basis, config), 0.0, basis)

    if cfg.model == "bose_hubbard" and cfg.L == 3 and sum(default_initial(cfg)) == 3:
        return [
            ("psi0", basis_state(basis, (1, 1, 1))),
            ("psi1", sym((0, 2, 1))),
            ("psi2", sym((1, 0, 2))),
            ("psi3", sym((0, 1, 2))),
            ("psi4", basis_state(basis, (0, 3, 0))),
            ("psi5", sym((0, 0, 3))),
        ]
    if cfg.model == "spin1_xxz" and cfg.L == 3:
        return [
            ("psi0", basis_state(basis, (0, 0, 0))),
            ("psi1", sym((1, -1, 0))),
            ("psi2", sym((-1, 1, 0))),
            ("psi3", sym((1, 0, -1))),
        ]
    if cfg.model == "jch" and cfg.L == 3:
        one, two, vac = jch_label(1, 0), jch_label(2, 0), jch_label(0, 0)
        return [
            ("psi0", basis_state(basis, (one, one, one))),
            ("psi1", sym((two, vac, one))),
            ("psi2", sym((vac, two, one))),
            ("psi3", sym((two, one, vac))),
        ]
    return [("psi0", initial_state(cfg, model))]


# ---------------------------------------------------------------------------
# Evolution and collection
# ---------------------------------------------------------------------------

def _evolve(cfg: ExperimentConfig, model: DrivenModel, psi0: StateVector):
    """Evolved states on the configured grid plus convergence evidence."""
    T = model.drive.period
    use_sparse = cfg.method == "sparse" or (
        cfg.method == "auto" and model.dim > 600
    )
    info = {"method": "sparse" if use_sparse else "dense"}
    if cfg.sampling == "stroboscopic" and not use_sparse:
        prop = period_propagator(model, cfg.steps_per_period)
        states = stroboscopic_evolve(prop, psi0, cfg.periods)
        info.update(
            steps_per_period=prop.steps,
            doubling_defect=prop.defect,
            unitarity_defect=prop.unitarity_defect,
        )
        return states, info
    if cfg.sampling == "stroboscopic":
        grid = [n * T for n in range(1, cfg.periods + 1)]
    else:
        per = cfg.samples_per_period
        grid = [k * T / per for k in range(1, cfg.periods * per + 1)]
    info["steps_per_period"] = cfg.steps_per_period
    if use_sparse:
        states = sparse_evolve(model, psi0, grid, cfg.steps_per_period)
    else:
        states = continuous_evolve(model, psi0, grid, cfg.steps_per_period)
    return [psi0] + states, info


def collect(cfg: ExperimentConfig, model: DrivenModel, states, targets) -> dict:
    """Observable families -> (headers, rows) keyed by family name."""
    T = model.drive.period
    t_over_T = [s.t / T for s in states]
    psi0 = states[0]
    families: dict = {}

    def add(name, headers, columns):
        rows = list(zip(t_over_T, *columns))
        families[name] = (["t_over_T"] + headers, rows)

    if "populations" in cfg.observables:
        pops = np.array(
            [obs.populations(s, [t for _, t in targets]) for s in states]
        )
        add(
            "populations",
            [f"P_{name}" for name, _ in targets],
            [pops[:, j] for j in range(pops.shape[1])],
        )
    loc_headers, loc_cols = [], []
    if "pr" in cfg.observables:
        loc_headers.append("PR")
        loc_cols.append([obs.participation_ratio(s) for s in states])
    if "config_count" in cfg.observables:
        loc_headers.append("n_configs")
        loc_cols.append(
            [obs.configuration_count(s, cfg.threshold) for s in states]
        )
    if loc_cols:
        add("localization", loc_headers, loc_cols)
    if "entropy" in cfg.observables:
        add(
            "entropy",
            [f"S_vN_cut{cfg.cut}"],
            [[obs.von_neumann_entropy(s, cfg.cut) for s in states]],
        )
    if "echo" in cfg.observables:
        add("echo", ["echo"], [[obs.loschmidt_echo(psi0, s) for s in states]])
    if "heating" in cfg.observables:
        series = obs.heating_rate_series(states, model)
        add(
            "heating",
            ["eps_n", "heat_rate"],
            [series.column("eps_n"), series.column("heat_rate")],
        )
    if "autocorr" in cfg.observables:
        corr = np.array([obs.autocorrelations(psi0, s, model) for s in states])
        add(
            "autocorr",
            [f"Cj_{j + 1}" for j in range(model.basis.L)],
            [corr[:, j] for j in range(corr.shape[1])],
        )
    return families


def write_csv(path: Path, headers, rows):
    with open(path, "w") as fh:
        fh.write(",".join(headers) + "\n")
        for row in rows:
            fh.write(",".join(FLOAT_FMT % v for v in row) + "\n")


# ---------------------------------------------------------------------------
# Top-level operations
# ---------------------------------------------------------------------------

def run(cfg: ExperimentConfig, out_dir, figures: bool = True) -> dict:
    """Execute one run; write per-family CSVs, manifest, and figures."""
    t_start = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = build_model(cfg)
    psi0 = initial_state(cfg, model)
    targets = default_targets(cfg, model)
    states, info = _evolve(cfg, model, psi0)
    families = collect(cfg, model, states, targets)
    for name, (headers, rows) in families.items():
        write_csv(out / f"{name}.csv", headers, rows)
    manifest = {
        "label": cfg.label,
        "model": cfg.model,
        "dimension": model.dim,
        "omega_drive": model.drive.Omega,
        "omega_effective": model.drive.omega_eff,
        "period": model.drive.period,
        "periods": cfg.periods,
        "sampling": cfg.sampling,
        "evolution": info,
        "observable_files": sorted(f"{n}.csv" for n in families),
        "wall_clock_s": round(time.perf_counter() - t_start, 3),
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    if figures and families:
        from . import plotting

        plotting.render_run(out, cfg, families)
    return manifest


def _sweep_point(args):
    omega, U, m, branch = args
    f = resonance_weight(omega, U, m[0], m[1], branch)
    f1, f2 = fractional_weight(omega, U, *m)
    return (
        omega,
        omega / U,
        f.real,
        f.imag,
        abs(f),
        f1.real,
        f1.imag,
        abs(f1),
        f2.real,
        f2.imag,
        abs(f2),
    )


SWEEP_HEADERS = [
    "omega",
    "omega_over_U",
    "re_F",
    "im_F",
    "abs_F",
    "re_F1",
    "im_F1",
    "abs_F1",
    "re_F2",
    "im_F2",
    "abs_F2",
]


def sweep_omega(
    cfg: ExperimentConfig, grid: Sequence[float], out_dir, figures: bool = True
) -> dict:
    """Resonance-weight structure over a drive-frequency grid.

    Points evaluate concurrently; the merge preserves grid order so the CSV
    is byte-identical for any worker count.
    """
    grid = [float(w) for w in grid]
    if any(w <= 0 for w in grid):
        raise ConfigError("sweep grid frequencies must be positive")
    if any(w > 2.0 * cfg.U for w in grid):
        raise ConfigError("sweep grid extends beyond 2U")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(w, cfg.U, cfg.sweep_m, cfg.sweep_branch) for w in grid]
    with ThreadPoolExecutor(max_workers=worker_count(len(tasks))) as pool:
        rows = list(pool.map(_sweep_point, tasks))
    write_csv(out / "sweep.csv", SWEEP_HEADERS, rows)
    manifest = {
        "label": cfg.label,
        "U": cfg.U,
        "labels_mjkl": list(cfg.sweep_m),
        "branch": cfg.sweep_branch,
        "points": len(rows),
        "grid": [grid[0], grid[-1]],
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    if figures:
        from . import plotting

        plotting.render_sweep(out, cfg, rows)
    return manifest


def stability_scan(
    cfg: ExperimentConfig,
    deltas: Sequence[float],
    out_dir,
    figures: bool = True,
) -> dict:
    """Entropy-vs-time curves for a family of drive detunings.

    Each detuning evolves independently (concurrently up to the worker cap);
    the summary records the probe-time entropy and its ratio to the
    undetuned baseline.
    """
    if cfg.drive == "integer":
        raise ConfigError("stability: fractional (or explicit) drive required")
    deltas = [float(d) for d in deltas]
    if not deltas:
        raise ConfigError("stability.deltas: at least one value required")
    if deltas[0] != 0.0:
        deltas = [0.0] + [d for d in deltas if d != 0.0]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = cfg.probe_period if cfg.probe_period is not None else cfg.periods
    if not 0 < probe <= cfg.periods:
        raise ConfigError("stability.probe_period: must lie in 1..periods")

    def one(delta: float):
        sub = ExperimentConfig(**{**asdict(cfg), "delta_omega_rel": delta})
        model = build_model(sub)
        psi0 = initial_state(sub, model)
        states, _ = _evolve(sub, model, psi0)
        return [obs.von_neumann_entropy(s, cfg.cut) for s in states]

    with ThreadPoolExecutor(max_workers=worker_count(len(deltas))) as pool:
        curves = list(pool.map(one, deltas))

    headers = ["t_over_T"] + [f"S_delta_{FLOAT_FMT % d}" for d in deltas]
    rows = [
        [float(n)] + [curve[n] for curve in curves]
        for n in range(cfg.periods + 1)
    ]
    write_csv(out / "stability.csv", headers, rows)

    base = curves[0][probe]
    summary_rows = [
        (d, curve[probe], curve[probe] / base if base > 0 else float("inf"))
        for d, curve in zip(deltas, curves)
    ]
    write_csv(
        out / "stability_summary.csv",
        ["delta_omega_rel", "S_probe", "ratio_to_baseline"],
        summary_rows,
    )
    manifest = {
        "label": cfg.label,
        "deltas": deltas,
        "probe_period": probe,
        "cut": cfg.cut,
        "periods": cfg.periods,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
    if figures:
        from . import plotting

        plotting.render_stability(out, cfg, deltas, rows, probe)
    return manifest


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def _preset_dir():
    return resources.files("floqsim") / "presets"


def list_presets() -> list:
    return sorted(p.name[:-5] for p in _preset_dir().iterdir() if p.name.endswith(".toml"))


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_preset(name: str):
    """Preset header plus the list of (label, ExperimentConfig) variants."""
    path = _preset_dir() / f"{name}.toml"
    if not path.is_file():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    data = tomllib.loads(path.read_text())
    header = data.get("preset", {})
    base = data.get("base", {})
    variants = data.get("variant", [{}])
    configs = []
    for var in variants:
        label = var.pop("label", header.get("name", name))
        merged = _deep_merge(base, var)
        configs.append(config_from_dict({**merged, "label": label}, label=label))
    return header, configs


def run_preset(name: str, out_dir, figures: bool = True) -> dict:
    """Execute a named preset into out_dir (one subdirectory per variant)."""
    header, configs = load_preset(name)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kind = header.get("kind", "run")
    manifests = []
    results = []
    for cfg in configs:
        sub = out / cfg.label
        if kind == "stability":
            manifests.append(stability_scan(cfg, cfg.deltas, sub, figures=figures))
        else:
            manifests.append(run(cfg, sub, figures=figures))
            if figures:
                results.append((cfg, sub))
    top = {
        "preset": name,
        "title": header.get("title", name),
        "kind": kind,
        "variants": [m["label"] for m in manifests],
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(top, fh, indent=2)
    if figures and kind == "run" and len(results) > 1:
        from . import plotting

        plotting.render_comparison(out, header, results)
    return top
