"""Declarative scenario runner for the five packaged experiments.

Each scenario builds its model, prepares the initial state, evolves it and
writes machine-readable outputs (long-format CSV series plus a JSON result
summary) together with a manifest carrying config echo, invariant-check
results and sha256 checksums.  Identical configs produce identical data
files; nothing here uses randomness.

Scenarios
---------
kicked_fig4     delta-like potential kick on the emitter site; width-halving
                convergence sweep; survival/escape bookkeeping.
collision_fig5  photon packet hitting a resident polariton, run for the
                non-interacting, finite-U and hardcore models.
gamma_scan_fig6 emission probability versus packet momentum.
longtime_fig7   multi-collision decay of the polariton on a short chain.
raman_fig8      counter-propagating packets creating a polariton.
photon_train    unidirectional two-packet control (no polariton created).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__, analytic
from .errors import CcqedError, ConfigError
from .model import (
    INFINITE,
    Basis,
    ModelKind,
    ModelParams,
    PulseSpec,
    Sector,
    build_hubbard_hamiltonian,
    build_kicked_hamiltonian,
    build_spin_hamiltonian,
    enumerate_basis,
    parity_operator,
)
from .observables import (
    PacketSpec,
    channel_decomposition,
    compose_two_excitation,
    edge_arrival_time,
    equilibrium_average,
    gamma_emission,
    gamma_window_end,
    gaussian_packet,
    p_res,
    polariton_witness,
    trailing_average,
    transmission_reflection,
)
from .propagate import Trajectory, evolve, pulsed_convergence_sweep

SCENARIO_IDS = (
    "kicked_fig4",
    "collision_fig5",
    "gamma_scan_fig6",
    "longtime_fig7",
    "raman_fig8",
    "photon_train",
)

OUT_DIR_ENV = "CCQED_OUT_DIR"

PI = math.pi

_OPTIONAL_SECTIONS = ("variants", "pulse", "momenta", "k0_scan", "witness_window")


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated description of one experiment run."""

    scenario_id: str
    half_length: int
    kappa: float = 1.0
    coupling: float = 2.0
    hubbard_u: float = INFINITE
    variants: tuple[float, ...] | None = None
    packets: tuple[PacketSpec, ...] = ()
    pulse: PulseSpec | None = None
    momenta: tuple[float, ...] | None = None
    t_max: float | None = None
    sample_dt: float = 0.1
    heatmap_dt: float = 0.5
    l0: int = 9
    k0_scan: tuple[float, float, int] | None = None
    t_transmission: float | None = None
    witness_window: tuple[float, float] | None = None
    channel_modes: int = 40
    w_conv_tol: float = 1e-6
    accuracy_tol: float = 1e-9
    bound_boundary_tol: float = analytic.DEFAULT_BOUNDARY_TOL
    out_format: str = "csv"

    def model_params(self, hubbard_u: float | None = None) -> ModelParams:
        u = self.hubbard_u if hubbard_u is None else hubbard_u
        return ModelParams(
            half_length=self.half_length,
            kappa=self.kappa,
            coupling=self.coupling,
            hubbard_u=u,
        )


def default_config(scenario_id: str) -> ScenarioConfig:
    """Built-in configuration reproducing the published parameter sets."""
    if scenario_id == "kicked_fig4":
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=60,
            coupling=0.8,
            pulse=PulseSpec(area=2.0, onset=1.0, width=2e-5),
            t_max=25.0,
            # the bound state here is broad; the constructed state is an
            # exact eigenstate at any length, so accept the short chain
            bound_boundary_tol=1.0,
        )
    if scenario_id == "collision_fig5":
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=100,
            coupling=2.0,
            variants=(0.0, 10.0, INFINITE),
            packets=(PacketSpec(center=-40, momentum=PI / 2, alpha=0.3),),
            t_transmission=60.0,
        )
    if scenario_id == "gamma_scan_fig6":
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=100,
            coupling=2.0,
            packets=(PacketSpec(center=-40, momentum=PI / 2, alpha=0.3),),
            k0_scan=(0.3 * PI, 0.95 * PI, 24),
        )
    if scenario_id == "longtime_fig7":
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=60,
            coupling=2.0,
            packets=(PacketSpec(center=-40, momentum=3 * PI / 4, alpha=0.3),),
            momenta=(PI / 2, 3 * PI / 4),
            t_max=2400.0,
        )
    # witness windows for the two-packet scenarios start once the linear
    # single-photon transients at the emitter have decayed to ~1e-5 and end
    # before any boundary-reflected front can revisit the centre
    if scenario_id == "raman_fig8":
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=100,
            coupling=2.0,
            packets=(
                PacketSpec(center=-40, momentum=PI / 3, alpha=0.3),
                PacketSpec(center=40, momentum=-PI / 3, alpha=0.3),
            ),
            t_max=105.0,
            witness_window=(90.0, 105.0),
        )
    if scenario_id == "photon_train":
        # wider packet spacing than the colliding control: the storage claim
        # assumes neighbouring packets many half-widths apart, and at spacing
        # 30 the second collision still finds lingering slow components of
        # the first packet at the emitter (created weight ~3e-4)
        return ScenarioConfig(
            scenario_id=scenario_id,
            half_length=150,
            coupling=2.0,
            packets=(
                PacketSpec(center=-40, momentum=PI / 3, alpha=0.3),
                PacketSpec(center=-90, momentum=PI / 3, alpha=0.3),
            ),
            t_max=140.0,
            sample_dt=0.25,
            witness_window=(110.0, 140.0),
        )
    raise ConfigError(f"unknown scenario_id {scenario_id!r}; expected one of {SCENARIO_IDS}")


# ---------------------------------------------------------------------------
# config (de)serialization


def _parse_u(value) -> float:
    if value is None or (isinstance(value, str) and value.lower() in ("inf", "infinite")):
        return INFINITE
    return float(value)


def _take(raw: dict, known: dict, where: str) -> dict:
    unknown = set(raw) - set(known)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")
    return {key: caster(raw[key]) for key, caster in known.items() if key in raw}


def _parse_packet(raw: dict) -> PacketSpec:
    fields_ = _take(raw, {"center": int, "momentum": float, "alpha": float}, "packet")
    try:
        return PacketSpec(**fields_)
    except TypeError as exc:
        raise ConfigError(f"incomplete packet spec {raw}: {exc}") from None


def _parse_pulse(raw: dict) -> PulseSpec:
    fields_ = _take(raw, {"area": float, "onset": float, "width": float}, "pulse")
    try:
        return PulseSpec(**fields_)
    except TypeError as exc:
        raise ConfigError(f"incomplete pulse spec {raw}: {exc}") from None


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Validate a JSON-style dict against the scenario schema (strict keys)."""
    if not isinstance(raw, dict) or "scenario_id" not in raw:
        raise ConfigError("config must be an object naming a scenario_id")
    base = default_config(str(raw["scenario_id"]))
    known = {
        "scenario_id": str,
        "half_length": int,
        "kappa": float,
        "coupling": float,
        "hubbard_u": _parse_u,
        "variants": lambda v: tuple(_parse_u(x) for x in v),
        "packets": lambda v: tuple(_parse_packet(p) for p in v),
        "pulse": _parse_pulse,
        "momenta": lambda v: tuple(float(x) for x in v),
        "t_max": lambda v: None if v is None else float(v),
        "sample_dt": float,
        "heatmap_dt": float,
        "l0": int,
        "k0_scan": lambda v: (float(v[0]), float(v[1]), int(v[2])),
        "t_transmission": lambda v: None if v is None else float(v),
        "witness_window": lambda v: (float(v[0]), float(v[1])),
        "channel_modes": int,
        "w_conv_tol": float,
        "accuracy_tol": float,
        "bound_boundary_tol": float,
        "out_format": str,
    }
    overrides = _take(raw, known, "config")
    cfg = replace(base, **overrides)
    validate_config(cfg)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """JSON-ready dict; round-trips through ``config_from_dict``."""
    out = asdict(cfg)
    for key in _OPTIONAL_SECTIONS:
        if out.get(key) is None:
            del out[key]
    if isinstance(out.get("hubbard_u"), float) and math.isinf(out["hubbard_u"]):
        out["hubbard_u"] = "inf"
    if "variants" in out:
        out["variants"] = ["inf" if math.isinf(u) else u for u in cfg.variants]
    return out


def validate_config(cfg: ScenarioConfig) -> None:
    if cfg.scenario_id not in SCENARIO_IDS:
        raise ConfigError(f"unknown scenario_id {cfg.scenario_id!r}")
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError(f"out_format must be csv or json, got {cfg.out_format!r}")
    for name in ("kappa", "sample_dt", "heatmap_dt", "accuracy_tol", "w_conv_tol"):
        value = getattr(cfg, name)
        if not (math.isfinite(value) and value > 0):
            raise ConfigError(f"{name} must be finite and positive, got {value}")
    if not (math.isfinite(cfg.coupling) and cfg.coupling >= 0):
        raise ConfigError(f"coupling must be finite and non-negative, got {cfg.coupling}")
    if cfg.t_max is not None and not (math.isfinite(cfg.t_max) and cfg.t_max > 0):
        raise ConfigError(f"t_max must be finite and positive, got {cfg.t_max}")
    if cfg.l0 < 0 or cfg.l0 > cfg.half_length:
        raise ConfigError(f"l0 must lie in [0, half_length], got {cfg.l0}")
    if cfg.scenario_id == "kicked_fig4":
        if cfg.pulse is None:
            raise ConfigError("kicked_fig4 requires a pulse")
        if cfg.t_max is None or cfg.pulse.onset + cfg.pulse.width >= cfg.t_max:
            raise ConfigError("pulse window must end before t_max")
    elif cfg.pulse is not None:
        raise ConfigError(f"{cfg.scenario_id} does not accept a pulse")
    if cfg.scenario_id in ("collision_fig5", "gamma_scan_fig6", "longtime_fig7"):
        if len(cfg.packets) != 1:
            raise ConfigError(f"{cfg.scenario_id} needs exactly one packet")
    if cfg.scenario_id in ("raman_fig8", "photon_train"):
        if len(cfg.packets) != 2:
            raise ConfigError(f"{cfg.scenario_id} needs exactly two packets")
        if cfg.witness_window is None:
            raise ConfigError(f"{cfg.scenario_id} requires witness_window")
        if cfg.t_max is None:
            raise ConfigError(f"{cfg.scenario_id} requires t_max")
        if cfg.witness_window[1] > cfg.t_max + 1e-9:
            raise ConfigError("witness_window must end at or before t_max")
    if cfg.scenario_id == "gamma_scan_fig6":
        if cfg.k0_scan is None:
            raise ConfigError("gamma_scan_fig6 requires k0_scan")
        lo, hi, count = cfg.k0_scan
        if not (0.0 < lo < hi < PI):
            raise ConfigError("k0_scan bounds must satisfy 0 < start < stop < pi")
        if count < 2:
            raise ConfigError("k0_scan needs at least 2 points")
    if cfg.scenario_id == "longtime_fig7":
        if not cfg.momenta:
            raise ConfigError("longtime_fig7 requires momenta")
        if cfg.t_max is None:
            raise ConfigError("longtime_fig7 requires t_max")
    for packet in cfg.packets:
        if abs(packet.center) > cfg.half_length:
            raise ConfigError(f"packet centre {packet.center} outside the chain")
    # emission windows must close before reflected fronts re-enter the region
    if cfg.scenario_id in ("collision_fig5", "gamma_scan_fig6"):
        end = gamma_window_end(cfg.half_length, cfg.packets[0], cfg.l0, cfg.kappa)
        if end <= 0:
            raise ConfigError("chain too short for an emission window")
        if cfg.t_max is not None and cfg.t_max > end + 1e-9:
            raise ConfigError(
                f"t_max {cfg.t_max} exceeds the safe emission window end {end:.2f}"
            )


# ---------------------------------------------------------------------------
# output helpers


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_series(base_path: Path, header: list[str], rows, out_format: str) -> Path:
    """Write a tabular series as CSV or JSON; returns the path written."""
    if out_format == "json":
        path = base_path.with_suffix(".json")
        payload = {"columns": header, "rows": [list(row) for row in rows]}
        _atomic_write(path, json.dumps(payload, sort_keys=True, indent=1).encode())
        return path
    path = base_path.with_suffix(".csv")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, ("\n".join(lines) + "\n").encode())
    return path


def write_json(path: Path, payload: dict) -> Path:
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=1).encode())
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunManifest:
    scenario_id: str
    config: dict
    package_version: str
    wall_time_s: float
    deterministic: bool
    invariant_checks: list[dict]
    outputs: list[dict]
    notes: list[str] = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "config": self.config,
            "package_version": self.package_version,
            "wall_time_s": self.wall_time_s,
            "deterministic": self.deterministic,
            "invariant_checks": self.invariant_checks,
            "outputs": self.outputs,
            "notes": self.notes,
            "results": self.results,
        }

    def all_checks_passed(self) -> bool:
        return all(check["passed"] for check in self.invariant_checks)


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _model_kind(u: float) -> ModelKind:
    return ModelKind.SPIN if math.isinf(u) else ModelKind.HUBBARD


def _build_hamiltonian(params: ModelParams, basis: Basis):
    if basis.model_kind is ModelKind.SPIN:
        return build_spin_hamiltonian(params, basis)
    return build_hubbard_hamiltonian(params, basis)


def _variant_tag(u: float) -> str:
    if math.isinf(u):
        return "spin"
    return f"u{int(u)}" if u == int(u) else f"u{u}"


def _density_rows(times: np.ndarray, densities: np.ndarray, labels) -> list[tuple]:
    rows = []
    for t, dens in zip(times, densities):
        for label, value in zip(labels, dens):
            rows.append((float(t), label, float(value)))
    return rows


def _tracked_evolution(op, psi0, grid, accuracy_tol):
    """Evolve sampling density, norm, energy and excitation per grid point."""
    occ = op.basis.occupation_matrix
    traj = evolve(
        op,
        psi0,
        grid,
        accuracy_tol=accuracy_tol,
        store_states=False,
        observables={
            "density": lambda s: occ @ np.abs(s) ** 2,
            "norm": lambda s: float(np.linalg.norm(s)),
            "energy": lambda s: op.expectation(s),
        },
    )
    return traj


def _conservation_checks(traj: Trajectory, op, label: str = "") -> list[dict]:
    checks = []
    norms = traj.observables["norm"]
    norm_dev = float(np.max(np.abs(norms - 1.0)))
    checks.append(
        {"name": f"norm_conservation{label}", "passed": bool(norm_dev < 1e-8), "value": norm_dev}
    )
    # excitation content of the normalized state: sensitive to sector leakage
    # and occupation bookkeeping, not to the (separately checked) norm drift
    dens = traj.observables["density"]
    totals = dens.sum(axis=1) / norms**2
    sector = float(op.basis.sector.value)
    exc_dev = float(np.max(np.abs(totals - sector)))
    checks.append(
        {
            "name": f"excitation_conservation{label}",
            "passed": bool(exc_dev < 1e-10),
            "value": exc_dev,
        }
    )
    energy = traj.observables["energy"]
    e_dev = float(np.max(np.abs(energy - energy[0])))
    tol = 1e-8 * max(op.spectral_bound(), 1.0)
    checks.append(
        {"name": f"energy_conservation{label}", "passed": bool(e_dev < tol), "value": e_dev}
    )
    return checks


def _sample_grid(t_max: float, dt: float) -> np.ndarray:
    return np.round(np.arange(0.0, t_max + dt / 2, dt), 12)


def _collision_run(cfg: ScenarioConfig, u: float, packet: PacketSpec):
    """Shared packet-on-polariton pipeline; returns (traj, scalars, checks, ctx)."""
    params = cfg.model_params(u)
    kind = _model_kind(u)
    basis_one = enumerate_basis(params, Sector.ONE_EXC, kind)
    basis_two = enumerate_basis(params, Sector.TWO_EXC, kind)
    op = _build_hamiltonian(params, basis_two)
    pol = analytic.bound_state(params, -1, basis_one, boundary_tol=cfg.bound_boundary_tol)
    pkt = gaussian_packet(packet, basis_one)
    psi0, _ = compose_two_excitation(pkt, pol, basis_two)
    window_end = gamma_window_end(cfg.half_length, packet, cfg.l0, cfg.kappa)
    t_max = (
        cfg.t_max
        if cfg.t_max is not None
        else math.floor(window_end / cfg.sample_dt) * cfg.sample_dt
    )
    grid = _sample_grid(t_max, cfg.sample_dt)
    traj = _tracked_evolution(op, psi0, grid, cfg.accuracy_tol)
    gamma = gamma_emission(traj, cfg.l0, (0.0, window_end), boundary_return_time=window_end)
    scalars = {"gamma": gamma, "window_end": window_end}
    if cfg.t_transmission is not None and cfg.t_transmission <= grid[-1]:
        t_r, r_l, p_c = transmission_reflection(traj, cfg.t_transmission, cfg.l0)
        scalars.update({"t_right": t_r, "r_left": r_l, "p_center": p_c})
    checks = _conservation_checks(traj, op)
    return traj, scalars, checks, (params, basis_one, basis_two, op, psi0)


# ---------------------------------------------------------------------------
# scenario implementations


def _run_kicked_fig4(cfg: ScenarioConfig, out: Path):
    params = cfg.model_params(0.0)
    basis = enumerate_basis(params, Sector.ONE_EXC, ModelKind.HUBBARD)
    h0, _ = build_kicked_hamiltonian(params, cfg.pulse, basis)
    psi0 = analytic.bound_state(params, -1, basis, boundary_tol=cfg.bound_boundary_tol)
    grid = _sample_grid(cfg.t_max, cfg.sample_dt)
    traj, sweep_rows = pulsed_convergence_sweep(
        h0, cfg.pulse, psi0, grid, w_conv_tol=cfg.w_conv_tol, accuracy_tol=cfg.accuracy_tol
    )
    occ = basis.occupation_matrix
    densities = np.stack([occ @ np.abs(s) ** 2 for s in traj.states])
    stride = max(1, round(cfg.heatmap_dt / cfg.sample_dt))
    outputs = [
        write_series(
            out / "density",
            ["t", "l", "value"],
            _density_rows(traj.times[::stride], densities[::stride], basis.site_labels()),
            cfg.out_format,
        ),
        write_series(
            out / "convergence",
            ["width", "max_density_change"],
            sweep_rows,
            cfg.out_format,
        ),
    ]
    plus = analytic.bound_state(params, +1, basis, boundary_tol=cfg.bound_boundary_tol)
    final = traj.states[-1]
    survival = abs(np.vdot(psi0, final)) ** 2 + abs(np.vdot(plus, final)) ** 2
    p_val = abs(analytic.overlap_p(params, +1, -1))
    results = {
        "survival_bound_subspace": float(survival),
        "escape_measured": float(1.0 - survival),
        "escape_second_order_formula": analytic.perturbative_transitions(
            cfg.pulse.area, p_val
        ).escape,
        "escape_delta_kick": analytic.delta_kick_transitions(cfg.pulse.area, p_val).escape,
        "overlap_p": p_val,
        "width_converged": sweep_rows[-1][0],
    }
    norms = np.array([np.linalg.norm(s) for s in traj.states])
    dens_tot = densities.sum(axis=1) / norms**2
    checks = [
        {
            "name": "norm_conservation",
            "passed": bool(np.max(np.abs(norms - 1.0)) < 1e-8),
            "value": float(np.max(np.abs(norms - 1.0))),
        },
        {
            "name": "excitation_conservation",
            "passed": bool(np.max(np.abs(dens_tot - 1.0)) < 1e-10),
            "value": float(np.max(np.abs(dens_tot - 1.0))),
        },
    ]
    notes = [
        "initial bound state is the exact open-chain eigenstate; "
        f"bound_boundary_tol={cfg.bound_boundary_tol}"
    ]
    return outputs, results, notes, checks


def _run_collision_fig5(cfg: ScenarioConfig, out: Path):
    variants = cfg.variants or (cfg.hubbard_u,)
    packet = cfg.packets[0]
    outputs: list[Path] = []
    results: dict = {"variants": {}}
    checks: list[dict] = []
    densities_by_tag: dict[str, np.ndarray] = {}
    times_ref = None
    # density profiles represent the infinite-chain collision only until an
    # outgoing front reaches an open end; heatmaps and model comparisons
    # stop there, while P_res runs to the full emission window
    horizon = edge_arrival_time(cfg.half_length, packet, cfg.kappa)
    for u in variants:
        tag = _variant_tag(u)
        traj, scalars, var_checks, ctx = _collision_run(cfg, u, packet)
        basis_two = ctx[2]
        stride = max(1, round(cfg.heatmap_dt / cfg.sample_dt))
        dens = traj.observables["density"]
        in_horizon = traj.times <= horizon + 1e-9
        densities_by_tag[tag] = dens[in_horizon][:, : basis_two.n_sites + 1]
        times_ref = traj.times

        heat_times = traj.times[::stride]
        heat_dens = dens[::stride]
        keep = heat_times <= horizon + 1e-9
        outputs.append(
            write_series(
                out / f"density_{tag}",
                ["t", "l", "value"],
                _density_rows(heat_times[keep], heat_dens[keep], basis_two.site_labels()),
                cfg.out_format,
            )
        )
        series = p_res(traj, cfg.l0)
        outputs.append(
            write_series(
                out / f"p_res_{tag}",
                ["t", "value"],
                list(zip(series.times.tolist(), series.values.tolist())),
                cfg.out_format,
            )
        )
        results["variants"][tag] = scalars
        for check in var_checks:
            checks.append({**check, "name": f"{check['name']}_{tag}"})
    pair_diffs = {}
    tags = list(densities_by_tag)
    for i, tag_a in enumerate(tags):
        for tag_b in tags[i + 1 :]:
            a, b = densities_by_tag[tag_a], densities_by_tag[tag_b]
            width = min(a.shape[1], b.shape[1])  # hubbard/spin share site count
            delta = np.abs(a[:, :width] - b[:, :width])
            per_time = delta.max(axis=1)
            pair_diffs[f"{tag_a}_vs_{tag_b}"] = {
                "max": float(delta.max()),
                "p999": float(np.percentile(delta, 99.9)),
                "samples_above_0_05": int((delta > 0.05).sum()),
                "samples": int(delta.size),
                # deviation of the settled post-collision profiles (second
                # half of the horizon), separating them from the brief
                # collision-core flash
                "max_settled_half": float(per_time[len(per_time) // 2 :].max()),
            }
    results["max_pointwise_density_diff"] = pair_diffs
    results["density_horizon"] = horizon
    results["times"] = {"n_samples": int(len(times_ref)), "t_end": float(times_ref[-1])}
    notes = [
        f"density heatmaps and model comparisons end at t={horizon:.2f} "
        "(first boundary arrival); P_res series continue to the emission window end"
    ]
    return outputs, results, notes, checks


def _gamma_point(args) -> tuple[int, float, float]:
    cfg, index, k0 = args
    # single-threaded BLAS per worker: the sweep parallelizes across points
    with threadpool_limits(limits=1):
        packet = replace(cfg.packets[0], momentum=k0)
        _, scalars, checks, _ = _collision_run(cfg, cfg.hubbard_u, packet)
    if not all(c["passed"] for c in checks):
        raise CcqedError(f"conservation checks failed at k0={k0}")
    return index, k0, scalars["gamma"]


def _run_gamma_scan_fig6(cfg: ScenarioConfig, out: Path, threads: int = 1):
    lo, hi, count = cfg.k0_scan
    k_values = np.linspace(lo, hi, count)
    tasks = [(cfg, i, float(k)) for i, k in enumerate(k_values)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_gamma_point, tasks))
    else:
        rows = [_gamma_point(task) for task in tasks]
    rows.sort(key=lambda row: row[0])
    outputs = [
        write_series(out / "gamma_scan", ["k0", "gamma"], [(k, g) for _, k, g in rows], cfg.out_format)
    ]
    best = max(rows, key=lambda row: row[2])
    results = {
        "k0_peak": best[1],
        "k0_peak_over_pi": best[1] / PI,
        "gamma_max": best[2],
        "n_points": len(rows),
    }
    return outputs, results, [], []


def _run_longtime_fig7(cfg: ScenarioConfig, out: Path):
    outputs: list[Path] = []
    results: dict = {"momenta": {}}
    checks: list[dict] = []
    notes = [
        f"chain interpreted as {2 * cfg.half_length + 1} cavities (half_length N={cfg.half_length})"
    ]
    base_packet = cfg.packets[0]
    params = cfg.model_params()
    kind = _model_kind(params.hubbard_u)
    basis_one = enumerate_basis(params, Sector.ONE_EXC, kind)
    basis_two = enumerate_basis(params, Sector.TWO_EXC, kind)
    op = _build_hamiltonian(params, basis_two)
    pol = analytic.bound_state(params, -1, basis_one, boundary_tol=cfg.bound_boundary_tol)
    grid = _sample_grid(cfg.t_max, cfg.sample_dt)
    initial_states = []
    tail_stats = []
    for i, k0 in enumerate(cfg.momenta):
        packet = replace(base_packet, momentum=k0)
        pkt = gaussian_packet(packet, basis_one)
        psi0, _ = compose_two_excitation(pkt, pol, basis_two)
        initial_states.append(psi0)
        traj = _tracked_evolution(op, psi0, grid, cfg.accuracy_tol)
        series = p_res(traj, cfg.l0)
        tag = f"k{i}"
        outputs.append(
            write_series(
                out / f"p_res_{tag}",
                ["t", "value"],
                list(zip(series.times.tolist(), series.values.tolist())),
                cfg.out_format,
            )
        )
        loss = 1.0 - series.values
        t_tail0 = 0.8 * cfg.t_max
        tail = loss[series.times >= t_tail0 - 1e-9]
        half = len(tail) // 2
        mean_a, mean_b = float(np.mean(tail[:half])), float(np.mean(tail[half:]))
        tail_stats.append((tag, k0, t_tail0, float(np.mean(tail)), mean_a, mean_b, float(loss[0])))
        for check in _conservation_checks(traj, op, f"_{tag}"):
            checks.append(check)
    # exact long-time constant: infinite-time (dephased) average of the
    # region weight, computed by parity-blocked dense diagonalization
    n = basis_two.half_length
    mask = np.zeros(basis_two.n_sites + 1)
    mask[max(0, n - cfg.l0) : n + cfg.l0 + 1] = 1.0
    mask[-1] = 1.0
    weights = basis_two.occupation_matrix.T @ mask
    parity = parity_operator(basis_two)
    asymptotes = equilibrium_average(
        op, np.column_stack(initial_states), weights, parity=parity
    )
    for (tag, k0, t_tail0, tail_mean, mean_a, mean_b, rise0), asym in zip(
        tail_stats, np.atleast_1d(asymptotes)
    ):
        loss_eq = 1.0 - float(asym)
        results["momenta"][tag] = {
            "k0": k0,
            "tail_window": [t_tail0, cfg.t_max],
            "tail_mean_one_minus_p_res": tail_mean,
            "equilibrium_one_minus_p_res": loss_eq,
            "tail_drift_relative": abs(tail_mean - loss_eq) / loss_eq if loss_eq else math.inf,
            "tail_half_window_change": abs(mean_b - mean_a) / tail_mean if tail_mean else math.inf,
            "rise_value_at_t0": rise0,
        }
    return outputs, results, notes, checks


def _run_two_packet(cfg: ScenarioConfig, out: Path, with_channels: bool):
    params = cfg.model_params()
    kind = _model_kind(params.hubbard_u)
    basis_one = enumerate_basis(params, Sector.ONE_EXC, kind)
    basis_two = enumerate_basis(params, Sector.TWO_EXC, kind)
    op = _build_hamiltonian(params, basis_two)
    pkt_a = gaussian_packet(cfg.packets[0], basis_one)
    pkt_b = gaussian_packet(cfg.packets[1], basis_one)
    psi0, _ = compose_two_excitation(pkt_a, pkt_b, basis_two)
    grid = _sample_grid(cfg.t_max, cfg.sample_dt)
    traj = _tracked_evolution(op, psi0, grid, cfg.accuracy_tol)
    stride = max(1, round(cfg.heatmap_dt / cfg.sample_dt))
    dens = traj.observables["density"]
    outputs = [
        write_series(
            out / "density",
            ["t", "l", "value"],
            _density_rows(traj.times[::stride], dens[::stride], basis_two.site_labels()),
            cfg.out_format,
        )
    ]
    witness = polariton_witness(traj)
    outputs.append(
        write_series(
            out / "witness",
            ["t", "value"],
            list(zip(witness.times.tolist(), witness.values.tolist())),
            cfg.out_format,
        )
    )
    trailing = trailing_average(witness, cfg.witness_window)
    results = {
        "witness_trailing_average": trailing,
        "witness_window": list(cfg.witness_window),
        "photon_number_initial": float(dens[0][: basis_two.n_sites].sum()),
        "photon_number_final": float(dens[-1][: basis_two.n_sites].sum()),
    }
    if with_channels:
        e_two = 2.0 * (-2.0 * params.kappa * math.cos(cfg.packets[0].momentum))
        _, e_minus = analytic.bound_energies(params)
        shell = e_two - e_minus
        center = shell if abs(shell) < 2.0 * params.kappa else None
        final = evolve(
            op, psi0, [0.0, float(grid[-1])], accuracy_tol=cfg.accuracy_tol
        ).states[-1]
        channels = {}
        for label, state in (("initial", psi0), ("final", final)):
            dec = channel_decomposition(
                state, basis_two, params, n_modes=cfg.channel_modes, energy_center=center
            )
            channels[label] = {
                "c1_weight": dec.c1_weight,
                "c2_weight": dec.c2_weight,
                "residual_weight": dec.residual_weight,
                "gram_condition": dec.gram_condition,
            }
        outputs.append(write_json(out / "channels.json", channels))
        results["channels"] = channels
    checks = _conservation_checks(traj, op)
    return outputs, results, [], checks


def run_scenario(config: ScenarioConfig, out_dir, threads: int = 1) -> RunManifest:
    """Execute one scenario, write outputs and the manifest, return the manifest."""
    validate_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    runners = {
        "kicked_fig4": _run_kicked_fig4,
        "collision_fig5": _run_collision_fig5,
        "longtime_fig7": _run_longtime_fig7,
    }
    if config.scenario_id == "gamma_scan_fig6":
        outputs, results, notes, checks = _run_gamma_scan_fig6(config, out, threads)
    elif config.scenario_id == "raman_fig8":
        outputs, results, notes, checks = _run_two_packet(config, out, with_channels=True)
    elif config.scenario_id == "photon_train":
        outputs, results, notes, checks = _run_two_packet(config, out, with_channels=False)
    else:
        outputs, results, notes, checks = runners[config.scenario_id](config, out)
    wall = time.perf_counter() - start
    outputs = [*outputs, write_json(out / "results.json", results)]
    manifest = RunManifest(
        scenario_id=config.scenario_id,
        config=config_to_dict(config),
        package_version=__version__,
        wall_time_s=wall,
        deterministic=True,
        invariant_checks=checks,
        outputs=[
            {
                "name": path.name,
                "path": str(path),
                "sha256": _sha256(path),
                "bytes": path.stat().st_size,
            }
            for path in outputs
        ],
        notes=notes,
        results=results,
    )
    if not manifest.all_checks_passed():
        failed = [c["name"] for c in manifest.invariant_checks if not c["passed"]]
        raise CcqedError(f"invariant checks failed: {failed}")
    write_json(out / "manifest.json", manifest.to_dict())
    return manifest


# ---------------------------------------------------------------------------
# parameter sweep


def _set_by_path(raw, path: str, value) -> None:
    keys = path.split(".")
    node = raw
    for key in keys[:-1]:
        node = node[int(key)] if isinstance(node, list) else node.setdefault(key, {})
    last = keys[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def _sweep_worker(args) -> tuple[int, dict]:
    index, cfg_dict, axis, value, out_dir = args
    raw = json.loads(json.dumps(cfg_dict))
    _set_by_path(raw, axis, value)
    cfg = config_from_dict(raw)
    with threadpool_limits(limits=1):
        manifest = run_scenario(cfg, out_dir)
    return index, {"value": value, "results": manifest.results}


def sweep(config: ScenarioConfig, axis: str, values, out_dir, threads: int = 1) -> list[dict]:
    """Run a scenario once per axis value; outputs land in value-indexed dirs.

    ``axis`` is a dotted path into the JSON config (e.g. ``coupling`` or
    ``packets.0.momentum``).  The merged table is written in input order,
    independent of the worker count.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = config_to_dict(config)
    tasks = [
        (i, base, axis, value, str(out / f"point_{i:03d}")) for i, value in enumerate(values)
    ]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            merged = list(pool.map(_sweep_worker, tasks))
    else:
        merged = [_sweep_worker(task) for task in tasks]
    merged.sort(key=lambda item: item[0])
    write_series(
        out / "sweep",
        ["index", "value"],
        [(i, payload["value"]) for i, payload in merged],
        config.out_format,
    )
    manifests = []
    for i, _ in merged:
        manifest_path = out / f"point_{i:03d}" / "manifest.json"
        manifests.append(json.loads(manifest_path.read_text()))
    write_json(out / "sweep_manifest.json", {"axis": axis, "points": manifests})
    return manifests
