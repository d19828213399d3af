"""Run a validated configuration and write series, reports and a manifest.

Design Decision: Files Are the Contract

Rationale: Every experiment writes its raw series as CSV (header row, one
sample per line) and its fits/budgets as JSON, so figure scripts and CI
diffs never depend on in-process objects.

Trade-offs:
- Determinism: No wall-clock timestamps anywhere; floats are written with
  17 significant digits so re-runs are bit-identical for the same config
  and seed
- Noise: The seed only drives synthetic measurement noise; simulations are
  deterministic on their own
- Ordering: Sweep points may run in a worker pool, but results and files
  are assembled in configuration order on the calling thread

Error Handling:
- CavityMemoryError subclasses propagate unchanged; the CLI maps them to
  exit codes
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy

from cavity_memory import __version__
from cavity_memory.models.config import (
    CatDecoherenceExperiment,
    CooldownsExperiment,
    DephasingBudgetExperiment,
    KerrExperiment,
    LossBudgetExperiment,
    ParityCalibrationExperiment,
    ResetExperiment,
    RingdownExperiment,
    RunConfig,
    SidebandEncodeExperiment,
    SpamBudgetExperiment,
    SystemTableExperiment,
    T1Experiment,
    T2Experiment,
    WignerCutExperiment,
    sweep_values,
)
from cavity_memory.models.device import TWO_PI, SystemParams
from cavity_memory.models.results import ExperimentResult
from cavity_memory.services import lossbudget
from cavity_memory.services.analysis import closed_form
from cavity_memory.services.analysis.fitting import (
    axis_scale_from_vacuum,
    fit_cat_cut,
    fit_exponential,
    fit_gaussian,
)
from cavity_memory.services.dynamics import scaled_tolerances
from cavity_memory.services.hilbert import FockSpace, fock_state, required_dim
from cavity_memory.services.protocols import cats, coherence, parity, sideband


logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".17g"
MANIFEST_NAME = "manifest.json"


# =============================================================================
# File formats
# =============================================================================


def _format(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return str(value)


def write_series_csv(path: Path, result: ExperimentResult) -> None:
    """Header row then one row per sweep value."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(result.header())
        for row in result.rows():
            writer.writerow([_format(v) for v in row])


def write_table_csv(path: Path, rows: Sequence[dict[str, Any]]) -> None:
    """Rows of equal keys, header taken from the first row."""
    if not rows:
        raise ValueError(f"No rows to write to {path}")
    header = list(rows[0])
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(row[key]) for key in header])


def read_series_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Parse a numeric CSV written by :func:`write_series_csv`.

    Returns:
        (header, data) with one column per header entry

    Raises:
        ValueError: If the file is empty, ragged or not numeric
    """
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if len(rows) < 2:
        raise ValueError(f"{path} needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    except ValueError as e:
        raise ValueError(f"{path} contains a non-numeric value: {e}") from e
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: rows do not match the {len(header)}-column header")
    return header, data


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Cannot serialise {type(value).__name__}")


def write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(config.canonical_json().encode()).hexdigest()


# =============================================================================
# Artifacts
# =============================================================================


@dataclass
class Artifacts:
    """What one experiment produced, keyed by file stem."""

    series: dict[str, ExperimentResult] = field(default_factory=dict)
    tables: dict[str, list[dict[str, Any]]] = field(default_factory=dict)
    report: dict[str, Any] = field(default_factory=dict)


@dataclass
class RunContext:
    params: SystemParams
    config: RunConfig
    rng: np.random.Generator
    threads: int | None
    tolerances: tuple[float, float]


@dataclass
class RunSummary:
    """Outcome of a run.

    Attributes:
        directory: Output directory
        files: Written file names, sorted
        reports: Experiment stem → report dict
    """

    directory: Path
    files: list[str]
    reports: dict[str, dict[str, Any]]


# =============================================================================
# Protocol handlers
# =============================================================================


def _ringdown(exp: RingdownExperiment, ctx: RunContext) -> Artifacts:
    omega = ctx.params.omega_c
    report = lossbudget.ringdown_conversions(
        omega, exp.tau_loaded_s, Q_ext=exp.Q_ext, tau_ext=exp.tau_ext_s
    ).to_dict()
    out = Artifacts(report=report)
    if exp.synthetic_points:
        times = np.linspace(0.0, 5.0 * exp.tau_loaded_s, exp.synthetic_points)
        amplitude = np.exp(-times / exp.tau_loaded_s)
        if exp.noise > 0.0:
            amplitude = amplitude + ctx.rng.normal(0.0, exp.noise, times.size)
        fit = fit_exponential(times, amplitude)
        tau_fit = fit.value("tau")
        report.update(
            tau_fitted_s=tau_fit,
            tau_fitted_uncertainty_s=fit.uncertainties["tau"],
            Q_fitted=lossbudget.quality_factor(omega, tau_fit),
        )
        out.series[exp.stem] = ExperimentResult(
            sweep_name="time_s",
            sweep_values=times.tolist(),
            observable=amplitude.tolist(),
            observable_name="amplitude",
            metadata={"protocol": "ringdown", "noise": exp.noise},
        )
    return out


def _system_table(exp: SystemTableExperiment, ctx: RunContext) -> Artifacts:
    rows = closed_form.system_table(ctx.params)
    return Artifacts(tables={exp.stem: rows}, report={"rows": rows})


def _sideband_encode(exp: SidebandEncodeExperiment, ctx: RunContext) -> Artifacts:
    omega = TWO_PI * exp.sideband_rate_over_2pi_hz
    space = sideband.encoding_space(exp.cavity_dim, exp.transmon_dim)
    clean, noisy = [], []
    for a, b in exp.amplitudes:
        target = sideband.encoded_target(space, a, b)
        for with_noise, sink in ((False, clean), (True, noisy)):
            state = sideband.encode_qubit(
                a,
                b,
                ctx.params,
                with_noise=with_noise,
                omega=omega,
                space=space,
                f_level=exp.f_level,
                tolerances=ctx.tolerances,
            )
            sink.append(target.fidelity(state))
    result = ExperimentResult(
        sweep_name="state_index",
        sweep_values=list(range(len(exp.amplitudes))),
        observable=noisy,
        observable_name="fidelity_noisy",
        metadata={"protocol": "sideband_encode", "amplitudes": [list(p) for p in exp.amplitudes]},
        columns={"fidelity_noiseless": clean},
    )
    report = {
        "swap_time_s": sideband.swap_time(omega),
        "sideband_rate_over_2pi_hz": exp.sideband_rate_over_2pi_hz,
        "fidelity_noiseless": clean,
        "fidelity_noisy": noisy,
    }
    return Artifacts(series={exp.stem: result}, report=report)


def _t1(exp: T1Experiment, ctx: RunContext) -> Artifacts:
    result = coherence.measure_T1_experiment(
        ctx.params,
        sweep_values(exp.delays_s),
        cavity_dim=exp.cavity_dim,
        transmon_dim=exp.transmon_dim,
        omega=TWO_PI * exp.sideband_rate_over_2pi_hz,
        f_level=exp.f_level,
        tolerances=ctx.tolerances,
    )
    return Artifacts(series={exp.stem: result}, report=dict(result.derived))


def _t2(exp: T2Experiment, ctx: RunContext) -> Artifacts:
    result = coherence.measure_T2_experiment(
        ctx.params,
        sweep_values(exp.delays_s),
        fringe_detuning=TWO_PI * exp.fringe_detuning_over_2pi_hz,
        cavity_dim=exp.cavity_dim,
        transmon_dim=exp.transmon_dim,
        omega=TWO_PI * exp.sideband_rate_over_2pi_hz,
        f_level=exp.f_level,
        tolerances=ctx.tolerances,
    )
    return Artifacts(series={exp.stem: result}, report=dict(result.derived))


def _parity_calibration(exp: ParityCalibrationExperiment, ctx: RunContext) -> Artifacts:
    chi_hz = ctx.params.chi / TWO_PI
    if exp.detuning_over_2pi_hz is None:
        grid_hz = chi_hz * (exp.nbar + np.linspace(-1.5, 1.5, 61))
    else:
        grid_hz = np.asarray(sweep_values(exp.detuning_over_2pi_hz))
    result = parity.calibrate_parity_drive(
        ctx.params,
        math.sqrt(exp.nbar),
        (TWO_PI * grid_hz).tolist(),
        mode=exp.mode,
        with_noise=exp.with_noise,
        cavity_dim=exp.cavity_dim,
    )
    return Artifacts(series={exp.stem: result}, report=dict(result.derived))


def _wigner_cut(exp: WignerCutExperiment, ctx: RunContext) -> Artifacts:
    axis = np.asarray(sweep_values(exp.axis))
    reach = float(np.max(np.abs(axis)))
    out = Artifacts()
    scale = 1.0
    if exp.vacuum_calibration:
        space = FockSpace((required_dim(reach),), ("cavity",))
        vacuum = fock_state(space, {"cavity": 0})
        cut = cats.wigner_cut_experiment(
            vacuum, ctx.params, axis, mode=exp.mode, with_noise=exp.with_noise, threads=ctx.threads
        )
        fit = fit_gaussian(cut.sweep_values, cut.observable)
        scale = axis_scale_from_vacuum(cut.sweep_values, cut.observable)
        out.series[f"{exp.stem}_vacuum"] = cut
        out.report["vacuum"] = {"sigma": fit.value("sigma"), "axis_scale": scale}
    sizes = {}
    for size in exp.cat_sizes:
        alpha = cats.alpha_for_size(size)
        prepared = cats.prepare_cat(
            alpha,
            ctx.params,
            mode=exp.mode,
            cavity_dim=required_dim(alpha + reach),
            with_noise=exp.with_noise,
        )
        cut = cats.wigner_cut_experiment(
            prepared.post_state,
            ctx.params,
            axis,
            mode=exp.mode,
            with_noise=exp.with_noise,
            threads=ctx.threads,
        )
        fit = fit_cat_cut(scale * axis, cut.observable)
        cut.derived.update(fit.derived, fringe_frequency=fit.value("frequency"))
        sizes[f"{size:g}"] = {
            "cat_size_fitted": fit.derived["cat_size"],
            "cat_size_uncertainty": fit.derived["cat_size_uncertainty"],
            "fringe_frequency": fit.value("frequency"),
            "fringe_frequency_expected": 2.0 * math.sqrt(size),
            "preparation_probability": prepared.probability,
        }
        out.series[f"{exp.stem}_S{size:g}"] = cut
    out.report["cats"] = sizes
    return out


def _cat_decoherence(exp: CatDecoherenceExperiment, ctx: RunContext) -> Artifacts:
    result = cats.cat_decoherence_scaling(
        exp.cat_sizes,
        ctx.params,
        mode=exp.mode,
        threads=ctx.threads,
        extrapolate_to=exp.extrapolate_to,
    )
    return Artifacts(series={exp.stem: result}, report=dict(result.derived))


def _spam_budget(exp: SpamBudgetExperiment, ctx: RunContext) -> Artifacts:
    budgets = [
        cats.spam_error_budget(
            math.sqrt(nbar), ctx.params, readout_fidelity=exp.readout_fidelity, threads=ctx.threads
        )
        for nbar in exp.nbars
    ]
    names = list(budgets[0].visibilities)
    result = ExperimentResult(
        sweep_name="nbar",
        sweep_values=list(exp.nbars),
        observable=[b.visibilities["all_off"] for b in budgets],
        observable_name="visibility_all_off",
        metadata={"protocol": "spam_budget", "readout_fidelity": exp.readout_fidelity},
        columns={f"loss_{name}": [b.loss(name) for b in budgets] for name in names if name != "all_off"},
    )
    return Artifacts(series={exp.stem: result}, report={"budgets": [b.to_dict() for b in budgets]})


def _reset(exp: ResetExperiment, ctx: RunContext) -> Artifacts:
    if exp.xi_cr is not None:
        xi = exp.xi_cr
    else:
        assert exp.decay_time_s is not None
        xi = sideband.reset_xi_for_decay_time(exp.decay_time_s, ctx.params)
    result = sideband.simulate_reset(
        ctx.params,
        xi,
        sweep_values(exp.durations_s),
        initial_photons=exp.initial_photons,
        readout_dim=exp.readout_dim,
    )
    report = dict(result.derived)
    report.update(
        xi_cr=xi,
        passive_wait_s=sideband.passive_reset_wait(
            exp.passive_nbar_initial, exp.passive_nbar_final, ctx.params.T1_c
        ),
    )
    return Artifacts(series={exp.stem: result}, report=report)


def _loss_budget(exp: LossBudgetExperiment, ctx: RunContext) -> Artifacts:
    geometry = ctx.config.geometry.to_geometry()
    budget = lossbudget.assemble_budget(geometry, ctx.config.material.to_material(), ctx.params)
    report: dict[str, Any] = {"budget": budget.to_dict()}
    if exp.compare_reference:
        report["comparison"] = lossbudget.compare_to_reference(budget)
    if exp.residual_Q0 is not None:
        report["residual_resistance_bound_ohm"] = lossbudget.residual_resistance_bound(
            geometry.geometry_factor, exp.residual_Q0
        )
    return Artifacts(tables={exp.stem: lossbudget.budget_to_rows(budget)}, report=report)


def _cooldowns(exp: CooldownsExperiment, ctx: RunContext) -> Artifacts:
    rows = [record.to_dict() for record in closed_form.cooldown_table()]
    return Artifacts(tables={exp.stem: rows}, report={"cooldowns": rows})


def _kerr(exp: KerrExperiment, ctx: RunContext) -> Artifacts:
    rows = [
        {"nbar": nbar, **closed_form.kerr_estimates(ctx.params, nbar).to_dict()}
        for nbar in exp.nbars
    ]
    return Artifacts(report={"estimates": rows})


def _dephasing_budget(exp: DephasingBudgetExperiment, ctx: RunContext) -> Artifacts:
    p = ctx.params
    heating = p.heating_rate_q
    t_up = exp.T_up_q_s or (math.inf if heating == 0.0 else 1.0 / heating)
    budget = closed_form.t2_decomposition(
        exp.T1_c_s or p.T1_c,
        exp.T2_c_s or p.T2_c,
        t_up,
        exp.sigma_T1_s,
        exp.sigma_T2_s,
        exp.sigma_T_up_s,
    )
    nth = sweep_values(exp.nth_q_values)
    rates = [closed_form.thermal_dephasing_rate(p.chi, p.gamma_down_q, n) for n in nth]
    predicted = [closed_form.predicted_T2(p.T1_c, p.chi, p.gamma_down_q, n) for n in nth]
    result = ExperimentResult(
        sweep_name="nth_q",
        sweep_values=nth,
        observable=predicted,
        observable_name="predicted_T2_s",
        metadata={"protocol": "dephasing_budget"},
        columns={"thermal_dephasing_rate_per_s": rates},
    )
    return Artifacts(series={exp.stem: result}, report=budget.to_dict())


HANDLERS: dict[str, Callable[[Any, RunContext], Artifacts]] = {
    "ringdown": _ringdown,
    "system_table": _system_table,
    "sideband_encode": _sideband_encode,
    "t1": _t1,
    "t2": _t2,
    "parity_calibration": _parity_calibration,
    "wigner_cut": _wigner_cut,
    "cat_decoherence": _cat_decoherence,
    "spam_budget": _spam_budget,
    "reset": _reset,
    "loss_budget": _loss_budget,
    "cooldowns": _cooldowns,
    "kerr": _kerr,
    "dephasing_budget": _dephasing_budget,
}


# =============================================================================
# Runner
# =============================================================================


class ExperimentRunner:
    """Execute every experiment of a :class:`RunConfig` and write its files.

    Example:
        >>> runner = ExperimentRunner(RunConfig.load(Path("fig5.json")), Path("out"))
        >>> summary = runner.run()
    """

    def __init__(
        self,
        config: RunConfig,
        out_dir: Path,
        threads: int | None = None,
        seed: int | None = None,
        tolerance_scale: float | None = None,
    ) -> None:
        """Initialize the runner.

        Args:
            config: Validated run configuration
            out_dir: Output directory (created if missing)
            threads: Worker count for sweeps (None: default pool size)
            seed: Overrides ``config.seed``
            tolerance_scale: Overrides ``config.tolerance_scale``
        """
        updates: dict[str, Any] = {}
        if seed is not None:
            updates["seed"] = seed
        if tolerance_scale is not None:
            updates["tolerance_scale"] = tolerance_scale
        self.config = config.model_copy(update=updates) if updates else config
        self.out_dir = Path(out_dir)
        self.threads = threads

    def _context(self) -> RunContext:
        return RunContext(
            params=self.config.device.to_params(),
            config=self.config,
            rng=np.random.default_rng(self.config.seed),
            threads=self.threads,
            tolerances=scaled_tolerances(self.config.tolerance_scale),
        )

    def run(self, progress: Callable[[str], None] | None = None) -> RunSummary:
        """Run all experiments in order.

        Args:
            progress: Called with each experiment stem before it starts

        Returns:
            RunSummary of the files written
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        formats = set(self.config.output.formats)
        ctx = self._context()
        written: list[str] = []
        reports: dict[str, dict[str, Any]] = {}

        for experiment in self.config.experiments:
            stem = experiment.stem
            if progress:
                progress(stem)
            logger.info("Running experiment %s (%s)", stem, experiment.protocol)
            artifacts = HANDLERS[experiment.protocol](experiment, ctx)
            if "csv" in formats:
                for name, series in artifacts.series.items():
                    write_series_csv(self.out_dir / f"{name}.csv", series)
                    written.append(f"{name}.csv")
                for name, rows in artifacts.tables.items():
                    write_table_csv(self.out_dir / f"{name}.csv", rows)
                    written.append(f"{name}.csv")
            report = {
                "protocol": experiment.protocol,
                "results": artifacts.report,
                "series": {name: s.to_dict() for name, s in artifacts.series.items()},
            }
            if "json" in formats:
                write_json(self.out_dir / f"{stem}.json", report)
                written.append(f"{stem}.json")
            reports[stem] = artifacts.report

        written.append(MANIFEST_NAME)
        write_json(self.out_dir / MANIFEST_NAME, self.manifest(sorted(written)))
        return RunSummary(self.out_dir, sorted(written), reports)

    def manifest(self, files: list[str]) -> dict[str, Any]:
        """Config hash, versions and the file list (no timestamps)."""
        return {
            "name": self.config.name,
            "config_sha256": config_hash(self.config),
            "seed": self.config.seed,
            "tolerance_scale": self.config.tolerance_scale,
            "versions": {
                "cavity_memory": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "files": files,
        }
