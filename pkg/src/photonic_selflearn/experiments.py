"""End-to-end experiment runners: switch, MIMO descrambler (two cost functions), filter.

Each runner builds a simulated bench from an :class:`ExperimentConfig`, puts
the chip parts the experiment does not train into their fixed roles, trains
the rest through the bench, and writes its result files to ``config.out_dir``.
"""
from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import mesh
from .bench import BenchSession, SimulatedChip, scramble
from .hardware import SpectralModel, ThermalShifterModel, phase_to_voltage, voltage_to_phase
from .learning import (
    TargetRouting,
    TrainingTrace,
    TrainSchedule,
    cf_eye,
    cf_filter,
    cf_routing,
    coordinate_descent,
    filter_cf_from_spectrum,
    measure_columns,
)
from .signals import NrzConfig, eye_opening_area

log = logging.getLogger(__name__)

EXPERIMENTS = ("switch", "mimo", "mimo-eye", "filter", "spectrum-sweep", "eye-sim")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "switch"
    seed: int = 0
    routes: str = "0:2,1:1,2:0"
    scramble_seed: Optional[int] = None
    out_dir: str = "out"
    state_file: Optional[str] = None
    # training schedule
    coarse_step: float = 2 * np.pi / 20
    fine_step: float = 2 * np.pi / 100
    coarse_sweeps: int = 60
    fine_sweeps: int = 60
    target_cf: Optional[float] = None
    acceptance_rule: str = "greedy"
    tolerance: float = 1e-4
    patience: int = 1
    max_evaluations: Optional[int] = None
    success_cf: float = 0.99
    # drive calibration
    period_T: float = 1.07e8
    resistance: float = 2000.0
    max_voltage: float = 15000.0
    # spectral model
    center_wavelength: float = 1550.0
    grating_peak_loss: float = -6.9
    grating_3db_bandwidth: float = 40.0
    include_gratings: bool = True
    dispersion_enabled: bool = False
    arm_imbalance_sigma: float = 0.0
    group_index: float = 4.2
    spectral_seed: int = 0
    lambda_min: float = 1525.0
    lambda_max: float = 1575.0
    lambda_step: float = 0.5
    crosstalk_threshold_db: float = -10.0
    noise_sigma_rel: float = 0.0
    # filter
    filter_center: float = 1546.0
    filter_fwhm: float = 20.0
    filter_guard: Optional[float] = None
    filter_port: int = 3
    # eye measurements
    monitor_ports: str = "0"
    bitrate: float = 10.0
    prbs_order: int = 7
    samples_per_bit: int = 32
    rise_time_fraction: float = 0.25
    amplitude_noise_sigma: float = 0.02
    signal_seed: int = 0
    eye_checkpoint_every: int = 5

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {EXPERIMENTS}")
        try:
            self.routing()
        except ValueError as exc:
            raise ConfigError(f"bad routes {self.routes!r}: {exc}") from None
        if self.lambda_min >= self.lambda_max or self.lambda_step <= 0:
            if not (self.lambda_min == self.lambda_max and self.lambda_step > 0):
                raise ConfigError("lambda grid needs lambda_min <= lambda_max and a positive step")
        if self.experiment == "filter":
            lo, hi = self.passband()
            if lo < self.lambda_min or hi > self.lambda_max:
                raise ConfigError("filter pass band lies outside the lambda grid")

    # -- derived objects -----------------------------------------------------
    @classmethod
    def for_experiment(cls, experiment: str, **overrides) -> "ExperimentConfig":
        values = dict(EXPERIMENT_DEFAULTS.get(experiment, {}))
        values.update(overrides)
        return cls(experiment=experiment, **values)

    @classmethod
    def from_file(cls, path, **overrides) -> "ExperimentConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        if not isinstance(raw, dict):
            raise ConfigError("config file must be a flat key: value mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for k, v in raw.items():
            if isinstance(v, (dict, list)):
                raise ConfigError(f"config key {k!r} must be a scalar")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        experiment = raw.pop("experiment", overrides.get("experiment", "switch"))
        return cls.for_experiment(experiment, **raw)

    def to_yaml(self) -> str:
        return yaml.safe_dump(dataclasses.asdict(self), sort_keys=False)

    def routing(self) -> TargetRouting:
        return TargetRouting.parse(self.routes, 4)

    def schedule(self) -> TrainSchedule:
        return TrainSchedule(
            coarse_step=self.coarse_step, fine_step=self.fine_step,
            coarse_sweeps=self.coarse_sweeps, fine_sweeps=self.fine_sweeps,
            target_cf=self.target_cf, acceptance_rule=self.acceptance_rule,
            tolerance=self.tolerance, patience=self.patience, max_evaluations=self.max_evaluations,
        )

    def signal(self) -> NrzConfig:
        return NrzConfig(self.bitrate, self.prbs_order, self.samples_per_bit,
                         self.rise_time_fraction, self.amplitude_noise_sigma, self.signal_seed)

    def wavelengths(self) -> np.ndarray:
        n = int(round((self.lambda_max - self.lambda_min) / self.lambda_step)) + 1
        return self.lambda_min + self.lambda_step * np.arange(n)

    def ports(self) -> list[int]:
        return [int(p) for p in str(self.monitor_ports).split(",") if p.strip() != ""]

    def passband(self):
        half = self.filter_fwhm / 2
        return (self.filter_center - half, self.filter_center + half)

    def stopbands(self):
        guard = self.filter_fwhm / 2 if self.filter_guard is None else self.filter_guard
        lo, hi = self.passband()
        bands = []
        if lo - guard > self.lambda_min:
            bands.append((self.lambda_min, lo - guard))
        if hi + guard < self.lambda_max:
            bands.append((hi + guard, self.lambda_max))
        return bands

    def build_bench(self) -> BenchSession:
        thermal = ThermalShifterModel(self.period_T, self.resistance, self.max_voltage)
        spectral = SpectralModel(
            self.center_wavelength, self.grating_peak_loss, self.grating_3db_bandwidth,
            self.dispersion_enabled, self.arm_imbalance_sigma, self.group_index, self.spectral_seed,
        )
        chip = SimulatedChip(thermal=thermal, spectral=spectral, include_gratings=self.include_gratings)
        bench = BenchSession(chip, noise_sigma_rel=self.noise_sigma_rel, rng_seed=self.seed)
        bench.set_voltages(phase_to_voltage(mesh.identity_state(chip.topology), thermal))
        return bench

    @property
    def effective_scramble_seed(self) -> int:
        return 1000 + self.seed if self.scramble_seed is None else self.scramble_seed


EXPERIMENT_DEFAULTS = {
    "switch": {"routes": "0:2,1:1,2:0"},
    "mimo": {"routes": "0:0,1:1,2:2,3:3"},
    "mimo-eye": {"routes": "0:0,1:1,2:2,3:3", "patience": 20, "success_cf": 0.8},
    "filter": {"dispersion_enabled": True, "arm_imbalance_sigma": 10.0, "tolerance": 0.05,
               "lambda_min": 1510.0, "lambda_max": 1590.0, "lambda_step": 1.0, "success_cf": 10.0},
    "spectrum-sweep": {"routes": "0:0,1:1,2:2,3:3"},
    "eye-sim": {"routes": "0:0,1:1,2:2,3:3"},
}


# -- chip roles ---------------------------------------------------------------

def trainable_channels(topology: mesh.MeshTopology, experiment: str) -> list[int]:
    """Voltage channels the trainer may move for each experiment."""
    first_open = topology.shifter_index[(mesh.PART_DIAG, 0, "theta")]
    part3 = [i for i in topology.indices(mesh.PART_DIAG) if i != first_open]
    part4 = topology.indices(mesh.PART_CORE_B)
    if experiment == "switch":
        return part4
    if experiment in ("mimo", "mimo-eye"):
        return part3 + part4
    if experiment == "filter":
        return topology.indices(mesh.PART_CORE_A) + part3 + part4
    raise ValueError(f"experiment {experiment!r} has no training stage")


# -- reports ------------------------------------------------------------------

@dataclass
class CrosstalkReport:
    routing: TargetRouting
    powers_mw: np.ndarray  # monitored outputs x active inputs
    wavelength: float
    band: Optional[tuple] = None
    threshold_db: float = -10.0
    band_curve: Optional[tuple] = None  # (wavelengths, worst crosstalk dB)

    @property
    def matrix_db(self) -> np.ndarray:
        """Power relative to each input's routed output, dB (0 on routed entries)."""
        routed = (self.powers_mw * self.routing.matrix()).sum(axis=0)
        with np.errstate(divide="ignore"):
            return 10 * np.log10(np.maximum(self.powers_mw, 1e-300) / routed[None, :])

    @property
    def per_input_db(self) -> np.ndarray:
        return crosstalk_db(self.powers_mw, self.routing)

    @property
    def worst_db(self) -> float:
        return float(np.max(self.per_input_db))

    @property
    def band_width(self) -> float:
        return 0.0 if self.band is None else float(self.band[1] - self.band[0])

    def to_csv(self, path) -> None:
        outs = self.routing.outputs
        m = self.routing.matrix()
        mdb = self.matrix_db
        with open(path, "w") as fh:
            fh.write("input,output,power_mw,relative_db,routed\n")
            for j, port_in in enumerate(self.routing.inputs):
                for i, port_out in enumerate(outs):
                    fh.write(f"{port_in},{port_out},{self.powers_mw[i, j]:.9e},{mdb[i, j]:.4f},{int(m[i, j])}\n")


def crosstalk_db(powers, routing: TargetRouting) -> np.ndarray:
    """Per input: total power on non-routed monitored outputs over routed power, dB."""
    m = routing.matrix()
    routed = (powers * m).sum(axis=0)
    leak = (powers * (1 - m)).sum(axis=0)
    with np.errstate(divide="ignore"):
        return 10 * np.log10(np.maximum(leak, 1e-300) / np.maximum(routed, 1e-300))


def crosstalk_spectrum(bench: BenchSession, routing: TargetRouting, wavelengths) -> np.ndarray:
    """Worst-case crosstalk (dB) over inputs at each wavelength."""
    outs = routing.outputs
    lin = np.zeros((len(wavelengths), len(outs), len(routing.inputs)))
    for j, port_in in enumerate(routing.inputs):
        bench.select_input(port_in)
        for i, port_out in enumerate(outs):
            lin[:, i, j] = 10 ** (bench.read_spectrum(wavelengths, port_out).spectrum_dbm / 10)
    return np.array([crosstalk_db(lin[k], routing).max() for k in range(len(wavelengths))])


def band_below(wavelengths, curve, threshold, center) -> Optional[tuple]:
    """Contiguous wavelength span around ``center`` where ``curve`` stays below ``threshold``."""
    wavelengths = np.asarray(wavelengths)
    k = int(np.argmin(np.abs(wavelengths - center)))
    if curve[k] >= threshold:
        return None
    lo = k
    while lo > 0 and curve[lo - 1] < threshold:
        lo -= 1
    hi = k
    while hi < len(curve) - 1 and curve[hi + 1] < threshold:
        hi += 1
    return (float(wavelengths[lo]), float(wavelengths[hi]))


def measure_crosstalk(bench: BenchSession, cfg: ExperimentConfig) -> CrosstalkReport:
    routing = cfg.routing()
    report = CrosstalkReport(routing, measure_columns(bench, routing), bench.center_wavelength,
                             threshold_db=cfg.crosstalk_threshold_db)
    if cfg.dispersion_enabled:
        grid = cfg.wavelengths()
        curve = crosstalk_spectrum(bench, routing, grid)
        report.band_curve = (grid, curve)
        report.band = band_below(grid, curve, cfg.crosstalk_threshold_db, bench.center_wavelength)
    return report


# -- file output --------------------------------------------------------------

def write_state(path, voltages, experiment: str = "") -> None:
    with open(path, "w") as fh:
        if experiment:
            fh.write(f"# voltage snapshot ({experiment}), mV\n")
        for i, v in enumerate(voltages):
            fh.write(f"v{i:02d}={float(v)!r}\n")


def read_state(path) -> np.ndarray:
    if path is None or not os.path.exists(path):
        raise FileNotFoundError(f"saved chip state {path!r} not found")
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            values[int(key.strip().lstrip("v"))] = float(val)
    return np.array([values[i] for i in range(len(values))])


def write_summary(path, lines: dict) -> None:
    with open(path, "w") as fh:
        for k, v in lines.items():
            if isinstance(v, float):
                v = f"{v:.6g}"
            fh.write(f"{k}: {v}\n")


@dataclass
class RunResult:
    experiment: str
    trace: Optional[TrainingTrace] = None
    report: Optional[CrosstalkReport] = None
    summary: dict = field(default_factory=dict)
    flagged: bool = False
    files: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_FLAGGED if self.flagged else EXIT_OK


def _out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_summary(cfg: ExperimentConfig, trace: TrainingTrace) -> dict:
    return {
        "experiment": cfg.experiment,
        "seed": cfg.seed,
        "acceptance_rule": cfg.acceptance_rule,
        "initial_cf": trace.initial_cf,
        "final_cf": trace.final_cf,
        "evaluations": trace.evaluations,
        "sweeps": len(trace.sweep_cf),
        "parameter_updates": len(trace.records),
        "stop_reason": trace.stop_reason,
    }


def _finish(cfg, result: RunResult, bench: BenchSession, write_trace=True) -> RunResult:
    out = _out(cfg)
    if write_trace and result.trace is not None:
        result.trace.to_csv(out / "trace.csv")
        result.files.append("trace.csv")
    write_state(out / "state.txt", bench.current_voltages, cfg.experiment)
    result.files.append("state.txt")
    result.summary["flagged"] = "yes" if result.flagged else "no"
    write_summary(out / "summary.txt", result.summary)
    result.files.append("summary.txt")
    return result


def _write_band_spectrum(out: Path, report: CrosstalkReport) -> None:
    grid, curve = report.band_curve
    with open(out / "spectrum.csv", "w") as fh:
        fh.write("wavelength_nm,worst_crosstalk_db\n")
        for lam, c in zip(grid, curve):
            fh.write(f"{lam:.3f},{c:.4f}\n")


def _routing_run(cfg: ExperimentConfig, bench: BenchSession, scrambled: Optional[np.ndarray]) -> RunResult:
    topo = bench.chip.topology
    routing = cfg.routing()
    trace = coordinate_descent(bench, lambda b: cf_routing(b, routing), cfg.schedule(),
                               trainable_channels(topo, cfg.experiment), seed=cfg.seed)
    report = measure_crosstalk(bench, cfg)
    result = RunResult(cfg.experiment, trace=trace, report=report)
    result.summary = _train_summary(cfg, trace)
    result.summary["routing"] = str(routing)
    if scrambled is not None:
        result.summary["scramble_seed"] = cfg.effective_scramble_seed
    result.summary["crosstalk_db_at_center"] = report.worst_db
    if report.band_curve is not None:
        result.summary["crosstalk_band_nm"] = (
            "none" if report.band is None else f"{report.band[0]:.2f}-{report.band[1]:.2f} ({report.band_width:.2f} nm)"
        )
    result.flagged = trace.final_cf < cfg.success_cf
    out = _out(cfg)
    report.to_csv(out / "crosstalk.csv")
    result.files.append("crosstalk.csv")
    if report.band_curve is not None:
        _write_band_spectrum(out, report)
        result.files.append("spectrum.csv")
    return result


def run_switch(cfg: ExperimentConfig) -> RunResult:
    """Multichannel switch: Part 2 transparent, Part 3 open, Part 4 trained."""
    bench = cfg.build_bench()
    result = _routing_run(cfg, bench, None)
    return _finish(cfg, result, bench)


def run_mimo(cfg: ExperimentConfig) -> RunResult:
    """MIMO descrambler: Part 2 scrambled and frozen, Parts 3 and 4 trained with the routing cost."""
    bench = cfg.build_bench()
    scrambled = scramble(bench, cfg.effective_scramble_seed)
    result = _routing_run(cfg, bench, scrambled)
    bench.select_input(None)
    out = _out(cfg)
    signal = cfg.signal()
    for port in cfg.ports():
        eye = bench.read_eye(port, signal).eye
        eye.to_csv(out / f"eye_{port}_final.csv")
        result.files.append(f"eye_{port}_final.csv")
        result.summary[f"sarea_port{port}"] = eye_opening_area(eye)
    return _finish(cfg, result, bench)


def run_mimo_eye(cfg: ExperimentConfig) -> RunResult:
    """MIMO descrambler trained on eye-opening area with every channel live."""
    bench = cfg.build_bench()
    topo = bench.chip.topology
    scramble(bench, cfg.effective_scramble_seed)
    trainable = trainable_channels(topo, cfg.experiment)
    initial = None
    if cfg.state_file is not None:
        # warm start from a previous descrambler solution
        initial = voltage_to_phase(read_state(cfg.state_file)[trainable], bench.calibration)
    ports = cfg.ports()
    signal = cfg.signal()
    out = _out(cfg)
    checkpoints = []

    def snapshot(label: str):
        bench.select_input(None)
        values = []
        for port in ports:
            eye = bench.read_eye(port, signal).eye
            eye.to_csv(out / f"eye_{port}_{label}.csv")
            values.append(eye_opening_area(eye))
        checkpoints.append((label, values))

    def on_sweep(trace, sweep):
        if (sweep + 1) % cfg.eye_checkpoint_every == 0:
            snapshot(f"{sweep + 1:03d}")

    trace = coordinate_descent(bench, lambda b: cf_eye(b, ports, signal), cfg.schedule(), trainable,
                               seed=cfg.seed, initial_phases=initial,
                               on_sweep=on_sweep)
    snapshot("final")
    result = RunResult(cfg.experiment, trace=trace)
    result.summary = _train_summary(cfg, trace)
    result.summary["monitor_ports"] = ",".join(map(str, ports))
    result.summary["scramble_seed"] = cfg.effective_scramble_seed
    result.summary["checkpoint_sarea"] = " ".join(
        f"{label}=" + "/".join(f"{v:.4f}" for v in values) for label, values in checkpoints)
    result.extras["checkpoints"] = checkpoints
    result.files.extend(f"eye_{p}_{label}.csv" for label, _ in checkpoints for p in ports)
    result.flagged = trace.final_cf < cfg.success_cf
    return _finish(cfg, result, bench)


def spectral_fwhm(wavelengths, dbm) -> float:
    """Width of the region around the peak within 3 dB of the peak."""
    k = int(np.argmax(dbm))
    above = dbm >= dbm[k] - 3.0
    lo = k
    while lo > 0 and above[lo - 1]:
        lo -= 1
    hi = k
    while hi < len(dbm) - 1 and above[hi + 1]:
        hi += 1
    return float(wavelengths[hi] - wavelengths[lo])


def run_filter(cfg: ExperimentConfig) -> RunResult:
    """Tunable filter from input/output ``filter_port``, all of Parts 2-4 trained."""
    bench = cfg.build_bench()
    grid = cfg.wavelengths()
    port = cfg.filter_port
    passband, stopbands = cfg.passband(), cfg.stopbands()
    out = _out(cfg)
    bench.select_input(port)
    before = bench.read_spectrum(grid, port).spectrum_dbm
    result = RunResult(cfg.experiment)
    result.summary = {"experiment": cfg.experiment, "seed": cfg.seed,
                      "filter_center_nm": cfg.filter_center, "filter_fwhm_nm": cfg.filter_fwhm}
    if not cfg.dispersion_enabled or cfg.arm_imbalance_sigma <= 0:
        result.flagged = True
        result.summary["final_cf"] = filter_cf_from_spectrum(grid, before, passband, stopbands)
        result.summary["advice"] = "dispersion disabled or zero arm imbalance: the chip has no tunable spectral structure"
        return _finish(cfg, result, bench, write_trace=False)
    topo = bench.chip.topology
    trace = coordinate_descent(bench, lambda b: cf_filter(b, passband, stopbands, grid, port, port),
                               cfg.schedule(), trainable_channels(topo, "filter"), seed=cfg.seed)
    bench.select_input(port)
    after = bench.read_spectrum(grid, port).spectrum_dbm
    with open(out / "spectrum.csv", "w") as fh:
        fh.write("wavelength_nm,before_dbm,after_dbm\n")
        for lam, a, b in zip(grid, before, after):
            fh.write(f"{lam:.3f},{a:.4f},{b:.4f}\n")
    result.files.append("spectrum.csv")
    result.trace = trace
    result.summary.update(_train_summary(cfg, trace))
    result.summary["achieved_fwhm_nm"] = spectral_fwhm(grid, after)
    result.summary["peak_wavelength_nm"] = float(grid[int(np.argmax(after))])
    result.extras["spectrum"] = (grid, before, after)
    if trace.final_cf < 3.0:
        result.summary["advice"] = "contrast plateaued below 3 dB; increase arm_imbalance_sigma"
    result.flagged = trace.final_cf < cfg.success_cf
    return _finish(cfg, result, bench)


def _restored_bench(cfg: ExperimentConfig) -> BenchSession:
    bench = cfg.build_bench()
    bench.set_voltages(read_state(cfg.state_file))
    return bench


def run_spectrum_sweep(cfg: ExperimentConfig) -> RunResult:
    """Transmission (dB, fibre to fibre) for every input/output pair of a saved state."""
    bench = _restored_bench(cfg)
    grid = cfg.wavelengths()
    n = bench.n_ports
    table = np.zeros((len(grid), n, n))
    for j in range(n):
        bench.select_input(j)
        for i in range(n):
            table[:, i, j] = bench.read_spectrum(grid, i).spectrum_dbm
    out = _out(cfg)
    with open(out / "spectrum.csv", "w") as fh:
        fh.write("wavelength_nm," + ",".join(f"I{j}_O{i}_db" for j in range(n) for i in range(n)) + "\n")
        for k, lam in enumerate(grid):
            fh.write(f"{lam:.3f}," + ",".join(f"{table[k, i, j]:.4f}" for j in range(n) for i in range(n)) + "\n")
    result = RunResult(cfg.experiment, files=["spectrum.csv"])
    result.extras["transmission_db"] = table
    result.summary = {"experiment": cfg.experiment, "state_file": cfg.state_file, "points": len(grid)}
    routing = cfg.routing()
    lin = 10 ** (table[:, routing.outputs][:, :, routing.inputs] / 10)
    curve = np.array([crosstalk_db(lin[k], routing).max() for k in range(len(grid))])
    band = band_below(grid, curve, cfg.crosstalk_threshold_db, cfg.center_wavelength)
    result.summary["routing"] = str(routing)
    result.summary["crosstalk_band_nm"] = "none" if band is None else f"{band[0]:.2f}-{band[1]:.2f}"
    result.extras["band"] = band
    write_summary(out / "summary.txt", result.summary)
    result.files.append("summary.txt")
    return result


def run_eye_sim(cfg: ExperimentConfig) -> RunResult:
    """Eye diagrams at the monitored ports for the identity chip, a saved state or a scramble."""
    bench = _restored_bench(cfg) if cfg.state_file else cfg.build_bench()
    if cfg.scramble_seed is not None:
        scramble(bench, cfg.scramble_seed)
    bench.select_input(None)
    out = _out(cfg)
    result = RunResult(cfg.experiment)
    result.summary = {"experiment": cfg.experiment}
    for port in cfg.ports():
        eye = bench.read_eye(port, cfg.signal()).eye
        eye.to_csv(out / f"eye_{port}_sim.csv")
        result.files.append(f"eye_{port}_sim.csv")
        result.summary[f"sarea_port{port}"] = eye_opening_area(eye)
    write_summary(out / "summary.txt", result.summary)
    result.files.append("summary.txt")
    return result


RUNNERS = {
    "switch": run_switch,
    "mimo": run_mimo,
    "mimo-eye": run_mimo_eye,
    "filter": run_filter,
    "spectrum-sweep": run_spectrum_sweep,
    "eye-sim": run_eye_sim,
}


def run(cfg: ExperimentConfig) -> RunResult:
    return RUNNERS[cfg.experiment](cfg)


def oracle_switch_state(cfg: ExperimentConfig) -> np.ndarray:
    """Voltages that realise ``cfg.routing()`` exactly, from the analytic decomposition.

    Owner-side only: uses the topology to place a permutation unitary in Part 4
    (Parts 2 and 3 transparent).
    """
    topo = mesh.MeshTopology.default()
    routing = cfg.routing()
    n = topo.n_ports
    perm = np.zeros((n, n))
    free_out = [p for p in range(n) if p not in routing.outputs]
    free_in = [p for p in range(n) if p not in routing.inputs]
    for i_in, i_out in routing.routes.items():
        perm[i_out, i_in] = 1
    for i_in, i_out in zip(free_in, free_out):
        perm[i_out, i_in] = 1
    phases = mesh.identity_state(topo)
    core = mesh.decompose_unitary(perm)
    phases[topo.core_index_array(mesh.PART_CORE_B)] = core
    thermal = ThermalShifterModel(cfg.period_T, cfg.resistance, cfg.max_voltage)
    return phase_to_voltage(phases, thermal)
