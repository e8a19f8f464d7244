"""Cost functions and the black-box coordinate-descent trainer.

Everything here drives the chip through :class:`~photonic_selflearn.bench.BenchSession`
commands only (``set_voltages``, ``select_input`` and the ``read_*`` calls).
The trainer knows the shifter calibration (voltage <-> phase) and which
channels it may move; it knows nothing about how the channels are wired.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .hardware import phase_to_voltage, voltage_to_phase
from .signals import NrzConfig, eye_opening_area

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class UndefinedCorrelationError(ValueError):
    """Correlation of a zero vector."""

    def __init__(self, message: str, channel: int | None = None):
        super().__init__(message)
        self.channel = channel


class TrainingAborted(RuntimeError):
    def __init__(self, message: str, trace: "TrainingTrace"):
        super().__init__(message)
        self.trace = trace


def corr(a, b) -> float:
    """``|a . b| / (|a| |b|)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise UndefinedCorrelationError("correlation of a zero vector is undefined")
    return float(abs(a @ b) / (na * nb))


@dataclass(frozen=True)
class TargetRouting:
    """Partial permutation input port -> output port.

    Only the outputs that appear in the routing are monitored, as with the
    three-port switch experiments.
    """

    routes: Mapping[int, int]
    n_ports: int = 4

    def __post_init__(self):
        routes = {int(k): int(v) for k, v in dict(self.routes).items()}
        if not routes:
            raise ValueError("empty routing")
        ports = range(self.n_ports)
        if any(k not in ports or v not in ports for k, v in routes.items()):
            raise ValueError(f"routing {routes} uses ports outside 0..{self.n_ports - 1}")
        if len(set(routes.values())) != len(routes):
            raise ValueError("routing is not a permutation: two inputs share an output")
        object.__setattr__(self, "routes", dict(sorted(routes.items())))

    @classmethod
    def parse(cls, text: str, n_ports: int = 4) -> "TargetRouting":
        """Parse ``"0:2,1:1,2:0"``."""
        pairs = [p.split(":") for p in text.replace(" ", "").split(",") if p]
        return cls({int(a): int(b) for a, b in pairs}, n_ports)

    @property
    def inputs(self) -> list[int]:
        return list(self.routes)

    @property
    def outputs(self) -> list[int]:
        return sorted(self.routes.values())

    def matrix(self) -> np.ndarray:
        """0/1 target over monitored outputs (rows) and active inputs (columns)."""
        outs = self.outputs
        m = np.zeros((len(outs), len(self.routes)))
        for j, (i_in, i_out) in enumerate(self.routes.items()):
            m[outs.index(i_out), j] = 1.0
        return m

    def __str__(self):
        return ",".join(f"{a}:{b}" for a, b in self.routes.items())


def measure_columns(bench, target: TargetRouting) -> np.ndarray:
    """Measured power distribution over monitored outputs, one column per active input."""
    outs = target.outputs
    cols = []
    for j in target.inputs:
        bench.select_input(j)
        cols.append(bench.read_powers().powers[outs])
    return np.array(cols).T


def routing_cf_from_columns(measured: np.ndarray, target: TargetRouting) -> float:
    m = target.matrix()
    cf = 1.0
    for j, port in enumerate(target.inputs):
        try:
            cf *= corr(m[:, j], measured[:, j])
        except UndefinedCorrelationError:
            raise UndefinedCorrelationError(f"no light detected for input {port}", port) from None
    return cf


def cf_routing(bench, target: TargetRouting) -> float:
    """Product over inputs of corr(target column, measured column), in [0, 1]."""
    return routing_cf_from_columns(measure_columns(bench, target), target)


def cf_eye(bench, ports: Sequence[int], signal: NrzConfig = NrzConfig(), sources: Sequence[int] | None = None) -> float:
    """Product of normalised eye-opening areas at the monitored ports (all inputs open)."""
    bench.select_input(None)
    sources = list(ports) if sources is None else list(sources)
    cf = 1.0
    for port, src in zip(ports, sources):
        cf *= eye_opening_area(bench.read_eye(port, signal, source=src).eye)
    return cf


def band_mask(wavelengths, band) -> np.ndarray:
    lo, hi = band
    return (wavelengths >= lo) & (wavelengths <= hi)


def filter_cf_from_spectrum(wavelengths, dbm, passband, stopbands) -> float:
    wavelengths = np.asarray(wavelengths)
    dbm = np.asarray(dbm)
    pass_mask = band_mask(wavelengths, passband)
    stop_mask = np.zeros_like(pass_mask)
    for band in stopbands:
        stop_mask |= band_mask(wavelengths, band)
    if not pass_mask.any() or not stop_mask.any():
        raise ValueError("pass band or stop band contains no grid points")
    if (pass_mask & stop_mask).any():
        raise ValueError("pass band and stop band overlap")
    return float(dbm[pass_mask].mean() - dbm[stop_mask].mean())


def cf_filter(bench, passband, stopbands, wavelengths, port: int = 3, source: int = 3) -> float:
    """Mean dB power in the pass band minus mean dB power in the stop band(s)."""
    bench.select_input(source)
    frame = bench.read_spectrum(wavelengths, port)
    return filter_cf_from_spectrum(frame.wavelengths, frame.spectrum_dbm, passband, stopbands)


@dataclass(frozen=True)
class TrainSchedule:
    coarse_step: float = TWO_PI / 20
    fine_step: float = TWO_PI / 100
    coarse_sweeps: int = 60
    fine_sweeps: int = 60
    target_cf: float | None = None
    acceptance_rule: str = "greedy"
    tolerance: float = 1e-4
    patience: int = 1
    max_evaluations: int | None = None
    frozen_indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "frozen_indices", tuple(int(i) for i in self.frozen_indices))
        if self.coarse_step <= 0 or self.fine_step <= 0:
            raise ValueError("step sizes must be positive")
        if self.coarse_step <= self.fine_step:
            raise ValueError("coarse step must exceed fine step")
        if self.acceptance_rule not in ("paper", "greedy"):
            raise ValueError("acceptance_rule must be 'paper' or 'greedy'")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")

    @property
    def stages(self):
        return (("coarse", self.coarse_step, self.coarse_sweeps), ("fine", self.fine_step, self.fine_sweeps))


@dataclass
class TraceRecord:
    iteration: int
    sweep: int
    stage: str
    shifter_index: int
    cf_before: float
    cf_after: float
    accepted: str
    evaluations: int


TRACE_COLUMNS = ("iteration", "sweep", "stage", "shifter_index", "cf_before", "cf_after", "accepted", "evaluations")


@dataclass
class TrainingTrace:
    records: list = field(default_factory=list)
    sweep_cf: list = field(default_factory=list)
    initial_cf: float = float("nan")
    final_cf: float = float("nan")
    evaluations: int = 0
    final_voltages: np.ndarray | None = None
    converged: bool = False
    seed: int | None = None
    stop_reason: str = ""

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for r in self.records:
                w.writerow([r.iteration, r.sweep, r.stage, r.shifter_index,
                            _fmt(r.cf_before), _fmt(r.cf_after), r.accepted, r.evaluations])


def _fmt(x: float) -> str:
    return "nan" if x != x else f"{x:.12g}"


def read_trace_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def coordinate_descent(
    bench,
    cf: Callable[[object], float],
    schedule: TrainSchedule,
    trainable: Sequence[int],
    seed: int = 0,
    initial_phases: Sequence[float] | None = None,
    on_sweep: Callable[[TrainingTrace, int], None] | None = None,
) -> TrainingTrace:
    """Train the ``trainable`` voltage channels one at a time to maximise ``cf``.

    Step 1 draws random phases (uniform on [0, 2*pi), ``seed``) unless
    ``initial_phases`` are given.  Each parameter is tried at theta + step and
    kept if the cost does not drop.  Otherwise the ``paper`` rule moves to
    theta - step blindly, while the ``greedy`` rule measures theta - step and
    keeps the best of the three points.  A stage ends once ``patience``
    consecutive sweeps improve the cost by less than ``tolerance``; then the
    step shrinks from coarse to fine.  Channels not listed stay where the
    bench currently has them, as do ``schedule.frozen_indices``.
    """
    trainable = [int(i) for i in trainable if int(i) not in schedule.frozen_indices]
    calib = bench.calibration
    voltages = bench.current_voltages
    rng = np.random.default_rng(seed)
    phases = voltage_to_phase(voltages, calib).astype(float)
    if initial_phases is None:
        phases[trainable] = rng.uniform(0.0, TWO_PI, len(trainable))
    else:
        init = np.asarray(initial_phases, dtype=float)
        if init.shape != (len(trainable),):
            raise ValueError("initial_phases must match the trainable channels")
        phases[trainable] = np.mod(init, TWO_PI)
    voltages[trainable] = phase_to_voltage(phases[trainable], calib)

    trace = TrainingTrace(seed=seed)
    greedy = schedule.acceptance_rule == "greedy"
    budget = schedule.max_evaluations

    def evaluate() -> float:
        if budget is not None and trace.evaluations >= budget:
            raise _BudgetExhausted
        bench.set_voltages(voltages)
        trace.evaluations += 1
        try:
            return float(cf(bench))
        except Exception as exc:
            trace.final_voltages = voltages.copy()
            raise TrainingAborted(f"cost evaluation failed: {exc}", trace) from exc

    def put(i: int, value: float) -> None:
        phases[i] = value % TWO_PI
        voltages[i] = phase_to_voltage(phases[i], calib)

    def reached(value):
        return schedule.target_cf is not None and value >= schedule.target_cf

    current = evaluate()
    trace.initial_cf = current
    committed = phases.copy()
    known = True
    iteration = 0
    sweep_no = 0
    try:
        for stage, step, max_sweeps in schedule.stages:
            if reached(current):
                break
            stale = 0
            for _ in range(max_sweeps):
                start = current
                for i in trainable:
                    iteration += 1
                    theta = phases[i]
                    before = current
                    put(i, theta + step)
                    plus = evaluate()
                    if plus >= current:
                        current, known, move = plus, True, "plus"
                    elif not greedy:
                        # blind move; the reference cost stays at the last measurement
                        put(i, theta - step)
                        known, move = False, "minus"
                    else:
                        put(i, theta - step)
                        minus = evaluate()
                        if minus > current:
                            current, known, move = minus, True, "minus"
                        else:
                            put(i, theta)
                            move = "stay"
                    committed[i] = phases[i]
                    trace.records.append(TraceRecord(
                        iteration, sweep_no, stage, i, before,
                        current if known else float("nan"), move, trace.evaluations))
                    if known and reached(current):
                        break
                trace.sweep_cf.append(current)
                if on_sweep is not None:
                    on_sweep(trace, sweep_no)
                sweep_no += 1
                log.debug("%s sweep %d: cf=%.6g evals=%d", stage, sweep_no, current, trace.evaluations)
                if reached(current):
                    break
                stale = stale + 1 if current - start < schedule.tolerance else 0
                if stale >= schedule.patience:
                    break
        trace.stop_reason = "target" if reached(current) else "converged"
        trace.converged = True
    except _BudgetExhausted:
        phases[:] = committed
        voltages[trainable] = phase_to_voltage(phases[trainable], calib)
        trace.stop_reason = "budget"
        trace.converged = reached(current)
    bench.set_voltages(voltages)
    if not known:
        # the paper rule can finish on an unmeasured move
        current = float(cf(bench))
        trace.evaluations += 1
    trace.final_cf = current
    trace.final_voltages = voltages.copy()
    return trace


class _BudgetExhausted(Exception):
    pass
