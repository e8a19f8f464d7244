"""Simulated instrument bench: voltage source array in, detector readings out.

A :class:`BenchSession` is the only thing a trainer talks to.  It exposes the
voltage channels, the input gates and three instruments (photodetector array,
spectrum analyzer, oscilloscope) but never phases, topology or matrices.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import hardware, mesh
from .hardware import DriveLimitError, SpectralModel, ThermalShifterModel
from .signals import EyeTrace, NrzConfig, channel_bits, fold_eye, nrz_waveform

DBM_FLOOR = -120.0


class SimulatedChip:
    """Owner-side model of the chip: topology, drive calibration and dispersion."""

    def __init__(
        self,
        topology: mesh.MeshTopology | None = None,
        thermal: ThermalShifterModel | None = None,
        spectral: SpectralModel | None = None,
        input_power_mw: Sequence[float] | None = None,
        include_gratings: bool = True,
    ):
        self.topology = topology or mesh.MeshTopology.default()
        self.thermal = thermal or ThermalShifterModel()
        self.spectral = spectral or SpectralModel()
        n = self.topology.n_ports
        self.input_power_mw = np.ones(n) if input_power_mw is None else np.asarray(input_power_mw, dtype=float)
        if self.input_power_mw.shape != (n,) or np.any(self.input_power_mw < 0):
            raise ValueError(f"input power must be {n} non-negative values")
        self.include_gratings = include_gratings
        theta_mask = self.topology.theta_mask()
        self.arm_imbalance_um = np.zeros(self.topology.n_shifters)
        self.arm_imbalance_um[theta_mask] = self.spectral.arm_imbalances(int(theta_mask.sum()))
        self._cache_key = None
        self._cache_val = None

    @property
    def n_ports(self) -> int:
        return self.topology.n_ports

    @property
    def n_channels(self) -> int:
        return self.topology.n_shifters

    def phases(self, voltages) -> np.ndarray:
        return hardware.voltage_to_phase(voltages, self.thermal)

    def matrix(self, voltages) -> np.ndarray:
        """Centre-wavelength matrix (without gates), memoised on the last voltage vector."""
        v = np.asarray(voltages, dtype=float)
        key = v.tobytes()
        if key != self._cache_key:
            self._cache_val = mesh.core_matrix(self.topology, self.phases(v))
            self._cache_key = key
        return self._cache_val

    def matrices(self, voltages, wavelengths) -> np.ndarray:
        """Matrices over a wavelength grid, shape ``(L, N, N)``."""
        lam = hardware.check_wavelength(np.atleast_1d(wavelengths))
        if not self.spectral.dispersion_enabled:
            return np.broadcast_to(self.matrix(voltages), (lam.size, self.n_ports, self.n_ports))
        theta_c = self.phases(voltages)
        per_lam = hardware.spectral_phase(theta_c[None, :], lam[:, None], self.arm_imbalance_um[None, :], self.spectral)
        return mesh.core_matrix(self.topology, per_lam)

    def coupling(self, wavelengths) -> np.ndarray:
        """Fibre-to-fibre coupler transmission (input and output grating)."""
        lam = hardware.check_wavelength(wavelengths)
        if not self.include_gratings:
            return np.ones_like(lam)
        return hardware.grating_envelope(lam, self.spectral) ** 2


@dataclass
class MeasurementFrame:
    kind: str
    timestamp: int
    powers: Optional[np.ndarray] = None
    wavelengths: Optional[np.ndarray] = None
    spectrum_dbm: Optional[np.ndarray] = None
    eye: Optional[EyeTrace] = None


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    payload: object

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "payload": self.payload, "timestamp": self.seq})


TRAINER_EVENT_KINDS = frozenset({"set_voltages", "select_input", "read_powers", "read_spectrum", "read_eye"})


class BenchSession:
    """One serialized connection to a (simulated) chip on the bench.

    Timestamps are a logical event counter so that identical command streams
    replay to identical logs.
    """

    def __init__(
        self,
        backend: SimulatedChip | None = None,
        noise_sigma_rel: float = 0.0,
        rng_seed: int = 0,
        record_payloads: bool = True,
    ):
        self._chip = backend or SimulatedChip()
        self.noise_sigma_rel = float(noise_sigma_rel)
        self.rng_seed = rng_seed
        self._rng = np.random.default_rng(rng_seed)
        self._voltages = np.zeros(self._chip.n_channels)
        self._gates = np.ones(self._chip.n_ports, dtype=bool)
        self._tick = 0
        self._lock = threading.Lock()
        self._record_payloads = record_payloads
        self._waveforms = {}
        self.log: list[Event] = []

    # -- public bench facts a human operator would know --------------------
    @property
    def n_channels(self) -> int:
        return self._chip.n_channels

    @property
    def n_ports(self) -> int:
        return self._chip.n_ports

    @property
    def calibration(self) -> ThermalShifterModel:
        """Voltage-to-phase calibration of the shifters (measured once per chip)."""
        return self._chip.thermal

    @property
    def center_wavelength(self) -> float:
        return self._chip.spectral.center_wavelength

    @property
    def current_voltages(self) -> np.ndarray:
        return self._voltages.copy()

    @property
    def input_gates(self) -> np.ndarray:
        return self._gates.copy()

    def _record(self, kind: str, payload) -> int:
        self._tick += 1
        self.log.append(Event(self._tick, kind, payload if self._record_payloads else None))
        return self._tick

    # -- voltage source array -------------------------------------------------
    def set_voltages(self, v) -> None:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n_channels,):
            raise ValueError(f"expected {self.n_channels} voltages, got shape {v.shape}")
        limit = self.calibration.max_voltage
        bad = np.flatnonzero(~np.isfinite(v) | (v < 0) | (v > limit))
        if bad.size:
            raise DriveLimitError(f"channels {bad.tolist()} outside [0, {limit}] mV", bad)
        with self._lock:
            self._voltages = v.copy()
            self._record("set_voltages", v.tolist())

    def select_input(self, port: int | None) -> None:
        """Open a single input gate, or all of them with ``port=None``."""
        if port is None:
            gates = np.ones(self.n_ports, dtype=bool)
        else:
            if not (isinstance(port, (int, np.integer)) and 0 <= port < self.n_ports):
                raise ValueError(f"input port {port!r} not in 0..{self.n_ports - 1}")
            gates = np.zeros(self.n_ports, dtype=bool)
            gates[port] = True
        with self._lock:
            self._gates = gates
            self._record("select_input", None if port is None else int(port))

    # -- instruments ------------------------------------------------------------
    def _port_weights(self) -> np.ndarray:
        """``|M_ij|^2 * P_j * gate_j`` at the centre wavelength, incoherent sum over inputs."""
        m = self._chip.matrix(self._voltages)
        w = np.abs(m) ** 2 * (self._chip.input_power_mw * self._gates)[None, :]
        return w * self._chip.coupling(self.center_wavelength)

    def read_powers(self) -> MeasurementFrame:
        with self._lock:
            p = self._port_weights().sum(axis=1)
            if self.noise_sigma_rel > 0:
                p = p * self._rng.normal(1.0, self.noise_sigma_rel, p.shape)
                p = np.maximum(p, 0.0)
            ts = self._record("read_powers", p.tolist())
        return MeasurementFrame("powers", ts, powers=p)

    def read_spectrum(self, wavelengths, port: int = 0) -> MeasurementFrame:
        lam = np.atleast_1d(np.asarray(wavelengths, dtype=float))
        hardware.check_wavelength(lam)
        if lam.size > 1 and np.any(np.diff(lam) <= 0):
            raise ValueError("wavelength grid must be strictly increasing")
        self._check_port(port)
        with self._lock:
            m = self._chip.matrices(self._voltages, lam)
            src = self._chip.input_power_mw * self._gates
            p = (np.abs(m[:, port, :]) ** 2 @ src) * self._chip.coupling(lam)
            if self.noise_sigma_rel > 0:
                p = np.maximum(p * self._rng.normal(1.0, self.noise_sigma_rel, p.shape), 0.0)
            dbm = 10.0 * np.log10(np.maximum(p, 10 ** (DBM_FLOOR / 10)))
            ts = self._record("read_spectrum", {"port": int(port), "n": int(lam.size)})
        return MeasurementFrame("spectrum", ts, wavelengths=lam, spectrum_dbm=dbm)

    def _check_port(self, port):
        if not (isinstance(port, (int, np.integer)) and 0 <= port < self.n_ports):
            raise ValueError(f"output port {port!r} not in 0..{self.n_ports - 1}")

    def _channel_waveforms(self, config: NrzConfig, n_bits: int):
        key = (config, n_bits)
        if key not in self._waveforms:
            bits = np.array([channel_bits(config, n_bits, j) for j in range(self.n_ports)])
            waves = np.array([nrz_waveform(bits[j], config, channel=j) for j in range(self.n_ports)])
            self._waveforms[key] = (bits, waves)
        return self._waveforms[key]

    def read_eye(self, port: int, config: NrzConfig = NrzConfig(), source: int | None = None,
                 n_bits: int | None = None) -> MeasurementFrame:
        """Eye at output ``port`` with every open input carrying its own NRZ stream.

        Segments are labelled by the bits of input ``source`` (default: same
        index as ``port``).  The trace is scaled to unit eye amplitude, i.e.
        mean one-level minus mean zero-level in the central 20% of the unit
        interval, like an oscilloscope's auto-scaled eye.
        """
        self._check_port(port)
        source = port if source is None else source
        self._check_port(source)
        n_bits = n_bits or config.period_bits
        bits, waves = self._channel_waveforms(config, n_bits)
        with self._lock:
            weights = self._port_weights()[port]
            trace = weights @ waves
            eye = fold_eye(trace, config, bits[source])
            centre = (eye.t >= 0.4) & (eye.t < 0.6)
            ones = centre & (eye.label == 1)
            zeros = centre & (eye.label == 0)
            amp = eye.amplitude[ones].mean() - eye.amplitude[zeros].mean()
            if amp > 1e-15 * max(1.0, float(np.max(np.abs(trace)))):
                eye = eye.scaled(1.0 / amp)
            else:
                eye = eye.scaled(0.0)
            ts = self._record("read_eye", {"port": int(port), "source": int(source)})
        return MeasurementFrame("eye", ts, eye=eye)

    # -- owner-side access (not for trainers) ---------------------------------
    def owner_set_phases(self, indices: Sequence[int], phases, tag: str = "owner") -> None:
        """Drive selected channels to given phases, logged as an owner event."""
        idx = np.asarray(indices, dtype=int)
        v = self._voltages.copy()
        v[idx] = hardware.phase_to_voltage(phases, self.calibration)
        with self._lock:
            self._voltages = v
            self._record(tag, {"indices": idx.tolist()})

    @property
    def chip(self) -> SimulatedChip:
        """The simulated device behind the bench (simulation owner only)."""
        return self._chip

    def save_log(self, path) -> None:
        with open(path, "w") as fh:
            for ev in self.log:
                fh.write(ev.to_json() + "\n")


def scramble(session: BenchSession, seed: int, part: str = mesh.PART_CORE_A, zero: bool = False) -> np.ndarray:
    """Put ``part`` into random phases drawn uniform on [0, 2*pi) from ``seed``.

    ``zero=True`` applies all-zero phases instead (every MZI in the cross state).
    Returns the applied phases, for experiment records only.
    """
    idx = session.chip.topology.indices(part)
    if zero:
        phases = np.zeros(len(idx))
    else:
        phases = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, len(idx))
    session.owner_set_phases(idx, phases, tag="scramble")
    return phases
