"""Electrical drive, heater power and wavelength dependence of the chip."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

LAMBDA_MIN_NM = 1500.0
LAMBDA_MAX_NM = 1600.0


class DriveLimitError(ValueError):
    """A requested drive voltage is outside the source's range.

    ``indices`` lists the offending channels (empty for scalar input).
    """

    def __init__(self, message: str, indices=()):
        super().__init__(message)
        self.indices = tuple(int(i) for i in indices)


@dataclass(frozen=True)
class ThermalShifterModel:
    """Thermo-optic shifter: phase = 2*pi*V^2/T, heater power = V^2/R.

    Voltages in mV, ``period_T`` in mV^2, resistance in ohm.
    """

    period_T: float = 1.07e8
    resistance: float = 2000.0
    max_voltage: float = 15000.0

    def __post_init__(self):
        if self.period_T <= 0 or self.resistance <= 0:
            raise ValueError("period_T and resistance must be positive")
        if self.max_voltage <= 0:
            raise ValueError("max_voltage must be positive")

    @property
    def pi_voltage(self) -> float:
        return float(np.sqrt(self.period_T / 2.0))

    @property
    def pi_power(self) -> float:
        """Heater power (mW) for a pi phase shift."""
        return heater_power(self.pi_voltage, self)


def _check_drive(v, model: ThermalShifterModel) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    bad = ~np.isfinite(v) | (v < 0) | (v > model.max_voltage)
    if np.any(bad):
        idx = np.flatnonzero(bad) if v.ndim else ()
        raise DriveLimitError(
            f"drive voltage outside [0, {model.max_voltage}] mV on channel(s) {list(map(int, idx))}", idx
        )
    return v


def voltage_to_phase(v, model: ThermalShifterModel = ThermalShifterModel()):
    v = _check_drive(v, model)
    theta = np.mod(TWO_PI * v**2 / model.period_T, TWO_PI)
    return np.where(theta >= TWO_PI, 0.0, theta)


def phase_to_voltage(theta, model: ThermalShifterModel = ThermalShifterModel()):
    """Smallest non-negative voltage producing phase ``theta`` (wrapped into [0, 2*pi))."""
    theta = np.asarray(theta, dtype=float)
    if not np.all(np.isfinite(theta)):
        raise ValueError("phase must be finite")
    theta = np.mod(theta, TWO_PI)
    v = np.sqrt(theta * model.period_T / TWO_PI)
    if np.any(v > model.max_voltage):
        idx = np.flatnonzero(v > model.max_voltage) if v.ndim else ()
        raise DriveLimitError(f"phase needs more than {model.max_voltage} mV", idx)
    return v


def heater_power(v, model: ThermalShifterModel = ThermalShifterModel()):
    """Dissipated heater power in mW for a drive of ``v`` mV."""
    v = _check_drive(v, model)
    return (v * 1e-3) ** 2 / model.resistance * 1e3


@dataclass(frozen=True)
class SpectralModel:
    """Grating-coupler envelope and optional MZI dispersion.

    With ``dispersion_enabled`` each MZI gets a static arm-length imbalance
    drawn from Normal(0, ``arm_imbalance_sigma``) micrometres using ``rng_seed``.
    """

    center_wavelength: float = 1550.0
    grating_peak_loss: float = -6.9
    grating_3db_bandwidth: float = 40.0
    dispersion_enabled: bool = False
    arm_imbalance_sigma: float = 0.0
    group_index: float = 4.2
    rng_seed: int = 0

    def arm_imbalances(self, n_mzis: int) -> np.ndarray:
        if not self.dispersion_enabled or self.arm_imbalance_sigma == 0:
            return np.zeros(n_mzis)
        rng = np.random.default_rng(self.rng_seed)
        return rng.normal(0.0, self.arm_imbalance_sigma, n_mzis)


def check_wavelength(lam):
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < LAMBDA_MIN_NM) or np.any(lam > LAMBDA_MAX_NM):
        raise ValueError(f"wavelength outside the modelled {LAMBDA_MIN_NM:g}-{LAMBDA_MAX_NM:g} nm range")
    return lam


def grating_envelope_db(lam, model: SpectralModel = SpectralModel()):
    lam = check_wavelength(lam)
    half_width = model.grating_3db_bandwidth / 2.0
    return model.grating_peak_loss - 3.0 * ((lam - model.center_wavelength) / half_width) ** 2


def grating_envelope(lam, model: SpectralModel = SpectralModel()):
    """Linear power transmission of one grating coupler (Gaussian in dB)."""
    return 10.0 ** (grating_envelope_db(lam, model) / 10.0)


def spectral_phase(theta_at_center, lam, delta_l_um, model: SpectralModel = SpectralModel()):
    """Phase at wavelength ``lam`` (nm) of a shifter set to ``theta_at_center``.

    Thermal phase scales as 1/lambda; an arm imbalance ``delta_l_um`` adds a
    path-length term referenced to zero at the centre wavelength.
    """
    lam = check_wavelength(lam)
    lc = model.center_wavelength
    dl_nm = np.asarray(delta_l_um, dtype=float) * 1e3
    k = TWO_PI * model.group_index * dl_nm
    return np.asarray(theta_at_center) * (lc / lam) + k / lam - k / lc
