"""Two-crystal pulse-pumped down-conversion: wave-packet overlap model.

Photon pairs born in the first or second crystal carry temporal wave
packets delayed by ``tau`` relative to each other. The normalized overlap
of the two packets is the coherence factor ``C`` multiplying the HH/VV
coherence of the reduced polarization state

    rho = 1/2 (|HH><HH| + |VV><VV| + C |HH><VV| + C* |VV><HH|)

For a transform-limited Gaussian amplitude envelope
``A(t) ~ exp(-t**2 / (2 sigma_t**2))`` the overlap is
``exp(-tau**2 / (4 sigma_t**2))``. The spectral route computes the same
quantity as the Fourier transform of the normalized power spectrum.

Units: time in femtoseconds, angular frequency in rad/fs.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .entanglement import EntanglementReport, report
from .errors import AccuracyError, ConfigurationError, ParameterError
from .qstate import DensityMatrix, validate

SPEED_OF_LIGHT_NM_PER_FS = 299.792458  # nm / fs
DEFAULT_TAU_FS = 100.0
DEFAULT_CENTER_NM = 532.0

# Published (C, tau=100 fs) pairs inverted with fit_effective_width.
PUBLISHED_COHERENCE = {8.0: 0.63, 1.2: 0.99}


@dataclass(frozen=True)
class WavePacketSpec:
    """Gaussian bi-photon wave packet.

    ``sigma_t`` is the Gaussian width parameter of the amplitude envelope
    A(t) (fs); ``tau`` the delay between first- and second-crystal packets
    (fs). Only |tau| matters, so it is stored as a magnitude.
    """

    sigma_t: float
    tau: float = DEFAULT_TAU_FS
    chirp: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.sigma_t) and self.sigma_t > 0):
            raise ParameterError(f"sigma_t must be positive, got {self.sigma_t}")
        if not np.isfinite(self.tau):
            raise ParameterError(f"tau must be finite, got {self.tau}")
        if self.chirp != 0.0:
            raise ParameterError("only transform-limited (chirp = 0) packets are modeled")
        object.__setattr__(self, "tau", abs(float(self.tau)))
        object.__setattr__(self, "sigma_t", float(self.sigma_t))


@dataclass(frozen=True)
class SpectralAmplitude:
    """Complex spectral amplitude g(omega) on a finite support.

    ``func`` is evaluated on uniform grids over ``[omega_min, omega_max]``;
    ``n_points`` is the starting resolution for quadrature.
    """

    func: Callable[[np.ndarray], np.ndarray]
    omega_min: float
    omega_max: float
    n_points: int = 257
    norm: float = field(default=1.0, repr=False)

    def __post_init__(self):
        if not self.omega_max > self.omega_min:
            raise ParameterError("empty spectral support")
        if self.n_points < 3:
            raise ParameterError("need at least 3 grid points")

    def grid(self, n: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
        n = self.n_points if n is None else n
        omega = np.linspace(self.omega_min, self.omega_max, n)
        return omega, np.asarray(self.func(omega), dtype=complex) / np.sqrt(self.norm)

    def power_integral(self, n: Optional[int] = None) -> float:
        omega, g = self.grid(n)
        return float(np.trapezoid(np.abs(g) ** 2, omega))

    def normalized(self, n: int = 4097) -> "SpectralAmplitude":
        """Copy rescaled so that the integral of |g|^2 is one."""
        total = self.power_integral(n) * self.norm
        return SpectralAmplitude(self.func, self.omega_min, self.omega_max, self.n_points, norm=total)

    @classmethod
    def gaussian(cls, sigma_t: float, n_sigma: float = 8.0, n_points: int = 257) -> "SpectralAmplitude":
        """Spectrum of the transform-limited Gaussian packet with width ``sigma_t``.

        g(w) ~ exp(-w**2 sigma_t**2 / 2), so |g|^2 has standard deviation
        1/(sqrt(2) sigma_t); the support is cut at ``n_sigma`` of those.
        """
        if not sigma_t > 0:
            raise ParameterError(f"sigma_t must be positive, got {sigma_t}")
        std = 1.0 / (math.sqrt(2.0) * sigma_t)
        # analytic normalization: int exp(-w^2 s^2) dw = sqrt(pi)/s
        norm = math.sqrt(math.pi) / sigma_t
        return cls(lambda w: np.exp(-0.5 * (w * sigma_t) ** 2), -n_sigma * std, n_sigma * std,
                   n_points, norm=norm)

    @classmethod
    def top_hat(cls, width: float, n_points: int = 257) -> "SpectralAmplitude":
        """Flat |g|^2 of full width ``width`` (rad/fs), centred on zero."""
        if not width > 0:
            raise ParameterError("top-hat width must be positive")
        return cls(lambda w: np.ones_like(w), -width / 2, width / 2, n_points, norm=width)


def coherence_gaussian(spec: WavePacketSpec) -> float:
    """Normalized overlap of two Gaussian packets delayed by ``spec.tau``."""
    if not isinstance(spec, WavePacketSpec):
        raise ParameterError("coherence_gaussian expects a WavePacketSpec")
    return math.exp(-spec.tau ** 2 / (4.0 * spec.sigma_t ** 2))


def coherence_numeric(g: SpectralAmplitude, tau: float, rtol: float = 1e-8,
                      accuracy: float = 1e-6, max_doublings: int = 14) -> complex:
    """Integrate |g(w)|^2 exp(i w tau) dw by trapezoid with grid doubling.

    The ratio to the integral of |g|^2 on the same grid is returned, so
    C(0) = 1 exactly. The grid is refined until successive estimates
    differ by at most ``rtol``; if that never happens, the last change must
    still be below ``accuracy`` or :class:`AccuracyError` is raised.
    """
    n = g.n_points
    previous = None
    change = math.inf
    for _ in range(max_doublings + 1):
        omega, amp = g.grid(n)
        power = np.abs(amp) ** 2
        total = np.trapezoid(power, omega)
        if not total > 0:
            raise ParameterError("spectral amplitude has zero power")
        value = complex(np.trapezoid(power * np.exp(1j * omega * tau), omega) / total)
        if previous is not None:
            # |C| <= 1, so an absolute change is relative to the unit normalization
            change = abs(value - previous)
            if change <= rtol:
                return value
        previous = value
        n = 2 * n - 1
    if change > accuracy:
        raise AccuracyError(f"quadrature not converged (last change {change:.3g})")
    return previous


def fit_effective_width(c_target: float, tau: float) -> float:
    """Width ``sigma_t`` for which the Gaussian overlap at delay ``tau`` equals ``c_target``."""
    if not (0.0 < c_target < 1.0):
        raise ParameterError(f"target coherence must lie in (0, 1), got {c_target}")
    if not tau > 0:
        raise ParameterError(f"tau must be positive, got {tau}")
    return tau / (2.0 * math.sqrt(-math.log(c_target)))


def rho_from_coherence(c: complex) -> DensityMatrix:
    """Reduced polarization state for coherence factor ``c``."""
    c = complex(c)
    if abs(c) > 1.0 + 1e-12:
        raise ParameterError(f"|C| must not exceed 1, got {abs(c)}")
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = rho[3, 3] = 0.5
    rho[0, 3] = c / 2
    rho[3, 0] = c.conjugate() / 2
    return validate(rho)


def bandwidth_to_sigma_t(bandwidth_nm: float, center_nm: float = DEFAULT_CENTER_NM) -> float:
    """Alternative physical convention: filter FWHM -> Gaussian amplitude width.

    Delta nu = c Delta lambda / lambda^2, transform-limited intensity FWHM
    Delta t = 0.441 / Delta nu, sigma_t = Delta t / (2 sqrt(ln 2)).
    Does not reproduce the published coherence values; see FILTER_CATALOG.
    """
    if not (bandwidth_nm > 0 and center_nm > 0):
        raise ParameterError("bandwidth and center wavelength must be positive")
    delta_nu = SPEED_OF_LIGHT_NM_PER_FS * bandwidth_nm / center_nm ** 2  # 1/fs
    delta_t = 0.441 / delta_nu
    return delta_t / (2.0 * math.sqrt(math.log(2.0)))


# effective widths fitted to the published coherence at tau = 100 fs
FILTER_CATALOG = {bw: fit_effective_width(c, DEFAULT_TAU_FS) for bw, c in PUBLISHED_COHERENCE.items()}


@dataclass(frozen=True)
class FilterScenario:
    bandwidth_nm: Optional[float] = None
    center_nm: float = DEFAULT_CENTER_NM
    tau_fs: float = DEFAULT_TAU_FS
    sigma_t_fs: Optional[float] = None

    def resolve_sigma_t(self) -> float:
        if self.sigma_t_fs is not None:
            return float(self.sigma_t_fs)
        if self.bandwidth_nm is None:
            raise ConfigurationError("scenario needs a bandwidth or an explicit sigma_t")
        for bw, sigma in FILTER_CATALOG.items():
            if math.isclose(bw, self.bandwidth_nm, rel_tol=0, abs_tol=1e-9):
                return sigma
        known = ", ".join(f"{bw:g} nm" for bw in FILTER_CATALOG)
        raise ConfigurationError(
            f"no catalogued filter of {self.bandwidth_nm:g} nm (known: {known}); pass sigma_t explicitly")

    def wave_packet(self) -> WavePacketSpec:
        return WavePacketSpec(self.resolve_sigma_t(), self.tau_fs)

    def to_json(self) -> dict:
        out = {"bandwidth_nm": self.bandwidth_nm, "center_nm": self.center_nm, "tau_fs": self.tau_fs}
        if self.sigma_t_fs is not None:
            out["sigma_t_fs"] = self.sigma_t_fs
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FilterScenario":
        unknown = set(obj) - {"bandwidth_nm", "center_nm", "tau_fs", "sigma_t_fs"}
        if unknown:
            raise ConfigurationError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(
            bandwidth_nm=obj.get("bandwidth_nm"),
            center_nm=float(obj.get("center_nm", DEFAULT_CENTER_NM)),
            tau_fs=float(obj.get("tau_fs", DEFAULT_TAU_FS)),
            sigma_t_fs=obj.get("sigma_t_fs"),
        )

    @classmethod
    def load(cls, path) -> "FilterScenario":
        try:
            obj = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read scenario file {path}: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigurationError("scenario file must hold a JSON object")
        return cls.from_json(obj)


@dataclass(frozen=True)
class Prediction:
    scenario: FilterScenario
    sigma_t_fs: float
    coherence: float
    rho: DensityMatrix
    report: EntanglementReport


def predict(scenario: FilterScenario):
    """Coherence, reduced state and entanglement report for a filter scenario."""
    spec = scenario.wave_packet()
    c = coherence_gaussian(spec)
    rho = rho_from_coherence(c)
    return Prediction(scenario, spec.sigma_t, c, rho, report(rho))
