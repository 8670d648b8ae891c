"""Spectral densities, Lamb-shift integrals and finite-mode bath discretisation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, SingularityError
from .gaussian import GaussianState, thermal_occupation

MODELS = ("flat", "ohmic")
_ALIASES = {"flat": "flat", "ohmic": "ohmic", "ohmic-hard-cutoff": "ohmic"}


@dataclass(frozen=True)
class SpectralDensity:
    """``J(omega)`` with a hard cutoff: ``eta`` (flat) or ``eta * omega`` (ohmic) up to ``cutoff``."""

    model: str = "ohmic"
    amplitude: float = 1.0
    cutoff: float = 3.0

    def __post_init__(self):
        if self.model not in _ALIASES:
            raise InvalidArgumentError(f"unknown spectral model {self.model!r}; expected one of {MODELS}")
        object.__setattr__(self, "model", _ALIASES[self.model])
        if not self.amplitude > 0:
            raise InvalidArgumentError(f"amplitude must be positive, got {self.amplitude}")
        if not self.cutoff > 0:
            raise InvalidArgumentError(f"cutoff must be positive, got {self.cutoff}")

    def __call__(self, omega):
        return evaluate(self, omega)

    def to_json(self) -> dict:
        return {"model": self.model, "amplitude": float(self.amplitude), "cutoff": float(self.cutoff)}

    @classmethod
    def from_json(cls, data: dict, default_cutoff: float | None = None) -> "SpectralDensity":
        unknown = set(data) - {"model", "amplitude", "cutoff"}
        if unknown:
            raise InvalidArgumentError(f"unknown spectral density keys: {sorted(unknown)}")
        cutoff = data.get("cutoff", default_cutoff)
        if cutoff is None:
            raise InvalidArgumentError("spectral density needs a cutoff")
        return cls(data.get("model", "ohmic"), float(data.get("amplitude", 1.0)), float(cutoff))


def evaluate(spectral: SpectralDensity, omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise InvalidArgumentError("spectral density is defined for omega > 0 only")
    inside = w <= spectral.cutoff
    shape = np.ones_like(w) if spectral.model == "flat" else w
    out = spectral.amplitude * np.where(inside, shape, 0.0)
    return float(out) if out.ndim == 0 else out


def lamb_shift_closed_form(spectral: SpectralDensity, omega: float) -> float:
    """Antiderivative evaluation of the principal value, used as an independent check."""
    wm, eta = spectral.cutoff, spectral.amplitude
    log = np.log(omega / (wm - omega))
    if spectral.model == "flat":
        return float(eta * log)
    return float(eta * (-wm + omega * log))


def lamb_shift(spectral: SpectralDensity, omega: float) -> float:
    """Principal value ``P int_0^cutoff J(w') / (omega - w') dw'``.

    The pole is removed by subtraction: the smooth remainder
    ``(J(w') - J(omega)) / (omega - w')`` is integrated by adaptive quadrature
    on either side of the pole and ``J(omega) ln(omega / (cutoff - omega))`` is
    added back analytically.
    """
    wm = spectral.cutoff
    if not (0 < omega < wm) or min(omega, wm - omega) < 1e-9:
        raise SingularityError(f"pole at omega={omega} must lie strictly inside (0, {wm})")
    j0 = evaluate(spectral, omega)

    def smooth(w):
        if w == omega:
            return 0.0 if spectral.model == "flat" else -spectral.amplitude
        jw = spectral.amplitude * (1.0 if spectral.model == "flat" else w) if w > 0 else 0.0
        return (jw - j0) / (omega - w)

    left, _ = integrate.quad(smooth, 0.0, omega, epsabs=1e-13, epsrel=1e-13, limit=200)
    right, _ = integrate.quad(smooth, omega, wm, epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(left + right + j0 * np.log(omega / (wm - omega)))


@dataclass(frozen=True, eq=False)
class DiscretizedBath:
    """Finite set of bath modes with couplings ``h_k`` and their thermal state at ``temperature``."""

    mode_freqs: np.ndarray
    couplings: np.ndarray
    temperature: float
    spectral: SpectralDensity | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.array(self.mode_freqs, float)
        h = np.array(self.couplings, float)
        if w.ndim != 1 or w.shape != h.shape or w.size == 0:
            raise InvalidArgumentError("mode_freqs and couplings must be equal-length non-empty vectors")
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise InvalidArgumentError("bath frequencies must be positive and strictly increasing")
        if np.any(h < 0):
            raise InvalidArgumentError("couplings must be non-negative")
        if self.temperature < 0:
            raise InvalidArgumentError("temperature must be >= 0")
        w.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "mode_freqs", w)
        object.__setattr__(self, "couplings", h)

    @property
    def n_modes(self) -> int:
        return self.mode_freqs.size

    @property
    def tau(self) -> np.ndarray:
        """Diagonal ``2 n(omega_k) + 1`` of the thermal ``C1`` block."""
        return 2.0 * thermal_occupation(self.mode_freqs, self.temperature) + 1.0

    @property
    def state(self) -> GaussianState:
        return GaussianState.from_blocks(np.diag(self.tau))

    @property
    def cov(self) -> np.ndarray:
        return self.state.cov


def discretize(spectral: SpectralDensity, n_modes: int, temperature: float) -> DiscretizedBath:
    """Midpoint star discretisation: ``omega_k = (k - 1/2) dw``, ``h_k = sqrt(J(omega_k) dw)``."""
    if int(n_modes) < 1:
        raise InvalidArgumentError(f"mode count must be >= 1, got {n_modes}")
    m = int(n_modes)
    dw = spectral.cutoff / m
    w = (np.arange(1, m + 1) - 0.5) * dw
    h = np.sqrt(evaluate(spectral, w) * dw)
    return DiscretizedBath(w, h, temperature, spectral)
