"""Physical parameters of the three-oscillator chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

N_SITES = 3


@dataclass(frozen=True)
class ChainParams:
    """On-site frequency ``omega0``, nearest-neighbour coupling ``g`` and bath coupling ``lam``.

    ``g`` must stay below ``omega0 / sqrt(2)`` so every normal-mode frequency is positive.
    """

    omega0: float = 1.0
    g: float = 0.0
    lam: float = 0.1

    def __post_init__(self):
        if not self.omega0 > 0:
            raise InvalidArgumentError(f"omega0 must be positive, got {self.omega0}")
        if not 0 <= self.g < self.g_max:
            raise InvalidArgumentError(f"g must lie in [0, omega0/sqrt(2)) = [0, {self.g_max:.6g}), got {self.g}")
        if not self.lam > 0:
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")

    @property
    def g_max(self) -> float:
        return self.omega0 / np.sqrt(2.0)

    def with_g(self, g: float) -> "ChainParams":
        return ChainParams(self.omega0, g, self.lam)

    @property
    def h_system(self) -> np.ndarray:
        """Single-particle chain Hamiltonian ``H_S`` (tridiagonal)."""
        w, g = self.omega0, self.g
        return np.array([[w, g, 0.0], [g, w, g], [0.0, g, w]])

    @property
    def normal_mode_energies(self) -> np.ndarray:
        return self.omega0 + np.sqrt(2.0) * self.g * np.array([-1.0, 0.0, 1.0])
