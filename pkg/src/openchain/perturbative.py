"""Local steady state expanded to second order in the inter-oscillator coupling ``g``.

At ``g = 0`` the middle oscillator is undamped, so the vectorised Lyapunov
operator ``F0 = M0 (x) I + I (x) conj(M0)`` has a one-dimensional kernel (the
``(2, 2)`` entry).  The kernel component ``x`` of the zeroth order is fixed by
requiring the second-order equation to be solvable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bath import SpectralDensity, evaluate, lamb_shift
from .errors import InvalidArgumentError
from .gaussian import GaussianState, thermal_occupation
from .markov import lyapunov_matrix
from .params import ChainParams

ADJACENCY = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
KERNEL_INDEX = 4  # row-major position of the (2, 2) entry


@dataclass(frozen=True)
class PerturbationConstants:
    """``m2``/``m8``: complex left/right end-site damping; ``m3 = m2 + conj(m8)``."""

    m2: complex
    m8: complex
    tau_l: float
    tau_r: float

    @property
    def m3(self) -> complex:
        return self.m2 + np.conj(self.m8)

    @property
    def x(self) -> float:
        return x_parameter(self)


def perturbation_constants(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float
) -> PerturbationConstants:
    w0, lam2 = chain.omega0, chain.lam**2
    m2 = -lam2 * (1j * lamb_shift(j_left, w0) + np.pi * evaluate(j_left, w0))
    m8 = -lam2 * (1j * lamb_shift(j_right, w0) + np.pi * evaluate(j_right, w0))
    tau_l = 2 * thermal_occupation(w0, t_left) + 1
    tau_r = 2 * thermal_occupation(w0, t_right) + 1
    return PerturbationConstants(complex(m2), complex(m8), float(tau_l), float(tau_r))


def x_parameter(c: PerturbationConstants) -> float:
    """Middle-site occupation at zeroth order, a damping-weighted mean of ``tau_l`` and ``tau_r``."""
    wl = abs(c.m8) ** 2 * c.m2.real
    wr = abs(c.m2) ** 2 * c.m8.real
    den = wl + wr
    if den == 0:
        raise InvalidArgumentError("x is undefined when both baths decouple (J = 0)")
    return float((wl * c.tau_l + wr * c.tau_r) / den)


def perturbative_orders(c: PerturbationConstants) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form ``C^(0)``, ``C^(1)``, ``C^(2)`` of the ``C1`` block."""
    x = x_parameter(c)
    m2, m8, m3 = c.m2, c.m8, c.m3
    dl, dr = c.tau_l - x, c.tau_r - x
    c0 = np.diag([c.tau_l, x, c.tau_r]).astype(complex)
    c1 = -1j * np.array(
        [
            [0, dl / m2, 0],
            [-dl / np.conj(m2), 0, -dr / np.conj(m8)],
            [0, dr / m8, 0],
        ]
    )
    corner = dl / (m2 * m3) + dr / (m3 * np.conj(m8))
    c2 = -np.array(
        [
            [dl / abs(m2) ** 2, 0, corner],
            [0, 0, 0],
            [np.conj(corner), 0, dr / abs(m8) ** 2],
        ]
    )
    return c0, c1, c2


def _zeroth_drift(c: PerturbationConstants, omega0: float) -> np.ndarray:
    return np.diag([-1j * omega0 + c.m2, -1j * omega0, -1j * omega0 + c.m8])


def recursive_orders(c: PerturbationConstants, omega0: float, n_orders: int = 2) -> list[np.ndarray]:
    """Orders ``C^(0..n)`` from ``F0 C^(k+1) = -F1 C^(k)`` using the pseudo-inverse of ``F0``.

    Each order is taken orthogonal to ``ker F0``, except the zeroth, whose kernel
    component ``x`` is solved for from the solvability of the second order:
    ``<K| F1 C^(1)(x)> = 0``.  This route is independent of :func:`x_parameter`.
    """
    f0 = lyapunov_matrix(_zeroth_drift(c, omega0))
    f1 = lyapunov_matrix(-1j * ADJACENCY)
    diag = np.diag(f0)
    inv = np.zeros_like(diag)
    keep = np.abs(diag) > 1e-14 * np.max(np.abs(diag))
    if np.count_nonzero(~keep) != 1 or not np.all(np.abs(f0 - np.diag(diag)) == 0):
        raise InvalidArgumentError("zeroth-order Lyapunov operator should be diagonal with a 1-d kernel")
    inv[keep] = 1.0 / diag[keep]
    pinv = np.diag(inv)
    kernel = np.zeros(9, complex)
    kernel[~keep] = 1.0
    noise = np.zeros(9, complex)
    noise[0] = -2 * c.m2.real * c.tau_l
    noise[8] = -2 * c.m8.real * c.tau_r
    base = -pinv @ noise

    def solvability(x):
        first = -pinv @ f1 @ (base + x * kernel)
        return kernel.conj() @ f1 @ first

    s0, s1 = solvability(0.0), solvability(1.0)
    x = -s0 / (s1 - s0)
    orders = [base + x * kernel]
    for _ in range(n_orders):
        orders.append(-pinv @ f1 @ orders[-1])
    return [v.reshape(3, 3) for v in orders]


def perturbative_local_steady(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float, g: float | None = None
) -> GaussianState:
    """``C1 = C^(0) + g C^(1) + g^2 C^(2)`` with ``C2 = 0``; ``g`` defaults to ``chain.g``."""
    g = chain.g if g is None else g
    c = perturbation_constants(chain, j_left, j_right, t_left, t_right)
    limit = chain.lam**2 * np.pi * min(evaluate(j_left, chain.omega0), evaluate(j_right, chain.omega0))
    if g > limit:
        warnings.warn(
            f"g={g:.3g} exceeds the end-site damping {limit:.3g}; the second-order expansion is not well ordered",
            stacklevel=2,
        )
    c0, c1, c2 = perturbative_orders(c)
    total = c0 + g * c1 + g**2 * c2
    assert np.max(np.abs(total - total.conj().T)) < 1e-12 * max(1.0, np.max(np.abs(total)))
    return GaussianState.from_blocks(0.5 * (total + total.conj().T))
