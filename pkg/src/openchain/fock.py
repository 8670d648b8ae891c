"""Brute-force truncated Fock-space reference computations.

Used to check the Gaussian formulas on one or two modes, and on the chain with a
single mode per bath (the Hamiltonian conserves excitation number, so a cap on
the total number of quanta is an exact truncation of the unitary dynamics).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgumentError, TruncationError
from .gaussian import GaussianState, thermal_occupation


@dataclass(frozen=True, eq=False)
class FockSpace:
    """Occupation-number basis with ``n_k <= n_cut`` per mode and optionally ``sum n_k <= max_total``."""

    n_modes: int
    n_cut: int
    max_total: int | None = None

    @cached_property
    def states(self) -> list[tuple[int, ...]]:
        out = []
        for occ in itertools.product(range(self.n_cut + 1), repeat=self.n_modes):
            if self.max_total is None or sum(occ) <= self.max_total:
                out.append(occ)
        return out

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    @cached_property
    def _lowering(self) -> list[np.ndarray]:
        ops = []
        for k in range(self.n_modes):
            a = np.zeros((self.dim, self.dim))
            for j, occ in enumerate(self.states):
                if occ[k]:
                    lower = occ[:k] + (occ[k] - 1,) + occ[k + 1 :]
                    a[self.index[lower], j] = np.sqrt(occ[k])
            ops.append(a)
        return ops

    def annihilation(self, mode: int) -> np.ndarray:
        return self._lowering[mode]

    def number_conserving_hamiltonian(self, h: np.ndarray) -> np.ndarray:
        """Second-quantised ``sum_ij h_ij a_i^dag a_j`` for a single-particle matrix ``h``."""
        h = np.asarray(h, complex)
        out = np.zeros((self.dim, self.dim), complex)
        for i in range(self.n_modes):
            for j in range(self.n_modes):
                if h[i, j] != 0:
                    out += h[i, j] * self.annihilation(i).T @ self.annihilation(j)
        return out


@dataclass(frozen=True, eq=False)
class FockDensity:
    space: FockSpace
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, complex)
        if rho.shape != (self.space.dim, self.space.dim):
            raise InvalidArgumentError(f"density matrix must be {self.space.dim}-dimensional")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise InvalidArgumentError("density matrix is not Hermitian")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def n_cut(self) -> int:
        return self.space.n_cut

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    @property
    def leakage(self) -> float:
        return 1.0 - self.trace


def single_mode_space(n_cut: int) -> FockSpace:
    return FockSpace(1, n_cut)


def _thermal_weights(nbar: float, n: np.ndarray) -> np.ndarray:
    if nbar == 0:
        return (n == 0).astype(float)
    return (nbar / (nbar + 1)) ** n / (nbar + 1)


def fock_thermal(omega: float, temperature: float, n_cut: int, leak_tol: float = 1e-8) -> FockDensity:
    """Thermal state renormalised on ``{0..n_cut}``; raises if the discarded tail exceeds ``leak_tol``."""
    nbar = thermal_occupation(omega, temperature)
    tail = (nbar / (nbar + 1)) ** (n_cut + 1)
    if tail > leak_tol:
        raise TruncationError(f"n_cut={n_cut} drops {tail:.2e} of the thermal weight (n={nbar:.3g})")
    p = _thermal_weights(nbar, np.arange(n_cut + 1))
    return FockDensity(single_mode_space(n_cut), np.diag(p / p.sum()))


def fock_thermal_product(space: FockSpace, omegas: Sequence[float], temperatures: Sequence[float]) -> FockDensity:
    """Product of thermal states on ``space`` without renormalisation (leakage kept visible)."""
    nbars = [thermal_occupation(w, t) for w, t in zip(omegas, temperatures)]
    occ = np.array(space.states)
    p = np.ones(space.dim)
    for k, nbar in enumerate(nbars):
        p *= _thermal_weights(nbar, occ[:, k])
    return FockDensity(space, np.diag(p))


def gaussian_unitary_state(
    nbar: float, squeeze: complex = 0.0, alpha: complex = 0.0, n_cut: int = 20, pad: int = 40
) -> FockDensity:
    """Single-mode ``D(alpha) S(squeeze) rho_th S^dag D^dag``, built on ``n_cut + pad`` levels then cut.

    ``S(z) = exp((conj(z) a^2 - z a^dag^2) / 2)``.  The result is not renormalised.
    """
    big = n_cut + 1 + pad
    a = np.diag(np.sqrt(np.arange(1, big)), 1)
    rho = np.diag(_thermal_weights(nbar, np.arange(big))).astype(complex)
    s = sla.expm(0.5 * (np.conj(squeeze) * a @ a - squeeze * a.T @ a.T))
    d = sla.expm(alpha * a.T - np.conj(alpha) * a)
    u = d @ s
    rho = u @ rho @ u.conj().T
    rho = rho[: n_cut + 1, : n_cut + 1]
    return FockDensity(single_mode_space(n_cut), 0.5 * (rho + rho.conj().T))


def fock_moments(density: FockDensity, modes: Sequence[int] | None = None) -> GaussianState:
    """First and second moments in the complex ordering, normalised by the trace.

    ``<a_i a_j^dag>`` is formed as ``delta_ij + <a_j^dag a_i>`` so that truncation of
    the raising operator at the top level does not bias the result.
    """
    space = density.space
    modes = list(range(space.n_modes)) if modes is None else list(modes)
    rho = density.rho / density.trace
    ops = [space.annihilation(k) for k in modes]
    n = len(ops)
    alpha = np.array([np.trace(rho @ a) for a in ops])
    c1 = np.empty((n, n), complex)
    c2 = np.empty((n, n), complex)
    for i, ai in enumerate(ops):
        for j, aj in enumerate(ops):
            adag_a = np.trace(rho @ aj.T @ ai)
            c1[i, j] = 2 * adag_a + (i == j) - 2 * alpha[i] * np.conj(alpha[j])
            c2[i, j] = np.trace(rho @ (ai @ aj + aj @ ai)) - 2 * alpha[i] * alpha[j]
    return GaussianState.from_blocks(0.5 * (c1 + c1.conj().T), 0.5 * (c2 + c2.T), alpha)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def fock_fidelity(r1: FockDensity, r2: FockDensity) -> float:
    """Uhlmann root fidelity ``Tr sqrt(sqrt(r1) r2 sqrt(r1))``."""
    if r1.space.dim != r2.space.dim:
        raise InvalidArgumentError("density matrices live on different spaces")
    s = _psd_sqrt(r1.rho)
    inner = s @ r2.rho @ s
    w = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(w, 0, None))))


LindbladOps = Sequence[tuple[float, np.ndarray]]


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, ops: LindbladOps) -> np.ndarray:
    out = -1j * (h @ rho - rho @ h)
    for rate, op in ops:
        opd = op.conj().T
        out += rate * (op @ rho @ opd - 0.5 * (opd @ op @ rho + rho @ opd @ op))
    return out


def generator_norm(h: np.ndarray, ops: LindbladOps) -> float:
    """Upper bound on the superoperator 2-norm of the GKSL generator."""
    bound = 2 * np.linalg.norm(h, 2)
    for rate, op in ops:
        bound += 2 * rate * np.linalg.norm(op, 2) ** 2
    return float(bound)


def fock_lindblad_step(density: FockDensity, h: np.ndarray, ops: LindbladOps, dt: float, norm: float | None = None) -> FockDensity:
    """One classical fourth-order Runge-Kutta step of the GKSL equation."""
    norm = generator_norm(h, ops) if norm is None else norm
    if dt < 0 or dt * norm >= 0.1:
        raise InvalidArgumentError(f"step dt={dt} violates dt * ||L|| < 0.1 (||L|| <= {norm:.3g})")
    rho = density.rho
    k1 = lindblad_rhs(rho, h, ops)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, h, ops)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, h, ops)
    k4 = lindblad_rhs(rho + dt * k3, h, ops)
    new = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return FockDensity(density.space, 0.5 * (new + new.conj().T))


def fock_lindblad_trajectory(
    density: FockDensity, h: np.ndarray, ops: LindbladOps, times: Sequence[float], dt: float
) -> list[FockDensity]:
    """States at each of the increasing ``times``, integrated with steps no longer than ``dt``."""
    norm = generator_norm(h, ops)
    out, t, cur = [], 0.0, density
    for target in times:
        span = target - t
        if span < -1e-15:
            raise InvalidArgumentError("times must be non-decreasing and start at or after 0")
        steps = int(np.ceil(span / dt - 1e-12)) if span > 0 else 0
        for _ in range(steps):
            cur = fock_lindblad_step(cur, h, ops, span / steps, norm)
        t = target
        out.append(cur)
    return out


def fock_unitary_evolve(density: FockDensity, h: np.ndarray, t: float) -> FockDensity:
    """``exp(-iHt) rho exp(iHt)`` for a Hermitian ``H`` on the same space."""
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    rho = u @ density.rho @ u.conj().T
    return FockDensity(density.space, 0.5 * (rho + rho.conj().T))
