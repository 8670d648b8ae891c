"""Exact unitary dynamics of the chain coupled to two finite discretised baths.

Joint modes are ordered ``(a_1, a_2, a_3, b_l1..b_lM, b_r1..b_rM')``.  The
Hamiltonian is number conserving, so the symplectic propagator splits into
``exp(-it H) (+) exp(+it conj(H))`` for the single-particle matrix ``H``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .bath import DiscretizedBath
from .errors import InvalidArgumentError
from .gaussian import GaussianState, direct_sum, partial_trace
from .params import N_SITES, ChainParams

SYSTEM_MODES = (0, 1, 2)


@dataclass(frozen=True, eq=False)
class JointSystem:
    chain: ChainParams
    left: DiscretizedBath
    right: DiscretizedBath
    h_total: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.h_total.shape[0]

    @cached_property
    def _eig(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.h_total)

    def mode_unitary(self, t: float, rows: slice | None = None) -> np.ndarray:
        """``exp(-it H)``, optionally only the requested rows."""
        energies, vecs = self._eig
        left = vecs if rows is None else vecs[rows]
        return (left * np.exp(-1j * t * energies)) @ vecs.conj().T


def assemble(chain: ChainParams, left: DiscretizedBath, right: DiscretizedBath) -> JointSystem:
    ml, mr = left.n_modes, right.n_modes
    k = N_SITES + ml + mr
    h = np.zeros((k, k))
    h[:N_SITES, :N_SITES] = chain.h_system
    sl = slice(N_SITES, N_SITES + ml)
    sr = slice(N_SITES + ml, k)
    h[0, sl] = h[sl, 0] = chain.lam * left.couplings
    h[2, sr] = h[sr, 2] = chain.lam * right.couplings
    h[sl, sl] = np.diag(left.mode_freqs)
    h[sr, sr] = np.diag(right.mode_freqs)
    h.flags.writeable = False
    return JointSystem(chain, left, right, h)


def propagator(system: JointSystem, t: float) -> np.ndarray:
    """Symplectic matrix ``S(t)`` with ``xi(t) = S xi`` in the Heisenberg picture."""
    u = system.mode_unitary(t)
    return sla.block_diag(u, u.conj())


def evolve_joint(system: JointSystem, initial: GaussianState, t: float) -> GaussianState:
    """``C(t) = S C S^dag`` and ``d(t) = S d``."""
    if initial.n_modes != system.n_modes:
        raise InvalidArgumentError(f"state has {initial.n_modes} modes, joint system {system.n_modes}")
    s = propagator(system, t)
    cov = s @ initial.cov @ s.conj().T
    return GaussianState(0.5 * (cov + cov.conj().T), s @ initial.disp)


def initial_joint_state(system: JointSystem, system_state: GaussianState) -> GaussianState:
    """Chain state tensored with the two thermal baths."""
    if system_state.n_modes != N_SITES:
        raise InvalidArgumentError(f"chain state must have {N_SITES} modes, got {system_state.n_modes}")
    return direct_sum([system_state, system.left.state, system.right.state])


def exact_channel(system: JointSystem, system_state: GaussianState, t: float) -> GaussianState:
    """Reduced chain state after joint unitary evolution for time ``t``.

    Equivalent to ``partial_trace(evolve_joint(initial_joint_state(...)), SYSTEM_MODES)``
    but only the three system rows of the propagator are formed.
    """
    if system_state.n_modes != N_SITES:
        raise InvalidArgumentError(f"chain state must have {N_SITES} modes, got {system_state.n_modes}")
    rows = system.mode_unitary(t, slice(0, N_SITES))
    n = N_SITES
    bath_tau = np.concatenate([system.left.tau, system.right.tau])
    u_sys, u_bath = rows[:, :n], rows[:, n:]
    c1 = u_sys @ system_state.c1 @ u_sys.conj().T + (u_bath * bath_tau) @ u_bath.conj().T
    c2 = u_sys @ system_state.c2 @ u_sys.T
    alpha = u_sys @ system_state.disp[:n]
    return GaussianState.from_blocks(0.5 * (c1 + c1.conj().T), 0.5 * (c2 + c2.T), alpha)


def exact_channel_full(system: JointSystem, system_state: GaussianState, t: float) -> GaussianState:
    """Reference composition through the full joint covariance matrix."""
    joint = evolve_joint(system, initial_joint_state(system, system_state), t)
    return partial_trace(joint, SYSTEM_MODES)
