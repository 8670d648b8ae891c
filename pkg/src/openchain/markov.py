"""Gaussian GKSL semigroups of the chain: local and global generators, propagation, steady states.

A Gaussian semigroup is stored through its ``N x N`` drift block ``M`` and
diffusion block ``N``; the full ``2N x 2N`` matrices are ``M (+) conj(M)`` and
``N (+) conj(N)``, acting as ``dC/dt = M C + C M^dag + N``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg as sla

from .bath import SpectralDensity, evaluate, lamb_shift
from .errors import IllConditionedError, InvalidArgumentError, NonUniqueSteadyStateError
from .gaussian import GaussianState, basis_change, omega_matrix, symplectic_to_passive, thermal_occupation, x_matrix, z_matrix
from .params import ChainParams

Basis = Literal["site", "normal-mode"]

_SQ2 = np.sqrt(2.0)
NORMAL_MODE_T = 0.5 * np.array([[1.0, -_SQ2, 1.0], [_SQ2, 0.0, -_SQ2], [1.0, _SQ2, 1.0]])


@dataclass(frozen=True)
class RateSpec:
    """Rates ``alpha_k`` of the dissipator ``sum_k alpha_k (xi_k^dag . xi_k - {xi_k xi_k^dag, .}/2)``.

    The first ``N`` entries pump (``L = a_k^dag``), the last ``N`` damp (``L = a_k``).
    The ``lambda^2`` prefactor is applied by the generator builders.
    """

    rates: np.ndarray

    def __post_init__(self):
        r = np.array(self.rates, float)
        if r.ndim != 1 or r.size % 2 or r.size == 0:
            raise InvalidArgumentError("rates must be a vector of even length 2N")
        if np.any(r < 0):
            raise InvalidArgumentError("rates must be non-negative")
        r.flags.writeable = False
        object.__setattr__(self, "rates", r)

    @property
    def n_modes(self) -> int:
        return self.rates.size // 2

    @property
    def gain(self) -> np.ndarray:
        return self.rates[: self.n_modes]

    @property
    def loss(self) -> np.ndarray:
        return self.rates[self.n_modes :]


@dataclass(frozen=True, eq=False)
class SemigroupGenerator:
    m_block: np.ndarray
    n_block: np.ndarray
    basis: Basis = "site"
    transform: np.ndarray | None = None

    def __post_init__(self):
        m = np.array(self.m_block, complex)
        n = np.array(self.n_block, complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or n.shape != m.shape:
            raise InvalidArgumentError("drift and diffusion blocks must be square and of equal size")
        if np.max(np.abs(n - n.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(n))):
            raise InvalidArgumentError("diffusion block must be Hermitian")
        for a in (m, n):
            a.flags.writeable = False
        object.__setattr__(self, "m_block", m)
        object.__setattr__(self, "n_block", n)

    @property
    def n_modes(self) -> int:
        return self.m_block.shape[0]

    @property
    def drift(self) -> np.ndarray:
        return sla.block_diag(self.m_block, self.m_block.conj())

    @property
    def diffusion(self) -> np.ndarray:
        return sla.block_diag(self.n_block, self.n_block.conj())

    def to_site_basis(self, state: GaussianState) -> GaussianState:
        """Map a state written in this generator's basis back to site operators."""
        if self.basis == "site":
            return state
        return basis_change(state, symplectic_to_passive(self.transform))

    def from_site_basis(self, state: GaussianState) -> GaussianState:
        if self.basis == "site":
            return state
        return basis_change(state, symplectic_to_passive(self.transform).conj().T)


def generic_generator(h_block: np.ndarray, rates: RateSpec, lam: float) -> SemigroupGenerator:
    """Drift and diffusion of ``-i[H, .] + lambda^2 D[.]`` from the full ``2N`` formulas.

    With ``Hq = (H (+) conj(H)) / 2`` and ``D = diag(alpha)``::

        W    = -Omega (Hq X + X Hq)
        Mfull = i W + lambda^2 / 2 (D Z + X D Omega)
        Nfull = lambda^2 (D - Omega D Omega)

    and the returned blocks are the upper-left ``N x N`` corners.  The symmetrised
    ``W`` only sees ``Re(H)``, so ``H`` must be real symmetric (as every chain
    Hamiltonian here is).
    """
    h = np.asarray(h_block, complex)
    n = h.shape[0]
    if h.shape != (n, n) or np.max(np.abs(h - h.conj().T)) > 1e-12:
        raise InvalidArgumentError("Hamiltonian block must be square Hermitian")
    if np.max(np.abs(h.imag)) > 1e-12:
        raise InvalidArgumentError("the compact generator formula needs a real symmetric Hamiltonian block")
    if rates.n_modes != n:
        raise InvalidArgumentError(f"rates describe {rates.n_modes} modes, Hamiltonian {n}")
    omega, x, z = omega_matrix(n), x_matrix(n), z_matrix(n)
    hq = 0.5 * sla.block_diag(h, h.conj())
    d = np.diag(rates.rates)
    w = -omega @ (hq @ x + x @ hq)
    m_full = 1j * w + 0.5 * lam**2 * (d @ z + x @ d @ omega)
    n_full = lam**2 * (d - omega @ d @ omega)
    return SemigroupGenerator(m_full[:n, :n], n_full[:n, :n])


def _check_inside(spectral: SpectralDensity, freqs, what: str):
    freqs = np.atleast_1d(freqs)
    if np.any(freqs <= 0) or np.any(freqs >= spectral.cutoff):
        raise InvalidArgumentError(f"{what} {freqs} must lie strictly inside (0, {spectral.cutoff})")


def local_rates(chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float) -> RateSpec:
    """Rates of the local dissipators: baths act on sites 1 and 3 at frequency ``omega0``."""
    w0 = chain.omega0
    jl, jr = evaluate(j_left, w0), evaluate(j_right, w0)
    nl, nr = thermal_occupation(w0, t_left), thermal_occupation(w0, t_right)
    two_pi = 2 * np.pi
    return RateSpec([two_pi * jl * nl, 0.0, two_pi * jr * nr, two_pi * jl * (nl + 1), 0.0, two_pi * jr * (nr + 1)])


def local_lamb_shift(chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity) -> np.ndarray:
    w0 = chain.omega0
    return np.diag([lamb_shift(j_left, w0), 0.0, lamb_shift(j_right, w0)])


def local_generator(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float
) -> SemigroupGenerator:
    w0, lam2 = chain.omega0, chain.lam**2
    _check_inside(j_left, w0, "omega0")
    _check_inside(j_right, w0, "omega0")
    jl, jr = evaluate(j_left, w0), evaluate(j_right, w0)
    tau_l = 2 * thermal_occupation(w0, t_left) + 1
    tau_r = 2 * thermal_occupation(w0, t_right) + 1
    m = -1j * (chain.h_system + lam2 * local_lamb_shift(chain, j_left, j_right)) - np.pi * lam2 * np.diag([jl, 0.0, jr])
    n = 2 * np.pi * lam2 * np.diag([jl * tau_l, 0.0, jr * tau_r])
    return SemigroupGenerator(m, n, "site")


def normal_mode_transform(chain: ChainParams) -> tuple[np.ndarray, np.ndarray]:
    """Orthogonal ``T`` with ``c = T a`` diagonalising ``H_S``, and the energies ``omega0 -+ sqrt(2) g``."""
    return NORMAL_MODE_T.copy(), chain.normal_mode_energies


def end_site_weights() -> tuple[np.ndarray, np.ndarray]:
    """Squared overlaps ``|<c_i|a_1>|^2`` and ``|<c_i|a_3>|^2``; both are ``(1/4, 1/2, 1/4)``."""
    return NORMAL_MODE_T[:, 0] ** 2, NORMAL_MODE_T[:, 2] ** 2


def global_generator(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float
) -> SemigroupGenerator:
    """Global generator in the normal-mode basis; ``transform`` maps back to sites."""
    t, eps = normal_mode_transform(chain)
    lam2 = chain.lam**2
    _check_inside(j_left, eps, "normal-mode frequencies")
    _check_inside(j_right, eps, "normal-mode frequencies")
    weights = end_site_weights()
    damping = np.zeros(3)
    noise = np.zeros(3)
    shift = np.zeros(3)
    for spectral, temp, w in zip((j_left, j_right), (t_left, t_right), weights):
        j = evaluate(spectral, eps)
        tau = 2 * thermal_occupation(eps, temp) + 1
        damping += w * j
        noise += w * j * tau
        shift += np.array([lamb_shift(spectral, e) for e in eps])
    m = -1j * (np.diag(eps) + lam2 * np.diag(shift)) - np.pi * lam2 * np.diag(damping)
    n = 2 * np.pi * lam2 * np.diag(noise)
    return SemigroupGenerator(m, n, "normal-mode", t)


def _phi(kappa: np.ndarray, t: float) -> np.ndarray:
    """``(exp(t kappa) - 1) / kappa`` with the ``kappa -> 0`` limit ``t``."""
    out = np.empty_like(kappa, dtype=complex)
    small = np.abs(kappa * t) < 1e-8
    out[small] = t * (1 + 0.5 * kappa[small] * t)
    k = kappa[~small]
    out[~small] = np.expm1(k * t) / k
    return out


def lyapunov_matrix(m: np.ndarray) -> np.ndarray:
    """``M (x) I + I (x) conj(M)``, acting on row-major vectorisations."""
    eye = np.eye(m.shape[0])
    return np.kron(m, eye) + np.kron(eye, m.conj())


def solve_lyapunov(m: np.ndarray, rhs: np.ndarray, cond_max: float = 1e12) -> np.ndarray:
    """Solve ``M X + X M^dag = rhs`` by Kronecker vectorisation."""
    f = lyapunov_matrix(m)
    cond = np.linalg.cond(f)
    if not np.isfinite(cond) or cond > cond_max:
        raise IllConditionedError(f"Lyapunov operator is near-singular (condition number {cond:.3g})")
    return np.linalg.solve(f, rhs.reshape(-1)).reshape(m.shape)


def evolution_blocks(m: np.ndarray, n: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``exp(t M)`` and ``X(t) = int_0^t exp(sM) N exp(sM^dag) ds``.

    Uses the eigendecomposition of ``M`` when it is well-conditioned, where the
    integral is elementwise; otherwise falls back to ``expm`` and the Lyapunov
    identity ``M X + X M^dag = exp(tM) N exp(tM^dag) - N``.
    """
    lam, v = np.linalg.eig(m)
    if np.linalg.cond(v) < 1e8:
        vinv = np.linalg.inv(v)
        e = (v * np.exp(t * lam)) @ vinv
        n_eig = vinv @ n @ vinv.conj().T
        x = v @ (_phi(lam[:, None] + lam[None, :].conj(), t) * n_eig) @ v.conj().T
    else:
        e = sla.expm(t * m)
        x = solve_lyapunov(m, e @ n @ e.conj().T - n) if np.any(n) else np.zeros_like(m)
    return e, 0.5 * (x + x.conj().T)


def propagate(gen: SemigroupGenerator, state0: GaussianState, t: float) -> GaussianState:
    """Evolve ``state0`` (expressed in the generator's basis) for time ``t >= 0``."""
    if state0.n_modes != gen.n_modes:
        raise InvalidArgumentError(f"state has {state0.n_modes} modes, generator {gen.n_modes}")
    if t < 0:
        raise InvalidArgumentError("semigroup propagation needs t >= 0")
    e, x = evolution_blocks(gen.m_block, gen.n_block, t)
    c1 = e @ state0.c1 @ e.conj().T + x
    c2 = e @ state0.c2 @ e.T
    alpha = e @ state0.disp[: gen.n_modes]
    return GaussianState.from_blocks(0.5 * (c1 + c1.conj().T), 0.5 * (c2 + c2.T), alpha)


def is_hurwitz(m: np.ndarray) -> bool:
    return bool(np.max(np.linalg.eigvals(m).real) < -1e-14 * np.linalg.norm(m))


def lyapunov_residual(gen: SemigroupGenerator, c1: np.ndarray) -> float:
    """``max |M C1 + C1 M^dag + N|``, zero for an exact steady state."""
    m = gen.m_block
    return float(np.max(np.abs(m @ c1 + c1 @ m.conj().T + gen.n_block)))


def steady_state(gen: SemigroupGenerator) -> GaussianState:
    """Unique steady state in the generator's basis: ``C1`` from the vectorised Lyapunov equation, ``C2 = 0``."""
    if not is_hurwitz(gen.m_block):
        raise NonUniqueSteadyStateError("drift block is not Hurwitz; steady state is not unique")
    try:
        c1 = solve_lyapunov(gen.m_block, -gen.n_block, cond_max=1e13)
    except IllConditionedError as exc:
        raise NonUniqueSteadyStateError(str(exc)) from exc
    return GaussianState.from_blocks(0.5 * (c1 + c1.conj().T))


@dataclass(frozen=True)
class GlobalSteadyParameters:
    """Diagonal of the global steady ``C1`` in the normal-mode basis and its Gibbs exponents.

    ``gamma_j = log(b_j / a_j)`` is infinite for a mode in its ground state.
    """

    energies: np.ndarray
    c_diag: np.ndarray
    a: np.ndarray
    b: np.ndarray
    gamma: np.ndarray


def global_steady_parameters(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float
) -> GlobalSteadyParameters:
    _, eps = normal_mode_transform(chain)
    _check_inside(j_left, eps, "normal-mode frequencies")
    _check_inside(j_right, eps, "normal-mode frequencies")
    jl, jr = evaluate(j_left, eps), evaluate(j_right, eps)
    nl, nr = thermal_occupation(eps, t_left), thermal_occupation(eps, t_right)
    c_diag = (jl * (2 * nl + 1) + jr * (2 * nr + 1)) / (jl + jr)
    a = jl * nl + jr * nr
    b = a + jl + jr
    with np.errstate(divide="ignore"):
        gamma = np.where(a > 0, np.log(b / np.where(a > 0, a, 1.0)), np.inf)
    coth = np.where(np.isfinite(gamma), 1.0 / np.tanh(gamma / 2), 1.0)
    assert np.allclose(coth, c_diag, rtol=1e-12, atol=0), "Gibbs form disagrees with the Lyapunov ratio"
    return GlobalSteadyParameters(eps, c_diag, a, b, gamma)


def global_steady_analytic(
    chain: ChainParams, j_left: SpectralDensity, j_right: SpectralDensity, t_left: float, t_right: float
) -> GaussianState:
    """Closed-form global steady state, returned in the site basis."""
    params = global_steady_parameters(chain, j_left, j_right, t_left, t_right)
    c_tilde = GaussianState.from_blocks(np.diag(params.c_diag))
    return basis_change(c_tilde, symplectic_to_passive(NORMAL_MODE_T))
