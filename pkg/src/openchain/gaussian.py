"""Gaussian states of bosonic modes in the complex (annihilation-first) representation.

All covariance matrices use the ordering ``xi = (a_1..a_N, a_1^dag..a_N^dag)`` with
entries ``C_ij = <xi_i xi_j^dag + xi_j^dag xi_i> - 2 <xi_i><xi_j^dag>``, so the vacuum
has ``C = I``.  Displacements are ``d_i = <xi_i>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgumentError, InvalidStateError, NumericalError, NumericalSingularityError

HERMITIAN_RTOL = 1e-12
PHYSICAL_TOL = 1e-9


def omega_matrix(n_modes: int) -> np.ndarray:
    """Commutator matrix ``[xi_i, xi_j] = Omega_ij``."""
    eye, zero = np.eye(n_modes), np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [-eye, zero]])


def z_matrix(n_modes: int) -> np.ndarray:
    """``Z_N = diag(I, -I)``, the symplectic metric of the complex representation."""
    return np.diag(np.concatenate([np.ones(n_modes), -np.ones(n_modes)]))


def x_matrix(n_modes: int) -> np.ndarray:
    """``X_N``, the block swap exchanging annihilation and creation sectors."""
    eye, zero = np.eye(n_modes), np.zeros((n_modes, n_modes))
    return np.block([[zero, eye], [eye, zero]])


@dataclass(frozen=True)
class StructuralMatrices:
    omega: np.ndarray
    zmat: np.ndarray
    xmat: np.ndarray

    @classmethod
    def for_modes(cls, n_modes: int) -> "StructuralMatrices":
        return cls(omega_matrix(n_modes), z_matrix(n_modes), x_matrix(n_modes))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Covariance matrix and displacement vector of an ``n_modes``-mode Gaussian state.

    Arrays are copied and made read-only on construction.  Hermiticity and the
    ``[[C1, C2], [C2^dag, C1^T]]`` block pattern are validated; physicality is not
    (see :meth:`is_physical`), since intermediate states in long sweeps would pay
    an eigendecomposition each.
    """

    cov: np.ndarray
    disp: np.ndarray | None = None

    def __post_init__(self):
        cov = _frozen(self.cov)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2 or cov.shape[0] == 0:
            raise InvalidStateError(f"covariance must be a non-empty 2N x 2N matrix, got shape {cov.shape}")
        n = cov.shape[0] // 2
        disp = np.zeros(2 * n, complex) if self.disp is None else _frozen(self.disp)
        if disp.shape != (2 * n,):
            raise InvalidStateError(f"displacement must have length {2 * n}, got shape {disp.shape}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        tol = HERMITIAN_RTOL * scale
        if np.max(np.abs(cov - cov.conj().T)) > tol:
            raise InvalidStateError("covariance matrix is not Hermitian")
        c1, c2 = cov[:n, :n], cov[:n, n:]
        if np.max(np.abs(cov[n:, n:] - c1.T)) > tol or np.max(np.abs(cov[n:, :n] - c2.conj().T)) > tol:
            raise InvalidStateError("covariance matrix lacks the [[C1, C2], [C2^dag, C1^T]] block structure")
        dscale = max(1.0, float(np.max(np.abs(disp)))) if disp.size else 1.0
        if np.max(np.abs(disp[n:] - disp[:n].conj())) > HERMITIAN_RTOL * dscale:
            raise InvalidStateError("displacement must satisfy d[N+i] = conj(d[i])")
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "disp", disp)

    @property
    def n_modes(self) -> int:
        return self.cov.shape[0] // 2

    @property
    def c1(self) -> np.ndarray:
        """Normal-ordered block ``C1 = <a a^dag + a^dag a>``."""
        return self.cov[: self.n_modes, : self.n_modes]

    @property
    def c2(self) -> np.ndarray:
        """Anomalous block ``C2 = <a a + a a>``."""
        return self.cov[: self.n_modes, self.n_modes :]

    @classmethod
    def from_blocks(cls, c1: np.ndarray, c2: np.ndarray | None = None, alpha: np.ndarray | None = None) -> "GaussianState":
        """Assemble a state from its ``C1``/``C2`` blocks and mode amplitudes ``alpha = <a>``."""
        c1 = np.asarray(c1, complex)
        n = c1.shape[0]
        c2 = np.zeros((n, n), complex) if c2 is None else np.asarray(c2, complex)
        cov = np.block([[c1, c2], [c2.conj().T, c1.T]])
        alpha = np.zeros(n, complex) if alpha is None else np.asarray(alpha, complex)
        return cls(cov, np.concatenate([alpha, alpha.conj()]))

    def is_physical(self, tol: float = PHYSICAL_TOL) -> bool:
        return bool(np.all(symplectic_eigenvalues(self) >= 1.0 - tol))

    def allclose(self, other: "GaussianState", atol: float = 1e-10) -> bool:
        return (
            self.n_modes == other.n_modes
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
            and np.allclose(self.disp, other.disp, rtol=0, atol=atol)
        )

    def to_json(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "cov_re": self.cov.real.ravel().tolist(),
            "cov_im": self.cov.imag.ravel().tolist(),
            "disp_re": self.disp.real.tolist(),
            "disp_im": self.disp.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "GaussianState":
        n = int(data["n_modes"])
        cov = (np.asarray(data["cov_re"], float) + 1j * np.asarray(data["cov_im"], float)).reshape(2 * n, 2 * n)
        disp = np.asarray(data["disp_re"], float) + 1j * np.asarray(data["disp_im"], float)
        return cls(cov, disp)


def vacuum_state(n_modes: int) -> GaussianState:
    if int(n_modes) < 1:
        raise InvalidArgumentError(f"n_modes must be >= 1, got {n_modes}")
    return GaussianState(np.eye(2 * int(n_modes)), np.zeros(2 * int(n_modes)))


def thermal_occupation(omega, temperature):
    """Bose-Einstein occupation ``1 / (exp(omega / T) - 1)`` with ``k_B = 1``.

    Accepts scalars or arrays of frequencies; ``T = 0`` returns zeros.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise InvalidArgumentError("frequencies must be strictly positive")
    if temperature < 0:
        raise InvalidArgumentError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0:
        n = np.zeros_like(w)
    else:
        with np.errstate(over="ignore"):
            n = 1.0 / np.expm1(w / temperature)
    return float(n) if n.ndim == 0 else n


def thermal_state(frequencies: Sequence[float], temperature: float) -> GaussianState:
    tau = 2.0 * np.atleast_1d(thermal_occupation(np.asarray(frequencies, float), temperature)) + 1.0
    return GaussianState.from_blocks(np.diag(tau))


def direct_sum(states: Iterable[GaussianState]) -> GaussianState:
    """Tensor product of uncorrelated states, modes concatenated in order."""
    states = list(states)
    c1 = sla.block_diag(*[s.c1 for s in states])
    c2 = sla.block_diag(*[s.c2 for s in states])
    alpha = np.concatenate([s.disp[: s.n_modes] for s in states])
    return GaussianState.from_blocks(c1, c2, alpha)


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    """Sorted symplectic spectrum: moduli of the ``+-`` eigenvalue pairs of ``Z_N C``."""
    n = state.n_modes
    ev = np.sort(np.abs(np.linalg.eigvals(z_matrix(n) @ state.cov)))
    return ev.reshape(n, 2).mean(axis=1)


def partial_trace(state: GaussianState, kept_modes: Sequence[int]) -> GaussianState:
    """Reduced state on ``kept_modes`` (0-based mode indices, order preserved)."""
    kept = [int(k) for k in kept_modes]
    n = state.n_modes
    if not kept or len(set(kept)) != len(kept) or any(k < 0 or k >= n for k in kept):
        raise InvalidArgumentError(f"kept_modes must be distinct indices in [0, {n}), got {kept_modes}")
    idx = np.array(kept + [k + n for k in kept])
    return GaussianState(state.cov[np.ix_(idx, idx)], state.disp[idx])


def symplectic_to_passive(u: np.ndarray) -> np.ndarray:
    """Embed an ``N x N`` mode unitary as the ``2N x 2N`` matrix ``u (+) conj(u)``."""
    u = np.asarray(u, complex)
    return sla.block_diag(u, u.conj())


def basis_change(state: GaussianState, u: np.ndarray) -> GaussianState:
    """Re-express ``state`` after the mode transformation ``xi' = U xi``.

    ``U`` is the full ``2N x 2N`` block-diagonal unitary ``T (+) conj(T)``; the state
    is mapped as ``C -> U^dag C U`` and ``d -> U^dag d``, so passing the normal-mode
    transform returns to site operators.
    """
    u = np.asarray(u, complex)
    n = state.n_modes
    if u.shape != (2 * n, 2 * n):
        raise InvalidArgumentError(f"transform must be {2 * n} x {2 * n}, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2 * n))) > 1e-12:
        raise InvalidArgumentError("transform is not unitary")
    if np.max(np.abs(u[:n, n:])) > 1e-12 or np.max(np.abs(u[n:, :n])) > 1e-12 or np.max(np.abs(u[n:, n:] - u[:n, :n].conj())) > 1e-12:
        raise InvalidArgumentError("transform must have the block form T (+) conj(T)")
    cov = u.conj().T @ state.cov @ u
    return GaussianState(0.5 * (cov + cov.conj().T), u.conj().T @ state.disp)


def _principal_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal root via eigendecomposition, Schur-based ``sqrtm`` if the eigenvectors are degenerate.

    Eigenvalues at roundoff distance from zero (a pure state in the pair) are
    flushed to zero so their square root does not inflate the noise to ``sqrt(eps)``.
    """
    w, v = np.linalg.eig(a)
    if np.linalg.cond(v) < 1e10:
        w = np.where(np.abs(w) < 1e-12 * max(1.0, np.max(np.abs(w))), 0.0, w)
        return (v * np.sqrt(w.astype(complex))) @ np.linalg.inv(v)
    return sla.sqrtm(a)


def fidelity(s1: GaussianState, s2: GaussianState) -> float:
    """Uhlmann root fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` of two Gaussian states.

    The determinant formula below holds for covariance matrices normalised so
    that the vacuum is ``I/2``, so it is evaluated on ``C/2``.
    """
    if s1.n_modes != s2.n_modes:
        raise InvalidArgumentError(f"mode count mismatch: {s1.n_modes} vs {s2.n_modes}")
    n = s1.n_modes
    z = z_matrix(n)
    eye = np.eye(2 * n)
    v1, v2 = 0.5 * s1.cov, 0.5 * s2.cov
    vsum = v1 + v2
    if np.linalg.cond(vsum) > 1e13:
        raise NumericalSingularityError("C1 + C2 is singular")
    vsum_inv = np.linalg.inv(vsum)
    caux = z @ vsum_inv @ (z / 4 + v2 @ z @ v1)
    a = caux @ z
    root = _principal_sqrt(eye - 0.25 * np.linalg.inv(a @ a))
    ftot4 = np.linalg.det(2 * (root + eye) @ caux)
    f0_4 = ftot4 / np.linalg.det(vsum)
    if abs(f0_4.imag) > 1e-9 * abs(f0_4.real):
        raise NumericalError(f"fidelity determinant has a non-negligible imaginary part: {f0_4}")
    delta = s2.disp - s1.disp
    expo = (delta.conj() @ vsum_inv @ delta).real
    f = f0_4.real ** 0.25 * np.exp(-0.25 * expo)
    if f > 1.0:
        if f - 1.0 > 1e-9:
            raise NumericalError(f"fidelity {f} exceeds 1")
        f = 1.0
    return float(f)


def analytic_equal_temp_fidelity(omega0: float, g: float, temperature: float, spectral=None) -> float:
    """Closed-form fidelity of the local and global steady states at equal bath temperatures.

    At ``T_l = T_r`` the local state is ``tau(omega0) I`` and the global one is
    ``diag(tau(eps_i))`` in the normal-mode basis, so the fidelity factorises over
    modes.  ``spectral`` (optional) is used only to check every normal-mode
    frequency lies below the bath cutoff.
    """
    if omega0 <= 0:
        raise InvalidArgumentError("omega0 must be positive")
    if not 0 <= g < omega0 / np.sqrt(2):
        raise InvalidArgumentError(f"g must lie in [0, omega0/sqrt(2)), got {g}")
    eps = omega0 + np.sqrt(2) * g * np.array([-1.0, 0.0, 1.0])
    if spectral is not None and np.any(eps >= spectral.cutoff):
        raise InvalidArgumentError("normal-mode frequency beyond the bath cutoff")
    tau = 2.0 * np.atleast_1d(thermal_occupation(eps, temperature)) + 1.0
    t2 = tau[1]
    factors = 4 * (np.sqrt((t2**2 - 1) * (tau**2 - 1)) + t2 * tau + 1) ** 2 / (t2 + tau) ** 4
    return float(np.prod(factors) ** 0.25)
