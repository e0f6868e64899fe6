"""Spectral representation of a linear model and the COPRA characteristic function.

Everything downstream of :func:`decompose` works on :class:`SpectralData`:
the squared singular values ``sigma_sq`` and the energies ``b_sq`` of the
observation projected on the left singular vectors.  Both are real, so the
characteristic function is real even for complex models.

With ``p = sqrt(g)``, ``q = sqrt(g + 4)`` and ``s = p + q`` the function is::

    S(g) = sum_i b_i^2 / (sigma_i^2 + N g)^2 * (sigma_i^2 * P1(g) + P2(g))
    P1(g) = -4 - g + p q      = -4 q / s
    P2(g) = N (-4 g + 2 p q - g^2 + g p q) = 8 N p q / s^2

The right-hand forms are algebraically identical and free of cancellation
at both ends of (0, inf), so they are the ones evaluated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModelError, DomainError, InvalidInputError

__all__ = [
    "Decomposition",
    "SpectralData",
    "DeltaPair",
    "decompose",
    "copra_eval",
    "component_eval",
    "copra_derivative",
    "delta_square_case",
    "copra_general_eval",
]


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Decomposition:
    """Thin SVD ``H = U diag(s) V^H`` plus the truncation rule.

    ``U`` is the full M x M left basis, ``singular_values`` has length
    ``min(M, N)`` in descending order and ``V`` is N x min(M, N).
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    rank_tolerance: float
    M: int
    N: int

    @property
    def rank(self) -> int:
        """Number of modes strictly above ``rank_tolerance``."""
        return int(np.count_nonzero(self.singular_values > self.rank_tolerance))

    @property
    def retained(self) -> np.ndarray:
        return self.singular_values[: self.rank]

    def project(self, y) -> np.ndarray:
        """Coefficients ``U_k^H y`` on the retained modes."""
        y = _as_observation(y, self.M)
        return self.U[:, : self.rank].conj().T @ y

    def spectral(self, y) -> SpectralData:
        y = _as_observation(y, self.M)
        k = self.rank
        coeffs = self.U.conj().T @ y
        energy = np.abs(coeffs) ** 2
        return SpectralData(
            sigma_sq=self.retained**2,
            b_sq=energy[:k],
            M=self.M,
            N=self.N,
            discarded_energy=float(np.sum(energy[k:])),
        )


@dataclass(frozen=True)
class SpectralData:
    """Squared singular values and projected observation energies.

    Immutable; arrays are copied and marked read-only on construction.
    """

    sigma_sq: np.ndarray
    b_sq: np.ndarray
    M: int
    N: int
    discarded_energy: float = 0.0

    def __post_init__(self):
        sigma_sq = _frozen(np.atleast_1d(self.sigma_sq))
        b_sq = _frozen(np.atleast_1d(self.b_sq))
        if sigma_sq.ndim != 1 or sigma_sq.shape != b_sq.shape:
            raise InvalidInputError("sigma_sq and b_sq must be 1-D arrays of equal length")
        if sigma_sq.size == 0:
            raise InvalidInputError("spectral data has no modes")
        if np.any(sigma_sq <= 0) or not np.all(np.isfinite(sigma_sq)):
            raise InvalidInputError("sigma_sq entries must be finite and strictly positive")
        if np.any(b_sq < 0) or not np.all(np.isfinite(b_sq)):
            raise InvalidInputError("b_sq entries must be finite and nonnegative")
        if int(self.M) < 1 or int(self.N) < 1:
            raise InvalidInputError("M and N must be positive")
        if self.discarded_energy < 0:
            raise InvalidInputError("discarded_energy must be nonnegative")
        object.__setattr__(self, "sigma_sq", sigma_sq)
        object.__setattr__(self, "b_sq", b_sq)
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "discarded_energy", float(self.discarded_energy))

    @property
    def r(self) -> int:
        return self.sigma_sq.size

    def scaled(self, alpha: float) -> SpectralData:
        """Same spectrum with every observation energy multiplied by ``alpha``."""
        return SpectralData(
            self.sigma_sq, alpha * self.b_sq, self.M, self.N, alpha * self.discarded_energy
        )


@dataclass(frozen=True)
class DeltaPair:
    delta: float
    delta_tilde: float


def _as_observation(y, M):
    y = np.asarray(y)
    if y.ndim == 2 and 1 in y.shape:
        y = y.reshape(-1)
    if y.ndim != 1 or y.shape[0] != M:
        raise InvalidInputError(f"observation must have length {M}, got shape {y.shape}")
    return y


def decompose(H, y, rank_tolerance=None):
    """Factor ``H`` and project ``y`` onto its left singular vectors.

    Parameters
    ----------
    H : (M, N) array_like, real or complex
    y : (M,) array_like, real or complex
    rank_tolerance : float, optional
        Singular values at or below this are dropped.  Defaults to
        ``eps * max(M, N) * sigma_1``.

    Returns
    -------
    (Decomposition, SpectralData)
    """
    H = np.asarray(H)
    if H.ndim != 2 or 0 in H.shape:
        raise InvalidInputError(f"model matrix must be a nonempty 2-D array, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise InvalidInputError("model matrix contains non-finite entries")
    M, N = H.shape
    y = _as_observation(y, M)
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("observation contains non-finite entries")
    U, s, Vh = np.linalg.svd(H, full_matrices=True)
    if rank_tolerance is None:
        rank_tolerance = np.finfo(float).eps * max(M, N) * (s[0] if s.size else 0.0)
    elif rank_tolerance < 0:
        raise InvalidInputError("rank_tolerance must be nonnegative")
    dec = Decomposition(
        U=_frozen(U, U.dtype),
        singular_values=_frozen(s),
        V=_frozen(Vh.conj().T[:, : s.size], Vh.dtype),
        rank_tolerance=float(rank_tolerance),
        M=M,
        N=N,
    )
    if dec.rank == 0:
        raise DegenerateModelError("all singular values are below the rank tolerance")
    return dec, dec.spectral(y)


def _check_gamma(gamma_tilde):
    g = np.asarray(gamma_tilde, dtype=float)
    if np.any(~np.isfinite(g)) or np.any(g <= 0):
        raise DomainError("the characteristic function is only evaluated for finite gamma_tilde > 0")
    return g


def _roots(g):
    p = np.sqrt(g)
    q = np.sqrt(g + 4.0)
    return p, q, p + q


def _terms(gamma_tilde, data):
    """Per-component pieces, shaped (..., r) against ``data.sigma_sq``."""
    g = _check_gamma(gamma_tilde)[..., None]
    p, q, s = _roots(g)
    N = data.N
    w = data.b_sq / (data.sigma_sq + N * g) ** 2
    p1 = -4.0 * q / s
    p2 = 8.0 * N * p * q / s**2
    return g, p, q, s, w, p1, p2


def _scalar_or_array(value, gamma_tilde):
    return float(value) if np.ndim(gamma_tilde) == 0 else value


def component_eval(gamma_tilde, data: SpectralData):
    """Split the characteristic function into its two trace terms ``(S1, S2)``.

    ``S1`` carries the ``sigma^2``-weighted trace and is never positive;
    ``S2`` carries the plain trace and is never negative.
    """
    _, _, _, _, w, p1, p2 = _terms(gamma_tilde, data)
    s1 = np.sum(w * data.sigma_sq, axis=-1) * p1[..., 0]
    s2 = np.sum(w, axis=-1) * p2[..., 0]
    return _scalar_or_array(s1, gamma_tilde), _scalar_or_array(s2, gamma_tilde)


def copra_eval(gamma_tilde, data: SpectralData):
    """Characteristic function S at ``gamma_tilde`` (scalar or array)."""
    _, _, _, _, w, p1, p2 = _terms(gamma_tilde, data)
    value = np.sum(w * (data.sigma_sq * p1 + p2), axis=-1)
    return _scalar_or_array(value, gamma_tilde)


def copra_derivative(gamma_tilde, data: SpectralData):
    """Closed-form dS/dg.

    Uses ``P1' = 8 / (p q s^2)`` and ``P2' = 64 N / (p q s^4)`` together
    with ``d/dg (sigma^2 + N g)^-2 = -2 N (sigma^2 + N g)^-3``.
    """
    g, p, q, s, w, p1, p2 = _terms(gamma_tilde, data)
    N = data.N
    sig = data.sigma_sq
    dp1 = 8.0 / (p * q * s**2)
    dp2 = 64.0 * N / (p * q * s**4)
    dw = -2.0 * N * w / (sig + N * g)
    value = np.sum(dw * (sig * p1 + p2) + w * (sig * dp1 + dp2), axis=-1)
    return _scalar_or_array(value, gamma_tilde)


def delta_square_case(gamma_tilde) -> DeltaPair:
    """Closed-form ``delta = delta_tilde`` for square models.

    The positive root of ``d^2 + g d - g = 0``, written as
    ``2 g / (g + sqrt(g (g + 4)))`` to stay accurate at large ``g``.
    """
    g = float(_check_gamma(gamma_tilde))
    d = 2.0 * g / (g + np.sqrt(g) * np.sqrt(g + 4.0))
    return DeltaPair(d, d)


def copra_general_eval(gamma_tilde, deltas: DeltaPair, data: SpectralData):
    """Characteristic function for a general aspect ratio with caller-supplied deltas."""
    g = _check_gamma(gamma_tilde)
    d, dt = float(deltas.delta), float(deltas.delta_tilde)
    if not (np.isfinite(d) and np.isfinite(dt)) or d < 0 or dt < 0:
        raise DomainError("deltas must be finite and nonnegative")
    M, N = data.M, data.N
    bracket1 = d * d * dt * dt - g * g * d - g * d * dt
    bracket2 = N * d * dt * (g * g - g * d * dt - d * dt * dt) + M * dt * g * (g - g * d + d * d * dt)
    w = data.b_sq / (data.sigma_sq + N * g[..., None]) ** 2
    value = np.sum(w * data.sigma_sq, axis=-1) * bracket1 + np.sum(w, axis=-1) * bracket2
    return _scalar_or_array(value, gamma_tilde)
