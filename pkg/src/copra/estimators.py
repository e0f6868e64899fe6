"""Regularized least-squares estimates and the baseline regularizer selectors.

All estimators go through one shared :class:`~copra.spectral.Decomposition`
so that benchmarked methods differ only in the regularizer they pick.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInputError, SingularityError
from .solver import SelectionResult, SolverConfig, newton_solve
from .spectral import Decomposition, SpectralData, decompose

__all__ = [
    "Method",
    "Estimate",
    "rls_solve",
    "copra_estimate",
    "copra_from_decomposition",
    "ls_estimate",
    "lmmse_estimate",
    "default_gamma_grid",
    "gcv_curve",
    "gcv_select",
    "quasiopt_curve",
    "quasiopt_select",
]


class Method(str, enum.Enum):
    COPRA = "copra"
    LS = "ls"
    LMMSE = "lmmse"
    GCV = "gcv"
    QUASIOPT = "quasiopt"


@dataclass(frozen=True)
class Estimate:
    x_hat: np.ndarray
    gamma_used: float
    method: Method


def _filtered(dec: Decomposition, y, factors):
    coeffs = dec.project(y)
    return dec.V[:, : dec.rank] @ (factors * coeffs)


def rls_solve(dec: Decomposition, y, gamma, method=Method.COPRA) -> Estimate:
    """``(H^H H + gamma I)^-1 H^H y`` evaluated through the SVD."""
    if not np.isfinite(gamma) or gamma < 0:
        raise DomainError("gamma must be finite and nonnegative")
    if gamma == 0 and dec.rank < dec.N:
        raise SingularityError(
            f"H^H H is singular (rank {dec.rank} < N = {dec.N}); use ls_estimate or gamma > 0"
        )
    s = dec.retained
    return Estimate(_filtered(dec, y, s / (s**2 + gamma)), float(gamma), Method(method))


def ls_estimate(dec: Decomposition, y) -> Estimate:
    """Minimum-norm least squares through the truncated spectral inverse."""
    return Estimate(_filtered(dec, y, 1.0 / dec.retained), 0.0, Method.LS)


def lmmse_estimate(dec: Decomposition, y, sigma_z_sq) -> Estimate:
    """Oracle linear MMSE for a unit-variance white signal and known noise variance."""
    if not np.isfinite(sigma_z_sq) or sigma_z_sq <= 0:
        raise DomainError("sigma_z_sq must be positive")
    est = rls_solve(dec, y, sigma_z_sq)
    return Estimate(est.x_hat, est.gamma_used, Method.LMMSE)


def copra_from_decomposition(dec: Decomposition, data: SpectralData, y, cfg: SolverConfig | None = None):
    sel = newton_solve(data, cfg)
    if sel.gamma == 0:
        est = ls_estimate(dec, y)
        return Estimate(est.x_hat, 0.0, Method.COPRA), sel
    return rls_solve(dec, y, sel.gamma, Method.COPRA), sel


def copra_estimate(H, y, cfg: SolverConfig | None = None, rank_tolerance=None):
    """Select the regularizer from the characteristic function and apply it.

    Returns
    -------
    (Estimate, SelectionResult)
    """
    dec, data = decompose(H, y, rank_tolerance)
    return copra_from_decomposition(dec, data, y, cfg)


def default_gamma_grid(dec: Decomposition, num=200):
    """``num`` log-spaced points on ``[1e-6 s1^2, 1e2 s1^2]``."""
    top = dec.singular_values[0] ** 2
    return np.geomspace(1e-6 * top, 1e2 * top, num)


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidInputError("gamma grid must be a nonempty 1-D array")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise InvalidInputError("gamma grid must be finite and positive")
    return grid


def _argmin_smallest(grid, values):
    # Ties (to rounding) resolve to the smallest gamma.
    order = np.argsort(grid, kind="stable")
    grid, values = grid[order], values[order]
    best = values.min()
    tol = 1e-10 * abs(best) + np.finfo(float).tiny
    return float(grid[np.argmax(values <= best + tol)])


def gcv_curve(data: SpectralData, grid):
    g = _check_grid(grid)[:, None]
    s2, b2 = data.sigma_sq, data.b_sq
    residual = np.sum(g**2 * b2 / (s2 + g) ** 2, axis=1) + data.discarded_energy
    dof = data.M - np.sum(s2 / (s2 + g), axis=1)
    return residual / dof**2


def gcv_select(dec: Decomposition, y, grid=None) -> float:
    """Grid minimizer of generalized cross-validation."""
    grid = default_gamma_grid(dec) if grid is None else _check_grid(grid)
    return _argmin_smallest(grid, gcv_curve(dec.spectral(y), grid))


def quasiopt_curve(data: SpectralData, grid):
    g = _check_grid(grid)[:, None]
    s2, b2 = data.sigma_sq, data.b_sq
    return np.sum(g**2 * s2 * b2 / (s2 + g) ** 4, axis=1)


def quasiopt_select(dec: Decomposition, y, grid=None) -> float:
    """Grid minimizer of the quasi-optimality function ``||g dx/dg||^2``."""
    grid = default_gamma_grid(dec) if grid is None else _check_grid(grid)
    return _argmin_smallest(grid, quasiopt_curve(dec.spectral(y), grid))
