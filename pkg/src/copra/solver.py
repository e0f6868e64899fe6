"""Locating the operative positive root of the characteristic function.

Near the origin S has a spurious root ``eps`` that gives no regularization.
The operative root sits past the maximum of S, where S falls back through
zero before decaying towards the axis.  :func:`newton_solve` estimates
``eps``, scans a log grid above it for a (+, -) sign change past the
maximum, and polishes that bracket with Newton steps guarded by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DegenerateObservationError, NonConvergenceError
from .spectral import SpectralData, component_eval, copra_derivative, copra_eval

__all__ = [
    "EpsilonEstimate",
    "SolverConfig",
    "RootScan",
    "SelectionResult",
    "MonotonicityReport",
    "estimate_epsilon",
    "epsilon_approximant",
    "log_grid",
    "scan_roots",
    "newton_solve",
    "monotonicity_diagnostic",
]

_CBRT2 = 2.0 ** (1.0 / 3.0)


@dataclass(frozen=True)
class EpsilonEstimate:
    c1: float
    c2: float
    q: float
    z: float
    epsilon_closed: float
    epsilon_numeric: float
    discrepancy: float
    # (Q + sqrt(Q^2 + Z^3))^(2/3) > Z, the positivity condition of the closed form
    closed_form_condition: bool
    cubic_residual: float


@dataclass(frozen=True)
class SolverConfig:
    rho_rel: float = 1e-9
    step_tol: float = 1e-12
    max_iter: int = 100
    grid_lo_factor: float = 10.0
    grid_hi: float = 1e6
    grid_points_per_decade: int = 20
    min_start: float = 1e-8

    def __post_init__(self):
        if not self.rho_rel > 0:
            raise ConfigError("rho_rel must be positive")
        if self.step_tol < 0:
            raise ConfigError("step_tol must be nonnegative")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be at least 1")
        if not self.grid_lo_factor > 0 or not self.min_start > 0:
            raise ConfigError("grid_lo_factor and min_start must be positive")
        if self.grid_points_per_decade < 1:
            raise ConfigError("grid_points_per_decade must be at least 1")

    def start(self, epsilon: float) -> float:
        return max(self.grid_lo_factor * epsilon, self.min_start)


@dataclass(frozen=True)
class RootScan:
    grid: np.ndarray
    values: np.ndarray
    sign_changes: list
    argmax_gamma: float
    root_count_estimate: int

    def brackets_past_max(self):
        """Sign changes from positive to negative at or beyond the grid maximum."""
        v = self.values
        idx = np.nonzero((v[:-1] > 0) & (v[1:] < 0))[0]
        return [(float(self.grid[i]), float(self.grid[i + 1])) for i in idx if self.grid[i] >= self.argmax_gamma]


@dataclass(frozen=True)
class SelectionResult:
    gamma_tilde: float
    gamma: float
    iterations: int
    converged: bool
    fallback_used: bool
    residual: float
    bracket: tuple | None
    rho: float
    epsilon: float
    # (iterate, bracket_lo, bracket_hi) after every step
    history: tuple = field(default=(), repr=False)
    fallback_kind: str | None = None


def _cubic_bisect(k):
    """Unique real root of t^3 - 2t^2 + 2t - k for k > 0, to full precision."""
    f = lambda t: ((t - 2.0) * t + 2.0) * t - k  # noqa: E731
    lo, hi = 0.0, 1.0 + k
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid, 0.0
        if fm < 0:
            lo = mid
        else:
            hi = mid
    t = lo if abs(f(lo)) <= abs(f(hi)) else hi
    return t, abs(f(t))


def epsilon_closed_form(N, c1, c2):
    """Published closed form for the small root.  Returns ``(eps, Q, Z, condition)``."""
    q = 108.0 * N * c1 * c2
    z = 19.05 * N**3 * c2**3 * (-2.0 * c1 + N * c2)
    disc = q * q + z**3
    w = complex(q + np.sqrt(complex(disc))) ** (1.0 / 3.0)
    eps = w / (3.0 * _CBRT2 * N**2 * c2**2) - 4.0 * _CBRT2 * N * c2 * (-2.0 * c1 + N * c2) / w
    condition = disc >= 0 and w.real**2 > z
    return float(eps.real), q, z, bool(condition)


def epsilon_approximant(epsilon, c1, c2, N):
    """Small-argument expansion of S whose positive root defines ``eps``."""
    r = math.sqrt(epsilon)
    return 2 * N * c2 * epsilon * r + 4 * N * c2 * r - 4 * N * c2 * epsilon - 4 * c1


def estimate_epsilon(data: SpectralData) -> EpsilonEstimate:
    """Spurious small root of S, from the closed form and from a bisection on its cubic.

    With ``t = sqrt(eps)`` the expansion becomes
    ``t^3 - 2 t^2 + 2 t - 2 C1 / (N C2) = 0``, which is monotone in ``t``
    and so has exactly one real root.  ``epsilon_numeric`` is the one to use;
    the closed form is kept for comparison only.
    """
    if not np.any(data.b_sq > 0):
        raise DegenerateObservationError("observation energy is zero in every retained mode")
    N = data.N
    c1 = float(np.sum(data.b_sq / data.sigma_sq))
    c2 = float(np.sum(data.b_sq / data.sigma_sq**2))
    t, residual = _cubic_bisect(2.0 * c1 / (N * c2))
    numeric = t * t
    closed, q, z, condition = epsilon_closed_form(N, c1, c2)
    return EpsilonEstimate(
        c1=c1,
        c2=c2,
        q=q,
        z=z,
        epsilon_closed=closed,
        epsilon_numeric=numeric,
        discrepancy=abs(closed - numeric) / numeric,
        closed_form_condition=condition,
        cubic_residual=residual,
    )


def log_grid(lo, hi, points_per_decade=20):
    n = max(2, int(math.ceil(math.log10(hi / lo) * points_per_decade)) + 1)
    return np.geomspace(lo, hi, n)


def scan_roots(data: SpectralData, cfg: SolverConfig | None = None, *, lo=None, hi=None) -> RootScan:
    """Sample S on a log grid and report every sign change.

    The window defaults to ``(cfg.start(eps), cfg.grid_hi)``; pass ``lo`` or
    ``hi`` to override either end.
    """
    cfg = cfg or SolverConfig()
    if lo is None:
        if np.any(data.b_sq > 0):
            lo = cfg.start(estimate_epsilon(data).epsilon_numeric)
        else:
            lo = cfg.min_start
    hi = cfg.grid_hi if hi is None else hi
    if not 0 < lo < hi:
        raise ConfigError(f"scan window ({lo}, {hi}) is empty")
    grid = log_grid(lo, hi, cfg.grid_points_per_decade)
    values = copra_eval(grid, data)
    idx = np.nonzero(values[:-1] * values[1:] < 0)[0]
    changes = [(float(grid[i]), float(grid[i + 1])) for i in idx]
    return RootScan(
        grid=grid,
        values=values,
        sign_changes=changes,
        argmax_gamma=float(grid[np.argmax(values)]),
        root_count_estimate=len(changes),
    )


def _interior_maximum(scan: RootScan, data: SpectralData):
    """Highest interior local maximum of the scan, polished by bisection on S'."""
    v, g = scan.values, scan.grid
    peaks = [k for k in range(1, len(g) - 1) if v[k] >= v[k - 1] and v[k] > v[k + 1]]
    if not peaks:
        return None
    k = max(peaks, key=lambda i: v[i])
    lo, hi = g[k - 1], g[k + 1]
    if not copra_derivative(lo, data) > 0 > copra_derivative(hi, data):
        return float(g[k])
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            break
        if copra_derivative(mid, data) > 0:
            lo = mid
        else:
            hi = mid
    return float(math.sqrt(lo * hi))


def newton_solve(data: SpectralData, cfg: SolverConfig | None = None) -> SelectionResult:
    """Find the operative root with bracketed Newton iteration.

    Newton steps that would leave the current bracket are replaced by the
    bracket midpoint, so the bracket shrinks every iteration.

    If the scan above ``cfg.start(eps)`` shows no (+, -) sign change past
    its maximum, the window is widened down to ``eps / 100`` (the two roots
    can sit closer together than the factor ``grid_lo_factor``).  Failing
    that, ``fallback_used`` is set and the result is

    * ``"upper_edge"``: ``cfg.grid_hi`` when S is still positive there, i.e.
      the sign change lies beyond the window,
    * ``"stationary"``: the interior maximum of S, where the operative root
      and the small root have merged, or
    * ``"ls_limit"``: ``gamma_tilde = 0`` when S rises monotonically and the
      small root is the only one left, which amounts to no regularization.

    Raises
    ------
    DegenerateObservationError
        If every ``b_sq`` is zero.
    NonConvergenceError
        If neither stopping rule fires within ``cfg.max_iter`` iterations.
    """
    cfg = cfg or SolverConfig()
    eps = estimate_epsilon(data).epsilon_numeric
    start = cfg.start(eps)
    N = data.N

    scan = scan_roots(data, cfg, lo=start)
    brackets = scan.brackets_past_max()
    if not brackets:
        scan = scan_roots(data, cfg, lo=1e-2 * eps)
        brackets = scan.brackets_past_max()
    if not brackets:
        if scan.values[-1] > 0:
            g, kind = float(scan.grid[-1]), "upper_edge"
        else:
            g, kind = _interior_maximum(scan, data), "stationary"
            if g is None:
                g, kind = 0.0, "ls_limit"
        # no Newton start here; report the threshold at the scan start instead
        rho = cfg.rho_rel * abs(copra_eval(start, data))
        return SelectionResult(
            gamma_tilde=g,
            gamma=N * g,
            iterations=0,
            converged=False,
            fallback_used=True,
            residual=abs(copra_eval(g, data)) if g > 0 else abs(4.0 * np.sum(data.b_sq / data.sigma_sq)),
            bracket=None,
            rho=rho,
            epsilon=eps,
            fallback_kind=kind,
        )

    a, b = brackets[0]
    bracket = (a, b)
    x = a
    fx = copra_eval(x, data)
    # S scales with the observation energy, so the threshold is relative to the first iterate
    rho = cfg.rho_rel * abs(fx)
    history = []

    def done(iterations, converged):
        return SelectionResult(
            gamma_tilde=x,
            gamma=N * x,
            iterations=iterations,
            converged=converged,
            fallback_used=False,
            residual=abs(fx),
            bracket=bracket,
            rho=rho,
            epsilon=eps,
            history=tuple(history),
        )

    for it in range(1, cfg.max_iter + 1):
        d = copra_derivative(x, data)
        xn = x - fx / d if d != 0 else math.nan
        if not a < xn < b:
            xn = 0.5 * (a + b)
        step = abs(xn - x)
        x = xn
        fx = copra_eval(x, data)
        if fx > 0:
            a = x
        elif fx < 0:
            b = x
        history.append((x, a, b))
        if abs(fx) <= rho:
            return done(it, True)
        if step <= cfg.step_tol * (1.0 + x) or fx == 0.0:
            return done(it, False)
    raise NonConvergenceError(
        f"Newton iteration did not converge in {cfg.max_iter} steps", last_iterate=x, iterations=cfg.max_iter
    )


@dataclass(frozen=True)
class MonotonicityReport:
    """Signs of finite-difference derivatives of orders 0, 1, 2.

    ``signs[name]`` has shape ``(3, len(grid))`` for each name in
    ``("S1", "-S1", "S2", "-S2")``.
    """

    grid: np.ndarray
    signs: dict

    def completely_monotone_pattern(self, name) -> bool:
        """Whether ``(-1)^n F^(n) >= 0`` held at every sampled point."""
        alt = np.array([1, -1, 1])[:, None]
        return bool(np.all(alt * self.signs[name] >= 0))


def monotonicity_diagnostic(data: SpectralData, grid, h_rel=1e-4) -> MonotonicityReport:
    """Empirical derivative sign patterns of the two trace terms.

    Central differences with step ``h_rel * g``.  Purely descriptive.
    """
    grid = np.asarray(grid, dtype=float)
    h = h_rel * grid
    minus, centre, plus = (component_eval(x, data) for x in (grid - h, grid, grid + h))
    signs = {}
    for k, name in enumerate(("S1", "S2")):
        f_m, f_c, f_p = np.asarray(minus[k]), np.asarray(centre[k]), np.asarray(plus[k])
        derivs = np.stack([f_c, (f_p - f_m) / (2 * h), (f_p - 2 * f_c + f_m) / h**2])
        signs[name] = np.sign(derivs)
        signs["-" + name] = -signs[name]
    return MonotonicityReport(grid=grid, signs={n: signs[n] for n in ("S1", "-S1", "S2", "-S2")})
