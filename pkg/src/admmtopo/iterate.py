"""Message-passing ADMM, its reduced matrix iteration, gradient descent, and
empirical rate estimation from residual trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DimensionMismatch,
    Diverged,
    NonFiniteState,
    ParameterOutOfRange,
    WindowTooNoisy,
)
from .graph import Graph
from .operators import FactorGraph, FactorOperators, _check_params

EPS = np.finfo(float).eps
MIN_FIT_POINTS = 8
# BIC margin for preferring the log t model ("very strong" evidence)
JORDAN_BIC_MARGIN = 10.0


@dataclass(frozen=True)
class AdmmState:
    x: np.ndarray
    m: np.ndarray
    n: np.ndarray
    u: np.ndarray
    z: np.ndarray
    s: np.ndarray
    t: int = 0


def initial_state(fg: FactorGraph, z0, u0=None) -> AdmmState:
    """State with ``s = S z0`` and ``n = s - u0`` (``u0`` defaults to zero).

    The reduction to ``n -> T_A n`` holds when ``u0`` has zero per-node sums,
    which the default satisfies.
    """
    z0 = np.asarray(z0, dtype=float)
    if z0.shape != (fg.n_variables,):
        raise DimensionMismatch(f"z0 must have length {fg.n_variables}, got {z0.shape}")
    E = fg.n_fg_edges
    u = np.zeros(E) if u0 is None else np.asarray(u0, dtype=float)
    if u.shape != (E,):
        raise DimensionMismatch(f"u0 must have length {E}, got {u.shape}")
    s = fg.gather(z0)
    return AdmmState(x=np.zeros(E), m=np.zeros(E), n=s - u, u=u.copy(), z=z0.copy(), s=s, t=0)


def admm_message_step(state: AdmmState, fg: FactorGraph, rho: float, gamma: float) -> AdmmState:
    """One synchronous round of over-relaxed ADMM message passing.

    Function node ``a`` over edge ``(i, j)`` minimizes
    ``1/2 (x_i - x_j)^2 + rho/2 ||x_a - n_a||^2``, whose solution is
    ``x_ai = ((rho + 1) n_ai + n_aj) / (rho + 2)`` and symmetrically for ``x_aj``.
    """
    _check_params(rho, gamma)
    E = fg.n_fg_edges
    if state.n.shape != (E,) or state.u.shape != (E,) or state.z.shape != (fg.n_variables,):
        raise DimensionMismatch("state does not match the factor graph")

    pairs = state.n.reshape(-1, 2)
    x = (((rho + 1.0) * pairs + pairs[:, ::-1]) / (rho + 2.0)).reshape(E)
    m = gamma * x + state.u
    z = (1.0 - gamma) * state.z + fg.average(m)
    z_old_e = fg.gather(state.z)
    z_new_e = fg.gather(z)
    u = state.u + gamma * x - z_new_e + (1.0 - gamma) * z_old_e
    n = z_new_e - u

    if not (np.all(np.isfinite(n)) and np.all(np.isfinite(z))):
        raise NonFiniteState(f"non-finite state after step {state.t + 1}")
    return AdmmState(x=x, m=m, n=n, u=u, z=z, s=z_new_e, t=state.t + 1)


def admm_matrix_step(n: np.ndarray, ops: FactorOperators) -> np.ndarray:
    n = np.asarray(n)
    if n.shape != (ops.dim,):
        raise DimensionMismatch(f"expected length {ops.dim}, got {n.shape}")
    return ops.TA @ n


def gd_step(z: np.ndarray, g: Graph, alpha: float) -> np.ndarray:
    """``z - alpha L z`` with ``(L z)_k = d_k z_k - sum_{j ~ k} z_j``."""
    if alpha < 0:
        raise ParameterOutOfRange(f"step size must be >= 0, got {alpha}")
    z = np.asarray(z, dtype=float)
    if z.shape != (g.n_vertices,):
        raise DimensionMismatch(f"expected length {g.n_vertices}, got {z.shape}")
    e = g.edge_array()
    nbr_sum = np.bincount(e[:, 0], weights=z[e[:, 1]], minlength=g.n_vertices)
    nbr_sum += np.bincount(e[:, 1], weights=z[e[:, 0]], minlength=g.n_vertices)
    lz = np.asarray(g.degrees, dtype=float) * z - nbr_sum
    return z - alpha * lz


# -- rate estimation ---------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryStats:
    residual_history: np.ndarray
    fitted_rate: float
    fit_window: tuple[int, int]
    fixed_point: np.ndarray
    r_squared: float

    def to_rows(self):
        for t, r in enumerate(self.residual_history):
            yield t, float(r), float(np.log(r)) if r > 0 else float("-inf")


def run(step: Callable[[np.ndarray], np.ndarray], init, iters: int) -> list[np.ndarray]:
    xs = [np.asarray(init, dtype=float)]
    for _ in range(iters):
        xs.append(step(xs[-1]))
    return xs


def _lstsq(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return coef, float(np.sum((y - X @ coef) ** 2))


def beat_peaks(y: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Interior local maxima of ``y`` after removing its least-squares fit on ``X``.

    A complex pair makes the log residual beat around its trend; the peaks of
    the beat trace the envelope that carries the true modulus.
    """
    coef, _ = _lstsq(X, y)
    z = y - X @ coef
    return np.flatnonzero((z[1:-1] >= z[:-2]) & (z[1:-1] > z[2:])) + 1


def fit_rate(residuals: np.ndarray, start: int, jordan_aware: bool = True) -> tuple[float, float]:
    """Per-step contraction factor from a residual segment beginning at ``start``.

    The log residual is regressed on ``[1, t]``. With ``jordan_aware`` a
    ``log t`` column may be added to absorb the polynomial prefactor of a
    defective eigenvalue; it is kept only when it wins on BIC by a clear
    margin. If the detrended series beats, the regression is refitted on
    the beat peaks alone, since a plain fit over a partial beat is biased.
    Returns ``(rate, r_squared)`` with ``r_squared`` taken over every point.
    """
    y = np.log(np.asarray(residuals, dtype=float))
    t = np.arange(y.size, dtype=float) + max(start, 1)
    X = np.column_stack([np.ones_like(t), t])
    coef, ssr = _lstsq(X, y)
    if jordan_aware and y.size > 3:
        X3 = np.column_stack([X, np.log(t)])
        coef3, ssr3 = _lstsq(X3, y)
        k = y.size
        bic2 = k * np.log(max(ssr, 1e-300) / k) + 2 * np.log(k)
        bic3 = k * np.log(max(ssr3, 1e-300) / k) + 3 * np.log(k)
        if bic2 - bic3 > JORDAN_BIC_MARGIN:
            X, coef = X3, coef3
    peaks = beat_peaks(y, X)
    if peaks.size >= max(2, X.shape[1]):
        coef, _ = _lstsq(X[peaks], y[peaks])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum((y - X @ coef) ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(np.exp(coef[1])), r2


def measure_rate(step: Callable[[np.ndarray], np.ndarray], init, fixed_point=None,
                 burn_in: int = 10, window: int = 50, jordan_aware: bool = True,
                 min_r2: float = 0.99) -> TrajectoryStats:
    """Empirical asymptotic rate of ``x <- step(x)`` started at ``init``.

    Parameters
    ----------
    step : callable
        One iteration of the algorithm.
    init : array_like
        Starting vector.
    fixed_point : array_like or None
        Limit of the iteration; if ``None`` it is taken as the iterate after
        ``10 * (burn_in + window)`` steps.
    burn_in, window : int
        Residuals ``burn_in .. burn_in + window`` enter the fit. The window is
        cut short once residuals fall below ``1e3 * eps`` of the problem scale.

    Raises
    ------
    Diverged
        Residual grows tenfold across the window or becomes non-finite.
    WindowTooNoisy
        Fit R^2 below ``min_r2``, or too few usable points.
    """
    if window < 50:
        raise ParameterOutOfRange(f"window must be >= 50, got {window}")
    horizon = burn_in + window
    if fixed_point is None:
        xs = run(step, init, 10 * horizon)
        ref = xs[-1]
        xs = xs[: horizon + 1]
    else:
        ref = np.asarray(fixed_point, dtype=float)
        xs = run(step, init, horizon)
    if not np.all(np.isfinite(ref)):
        raise Diverged("iteration produced non-finite values")
    residuals = np.array([np.linalg.norm(x - ref) for x in xs])
    if not np.all(np.isfinite(residuals)):
        raise Diverged("iteration produced non-finite values")

    seg = residuals[burn_in: horizon + 1]
    if seg[-1] > 10.0 * seg[0] and seg[0] > 0:
        raise Diverged(f"residual grew from {seg[0]:.3e} to {seg[-1]:.3e}")
    floor = 1e3 * EPS * max(1.0, float(np.linalg.norm(ref)), float(np.linalg.norm(xs[0])))
    below = np.flatnonzero(seg < floor)
    usable = int(below[0]) if below.size else seg.size
    if usable < MIN_FIT_POINTS:
        raise WindowTooNoisy(
            f"only {usable} residuals above the round-off floor after burn-in {burn_in}"
        )
    rate, r2 = fit_rate(seg[:usable], burn_in, jordan_aware=jordan_aware)
    if r2 < min_r2:
        raise WindowTooNoisy(f"log-residual fit R^2 = {r2:.4f} < {min_r2}")
    return TrajectoryStats(residuals, rate, (burn_in, usable), ref, r2)


def suggested_burn_in(rate: float, decades: float = 3.0, minimum: int = 10) -> int:
    """Steps for a mode of modulus ``rate`` to shrink by ``10**decades``.

    Long enough for faster, possibly defective, modes to die out before the fit.
    """
    if not 0.0 < rate < 1.0:
        return minimum
    return max(minimum, int(math.ceil(decades * math.log(10.0) / -math.log(rate))))


def mean_fixed_point(init) -> np.ndarray:
    """Limit of ``n <- T_A n`` and of gradient descent from ``init``.

    Both iterations fix ``1`` and preserve the plain sum, so the limit is the
    mean of the start. Using it avoids the round-off drift of a long run.
    """
    init = np.asarray(init, dtype=float)
    return np.full(init.shape, init.mean())


def random_init(n: int, seed: int = 42) -> np.ndarray:
    """Seeded i.i.d. uniform [-1, 1] vertex values."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, n)


def random_u0(fg: FactorGraph, seed: int = 42) -> np.ndarray:
    """Seeded dual start with zero per-node sums (keeps the reduction exact).

    Unlike ``u0 = 0`` it excites the cycle-space eigenvectors of ``T_A``.
    """
    r = np.random.default_rng(seed).uniform(-1.0, 1.0, fg.n_fg_edges)
    return r - fg.gather(fg.average(r))


def admm_n_step(fg: FactorGraph, rho: float, gamma: float):
    """Message-passing step viewed through the edge-space vector ``n``.

    On the invariant subspace (``s = B n``, ``u = s - n``) the whole state is a
    function of ``n``, so the step is rebuilt from ``n`` alone and stays pure.
    """

    def step(n):
        n = np.asarray(n, dtype=float)
        z = fg.average(n)
        s = fg.gather(z)
        state = AdmmState(x=np.zeros_like(n), m=np.zeros_like(n), n=n, u=s - n, z=z, s=s)
        return admm_message_step(state, fg, rho, gamma).n

    return step


def consensus_value(fg: FactorGraph, z0, rho: float, gamma: float, tol: float = 1e-13,
                    max_iters: int = 100_000) -> np.ndarray:
    """Limit of ``z`` under message passing from ``n0 = S z0``, ``u0 = 0``."""
    state = initial_state(fg, z0)
    for _ in range(max_iters):
        new = admm_message_step(state, fg, rho, gamma)
        if np.max(np.abs(new.z - state.z)) <= tol * max(1.0, np.max(np.abs(new.z))):
            return new.z
        state = new
    raise Diverged(f"z did not settle within {max_iters} iterations")


def trajectory(fg: FactorGraph, z0, rho: float, gamma: float, steps: int) -> list[AdmmState]:
    states = [initial_state(fg, z0)]
    for _ in range(steps):
        states.append(admm_message_step(states[-1], fg, rho, gamma))
    return states
