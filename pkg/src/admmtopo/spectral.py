"""Spectra of the graph operators and the closed-form spectrum of ``T_A``.

Every eigenvalue of the reduced ADMM operator is given in closed form from the
random-walk spectrum plus three structural multiplicities (``n``, ``m`` and
bipartiteness). No nonsymmetric eigensolver is used; :func:`verify_eigenvalue`
provides an independent numerical witness for any predicted value.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NoConvergence, NotSymmetric, ParameterOutOfRange
from .graph import Graph
from .operators import FactorOperators

BOUNDARY_TOL = 1e-9


# -- dense symmetric eigensolver ----------------------------------------------

def _round_robin(size: int):
    """Yield ``size - 1`` rounds of disjoint index pairs covering all pairs once."""
    players = list(range(size))
    half = size // 2
    for _ in range(size - 1):
        yield np.array(players[:half]), np.array(players[size - 1:half - 1:-1])
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(m, tol: float = 1e-12, max_sweeps: int = 100):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Uses the round-robin ordering so each round applies ``n/2`` disjoint
    rotations at once.

    Parameters
    ----------
    m : array_like, shape (n, n)
        Symmetric to ``1e-12`` relative to its Frobenius norm.
    tol : float
        Stop once the off-diagonal Frobenius norm is below ``tol * ||m||_F``.
    max_sweeps : int
        Raise :class:`NoConvergence` if not converged after this many sweeps.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, columns matching ``eigenvalues``
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(scale, 1.0):
        raise NotSymmetric("matrix is not symmetric to 1e-12")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n < 2 or scale == 0.0:
        return np.diag(a).copy(), v

    size = n + (n % 2)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            break
        for p, q in _round_robin(size):
            keep = (p < n) & (q < n)
            p, q = p[keep], q[keep]
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.hypot(t, 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off > tol * scale:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def symmetric_eigs(m) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, ascending."""
    return jacobi_eigh(m)[0]


# -- random-walk / Laplacian spectra ---------------------------------------------

@dataclass(frozen=True)
class SpectralReport:
    w_eigs: np.ndarray
    omega_star: float
    omega_bar: float
    spectral_gap: float
    lap_eigs: np.ndarray
    ell_star: float
    ell_bar: float
    norm_lap_eigs: np.ndarray
    n_vertices: int
    n_edges: int
    d_min: int
    d_max: int
    bipartite: bool

    def to_dict(self) -> dict:
        return {
            "w_eigs": self.w_eigs.tolist(),
            "omega_star": self.omega_star,
            "omega_bar": self.omega_bar,
            "spectral_gap": self.spectral_gap,
            "lap_eigs": self.lap_eigs.tolist(),
            "ell_star": self.ell_star,
            "ell_bar": self.ell_bar,
            "norm_lap_eigs": self.norm_lap_eigs.tolist(),
        }


def walk_spectrum(g: Graph) -> SpectralReport:
    """Spectra of ``W = D^-1 A``, ``L = D - A`` and the normalized Laplacian.

    ``W`` is handled through its symmetric similarity ``D^1/2 W D^-1/2 = I - 𝓛``.
    """
    adj = g.adjacency_matrix()
    d = np.asarray(g.degrees, dtype=float)
    inv_sqrt = 1.0 / np.sqrt(d)
    norm_lap = np.eye(g.n_vertices) - inv_sqrt[:, None] * adj * inv_sqrt[None, :]
    norm_lap_eigs = symmetric_eigs(norm_lap)
    w = np.clip(np.sort(1.0 - norm_lap_eigs), -1.0, 1.0)
    bipartite = g.is_bipartite()
    # exact values where the graph structure pins them
    w[-1] = 1.0
    if bipartite:
        w[0] = -1.0
    lap_eigs = symmetric_eigs(g.laplacian())
    above = w[w > -1.0 + BOUNDARY_TOL]
    return SpectralReport(
        w_eigs=w,
        omega_star=float(w[-2]),
        omega_bar=float(above[0]),
        spectral_gap=float(1.0 - w[-2]),
        lap_eigs=lap_eigs,
        ell_star=float(lap_eigs[1]),
        ell_bar=float(lap_eigs[-1]),
        norm_lap_eigs=norm_lap_eigs,
        n_vertices=g.n_vertices,
        n_edges=g.n_edges,
        d_min=g.d_min,
        d_max=g.d_max,
        bipartite=bipartite,
    )


# -- closed-form T_A spectrum ---------------------------------------------------

UNIT = "unit"
WALK = "walk"
ONE_MINUS_GAMMA = "one_minus_gamma"
CYCLE = "cycle"
BIPARTITE = "bipartite"


@dataclass(frozen=True)
class TaSpectrum:
    """Predicted eigenvalues of ``T_A`` with a branch label per eigenvalue.

    Branches: ``unit`` (the eigenvalue 1), ``walk`` (conjugate pairs from each
    interior walk eigenvalue), ``one_minus_gamma`` (``1 - gamma``), ``cycle``
    and ``bipartite`` (the other roots for walk eigenvalues +1 and -1).
    """

    eigs: np.ndarray
    branches: tuple[str, ...]
    walk_source: np.ndarray  # generating walk eigenvalue (nan for structural ones)
    rho: float
    gamma: float
    circle_center: float
    circle_radius: float

    def count(self, branch: str) -> int:
        return self.branches.count(branch)

    def on_circle(self, tol: float = 1e-9) -> np.ndarray:
        complex_ = np.abs(self.eigs.imag) > tol
        dist = np.abs(self.eigs - self.circle_center)
        return complex_ & (np.abs(dist - self.circle_radius) <= tol)

    def to_dict(self) -> dict:
        return {
            "ta_eigs": [[float(z.real), float(z.imag)] for z in self.eigs],
            "branches": list(self.branches),
            "params": {"rho": self.rho, "gamma": self.gamma},
            "circle_center": self.circle_center,
            "circle_radius": self.circle_radius,
        }


def ta_eigenvalue_pair(lam_w: float, rho: float, gamma: float) -> tuple[complex, complex]:
    """``(1 - g/2) + g/(2+rho) (lam ± i sqrt(1 - rho^2/4 - lam^2))``; real when the root is."""
    center = 1.0 - 0.5 * gamma
    scale = gamma / (2.0 + rho)
    disc = 1.0 - 0.25 * rho * rho - lam_w * lam_w
    # principal complex root: a negative discriminant makes i*sqrt real and negative
    root = 1j * np.sqrt(complex(disc))
    if disc < 0.0:
        root = complex(root.real, 0.0)
    return complex(center + scale * (lam_w + root)), complex(center + scale * (lam_w - root))


def circle_radius(rho: float, gamma: float) -> float:
    return 0.5 * gamma * np.sqrt((2.0 - rho) / (2.0 + rho)) if rho < 2.0 else 0.0


def predict_ta_spectrum(report: SpectralReport, rho: float, gamma: float) -> TaSpectrum:
    """All ``2|E|`` eigenvalues of ``T_A`` from the walk spectrum.

    Interior walk eigenvalues give conjugate pairs; the walk eigenvalue 1 gives
    the fixed point 1 and (once per independent cycle) the ``cycle`` root
    ``1 - g/2 + (g/2)(2-rho)/(2+rho)``; a bipartite graph's -1 gives the
    ``bipartite`` root ``1 - g/2 - (g/2)(2-rho)/(2+rho)``. The value ``1 - gamma``
    appears ``m - n + b`` times (``b = 1`` if bipartite).
    """
    if not rho > 0:
        raise ParameterOutOfRange(f"penalty rho must be > 0, got {rho}")
    if not 0 < gamma < 2:
        raise ParameterOutOfRange(f"relaxation gamma must lie in (0, 2), got {gamma}")
    n, m = report.n_vertices, report.n_edges
    b = 1 if report.bipartite else 0
    center = 1.0 - 0.5 * gamma
    shrink = (2.0 - rho) / (2.0 + rho)

    eigs: list[complex] = [1.0 + 0j]
    branches = [UNIT]
    sources = [1.0]
    interior = report.w_eigs[b:-1]
    for lam in interior:
        plus, minus = ta_eigenvalue_pair(float(lam), rho, gamma)
        eigs += [plus, minus]
        branches += [WALK, WALK]
        sources += [float(lam), float(lam)]
    structural = (
        (ONE_MINUS_GAMMA, 1.0 - gamma, m - n + b),
        (CYCLE, center + 0.5 * gamma * shrink, m - n + 1),
        (BIPARTITE, center - 0.5 * gamma * shrink, b),
    )
    for label, value, mult in structural:
        eigs += [complex(value)] * mult
        branches += [label] * mult
        sources += [np.nan] * mult
    assert len(eigs) == 2 * m
    return TaSpectrum(
        eigs=np.array(eigs, dtype=complex),
        branches=tuple(branches),
        walk_source=np.array(sources),
        rho=float(rho),
        gamma=float(gamma),
        circle_center=center,
        circle_radius=circle_radius(rho, gamma),
    )


def second_largest_ta(report: SpectralReport, rho: float, gamma: float,
                      spectrum: TaSpectrum | None = None) -> tuple[float, complex]:
    """``|lambda_2(T_A)|`` and an eigenvalue attaining it.

    Drops the single fixed-point eigenvalue 1. Among ties (within 1e-12) the
    one with the largest imaginary part is returned.
    """
    ts = spectrum if spectrum is not None else predict_ta_spectrum(report, rho, gamma)
    rest = ts.eigs[1:]  # index 0 is the unit branch
    if rest.size == 0:
        return 0.0, 0j
    mod = np.abs(rest)
    top = mod.max()
    tied = np.flatnonzero(mod >= top - 1e-12)
    pick = tied[np.argmax(rest[tied].imag)]
    return float(top), complex(rest[pick])


# Branches whose eigenvectors meet range(S): only these are excited by
# n0 = S z0 with u0 = 0. The others live in the cycle space of the graph.
REACHABLE_FROM_VERTEX_INIT = (WALK, BIPARTITE)


def reachable_rate(report: SpectralReport, rho: float, gamma: float,
                   spectrum: TaSpectrum | None = None) -> float:
    """Largest modulus, excluding the fixed point, among eigenvalues excited by a
    vertex-space initialization (``u0 = 0``, ``n0 = S z0``)."""
    ts = spectrum if spectrum is not None else predict_ta_spectrum(report, rho, gamma)
    mods = [abs(z) for z, b in zip(ts.eigs[1:], ts.branches[1:]) if b in REACHABLE_FROM_VERTEX_INIT]
    return float(max(mods, default=0.0))


def verify_eigenvalue(ops: FactorOperators, lam: complex, iters: int = 50,
                      seed: int = 0, rtol: float = 1e-12) -> float:
    """Estimate ``sigma_min(T_A - lam I)``.

    Inverse power iteration on ``M^H M`` using one complex LU factorization of
    ``M = T_A - lam I``. An exactly singular factorization returns 0.
    """
    M = ops.TA.astype(complex) - complex(lam) * np.eye(ops.dim)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    if np.any(np.diag(lu) == 0):
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(ops.dim) + 1j * rng.standard_normal(ops.dim)
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(iters):
        y = scipy.linalg.lu_solve((lu, piv), x, trans=2, check_finite=False)
        y = scipy.linalg.lu_solve((lu, piv), y, trans=0, check_finite=False)
        norm = np.linalg.norm(y)
        if not np.isfinite(norm) or norm == 0.0:
            return 0.0
        x = y / norm
        new = float(np.linalg.norm(M @ x))
        if abs(new - sigma) <= rtol * max(new, 1e-300):
            sigma = new
            break
        sigma = new
    return sigma


def eigenvalue_threshold(ops: FactorOperators, factor: float = 1e-8) -> float:
    return factor * float(np.linalg.norm(ops.TA, 2))
