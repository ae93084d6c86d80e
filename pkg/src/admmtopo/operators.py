"""Factor graph and dense edge-space operators of the reduced ADMM iteration.

The factor graph attaches one function node to every edge ``a = (i, j)`` of the
base graph. Its edges are ordered ``2a -> (a, i)``, ``2a + 1 -> (a, j)``, so the
per-function-node swap ``R`` is block diagonal with 2x2 antidiagonal blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, ParameterOutOfRange
from .graph import Graph


@dataclass(frozen=True)
class FactorGraph:
    n_functions: int
    n_variables: int
    # fg_edges[e] = (function node, variable node)
    fg_edges: tuple[tuple[int, int], ...]
    degrees: tuple[int, ...]
    variable_of_edge: np.ndarray = field(repr=False, compare=False)

    @property
    def n_fg_edges(self) -> int:
        return len(self.fg_edges)

    def neighbors_of_function(self, a: int) -> tuple[int, int]:
        return self.fg_edges[2 * a][1], self.fg_edges[2 * a + 1][1]

    def neighbors_of_variable(self, b: int) -> list[int]:
        return [a for a, v in self.fg_edges if v == b]

    def gather(self, z: np.ndarray) -> np.ndarray:
        """Edge-space copy ``S z`` of a vertex-space vector."""
        return z[self.variable_of_edge]

    def average(self, y: np.ndarray) -> np.ndarray:
        """Per-variable-node mean of incoming edge values, ``D^-1 S^T y``."""
        sums = np.bincount(self.variable_of_edge, weights=y, minlength=self.n_variables)
        return sums / np.asarray(self.degrees, dtype=float)


def build_factor_graph(g: Graph) -> FactorGraph:
    fg_edges = []
    for a, (i, j) in enumerate(g.edges):
        fg_edges.append((a, i))
        fg_edges.append((a, j))
    var = np.array([b for _, b in fg_edges], dtype=np.intp)
    var.setflags(write=False)
    return FactorGraph(g.n_edges, g.n_vertices, tuple(fg_edges), g.degrees, var)


def _check_params(rho: float, gamma: float) -> None:
    if not (np.isfinite(rho) and rho > 0):
        raise ParameterOutOfRange(f"penalty rho must be > 0, got {rho}")
    if not (np.isfinite(gamma) and 0 < gamma < 2):
        raise ParameterOutOfRange(f"relaxation gamma must lie in (0, 2), got {gamma}")


def swap_pairs(v: np.ndarray) -> np.ndarray:
    """Apply ``R``: exchange the two entries owned by each function node."""
    return v.reshape(-1, 2)[:, ::-1].reshape(v.shape)


@dataclass(frozen=True)
class FactorOperators:
    """All dense operators for fixed ``(rho, gamma)``.

    ``TA`` is assembled from ``I - gamma (A + B - 2 B A)`` and ``TA_from_U`` from
    ``(1 - gamma/2) I + gamma/(rho + 2) U``; :meth:`identity_residuals` reports
    how far every algebraic identity between them is from holding.
    """

    fg: FactorGraph = field(repr=False)
    rho: float
    gamma: float
    S: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    Btilde: np.ndarray = field(repr=False)
    Omega: np.ndarray = field(repr=False)
    OmegaS: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    TA: np.ndarray = field(repr=False)
    TA_from_U: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.TA.shape[0]

    def U_inverse_closed_form(self) -> np.ndarray:
        eta = 1.0 - self.rho**2 / 4.0
        if eta == 0.0:
            raise ParameterOutOfRange("U is singular at rho = 2")
        return (self.Omega.T - 0.5 * self.rho * self.Btilde) / eta

    def identity_residuals(self) -> dict[str, float]:
        """Max-abs residual of each structural identity (all should be ~1e-15)."""
        I = np.eye(self.dim)
        D = np.diag(np.asarray(self.fg.degrees, dtype=float))
        res = {
            "S_one_per_row": float(np.max(np.abs(self.S.sum(axis=1) - 1.0))),
            "StS_is_degree": float(np.max(np.abs(self.S.T @ self.S - D))),
            "B_symmetric": float(np.max(np.abs(self.B - self.B.T))),
            "B_idempotent": float(np.max(np.abs(self.B @ self.B - self.B))),
            "R_symmetric": float(np.max(np.abs(self.R - self.R.T))),
            "R_involution": float(np.max(np.abs(self.R @ self.R - I))),
            "Btilde_involution": float(np.max(np.abs(self.Btilde @ self.Btilde - I))),
            "Omega_orthogonal": float(np.max(np.abs(self.Omega.T @ self.Omega - I))),
            "Omega_orthogonal_right": float(np.max(np.abs(self.Omega @ self.Omega.T - I))),
            "A_closed_form": float(np.max(np.abs(self.A @ (I + self.Q / self.rho) - I))),
            "TA_from_U": float(np.max(np.abs(self.TA - self.TA_from_U))),
        }
        eta = 1.0 - self.rho**2 / 4.0
        if abs(eta) > 1e-8:
            U_inv = self.U_inverse_closed_form()
            res["U_inverse"] = float(np.max(np.abs(self.U @ U_inv - I)))
            res["OmegaS_from_U"] = float(
                np.max(np.abs(self.OmegaS - 0.5 * (self.U + eta * U_inv)))
            )
        return res


def build_operators(fg: FactorGraph, rho: float, gamma: float) -> FactorOperators:
    _check_params(rho, gamma)
    E, n = fg.n_fg_edges, fg.n_variables
    I = np.eye(E)
    S = np.zeros((E, n))
    S[np.arange(E), fg.variable_of_edge] = 1.0
    R = np.zeros((E, E))
    idx = np.arange(0, E, 2)
    R[idx, idx + 1] = 1.0
    R[idx + 1, idx] = 1.0
    Q = I - R
    # S^T S is diagonal, so B = S D^-1 S^T needs no factorization
    B = (S / np.asarray(fg.degrees, dtype=float)[fg.variable_of_edge, None]) @ S.T
    Btilde = 2.0 * B - I
    Omega = Btilde @ R
    OmegaS = 0.5 * (Omega + Omega.T)
    A = ((rho + 1.0) * I + R) / (rho + 2.0)
    U = Omega + 0.5 * rho * Btilde
    TA = I - gamma * (A + B - 2.0 * B @ A)
    TA_from_U = (1.0 - 0.5 * gamma) * I + gamma / (rho + 2.0) * U
    return FactorOperators(fg, float(rho), float(gamma), S, Q, R, B, Btilde,
                           Omega, OmegaS, A, U, TA, TA_from_U)


def apply_ta(ops: FactorOperators, v: np.ndarray, dense: bool = False) -> np.ndarray:
    """``T_A v``; matrix-free by default (gather, per-node average, swap)."""
    v = np.asarray(v)
    if v.shape != (ops.dim,):
        raise DimensionMismatch(f"expected edge-space vector of length {ops.dim}, got {v.shape}")
    if dense:
        return ops.TA @ v
    return apply_ta_matrix_free(ops.fg, v, ops.rho, ops.gamma)


def apply_ta_matrix_free(fg: FactorGraph, v: np.ndarray, rho: float, gamma: float) -> np.ndarray:
    av = ((rho + 1.0) * v + swap_pairs(v)) / (rho + 2.0)
    # B y = S D^-1 S^T y
    bv = fg.gather(fg.average(v))
    bav = fg.gather(fg.average(av))
    return v - gamma * (av + bv - 2.0 * bav)
