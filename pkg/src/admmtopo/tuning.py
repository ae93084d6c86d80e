"""Closed-form optimal parameters for over-relaxed ADMM and gradient descent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import HypothesisViolated, OmegaOutOfRange
from .graph import Graph, TopologyClass
from .spectral import SpectralReport


# walk eigenvalues within this of zero are treated as zero
ZERO_TOL = 1e-12


class Regime(str, Enum):
    EVEN_CYCLE_LOW_CONDUCTANCE = "EvenCycleLowConductance"
    NO_EVEN_CYCLE_LOW_CONDUCTANCE = "NoEvenCycleLowConductance"
    EVEN_CYCLE_HIGH_CONDUCTANCE = "EvenCycleHighConductance"
    UNSUPPORTED = "Unsupported"


@dataclass(frozen=True)
class TuningResult:
    regime: Regime
    rho_star: float | None
    gamma_star: float | None
    tau_star: float | None
    omega_star: float | None = None
    omega_bar: float | None = None
    is_upper_bound_only: bool = False

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "rho_star": self.rho_star,
            "gamma_star": self.gamma_star,
            "tau_star": self.tau_star,
            "omega_star": self.omega_star,
            "omega_bar": self.omega_bar,
            "is_upper_bound_only": self.is_upper_bound_only,
        }


@dataclass(frozen=True)
class GdTuning:
    alpha_star: float
    tau_g_star: float


def optimal_rho(omega_star: float) -> float:
    """Penalty that makes the second walk eigenvalue's pair exactly real."""
    return 2.0 * math.sqrt(1.0 - omega_star * omega_star)


def _check_omega(omega_star: float, closed_low: bool = False) -> None:
    ok = (0.0 <= omega_star < 1.0) if closed_low else (0.0 < omega_star < 1.0)
    if not ok:
        raise OmegaOutOfRange(f"second walk eigenvalue must lie in (0, 1), got {omega_star}")


def _even_cycle_formulas(omega_star: float) -> tuple[float, float, float]:
    rho = optimal_rho(omega_star)
    gamma = 4.0 / (3.0 - math.sqrt((2.0 - rho) / (2.0 + rho)))
    return rho, gamma, gamma - 1.0


def tune_admm_even_cycle(omega_star: float) -> TuningResult:
    """Optimal ``(rho, gamma)`` when ``1 - gamma`` is an eigenvalue and conductance is low.

    ``rho* = 2 sqrt(1 - w*^2)``, ``gamma* = 4 / (3 - sqrt((2 - rho*)/(2 + rho*)))``
    and the optimal rate is ``gamma* - 1``.
    """
    _check_omega(omega_star)
    rho, gamma, tau = _even_cycle_formulas(omega_star)
    return TuningResult(Regime.EVEN_CYCLE_LOW_CONDUCTANCE, rho, gamma, tau, omega_star=omega_star)


def tune_admm_no_even_cycle(omega_star: float, omega_bar: float) -> TuningResult:
    """Optimal parameters without the ``1 - gamma`` eigenvalue.

    ``omega_bar`` is the smallest walk eigenvalue above -1 and must satisfy
    ``|omega_bar| >= omega_star``. Passing ``omega_bar = -1`` reproduces
    :func:`tune_admm_even_cycle`. At equality (every bipartite graph) the
    formula returns ``gamma = 2``, which is not an admissible parameter, so
    that case is rejected too.
    """
    _check_omega(omega_star)
    if not -1.0 <= omega_bar <= 0.0:
        raise OmegaOutOfRange(f"omega_bar must lie in [-1, 0], got {omega_bar}")
    if abs(omega_bar) < omega_star:
        raise HypothesisViolated(
            f"requires |omega_bar| >= omega_star, got {abs(omega_bar)} < {omega_star}"
        )
    rho = optimal_rho(omega_star)
    root = math.sqrt(1.0 - omega_star * omega_star)
    spread = (omega_star + omega_bar - math.sqrt(omega_bar**2 - omega_star**2)) / (1.0 + root)
    gamma = 4.0 / (2.0 - spread)
    if gamma >= 2.0:
        raise HypothesisViolated("|omega_bar| = omega_star puts the optimum at gamma = 2")
    tau = 1.0 - 0.5 * gamma * (1.0 - 2.0 * omega_star / (2.0 + rho))
    return TuningResult(Regime.NO_EVEN_CYCLE_LOW_CONDUCTANCE, rho, gamma, tau,
                        omega_star=omega_star, omega_bar=omega_bar)


def tune_admm_high_conductance_even_cycle() -> TuningResult:
    return TuningResult(Regime.EVEN_CYCLE_HIGH_CONDUCTANCE, 2.0, 4.0 / 3.0, 1.0 / 3.0)


def tune_gd(report: SpectralReport) -> GdTuning:
    lo, hi = report.ell_star, report.ell_bar
    return GdTuning(alpha_star=2.0 / (hi + lo), tau_g_star=(hi - lo) / (hi + lo))


def upper_bound(omega_star: float) -> TuningResult | None:
    """Even-cycle formula flagged as an upper bound on the optimal rate.

    Defined for ``omega_star`` in ``[0, 1)``; at 0 it gives ``(2, 4/3, 1/3)``.
    """
    if abs(omega_star) < ZERO_TOL:
        omega_star = 0.0
    if not 0.0 <= omega_star < 1.0:
        return None
    rho, gamma, tau = _even_cycle_formulas(omega_star)
    return TuningResult(Regime.UNSUPPORTED, rho, gamma, tau, omega_star=omega_star,
                        is_upper_bound_only=True)


def tune(g: Graph, topology: TopologyClass, report: SpectralReport) -> TuningResult:
    """Select the applicable closed form for this graph.

    Dispatches on whether ``1 - gamma`` belongs to the ADMM spectrum (see
    :attr:`TopologyClass.has_one_minus_gamma`), the conductance regime, and the
    range of the walk eigenvalues. With ``1 - gamma`` present, ``w* <= 0``
    gives the constants ``(2, 4/3, 1/3)`` and ``w*`` in ``(0, 1)`` the
    even-cycle formulas whatever the conductance. Anything else is
    ``Unsupported`` and carries the even-cycle value as an upper bound when it
    is defined.
    """
    w_star, w_bar = report.omega_star, report.omega_bar
    if abs(w_star) < ZERO_TOL:
        w_star = 0.0
    if topology.has_one_minus_gamma:
        if w_star <= 0.0:
            return tune_admm_high_conductance_even_cycle()
        if w_star < 1.0:
            res = tune_admm_even_cycle(w_star)
            if topology.low_conductance:
                return res
            # high conductance with w* > 0: the even-cycle optimum still holds,
            # the constant 1/3 is not attainable
            return TuningResult(Regime.EVEN_CYCLE_HIGH_CONDUCTANCE, res.rho_star,
                                res.gamma_star, res.tau_star, omega_star=w_star)
    elif (topology.low_conductance and 0.0 < w_star < 1.0 and w_bar <= 0.0
          and abs(w_bar) > w_star + ZERO_TOL):
        return tune_admm_no_even_cycle(w_star, w_bar)
    bound = upper_bound(w_star)
    if bound is None:
        return TuningResult(Regime.UNSUPPORTED, None, None, None, omega_star=w_star,
                            omega_bar=w_bar, is_upper_bound_only=True)
    return TuningResult(Regime.UNSUPPORTED, bound.rho_star, bound.gamma_star, bound.tau_star,
                        omega_star=w_star, omega_bar=w_bar, is_upper_bound_only=True)
