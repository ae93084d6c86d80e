"""ADMM versus gradient descent: the square-root speedup sandwich, Laplacian
bounds and Cheeger checks, each reported with slack values."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction

from .graph import Graph, TopologyClass, classify, cycle
from .spectral import SpectralReport, walk_spectrum
from .tuning import Regime, TuningResult, tune, tune_gd

CONJECTURE_C = 0.5
SLACK_TOL = 1e-10


@dataclass(frozen=True)
class SpeedupCertificate:
    """Exact-formula comparison of optimal ADMM and GD rates on one graph.

    ``tau_a_star`` is the tuned ADMM rate; when the regime is not covered by a
    closed form it is the even-cycle upper bound and ``is_upper_bound_only`` is
    set. Fields are ``None`` when no ADMM value is available at all.
    """

    regime: str
    is_upper_bound_only: bool
    tau_a_star: float | None
    tau_g_star: float
    delta: float
    Delta: float
    lhs: float | None
    rhs_upper: float | None
    ratio: float | None
    upper_bound_ok: bool | None
    upper_slack: float | None
    reported_C: float
    conjecture_holds_numerically: bool | None
    conjecture_half_holds: bool | None
    conjecture_half_slack: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def certificate_from(tuning: TuningResult, report: SpectralReport,
                     Delta: float) -> SpeedupCertificate:
    gd = tune_gd(report)
    delta = report.spectral_gap
    gap_g = 1.0 - gd.tau_g_star
    reported_c = max(0.0, 1.0 - 2.0 * math.sqrt(2.0 * delta))
    tau_a = tuning.tau_star
    if tau_a is None:
        return SpeedupCertificate(tuning.regime.value, tuning.is_upper_bound_only, None,
                                  gd.tau_g_star, delta, Delta, None, None, None, None,
                                  None, reported_c, None, None, None)
    lhs = (1.0 - tau_a) ** 2
    rhs = 2.0 * Delta * gap_g
    half = 1.0 - tau_a - CONJECTURE_C * math.sqrt(gap_g)
    return SpeedupCertificate(
        regime=tuning.regime.value,
        is_upper_bound_only=tuning.is_upper_bound_only,
        tau_a_star=tau_a,
        tau_g_star=gd.tau_g_star,
        delta=delta,
        Delta=Delta,
        lhs=lhs,
        rhs_upper=rhs,
        ratio=lhs / gap_g,
        upper_bound_ok=lhs <= rhs + SLACK_TOL,
        upper_slack=rhs - lhs,
        reported_C=reported_c,
        conjecture_holds_numerically=1.0 - tau_a >= reported_c * math.sqrt(gap_g) - SLACK_TOL,
        conjecture_half_holds=half >= -SLACK_TOL,
        conjecture_half_slack=half,
    )


def speedup_certificate(g: Graph, topology: TopologyClass | None = None,
                        report: SpectralReport | None = None) -> SpeedupCertificate:
    topology = topology if topology is not None else classify(g)
    report = report if report is not None else walk_spectrum(g)
    return certificate_from(tune(g, topology, report), report, g.delta_ratio)


def in_even_cycle_regime(cert: SpeedupCertificate) -> bool:
    return cert.regime == Regime.EVEN_CYCLE_LOW_CONDUCTANCE.value


@dataclass(frozen=True)
class SweepRow:
    n: int
    delta: float
    tau_a: float
    tau_g: float
    ratio: float
    bound_ok: bool


def cycle_family_sweep(n_list) -> list[SweepRow]:
    """Certificates along even cycles; conductance is ``1/(n/2)`` in closed form."""
    rows = []
    for n in n_list:
        if n < 4 or n % 2:
            raise ValueError(f"cycle sizes must be even and >= 4, got {n}")
        g = cycle(n)
        topo = classify(g, conductance_override=Fraction(1, n // 2))
        cert = speedup_certificate(g, topo)
        rows.append(SweepRow(n, cert.delta, cert.tau_a_star, cert.tau_g_star, cert.ratio,
                             bool(cert.upper_bound_ok)))
    return rows


@dataclass(frozen=True)
class BoundWitness:
    name: str
    ok: bool
    slack: float


def _witness(name: str, slack: float) -> BoundWitness:
    return BoundWitness(name, slack >= -SLACK_TOL, float(slack))


def laplacian_bound_check(report: SpectralReport, g: Graph) -> list[BoundWitness]:
    """Index-wise degree sandwich between ``L`` and the normalized Laplacian,
    the range of the top Laplacian eigenvalue, and the GD rate corollaries."""
    out = []
    dmin, dmax = g.d_min, g.d_max
    for i, (lam, nlam) in enumerate(zip(report.lap_eigs, report.norm_lap_eigs)):
        out.append(_witness(f"dmin_norm_le_lap[{i}]", lam - dmin * nlam))
        out.append(_witness(f"lap_le_dmax_norm[{i}]", dmax * nlam - lam))
    top = report.ell_bar
    out.append(_witness("dmax_le_ell_bar", top - dmax))
    out.append(_witness("ell_bar_le_2dmax", 2 * dmax - top))
    tau_g = tune_gd(report).tau_g_star
    delta, Delta = report.spectral_gap, g.delta_ratio
    out.append(_witness("tau_g_lower", tau_g - (1 - delta) / (1 + delta)))
    out.append(_witness("tau_g_upper", (2 * Delta - delta) / (2 * Delta + delta) - tau_g))
    return out


def cheeger_check(topology: TopologyClass, report: SpectralReport) -> list[BoundWitness]:
    phi = float(topology.conductance)
    w = report.omega_star
    return [
        _witness("cheeger_lower", w - (1.0 - 2.0 * phi)),
        _witness("cheeger_upper", 1.0 - 0.5 * phi * phi - w),
    ]
