"""Command-line front end: ``admmtopo <command> [options]``.

Exit codes: 0 ok, 1 input error, 2 unsupported regime, 3 verification deviation.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import io
from .analysis import cheeger_check, cycle_family_sweep, laplacian_bound_check, speedup_certificate
from .errors import AdmmTopoError, Diverged, WindowTooNoisy
from .graph import Graph, TooLargeForExactConductance, classify, complete, cycle, from_spec, house
from .iterate import (admm_n_step, gd_step, mean_fixed_point, measure_rate, random_init,
                      random_u0, suggested_burn_in)
from .operators import build_factor_graph, build_operators, _check_params
from .spectral import (ONE_MINUS_GAMMA, predict_ta_spectrum, reachable_rate, second_largest_ta,
                       walk_spectrum)
from .tuning import (Regime, tune, tune_admm_even_cycle, tune_admm_no_even_cycle, tune_gd,
                     upper_bound)

EXIT_OK, EXIT_INPUT, EXIT_UNSUPPORTED, EXIT_DEVIATION = 0, 1, 2, 3
DEVIATION_LIMIT = 0.05
TABLE1_D = ((math.sqrt(97) - 1) / 12, -(math.sqrt(97) + 1) / 12)
TABLE1_B_OMEGA = 1 / 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    graph: str | None = None
    rho: float | None = None
    gamma: float | None = None
    rho_range: tuple[float, float, float] = (0.01, 2.0, 0.01)
    gammas: list[float] = field(default_factory=list)
    iters: int = 200
    seed: int = 42
    out: str | None = None
    format: str | None = None
    method: str = "admm"
    alpha: float | None = None
    n_list: list[int] = field(default_factory=lambda: [8, 16, 32, 64, 128])
    conductance: Fraction | None = None
    dump_operator: str | None = None
    excite_all: bool = False

    def __post_init__(self):
        lo, hi, step = self.rho_range
        if not (lo > 0 and hi >= lo and step > 0):
            raise InputError(
                f"rho range must satisfy 0 < a <= b and step > 0, got {self.rho_range}")
        if self.rho is not None and not self.rho > 0:
            raise InputError(f"--rho must be > 0, got {self.rho}")
        for g in ([self.gamma] if self.gamma is not None else []) + list(self.gammas):
            if not 0 < g < 2:
                raise InputError(f"gamma must lie in (0, 2), got {g}")
        if self.iters < 50:
            raise InputError(f"--iters must be >= 50, got {self.iters}")


def thread_count() -> int:
    raw = os.environ.get("ADMM_TOPO_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"ADMM_TOPO_THREADS must be an integer, got {raw!r}") from None


def pmap(fn, items):
    """Parallel map with results in input order."""
    items = list(items)
    with ThreadPoolExecutor(max_workers=thread_count()) as ex:
        return list(ex.map(fn, items))


def _load(cfg: RunConfig) -> Graph:
    if not cfg.graph:
        raise InputError("--graph is required")
    return from_spec(cfg.graph, seed=cfg.seed)


def _classify(g: Graph, cfg: RunConfig):
    try:
        return classify(g, conductance_override=cfg.conductance)
    except TooLargeForExactConductance as exc:
        raise InputError(f"{exc} (use --conductance)") from exc


def _rho_grid(cfg: RunConfig) -> np.ndarray:
    lo, hi, step = cfg.rho_range
    k = int(math.floor((hi - lo) / step + 1e-9))
    return lo + step * np.arange(k + 1)


# -- commands ----------------------------------------------------------------------

def cmd_analyze(cfg: RunConfig) -> int:
    g = _load(cfg)
    topo = _classify(g, cfg)
    report = walk_spectrum(g)
    tuning = tune(g, topo, report)
    gd = tune_gd(report)
    doc = {
        "graph": {"source": cfg.graph, "n_vertices": g.n_vertices, "n_edges": g.n_edges,
                  "degrees": list(g.degrees)},
        "topology": {
            "has_even_cycle": topo.has_even_cycle,
            "conductance": float(topo.conductance),
            "conductance_exact": str(topo.conductance),
            "low_conductance": topo.low_conductance,
            "delta_ratio": topo.delta_ratio,
            "one_minus_gamma_multiplicity": topo.one_minus_gamma_multiplicity,
        },
        "spectral": report.to_dict(),
        "tuning": tuning.to_dict(),
        "upper_bound": _upper_bound_dict(report.omega_star),
        "gd": {"alpha_star": gd.alpha_star, "tau_g_star": gd.tau_g_star},
        "certificate": speedup_certificate(g, topo, report).to_dict(),
        "checks": {w.name: {"ok": w.ok, "slack": w.slack}
                   for w in laplacian_bound_check(report, g) + cheeger_check(topo, report)},
    }
    io.write_json(doc, cfg.out)
    return EXIT_UNSUPPORTED if tuning.regime is Regime.UNSUPPORTED else EXIT_OK


def _upper_bound_dict(omega_star: float):
    ub = upper_bound(omega_star)
    if ub is None:
        return None
    return {"rho": ub.rho_star, "gamma": ub.gamma_star, "tau": ub.tau_star}


def table1_rows() -> list[dict]:
    """The four rows: (a) C6, (b) house, (c) K4 from topology, (d) from stored inputs."""
    rows = []
    for label, name, g in (("a", "cycle:6", cycle(6)), ("b", "house", house()),
                           ("c", "complete:4", complete(4))):
        topo = classify(g)
        report = walk_spectrum(g)
        t = tune(g, topo, report)
        source = "graph"
        if label == "b" and not (topo.conductance == Fraction(1, 2)
                                 and abs(report.omega_star - TABLE1_B_OMEGA) < 1e-12):
            t = tune_admm_even_cycle(TABLE1_B_OMEGA)
            source = "formula"
        rows.append({"row": label, "graph": name, "source": source,
                     "phi": float(topo.conductance), "omega_star": report.omega_star,
                     "omega_bar": report.omega_bar, "regime": t.regime.value,
                     "rho_star": t.rho_star, "gamma_star": t.gamma_star, "tau_star": t.tau_star})
    w_star, w_bar = TABLE1_D
    t = tune_admm_no_even_cycle(w_star, w_bar)
    rows.append({"row": "d", "graph": None, "source": "formula", "phi": None,
                 "omega_star": w_star, "omega_bar": w_bar, "regime": t.regime.value,
                 "rho_star": t.rho_star, "gamma_star": t.gamma_star, "tau_star": t.tau_star})
    return rows


def _d3(x) -> str:
    return "-" if x is None else f"{x:.3f}"


def cmd_table1(cfg: RunConfig) -> int:
    rows = table1_rows()
    fmt = cfg.format or "text"
    cols = ("row", "graph", "source", "phi", "omega_star", "rho_star", "gamma_star", "tau_star")
    if fmt == "json":
        io.write_json(rows, cfg.out)
    elif fmt == "csv":
        io.emit(io.csv_text(cols, ([r[c] if r[c] is not None else "" for c in cols]
                                   for r in rows)), cfg.out)
    else:
        lines = [f"{'row':<4}{'graph':<12}{'source':<9}{'Phi':>7}{'w*':>8}{'rho*':>8}"
                 f"{'gamma*':>8}{'tau*':>8}"]
        for r in rows:
            lines.append(f"({r['row']}) {r['graph'] or '-':<12}{r['source']:<9}"
                         f"{_d3(r['phi']):>7}{_d3(r['omega_star']):>8}{_d3(r['rho_star']):>8}"
                         f"{_d3(r['gamma_star']):>8}{_d3(r['tau_star']):>8}")
        io.emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    g = _load(cfg)
    topo = _classify(g, cfg)
    report = walk_spectrum(g)
    tuning = tune(g, topo, report)
    gammas = cfg.gammas or ([tuning.gamma_star] if tuning.gamma_star is not None else [1.0])
    rhos = _rho_grid(cfg)
    for gm in gammas:
        _check_params(float(rhos[0]), gm)

    def curve(gm):
        return [second_largest_ta(report, float(r), gm)[0] for r in rhos]

    curves = pmap(curve, gammas)
    ref = tuning.tau_star
    rows = [(gm, float(r), v, ref if ref is not None else "")
            for gm, vals in zip(gammas, curves) for r, v in zip(rhos, vals)]
    pre = {"command": "sweep", "graph": cfg.graph, "regime": tuning.regime.value,
           "rho_star": tuning.rho_star, "gamma_star": tuning.gamma_star, "tau_star": ref,
           "is_upper_bound_only": tuning.is_upper_bound_only}
    io.emit(io.csv_text(io.LAMBDA2_HEADER, rows, preamble=pre), cfg.out)
    return EXIT_UNSUPPORTED if tuning.regime is Regime.UNSUPPORTED else EXIT_OK


def _params(cfg: RunConfig, g: Graph):
    if cfg.rho is not None and cfg.gamma is not None:
        return cfg.rho, cfg.gamma
    topo = _classify(g, cfg)
    t = tune(g, topo, walk_spectrum(g))
    if t.rho_star is None:
        raise InputError("no tuned parameters for this graph; pass --rho and --gamma")
    return (cfg.rho if cfg.rho is not None else t.rho_star,
            cfg.gamma if cfg.gamma is not None else t.gamma_star)


def cmd_spectrum(cfg: RunConfig) -> int:
    g = _load(cfg)
    rho, gamma = _params(cfg, g)
    report = walk_spectrum(g)
    ts = predict_ta_spectrum(report, rho, gamma)
    tau, _ = second_largest_ta(report, rho, gamma, spectrum=ts)
    mod = np.abs(ts.eigs)
    is_l2 = np.abs(mod - tau) <= 1e-12
    is_l2[0] = False
    is_omg = np.array([b == ONE_MINUS_GAMMA for b in ts.branches])
    on_c = ts.on_circle()
    if cfg.dump_operator:
        name, _, path = cfg.dump_operator.partition(":")
        ops = build_operators(build_factor_graph(g), rho, gamma)
        if not hasattr(ops, name) or not isinstance(getattr(ops, name), np.ndarray):
            raise InputError(f"unknown operator {name!r}")
        io.emit(io.matrix_csv(getattr(ops, name)), path or None)
    fmt = cfg.format or "csv"
    if fmt == "svg":
        io.emit(io.spectrum_svg(ts.eigs, ts.circle_center, ts.circle_radius, is_l2, is_omg),
                cfg.out)
    elif fmt == "json":
        doc = ts.to_dict()
        doc["lambda2_abs"] = tau
        io.write_json(doc, cfg.out)
    else:
        rows = [(float(z.real), float(z.imag), b, "" if np.isnan(s) else float(s), c, l2, om)
                for z, b, s, c, l2, om in zip(ts.eigs, ts.branches, ts.walk_source, on_c,
                                               is_l2, is_omg)]
        pre = {"command": "spectrum", "graph": cfg.graph, "rho": rho, "gamma": gamma,
               "circle_center": ts.circle_center, "circle_radius": ts.circle_radius,
               "lambda2_abs": tau}
        io.emit(io.csv_text(io.SPECTRUM_HEADER, rows, preamble=pre), cfg.out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    """Fit empirical rates and compare them with the spectral prediction.

    From ``u0 = 0`` the cycle-space modes of ``T_A`` stay silent, so the
    deviation is measured against the largest rate that initialization can
    excite. ``--excite-all`` adds a zero-sum dual start that reaches every mode.
    """
    g = _load(cfg)
    z0 = random_init(g.n_vertices, cfg.seed)
    report = walk_spectrum(g)
    extra = {}
    if cfg.method == "gd":
        gd = tune_gd(report)
        alpha = cfg.alpha if cfg.alpha is not None else gd.alpha_star
        predicted = target = max(abs(1 - alpha * report.ell_bar), abs(1 - alpha * report.ell_star))
        runs = {"gd": measure_rate(lambda z: gd_step(z, g, alpha), z0, mean_fixed_point(z0),
                                   burn_in=suggested_burn_in(target), window=cfg.iters)}
        params = {"alpha": alpha}
    else:
        rho, gamma = _params(cfg, g)
        fg = build_factor_graph(g)
        ops = build_operators(fg, rho, gamma)
        n0 = fg.gather(z0)
        if cfg.excite_all:
            n0 = n0 - random_u0(fg, cfg.seed)
        spectrum = predict_ta_spectrum(report, rho, gamma)
        predicted = second_largest_ta(report, rho, gamma, spectrum=spectrum)[0]
        reachable = reachable_rate(report, rho, gamma, spectrum=spectrum)
        target = predicted if cfg.excite_all else reachable
        burn_in = suggested_burn_in(target)
        limit = mean_fixed_point(n0)
        runs = {
            "message_passing": measure_rate(admm_n_step(fg, rho, gamma), n0, limit,
                                            burn_in=burn_in, window=cfg.iters),
            "matrix": measure_rate(lambda v: ops.TA @ v, n0, limit, burn_in=burn_in,
                                   window=cfg.iters),
        }
        params = {"rho": rho, "gamma": gamma, "excite_all": cfg.excite_all}
        extra = {"predicted_reachable": reachable, "target": target}
    deviation = max(abs(s.fitted_rate - target) / target if target > 0 else
                    abs(s.fitted_rate) for s in runs.values())
    header = {"command": "simulate", "graph": cfg.graph, "method": cfg.method,
              "seed": cfg.seed, "iters": cfg.iters, **params}
    if (cfg.format or "json") == "csv":
        first = next(iter(runs.values()))
        io.emit(io.csv_text(io.TRAJECTORY_HEADER, first.to_rows(), preamble=header), cfg.out)
    else:
        doc = {**header, "predicted": predicted, **extra, "relative_deviation": deviation,
               "runs": {k: {"fitted_rate": s.fitted_rate, "r_squared": s.r_squared,
                            "fit_window": list(s.fit_window)} for k, s in runs.items()}}
        io.write_json(doc, cfg.out)
    verdict = "ok" if deviation <= DEVIATION_LIMIT else "DEVIATION"
    print(f"predicted {predicted:.6f} target {target:.6f} " + " ".join(
        f"{k} {s.fitted_rate:.6f}" for k, s in runs.items()) + f" deviation {deviation:.2%} {verdict}",
        file=sys.stderr)
    return EXIT_OK if deviation <= DEVIATION_LIMIT else EXIT_DEVIATION


def cmd_speedup(cfg: RunConfig) -> int:
    rows = cycle_family_sweep(cfg.n_list)
    io.emit(io.csv_text(io.SWEEP_HEADER, ((r.n, r.delta, r.tau_a, r.tau_g, r.ratio, r.bound_ok)
                                          for r in rows)), cfg.out)
    sandwich = all(r.bound_ok for r in rows)
    ratios = [r.ratio for r in rows]
    monotone = all(a < b for a, b in zip(ratios, ratios[1:]))
    print(f"sandwich {'pass' if sandwich else 'FAIL'}; ratios increasing "
          f"{'pass' if monotone else 'FAIL'}; ratio at n={rows[-1].n}: {ratios[-1]:.4f}",
          file=sys.stderr)
    return EXIT_OK if sandwich else EXIT_DEVIATION


COMMANDS = {
    "analyze": cmd_analyze,
    "table1": cmd_table1,
    "sweep": cmd_sweep,
    "spectrum": cmd_spectrum,
    "simulate": cmd_simulate,
    "speedup": cmd_speedup,
}


# -- argument parsing ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _range(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected a:b:step")
    return tuple(float(p) for p in parts)


def _floats(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> list[int]:
    return [int(p) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="admmtopo", description="Spectral tuning of over-relaxed ADMM for consensus")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, graph=True):
        if graph:
            sp.add_argument("--graph", help="cycle:6, complete:4, er:10:0.4[:seed], house, or a path")
            sp.add_argument("--conductance", type=Fraction,
                            help="conductance override for graphs too large to search")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("json", "csv", "svg", "text"))

    common(sub.add_parser("analyze", help="spectra, regime, tuning and certificate as JSON"))
    common(sub.add_parser("table1", help="the four-row tuning table"), graph=False)

    sp = sub.add_parser("sweep", help="|lambda_2| versus rho for several gammas")
    common(sp)
    sp.add_argument("--gammas", type=_floats, default=[])
    sp.add_argument("--rho-range", type=_range, default=(0.01, 2.0, 0.01))

    sp = sub.add_parser("spectrum", help="predicted eigenvalues of the ADMM operator")
    common(sp)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--dump-operator", metavar="NAME[:PATH]",
                    help="also write a dense operator (e.g. TA) as CSV")

    sp = sub.add_parser("simulate", help="fit empirical rates and compare to the prediction")
    common(sp)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--iters", type=int, default=200)
    sp.add_argument("--method", choices=("admm", "gd"), default="admm")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--excite-all", action="store_true",
                    help="add a zero-sum dual start so every ADMM mode is excited")

    sp = sub.add_parser("speedup", help="ADMM versus GD along even cycles")
    common(sp, graph=False)
    sp.add_argument("--n-list", type=_ints, default=[8, 16, 32, 64, 128])
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    keys = set(RunConfig.__dataclass_fields__)
    return RunConfig(**{k: v for k, v in vars(ns).items() if k in keys and v is not None})


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (Diverged, WindowTooNoisy) as exc:
        print(f"admmtopo: {exc}", file=sys.stderr)
        return EXIT_DEVIATION
    except (InputError, AdmmTopoError, OSError, ValueError) as exc:
        print(f"admmtopo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
