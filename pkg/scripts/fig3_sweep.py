"""|lambda_2(T_A)| against rho for a few relaxation values on C6 and K4.

Writes one CSV per graph to the output directory (default: current dir).
"""

import argparse
from pathlib import Path

import numpy as np

from admmtopo import classify, generate, second_largest_ta, tune, tune_admm_even_cycle, walk_spectrum
from admmtopo.io import LAMBDA2_HEADER, csv_text


def sweep(g, gammas, rhos):
    report = walk_spectrum(g)
    t = tune(g, classify(g), report)
    rows = []
    for gm in gammas:
        vals = [second_largest_ta(report, float(r), gm)[0] for r in rhos]
        k = int(np.argmin(vals))
        print(f"  gamma={gm:.4f}: min {vals[k]:.4f} at rho={rhos[k]:.2f} (tau*={t.tau_star:.4f})")
        rows += [(gm, float(r), v, t.tau_star) for r, v in zip(rhos, vals)]
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default=".")
    args = ap.parse_args()
    out = Path(args.out_dir)
    rhos = np.round(np.arange(1, 201) * 0.01, 10)
    c6_gamma = tune_admm_even_cycle(0.5).gamma_star
    cases = {
        "C6": (generate("cycle", 6), [1.3, c6_gamma, 1.6]),
        "K4": (generate("complete", 4), [1.2, 4 / 3, 1.5]),
    }
    for name, (g, gammas) in cases.items():
        print(name)
        (out / f"lambda2_{name}.csv").write_text(csv_text(LAMBDA2_HEADER, sweep(g, gammas, rhos)))


if __name__ == "__main__":
    main()
