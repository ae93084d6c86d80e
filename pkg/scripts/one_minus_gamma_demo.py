"""Where the eigenvalue 1 - gamma appears, and what the tuned rate is worth.

For each graph: even-cycle detector, multiplicity of 1 - gamma in the operator
spectrum (numerically witnessed), tuned rate, and a brute-force minimum of
|lambda_2| over (rho, gamma) for comparison.
"""

import numpy as np
from scipy.optimize import minimize

from admmtopo import (build_factor_graph, build_operators, classify, generate, second_largest_ta,
                      tune, walk_spectrum)
from admmtopo.spectral import eigenvalue_threshold, verify_eigenvalue


def brute_force(report):
    best = (np.inf, None)
    for r in np.linspace(0.05, 3.0, 60):
        for gm in np.linspace(0.05, 1.95, 39):
            v = second_largest_ta(report, r, gm)[0]
            if v < best[0]:
                best = (v, (r, gm))

    def f(p):
        r, gm = p
        if r <= 0 or not 0 < gm < 2:
            return np.inf
        return second_largest_ta(report, r, gm)[0]

    res = minimize(f, best[1], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
    return res.fun


def main():
    graphs = {
        "C6": generate("cycle", 6),
        "triangle": generate("cycle", 3),
        "paw": generate("paw"),
        "bowtie": generate("bowtie"),
        "house": generate("house"),
        "K4": generate("complete", 4),
        "petersen": generate("petersen"),
    }
    gamma = 1.5
    for name, g in graphs.items():
        topo = classify(g)
        report = walk_spectrum(g)
        ops = build_operators(build_factor_graph(g), 1.0, gamma)
        sigma = verify_eigenvalue(ops, 1 - gamma)
        present = sigma < eigenvalue_threshold(ops)
        t = tune(g, topo, report)
        tau = "-" if t.tau_star is None else f"{t.tau_star:.6f}"
        print(f"{name:<9} even_cycle={topo.has_even_cycle!s:<5} 1-gamma present={present!s:<5} "
              f"mult={topo.one_minus_gamma_multiplicity} regime={t.regime.value:<26} "
              f"tau*={tau} brute={brute_force(report):.6f}")


if __name__ == "__main__":
    main()
