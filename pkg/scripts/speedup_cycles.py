"""ADMM versus gradient descent on even cycles: (1 - tau_A)^2 / (1 - tau_G) as n grows."""

import argparse

from admmtopo.analysis import cycle_family_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", default="6,8,16,32,64,128,256")
    args = ap.parse_args()
    sizes = [int(x) for x in args.n.split(",")]
    print(f"{'n':>5} {'delta':>10} {'tau_A*':>8} {'tau_G*':>8} {'ratio':>7}  bound")
    for r in cycle_family_sweep(sizes):
        print(f"{r.n:>5} {r.delta:>10.6f} {r.tau_a:>8.5f} {r.tau_g:>8.5f} {r.ratio:>7.4f}  "
              f"{'ok' if r.bound_ok else 'FAIL'}")


if __name__ == "__main__":
    main()
