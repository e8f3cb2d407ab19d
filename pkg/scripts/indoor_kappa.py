"""Median condition number of the indoor scenario with the gain function OFF and ON.

Usage: python3 scripts/indoor_kappa.py [--runs N] [--M 32] [--B 257] [--n-mpc 1000] [--spacing 0.5]
"""

import argparse

from costvr.experiments import indoor_kappa


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--M", type=int, default=32)
    p.add_argument("--B", type=int, default=65)
    p.add_argument("--n-mpc", type=int, default=1000)
    p.add_argument("--spacing", type=float, default=0.5)
    p.add_argument("--pattern", choices=("omni", "directive"), default="omni")
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    res = indoor_kappa(runs=a.runs, M=a.M, B=a.B, pattern=a.pattern, seed=a.seed, n_mpc=a.n_mpc,
                       user_spacing=a.spacing)
    print(f"N_MPC={res['n_mpc']}  median OFF {res['median_off']:.2f} dB  ON {res['median_on']:.2f} dB  "
          f"gap {res['gap']:.2f} dB  ({res['seconds']:.0f} s)")


if __name__ == "__main__":
    main()
