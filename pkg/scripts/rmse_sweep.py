"""Relative RMSE of the closed-form MLE and MoME against the normalized CRLB.

Usage: python3 scripts/rmse_sweep.py [--trials N] [--seed S]
"""

import argparse

from costvr.experiments import rmse_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    print(f"{'lam0L0':>6} {'ratio':>5} {'sqrtCRLB':>9} {'MLE lam':>8} {'MLE L':>8} {'MoME lam':>8} {'MoME L':>8}")
    for r in rmse_sweep(trials=a.trials, seed=a.seed):
        print(f"{r['rate0_L0']:6.0f} {r['ratio']:5.2f} {r['sqrt_crlb']:9.4f} {r['mle_rmse_lambda']:8.4f} "
              f"{r['mle_rmse_lbs']:8.4f} {r['mome_rmse_lambda']:8.4f} {r['mome_rmse_lbs']:8.4f}")


if __name__ == "__main__":
    main()
