"""Batch experiments behind the figure commands.

Each ``*_experiment`` function is a pure function of its arguments and seed
and returns plain tables and summaries; :func:`run_figure` writes them to
disk with the config hash and seed stamped into every file.
"""

from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bsvr_process import (
    BsVrProcessParams,
    expected_count,
    exponential_params,
    generate_bsvrs,
    simulate_batch,
)
from .channel import (
    AntennaPattern,
    condition_number_db,
    indoor_scenario,
    outdoor_scenario,
    place_clusters,
    run_gap_experiment,
    synthesize_modes,
    twin_cluster_scenario,
)
from .config import config_hash
from .errors import CostVrError, InvalidParameterError
from .inference import SufficientStats, mle_exponential, mome, normalized_crlb
from .io import write_json, write_pmf, write_table
from .lifetimes import Exponential, LognormalDb, TruncatedLognormalDb
from .mpc_model import (
    DEFAULT_Y_GRID,
    fit_lifetimes,
    fit_lognormal_to_pmf,
    mixture_chord_cdf,
    observed_lifetime_cdf,
    solve_radius_weights,
)
from .stats import chi_square_gof, ecdf, poisson_cdf, poisson_fit

# Lifetime laws of the three MPC lifetime cases, on a 15 m route with 7.5 cm resolution.
LIFETIME_ROUTE = 15.0
LIFETIME_DELTA0 = 0.075
TABLE_II = {
    1: dict(rate=52.30, lifetime=Exponential(0.81)),
    2: dict(rate=171.60, lifetime=LognormalDb(-16.92, 94.60)),
    3: dict(rate=52.13, lifetime=TruncatedLognormalDb(-11.09, 89.91, LIFETIME_DELTA0, LIFETIME_ROUTE)),
}


def _child(seed, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *[int(k) for k in key]])


# ---------------------------------------------------------------------------
# BS-VR counts


@dataclass(frozen=True)
class CountValidation:
    mean: float
    pass_rate: float
    p_values: np.ndarray
    sample_mean: float
    seconds: float


def count_validation(rate=2.6, mean_lifetime=2.9, length=7.5, delta0=0.0, realizations=10_000,
                     batches=100, alpha=0.05, seed=0) -> CountValidation:
    """Chi-square test of simulated counts against the Poisson law, batch by batch."""
    t0 = time.perf_counter()
    params = exponential_params(rate, mean_lifetime, length, delta0)
    mean = expected_count(params)
    pv = np.empty(batches)
    tot = 0.0
    for i in range(batches):
        c = simulate_batch(params, realizations, seed=_child(seed, i))
        pv[i] = chi_square_gof(c.n, mean, alpha=alpha).p_value
        tot += float(c.n.mean())
    return CountValidation(mean, float(np.mean(pv >= alpha)), pv, tot / batches,
                           time.perf_counter() - t0)


def count_ecdfs(rate=2.6, mean_lifetime=2.9, length=7.5, delta0=0.23, samples=20, seed=0) -> dict:
    """Alive / new / total counts with their ECDFs and Poisson fits."""
    params = exponential_params(rate, mean_lifetime, length, delta0)
    c = simulate_batch(params, samples, seed=seed)
    lam0 = params.rate0
    y = params.lifetime
    expected = {
        "alive": params.rate * y.excess_mean(delta0),
        "new": lam0 * params.length0,
        "total": expected_count(params),
    }
    out = {}
    for name, data in (("alive", c.n_alive), ("new", c.n_new), ("total", c.n)):
        fit = poisson_fit(data)
        try:
            gof = dataclasses.asdict(chi_square_gof(data, None))
        except CostVrError as exc:
            gof = {"error": exc.code}
        out[name] = dict(counts=data, ecdf=ecdf(data), poisson_mean=fit,
                         expected_mean=expected[name], gof=gof)
    return out


# ---------------------------------------------------------------------------
# estimator accuracy


def rmse_sweep(rate0_L0=(5, 10, 15, 20, 25), ratios=(0.25, 0.5, 1.0, 2.0, 4.0), trials=10_000,
               seed=0, L0=10.0) -> list[dict]:
    """Relative RMSE of the MLE and MoME against the normalized CRLB.

    With ``delta0 = 0`` the window is ``L0``, the lifetime ``ratio * L0`` and
    the rate ``rate0_L0 / L0``. Trials whose estimate is undefined (for
    example an infinite lifetime) are counted per estimator and left out of
    that estimator's RMSE. Also reports mean censoring-class proportions.
    """
    rows = []
    for i, g in enumerate(rate0_L0):
        for j, r in enumerate(ratios):
            rate, lbs = float(g) / L0, float(r) * L0
            if not (rate > 0 and lbs > 0):
                raise InvalidParameterError("grid values must be positive")
            c = simulate_batch(exponential_params(rate, lbs, L0), trials, seed=_child(seed, i, j))
            est = {"mle": [], "mome": []}
            failed = {"mle": 0, "mome": 0}
            for k in range(len(c)):
                st = SufficientStats(int(c.n[k]), int(c.nu[k]), float(c.lambda0_sum[k]), L0, 0.0)
                for name, fn in (("mle", mle_exponential), ("mome", mome)):
                    try:
                        e = fn(st)
                    except CostVrError:
                        failed[name] += 1
                        continue
                    if not (math.isfinite(e.lbs_hat) and math.isfinite(e.lambda_hat)):
                        failed[name] += 1
                        continue
                    est[name].append((e.lambda_hat, e.lbs_hat))
            n = c.n.astype(float)
            with np.errstate(invalid="ignore", divide="ignore"):
                props = [float(np.nanmean(np.where(n > 0, x / n, np.nan))) for x in (c.n00, c.n01, c.n10, c.n11)]
            row = dict(rate0_L0=float(g), ratio=float(r), rate=rate, lbs=lbs, trials=int(trials),
                       sqrt_crlb=math.sqrt(normalized_crlb(float(g), float(r))))
            for name in ("mle", "mome"):
                e = np.array(est[name]).reshape(-1, 2)
                row[f"{name}_rmse_lambda"] = float(np.sqrt(np.mean((e[:, 0] / rate - 1) ** 2))) if e.size else math.nan
                row[f"{name}_rmse_lbs"] = float(np.sqrt(np.mean((e[:, 1] / lbs - 1) ** 2))) if e.size else math.nan
                row[f"{name}_failed"] = failed[name]
            row.update(p00=props[0], p01=props[1], p10=props[2], p11=props[3])
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# MPC lifetimes and radii


def resample_lifetimes(case: int, seed=0):
    law = TABLE_II[case]
    p = BsVrProcessParams(law["rate"], law["lifetime"], 0.0, LIFETIME_ROUTE, LIFETIME_DELTA0)
    return generate_bsvrs(p, seed=seed)


def lifetime_fit_experiment(data_case: int = 2, seed=0, cases=(1, 2, 3)) -> dict:
    """Fit every lifetime model to one synthetic route drawn from ``data_case``."""
    obs = resample_lifetimes(data_case, seed=seed)
    fits = {}
    for case in cases:
        fits[case] = fit_lifetimes(obs, case, seed=int(seed) % (2**32))
    return dict(observed=obs, fits=fits, truth=TABLE_II[data_case])


def lifetime_fit_params(fit) -> dict:
    law = fit.lifetime
    d = dict(case=fit.case, rate=fit.rate, mean_lifetime=fit.mean_lifetime, sup_distance=fit.sup_distance)
    if isinstance(law, Exponential):
        d["L"] = law.scale
    else:
        d["mu"] = law.mu
        d["sigma2"] = law.sigma2
    return d


def fit_model_cdf(fit, obs, v):
    if fit.case == 3:
        return fit.lifetime.cdf(v)
    return observed_lifetime_cdf(fit.rate, fit.lifetime, obs.length, obs.delta0, v)


def radius_fit_experiment(mu=-16.92, sigma2=94.60, method="nnls") -> dict:
    """Radius weights reproducing a dB-lognormal lifetime CDF, plus their lognormal summary."""
    t0 = time.perf_counter()
    target = LognormalDb(mu, sigma2)
    fit = solve_radius_weights(target, method=method)
    summary = fit_lognormal_to_pmf(fit.pmf)
    y = DEFAULT_Y_GRID
    curves = np.column_stack([
        y, target.cdf(y), fit.approximant,
        mixture_chord_cdf(y, LognormalDb(summary.mu, summary.sigma2)),
    ])
    return dict(fit=fit, summary=summary, curves=curves, seconds=time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# condition numbers


def _kappa_pair(scenario, seed):
    cl = place_clusters(scenario, seed)
    h_off, h_on = synthesize_modes(scenario, cl, (False, True))
    return condition_number_db(h_off), condition_number_db(h_on)


def indoor_kappa(runs=10, M=32, K=9, T=10, B=257, pattern="omni", seed=0, **kw) -> dict:
    """kappa_dB samples with the gain function OFF and ON for the indoor scenario."""
    pat = AntennaPattern(kind=pattern)
    sc = indoor_scenario(K=K, M=M, T=T, B=B, pattern=pat, **kw)
    t0 = time.perf_counter()
    off, on = [], []
    for r in range(runs):
        k_off, k_on = _kappa_pair(sc, _child(seed, r))
        off.append(k_off.kappa_db.reshape(-1))
        on.append(k_on.kappa_db.reshape(-1))
    off, on = np.concatenate(off), np.concatenate(on)
    return dict(off=off, on=on, median_off=float(np.median(off)), median_on=float(np.median(on)),
                gap=float(np.median(off) - np.median(on)), seconds=time.perf_counter() - t0,
                n_mpc=sc.n_mpc())


def bsvr_kappa(rates=(1.0, 2.9, 5.0), distances=(25.0, 50.0, 100.0), runs=5, M=128, K=9, B=33,
               L_BS=3.2, seed=0) -> list[dict]:
    """Median kappa_dB of the outdoor scenario over BS-VR rate and BS-MS distance."""
    rows = []
    for i, rate in enumerate(rates):
        for j, dist in enumerate(distances):
            sc = outdoor_scenario(K=K, M=M, B=B, distance=float(dist), rate=float(rate), L_BS=L_BS)
            vals = []
            for r in range(runs):
                cl = place_clusters(sc, _child(seed, i, j, r))
                (h,) = synthesize_modes(sc, cl, (False,))
                vals.append(condition_number_db(h).kappa_db.reshape(-1))
            v = np.concatenate(vals)
            rows.append(dict(rate=float(rate), distance=float(dist), median_kappa_db=float(np.median(v)),
                             mean_kappa_db=float(np.mean(v[np.isfinite(v)])), n=int(v.size)))
    return rows


def twin_spread_sweep(omegas=(5.0, 15.0, 30.0, 60.0, 90.0), fixed=60.0, K=9, M=128, T=50, B=16,
                      runs=1, seed=0) -> list[dict]:
    """Average kappa_dB, ON and OFF, sweeping one angular spread with the other fixed."""
    rows = []
    for side in ("ms", "bs"):
        for i, om in enumerate(omegas):
            kw = dict(omega_ms=om, omega_bs=fixed) if side == "ms" else dict(omega_ms=fixed, omega_bs=om)
            base = twin_cluster_scenario(K=K, M=M, B=B, T=T, **kw)
            (row,) = run_gap_experiment(base, [K], runs=runs, seed=int(_child(seed, i).generate_state(1)[0]))
            rows.append(dict(swept=side, omega=float(om), fixed=float(fixed), kappa_off=row.kappa_off,
                             kappa_on=row.kappa_on, gap=row.gap, gap_se=row.gap_se))
    return rows


def twin_gap_sweep(omega_ms=(15.0, 30.0, 60.0), omega_bs=60.0, K_list=range(2, 19), M=128, T=50, B=16,
                   runs=1, seed=0) -> list[dict]:
    """Gap ``kappa_OFF - kappa_ON`` against the number of users."""
    rows = []
    for om in omega_ms:
        base = twin_cluster_scenario(omega_ms=om, omega_bs=omega_bs, M=M, B=B, T=T)
        for row in run_gap_experiment(base, list(K_list), runs=runs, seed=seed):
            rows.append(dict(omega_ms=float(om), omega_bs=float(omega_bs), **dataclasses.asdict(row)))
    return rows


# ---------------------------------------------------------------------------
# figure driver

FIGURES = ("fig2-counts", "fig3-rmse", "fig4-lifetime-fit", "fig5-bsvr-kappa", "fig6-radius-fit",
           "fig7-indoor-kappa", "fig8-twin-sweep")


def _rows(dicts):
    cols = list(dicts[0].keys()) if dicts else []
    return cols, [[d[c] for c in cols] for d in dicts]


def run_figure(experiment: str, params: dict | None = None, seed: int = 0, out_dir=".",
               trials: int | None = None) -> list[Path]:
    """Run one figure experiment and write CSV curves plus a JSON summary.

    Every file carries ``config_hash`` and ``seed``; the same inputs give
    byte-identical files. Timing information is deliberately not written.
    """
    if experiment not in FIGURES:
        raise InvalidParameterError(f"unknown experiment {experiment!r}; choose from {', '.join(FIGURES)}")
    params = dict(params or {})
    if trials is not None:
        params["trials"] = int(trials)
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InvalidParameterError(f"cannot create output directory {out}: {exc}") from exc
    h = config_hash({"experiment": experiment, "params": params, "seed": int(seed)})
    meta = {"experiment": experiment, "config_hash": h, "seed": int(seed)}
    stem = experiment.replace("-", "_")
    written = []

    def table(name, cols, rows):
        p = out / f"{stem}_{name}.csv"
        write_table(p, cols, rows, meta)
        written.append(p)

    def summary(obj):
        p = out / f"{stem}_summary.json"
        write_json(p, {**meta, "params": params, **obj})
        written.append(p)

    if experiment == "fig2-counts":
        kw = dict(rate=2.6, mean_lifetime=2.9, length=7.5, delta0=0.23, samples=20)
        kw.update({k: v for k, v in params.items() if k in kw})
        if "trials" in params:
            kw["samples"] = params["trials"]
        res = count_ecdfs(seed=seed, **kw)
        for name, d in res.items():
            table(f"ecdf_{name}", ["count", "ecdf", "poisson_cdf"],
                  [[int(v), c, float(poisson_cdf(v, d["poisson_mean"]))] for v, c in d["ecdf"]])
        summary({name: {k: d[k] for k in ("poisson_mean", "expected_mean", "gof")} for name, d in res.items()})
    elif experiment == "fig3-rmse":
        kw = dict(rate0_L0=(5, 10, 15, 20, 25), ratios=(0.25, 0.5, 1.0, 2.0, 4.0), trials=10_000, L0=10.0)
        kw.update({k: v for k, v in params.items() if k in kw})
        rows = rmse_sweep(seed=seed, **kw)
        table("rmse", *_rows(rows))
        summary({"grid_points": len(rows)})
    elif experiment == "fig4-lifetime-fit":
        case = int(params.get("data_case", 2))
        res = lifetime_fit_experiment(case, seed=seed)
        obs = res["observed"]
        e = ecdf(obs.upsilon)
        v = e[:, 0]
        cols = ["lifetime", "ecdf"] + [f"case{c}_cdf" for c in res["fits"]]
        model = [fit_model_cdf(f, obs, v) for f in res["fits"].values()]
        table("cdf", cols, np.column_stack([e, *model]).tolist())
        summary({"n": obs.n, "data_case": case,
                 "fits": {str(c): lifetime_fit_params(f) for c, f in res["fits"].items()}})
    elif experiment == "fig5-bsvr-kappa":
        kw = dict(rates=(1.0, 2.9, 5.0), distances=(25.0, 50.0, 100.0), runs=5, M=128, B=33)
        kw.update({k: v for k, v in params.items() if k in kw})
        if "trials" in params:
            kw["runs"] = params["trials"]
        rows = bsvr_kappa(seed=seed, **kw)
        table("kappa", *_rows(rows))
        summary({"grid_points": len(rows)})
    elif experiment == "fig6-radius-fit":
        kw = dict(mu=-16.92, sigma2=94.60, method="nnls")
        kw.update({k: v for k, v in params.items() if k in kw})
        res = radius_fit_experiment(**kw)
        p = out / f"{stem}_pmf.csv"
        write_pmf(p, res["fit"].pmf, meta)
        written.append(p)
        table("cdf", ["y", "target_cdf", "qp_cdf", "lognormal_summary_cdf"], res["curves"].tolist())
        f = res["fit"]
        summary({"qp_rmse": f.rmse, "kkt_residual": f.kkt_residual, "kkt_tolerance": f.kkt_tolerance,
                 "certified": f.certified, "method": f.method,
                 "lognormal": dataclasses.asdict(res["summary"])})
    elif experiment == "fig7-indoor-kappa":
        kw = dict(runs=10, M=32, K=9, T=10, B=257, pattern="omni")
        kw.update({k: v for k, v in params.items() if k in kw})
        if "trials" in params:
            kw["runs"] = params["trials"]
        res = indoor_kappa(seed=seed, **kw)
        off, on = np.sort(res["off"]), np.sort(res["on"])
        q = (np.arange(off.size) + 1) / off.size
        table("cdf", ["cdf", "kappa_db_off", "kappa_db_on"], np.column_stack([q, off, on]).tolist())
        summary({k: res[k] for k in ("median_off", "median_on", "gap", "n_mpc")})
    elif experiment == "fig8-twin-sweep":
        kw = dict(T=50, B=16, M=128, runs=1)
        kw.update({k: v for k, v in params.items() if k in kw})
        spread = twin_spread_sweep(seed=seed, **kw)
        table("spreads", *_rows(spread))
        gaps = twin_gap_sweep(seed=seed, K_list=params.get("K_list", range(2, 19)), **kw)
        table("gap", *_rows(gaps))
        summary({"spread_points": len(spread), "gap_points": len(gaps)})
    return written


__all__ = [
    "FIGURES",
    "TABLE_II",
    "bsvr_kappa",
    "count_ecdfs",
    "count_validation",
    "indoor_kappa",
    "lifetime_fit_experiment",
    "radius_fit_experiment",
    "resample_lifetimes",
    "rmse_sweep",
    "run_figure",
    "twin_gap_sweep",
    "twin_spread_sweep",
]
