"""Command-line interface: ``costvr <command> [--config PATH] [--seed N] ...``.

Results go to ``--out DIR`` when given, otherwise to stdout. Failures exit
nonzero with a JSON object ``{"error": code, "message": ...}`` on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bsvr_process import BsVrProcessParams, generate_bsvrs, simulate_batch
from .channel import condition_number_db, scenario_from_config, synthesize
from .channel.synth import ChannelTensor
from .config import config_hash, load_config
from .correlation import acf_bs, acf_circular, acf_circular_mixture
from .errors import CostVrError, InvalidParameterError
from .experiments import FIGURES, lifetime_fit_params, run_figure
from .inference import (
    estimate_with_bound,
    fim_crlb,
    mle_exponential,
    mle_numeric,
    mome,
    sufficient_stats,
)
from .io import dumps_json, read_intervals, read_tensor, table_text, write_intervals, write_pmf, write_tensor
from .lifetimes import Exponential, LognormalDb
from .mpc_model import fit_lifetimes, fit_lognormal_to_pmf, solve_radius_weights


class CliError(CostVrError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _lifetime(cfg):
    fam = cfg.get("lifetime", "exponential")
    if fam == "exponential":
        return Exponential(float(cfg.get("L_BS", 2.9)))
    if fam == "lognormal":
        return LognormalDb(float(cfg.get("mu", -16.92)), float(cfg.get("sigma2", 94.60)))
    raise InvalidParameterError(f"unknown lifetime family {fam!r}")


def _process(cfg) -> BsVrProcessParams:
    x1 = float(cfg.get("x1", 0.0))
    x2 = float(cfg.get("x2", x1 + float(cfg.get("L", 7.5))))
    return BsVrProcessParams(float(cfg.get("lambda", 2.6)), _lifetime(cfg), x1, x2, float(cfg.get("delta0", 0.0)))


class _Output:
    """Collects named tables and a summary; writes files or prints them."""

    def __init__(self, args, cfg):
        self.args = args
        self.meta = {"config_hash": config_hash(cfg), "seed": int(args.seed)}
        self.out = Path(args.out) if args.out else None
        if self.out:
            try:
                self.out.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise InvalidParameterError(f"cannot create {self.out}: {exc}") from exc

    def table(self, name, cols, rows):
        rows = [list(r) for r in rows]
        if self.args.format == "json":
            text = dumps_json({**self.meta, "columns": cols, "rows": rows})
            suffix = ".json"
        else:
            text = table_text(cols, rows, self.meta)
            suffix = ".csv"
        self._emit(name + suffix, text)

    def summary(self, name, obj):
        self._emit(name + ".json", dumps_json({**self.meta, **obj}))

    def _emit(self, filename, text):
        if self.out:
            (self.out / filename).write_text(text)
        else:
            sys.stdout.write(text)


def cmd_simulate_bsvr(args, cfg, out):
    params = _process(cfg)
    trials = args.trials or 1
    if trials == 1:
        obs = generate_bsvrs(params, seed=args.seed)
        codes = obs.class_codes
        out.table("intervals", ["a", "b", "censoring"], zip(obs.a, obs.b, (int(c) for c in codes)))
        if out.out and args.format == "csv":
            write_intervals(out.out / "intervals_window.csv", obs)
        n00, n01, n10, n11 = obs.counts
        out.summary("summary", dict(n=obs.n, n00=n00, n01=n01, n10=n10, n11=n11, x1=obs.x1, x2=obs.x2,
                                    delta0=obs.delta0))
    else:
        c = simulate_batch(params, trials, seed=args.seed)
        out.table("counts", ["n00", "n01", "n10", "n11", "upsilon_sum"],
                  zip(c.n00.tolist(), c.n01.tolist(), c.n10.tolist(), c.n11.tolist(), c.upsilon_sum))
        out.summary("summary", dict(trials=trials, mean_n=float(c.n.mean())))


def _observed(args, cfg):
    path = args.input or cfg.get("input")
    if not path:
        raise InvalidParameterError("an interval CSV is required (--input or config 'input')")
    return read_intervals(path, cfg.get("x1"), cfg.get("x2"), cfg.get("delta0"))


def cmd_estimate(args, cfg, out):
    obs = _observed(args, cfg)
    method = args.method or cfg.get("method", "mle")
    st = sufficient_stats(obs)
    res = dict(method=method, n=st.n, nu=st.nu, lambda0_sum=st.lambda0_sum, L0=st.L0, delta0=st.delta0)
    if method == "mle":
        e = mle_exponential(st)
        res.update(lambda_hat=e.lambda_hat, L_BS_hat=e.lbs_hat)
        if math.isfinite(e.lbs_hat) and e.lbs_hat > 0:
            b = estimate_with_bound(obs, int(cfg.get("n_experiments", 1)))
            res.update(crlb_lambda=b.crlb_lambda, crlb_L_BS=b.crlb_lifetime,
                       relative_rmse_floor=list(b.relative_rmse_floor))
    elif method == "mome":
        e = mome(st)
        res.update(lambda0_hat=e.lambda_hat, L_BS_hat=e.lbs_hat)
    elif method == "lognormal":
        e = mle_numeric(obs, seed=int(args.seed) % 2**32)
        res.update(lambda_hat=e.lambda_hat, mu_hat=e.mu_hat, sigma2_hat=e.sigma2_hat, loglik=e.loglik)
    else:
        raise InvalidParameterError(f"unknown method {method!r}")
    out.summary("estimate", res)


def cmd_crlb(args, cfg, out):
    fb = fim_crlb(float(cfg.get("lambda", 2.5)), float(cfg.get("L_BS", 10.0)), float(cfg.get("L0", 10.0)),
                  float(cfg.get("delta0", 0.0)))
    out.summary("crlb", dict(fim=fb.fim, crlb_lambda=fb.crlb_lambda, crlb_L_BS=fb.crlb_lbs,
                             normalized_lambda=fb.normalized_lambda, normalized_L_BS=fb.normalized_lbs))


def cmd_fit_lifetimes(args, cfg, out):
    obs = _observed(args, cfg)
    cases = [args.case] if args.case else list(cfg.get("cases", [1, 2, 3]))
    fits = [fit_lifetimes(obs, int(c), seed=int(args.seed) % 2**32) for c in cases]
    out.summary("lifetime_fits", dict(n=obs.n, fits=[lifetime_fit_params(f) for f in fits]))


def cmd_fit_radii(args, cfg, out):
    target = LognormalDb(float(cfg.get("mu", -16.92)), float(cfg.get("sigma2", 94.60)))
    fit = solve_radius_weights(target, method=cfg.get("method", "nnls"))
    summ = fit_lognormal_to_pmf(fit.pmf)
    if out.out and args.format == "csv":
        write_pmf(out.out / "radius_pmf.csv", fit.pmf, out.meta)
    else:
        out.table("radius_pmf", ["radius", "weight"], zip(fit.pmf.radii, fit.pmf.weights))
    out.summary("radius_fit", dict(rmse=fit.rmse, kkt_residual=fit.kkt_residual, certified=fit.certified,
                                   method=fit.method, lognormal=dataclasses.asdict(summ)))


def cmd_acf(args, cfg, out):
    kind = cfg.get("kind", "bs")
    lags = np.asarray(cfg.get("lags", np.linspace(0.0, 10.0, 101)), dtype=float)
    if kind == "bs":
        vals = acf_bs(lags, _lifetime(cfg))
    elif kind == "ms":
        vals = acf_circular(lags, float(cfg.get("R_C", 5.0)))
    elif kind == "mpc":
        vals = acf_circular_mixture(lags, LognormalDb(float(cfg.get("mu_R", -19.8)), float(cfg.get("sigma2_R", 101.3))))
    else:
        raise InvalidParameterError(f"unknown ACF kind {kind!r}")
    out.table(f"acf_{kind}", ["lag", "acf"], zip(lags, np.atleast_1d(vals)))


def _scenario(cfg):
    return scenario_from_config(cfg.get("scenario", cfg))


def cmd_synthesize(args, cfg, out):
    sc = _scenario(cfg)
    gain = None if args.gain is None else args.gain == "on"
    t = synthesize(sc, seed=args.seed, gain=gain)
    if out.out:
        write_tensor(out.out / "channel.bin", t.h)
    k = condition_number_db(t)
    out.summary("synthesize", dict(shape=list(t.h.shape), n_mpc=sc.n_mpc(), median_kappa_db=k.median_db,
                                   mean_kappa_db=k.mean_db, n_infinite=k.n_infinite))


def cmd_condition_number(args, cfg, out):
    if args.input:
        h = read_tensor(args.input)
        if h.ndim != 4:
            raise InvalidParameterError("tensor must have shape (K, M, T, B)")
        t = ChannelTensor(h, np.arange(h.shape[3], dtype=float))
    else:
        sc = _scenario(cfg)
        gain = None if args.gain is None else args.gain == "on"
        t = synthesize(sc, seed=args.seed, gain=gain)
    k = condition_number_db(t)
    T, B = k.kappa_db.shape
    tt, bb = np.meshgrid(np.arange(T), np.arange(B), indexing="ij")
    out.table("kappa", ["t", "b", "kappa_db"], zip(tt.ravel().tolist(), bb.ravel().tolist(), k.kappa_db.ravel()))
    out.summary("kappa_summary", dict(mean_kappa_db=k.mean_db, median_kappa_db=k.median_db,
                                      n_infinite=k.n_infinite))


def cmd_run_figure(args, cfg, out):
    params = dict(cfg.get("params", cfg))
    paths = run_figure(args.experiment, params, seed=args.seed, out_dir=args.out or ".", trials=args.trials)
    sys.stdout.write(json.dumps({"written": [str(p) for p in paths]}) + "\n")


COMMANDS = {
    "simulate-bsvr": (cmd_simulate_bsvr, "simulate censored BS-VR intervals or a batch of counts"),
    "estimate": (cmd_estimate, "estimate rate and lifetime from an interval CSV"),
    "crlb": (cmd_crlb, "Fisher information and Cramer-Rao bounds"),
    "fit-lifetimes": (cmd_fit_lifetimes, "fit lifetime models (cases 1-3)"),
    "fit-radii": (cmd_fit_radii, "radius weights from a lifetime CDF, with a lognormal summary"),
    "acf": (cmd_acf, "autocorrelation curves"),
    "synthesize": (cmd_synthesize, "synthesize a channel tensor"),
    "condition-number": (cmd_condition_number, "condition numbers of a channel tensor"),
    "run-figure": (cmd_run_figure, "run a figure experiment"),
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="costvr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", help="YAML or JSON config file")
        s.add_argument("--seed", type=int, default=0, help="unsigned 64-bit seed")
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--out", help="output directory (default: stdout)")
        s.add_argument("--format", choices=("csv", "json"), default="csv")
        if name in ("estimate", "fit-lifetimes", "condition-number"):
            s.add_argument("--input", help="input file")
        if name == "estimate":
            s.add_argument("--method", choices=("mle", "mome", "lognormal"))
        if name == "fit-lifetimes":
            s.add_argument("--case", type=int, choices=(1, 2, 3))
        if name in ("synthesize", "condition-number"):
            s.add_argument("--gain", choices=("on", "off"))
        if name == "run-figure":
            s.add_argument("experiment", choices=FIGURES)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if not 0 <= args.seed < 2**64:
            raise InvalidParameterError("seed must be an unsigned 64-bit integer")
        if args.trials is not None and args.trials < 1:
            raise InvalidParameterError("trials must be >= 1")
        cfg = load_config(args.config)
        fn, _ = COMMANDS[args.command]
        out = _Output(args, cfg)
        fn(args, cfg, out)
        return 0
    except CostVrError as exc:
        _fail(exc.code, str(exc))
        return 2
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _fail("bad-input", f"{type(exc).__name__}: {exc}")
        return 1


def _fail(code, message):
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
