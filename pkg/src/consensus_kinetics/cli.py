"""Command-line front end.

Every command writes its outputs plus a ``manifest_<command>.json`` into
``--out``; the manifest echoes the resolved configuration and the output
hashes, and is the only file carrying a timestamp. ``replay MANIFEST``
re-runs a recorded command.

Exit codes: 0 success, 1 usage, 2 data or statistical degeneracy,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationConfig, CalibrationProblem, CalibrationResult, calibrate
from .econometrics import (
    adf_test,
    arch_lm,
    breusch_godfrey,
    engle_granger,
    half_life,
    jarque_bera,
    johansen,
    var_lag_select,
    vecm_fit,
)
from .errors import ConsensusKineticsError
from .evaluation import baseline_cointegration_forecast, report
from .kinetic.distribution import (
    default_x_max,
    lognormal_density,
    lognormal_ensemble,
    make_grid,
    moments_of,
    write_snapshot,
)
from .kinetic.moments import sentiment_closed_form, variance_solve
from .kinetic.neumann import neumann_solve
from .kinetic.params import KineticParams, load_params
from .kinetic.particles import particle_simulate
from .kinetic.paths import ForcingPath
from .timeseries import (
    DEFAULT_DT,
    SplitSpec,
    TimeSeries,
    align,
    diff_series,
    load_csv,
    log_series,
    split,
    synth_cointegrated_pair,
    synth_gbm,
    synth_sentiment,
    write_csv,
)

CALIBRATION_FILE = "calibration.json"
FORECAST_FILE = "forecast.csv"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- output helpers ---------------------------------------------------------


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([repr(float(v)) for v in row])
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(args, outputs: list[Path]) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func", "argv") and not callable(v)
    }
    doc = {
        "command": args.command,
        "argv": args.argv,
        "config": config,
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": {p.name: _sha256(p) for p in outputs},
    }
    name = "manifest_" + args.command.replace(" ", "_") + ".json"
    return _write_text(out / name, _dump(doc))


def _emit(args, doc: dict, name: str, table: str | None = None) -> list[Path]:
    text = _dump(doc)
    sys.stdout.write(text)
    if table is not None and getattr(args, "table", False):
        sys.stdout.write(table)
    if args.out is None:
        return []
    return [_write_text(Path(args.out) / name, text)]


def _table(rows: list[tuple[str, object]]) -> str:
    width = max(len(k) for k, _ in rows)
    lines = []
    for k, v in rows:
        if isinstance(v, float):
            v = f"{v:.6g}"
        lines.append(f"{k.ljust(width)}  {v}")
    return "\n".join(lines) + "\n"


def _load(path: str, log: bool = False) -> TimeSeries:
    ts = load_csv(path)
    return log_series(ts) if log else ts


def _params_arg(args) -> tuple[KineticParams, float]:
    if args.params:
        params, dt = load_params(args.params)
    else:
        params, dt = KineticParams.reference(), DEFAULT_DT
    over = {k: getattr(args, k) for k in ("q", "beta", "delta", "alpha") if getattr(args, k, None) is not None}
    if over:
        params = KineticParams(**{**params.__dict__, **over})
    return params, dt


# -- synth --------------------------------------------------------------------


def cmd_synth(args) -> list[Path]:
    out = Path(args.out)
    if args.kind == "gbm":
        ts = synth_gbm(args.x0, args.mu, args.sigma, args.n, seed=args.seed, start=args.start)
        return [write_csv(ts, out / "index.csv")]
    if args.kind == "pair":
        y, z = synth_cointegrated_pair(
            args.slope, args.intercept, args.rho, args.sigma_u, args.sigma_z, args.n, seed=args.seed,
            z0=args.z0, start=args.start,
        )
        return [write_csv(y, out / "pair_y.csv"), write_csv(z, out / "pair_z.csv")]
    params, dt = _params_arg(args)
    X = load_csv(args.index)
    s0 = args.s0 if args.s0 is not None else float(X.values[0])
    s = synth_sentiment(params, X, s0, args.noise, seed=args.seed, dt=dt, relative=args.relative)
    return [write_csv(s, out / "consensus.csv")]


# -- econ ---------------------------------------------------------------------


def _pair(args) -> tuple[TimeSeries, TimeSeries]:
    if not (args.consensus and args.index):
        raise UsageError("this command needs --consensus and --index")
    y, x = align(_load(args.consensus, args.log), _load(args.index, args.log))
    return y, x


def cmd_econ(args) -> list[Path]:
    kind = args.kind
    if kind == "halflife":
        hl = half_life(args.gamma)
        doc = {"gamma_prime": args.gamma, "half_life": hl, "half_life_ceiling": math.ceil(hl)}
        return _emit(args, doc, "halflife.json", _table([("half-life", hl), ("ceiling", math.ceil(hl))]))
    if kind == "adf":
        if not args.input:
            raise UsageError("adf needs --input")
        ts = _load(args.input, args.log)
        if args.diff:
            ts = diff_series(ts)
        res = adf_test(ts, args.spec, args.max_lag, args.lag_rule)
        rows = [("statistic", res.statistic), ("lags", res.lag_order)]
        rows += [(f"cv {k}", v) for k, v in res.critical_values.items()]
        return _emit(args, res.to_dict(), "adf.json", _table(rows))
    y, x = _pair(args)
    if kind == "eg":
        res = engle_granger(y, x, args.level, args.max_lag, args.lag_rule)
        rows = [("slope", res.longrun_slope), ("intercept", res.longrun_intercept),
                ("residual ADF", res.residual_adf.statistic), ("cointegrated", res.cointegrated)]
        return _emit(args, res.to_dict(), "eg.json", _table(rows))
    if kind == "lags":
        res = var_lag_select((y, x), args.p_max)
        return _emit(args, res, "lags.json", _table([(c, res[c]) for c in ("aic", "sic", "hq", "fpe")]))
    if kind == "johansen":
        res = johansen((y, x), args.p, args.level, args.decision)
        rows = [(f"trace {k}", v) for k, v in res.trace_stats.items()] + [("rank", res.selected_rank)]
        return _emit(args, res.to_dict(), "johansen.json", _table(rows))
    fit = vecm_fit((y, x), args.p, args.rank, args.level, names=("consensus", "index"))
    if kind == "vecm":
        rows = [("slope", fit.longrun[0]), ("intercept", fit.longrun[1])]
        rows += [(f"loading d{nm}", float(fit.loadings[i, 0])) for i, nm in enumerate(fit.names)]
        return _emit(args, fit.to_dict(), "vecm.json", _table(rows))
    # diagnose
    doc = {}
    rows = []
    for i, nm in enumerate(fit.names):
        e = fit.residuals[:, i]
        tests = [breusch_godfrey(e, args.lags), jarque_bera(e), arch_lm(e, args.lags)]
        doc[f"d{nm}"] = {t.name: t.to_dict() for t in tests}
        rows += [(f"d{nm} {t.name}", t.p_value) for t in tests]
    return _emit(args, doc, "diagnostics.json", _table(rows))


# -- calibrate / forecast / report ---------------------------------------------


def _train_pair(args) -> tuple[TimeSeries, TimeSeries, TimeSeries, TimeSeries]:
    X, s = align(load_csv(args.index), load_csv(args.consensus))
    if args.train_end:
        spec = SplitSpec(args.train_end)
        X_tr, _ = split(X, spec)
        s_tr, _ = split(s, spec)
    else:
        X_tr, s_tr = X, s
    return X, s, X_tr, s_tr


def cmd_calibrate(args) -> list[Path]:
    _, _, X_tr, s_tr = _train_pair(args)
    s0 = args.s0 if args.s0 is not None else float(s_tr.values[0])
    problem = CalibrationProblem(X_tr, s_tr, s0, args.dt)
    cfg = CalibrationConfig(args.budget, args.n_refine, args.tol, args.max_iter, args.seed, args.q_fixed)
    res = calibrate(problem, cfg)
    doc = res.to_dict()
    doc.update(
        {"s0": s0, "dt_per_observation": args.dt, "train_start": str(X_tr.dates[0]),
         "train_end": str(X_tr.dates[-1])}
    )
    out = Path(args.out)
    fitted = s_tr.with_values(problem.sentiment(res.params), "fitted")
    return [_write_text(out / CALIBRATION_FILE, _dump(doc)), write_csv(fitted, out / "fitted_sentiment.csv")]


def _calibration_doc(args) -> dict:
    path = Path(args.params) if args.params else Path(args.out) / CALIBRATION_FILE
    if not path.exists():
        raise UsageError("no parameters: pass --params or run `calibrate` into --out first")
    doc = json.loads(path.read_text(encoding="utf-8"))
    params, dt = load_params(path)
    doc["_params"], doc["_dt"] = params, dt
    return doc


def _model_forecast(args) -> tuple[TimeSeries, dict]:
    doc = _calibration_doc(args)
    X = load_csv(args.index)
    s0 = args.s0 if args.s0 is not None else doc.get("s0", float(X.values[0]))
    if "train_start" in doc:
        keep = X.dates >= np.datetime64(doc["train_start"])
        X = TimeSeries(X.dates[keep], X.values[keep], X.label)
    path = ForcingPath.from_series(X, doc["_dt"])
    s = sentiment_closed_form(doc["_params"], path, s0, path.times).s_values
    forecast = TimeSeries(X.dates, s, "forecast")
    end = args.train_end or doc.get("train_end")
    if end:
        _, forecast = split(forecast, SplitSpec(end))
    return forecast, doc


def cmd_forecast(args) -> list[Path]:
    forecast, _ = _model_forecast(args)
    return [write_csv(forecast, Path(args.out) / FORECAST_FILE)]


def cmd_report(args) -> list[Path]:
    forecast, doc = _model_forecast(args)
    X, s = align(load_csv(args.index), load_csv(args.consensus))
    end = args.train_end or doc.get("train_end")
    if end:
        X_tr, X_te = split(X, SplitSpec(end))
        s_tr, s_te = split(s, SplitSpec(end))
    else:
        X_tr, X_te, s_tr, s_te = X, X, s, s
    eg = engle_granger(log_series(s_tr), log_series(X_tr))
    baseline = baseline_cointegration_forecast(eg, X_te)
    p = doc["_params"]
    calib = CalibrationResult(p, doc["params"].get("k", p.k), doc.get("objective", float("nan")), 0, True, 0)
    out = Path(args.out) / "report"
    rep = report(calib, s_te, forecast, baseline, out)
    sys.stdout.write(_dump(rep))
    return [out / "report.json"] + [out / f for f in rep["files"]]


# -- simulate -------------------------------------------------------------------


def cmd_simulate(args) -> list[Path]:
    params, dt_obs = _params_arg(args)
    out = Path(args.out)
    if args.index:
        X = ForcingPath.from_series(load_csv(args.index), dt_obs)
        horizon = args.horizon if args.horizon is not None else X.t_end
    else:
        horizon = args.horizon if args.horizon is not None else 1.0
        X = ForcingPath.constant(args.x_level, horizon)
    s0 = args.s0 if args.s0 is not None else float(X(0.0))
    meta = {"engine": args.engine, "params": params.__dict__, "seed": args.seed, "s0": s0}
    n_steps = int(round(horizon / args.dt))
    t = np.arange(n_steps + 1) * (horizon / n_steps)

    if args.engine == "particle":
        ens = lognormal_ensemble(args.n_particles, s0, args.rel_width, seed=args.seed)
        every = max(1, int(round(args.record_dt / (horizon / n_steps))))
        run = particle_simulate(params, X, ens, t, seed=args.seed + 1, record_every=every)
        moments = _write_table(
            out / "moments.csv", ["time", "mean", "variance", "mean_se", "variance_se"],
            [run.times, run.mean, run.variance, run.mean_se, run.variance_se],
        )
        snap = write_snapshot(
            out / "final_ensemble.csv", run.final.positions, np.arange(len(run.final)), "particle",
            {**meta, "time": run.final.time},
        )
        return [moments, snap, snap.with_suffix(".csv.json")]
    if args.engine == "closed-form":
        s = sentiment_closed_form(params, X, s0, t)
        V0 = (args.rel_width * s0) ** 2
        v = variance_solve(params, s, X, V0, variant=args.variant)
        every = max(1, int(round(args.record_dt / (horizon / n_steps))))
        idx = sorted(set(range(0, t.size, every)) | {t.size - 1})
        return [_write_table(out / "moments.csv", ["time", "mean", "variance"], [t[idx], s.s_values[idx], v.v_values[idx]])]
    x_grid = make_grid(default_x_max(X.values, params.delta), args.grid_points)
    f_in = lognormal_density(x_grid, s0, args.rel_width)
    res = neumann_solve(params, X, f_in, horizon, args.tol, args.n_max)
    mom = [moments_of(res.slice(m)) for m in range(res.times.size)]
    moments = _write_table(
        out / "moments.csv", ["time", "mass", "mean", "variance"],
        [res.times, [m.m0 for m in mom], [m.mean for m in mom], [m.variance for m in mom]],
    )
    snap = write_snapshot(
        out / "final_density.csv", res.final.f_values, res.x_grid, "x",
        {**meta, "time": float(res.times[-1]), "n_terms": res.n_terms, "lost_mass": res.lost_mass},
    )
    return [moments, snap, snap.with_suffix(".csv.json")]


def cmd_replay(args) -> list[Path]:
    doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    code = main(doc["argv"])
    if code:
        raise SystemExit(code)
    return []


# -- parser -----------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, out_required: bool = True) -> None:
    p.add_argument("--out", required=out_required, help="output directory")
    p.add_argument("--seed", type=int, default=0)


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--params", help="parameter or calibration JSON")
    for name in ("q", "beta", "delta", "alpha"):
        p.add_argument(f"--{name}", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="consensus-kinetics", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sy = sub.add_parser("synth", help="synthetic series")
    sys_ = sy.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    g = sys_.add_parser("gbm")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--x0", type=float, default=1000.0)
    g.add_argument("--mu", type=float, default=0.08)
    g.add_argument("--sigma", type=float, default=0.18)
    g.add_argument("--start", default="2009-05-26")
    _add_common(g)
    pr = sys_.add_parser("pair")
    pr.add_argument("--n", type=int, default=1000)
    pr.add_argument("--slope", type=float, required=True)
    pr.add_argument("--intercept", type=float, default=0.0)
    pr.add_argument("--rho", type=float, default=0.5)
    pr.add_argument("--sigma-u", type=float, default=1.0)
    pr.add_argument("--sigma-z", type=float, default=1.0)
    pr.add_argument("--z0", type=float, default=0.0)
    pr.add_argument("--start", default="2009-05-26")
    _add_common(pr)
    se = sys_.add_parser("sentiment")
    se.add_argument("--index", required=True)
    se.add_argument("--s0", type=float)
    se.add_argument("--noise", type=float, default=0.0)
    se.add_argument("--relative", action="store_true", help="noise is a fraction of the level")
    _add_params(se)
    _add_common(se)
    for p in (g, pr, se):
        p.set_defaults(func=cmd_synth)

    ec = sub.add_parser("econ", help="econometric tests")
    ecs = ec.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in ("adf", "eg", "lags", "johansen", "vecm", "diagnose", "halflife"):
        p = ecs.add_parser(kind)
        p.add_argument("--out")
        p.add_argument("--table", action="store_true", help="also print a plain-text table")
        p.set_defaults(func=cmd_econ)
        if kind == "halflife":
            p.add_argument("--gamma", type=float, required=True)
            continue
        p.add_argument("--log", action="store_true", help="take logs of the inputs")
        p.add_argument("--level", default="5%")
        if kind == "adf":
            p.add_argument("--input")
            p.add_argument("--diff", action="store_true")
            p.add_argument("--spec", choices=("none", "constant", "trend"), default="none")
        else:
            p.add_argument("--consensus")
            p.add_argument("--index")
        if kind in ("adf", "eg"):
            p.add_argument("--max-lag", type=int)
            p.add_argument("--lag-rule", choices=("aic", "fixed"), default="aic")
        if kind == "lags":
            p.add_argument("--p-max", type=int, default=8)
        if kind in ("johansen", "vecm", "diagnose"):
            p.add_argument("--p", type=int, default=1)
        if kind == "johansen":
            p.add_argument("--decision", choices=("max_eig", "trace"), default="max_eig")
        if kind in ("vecm", "diagnose"):
            p.add_argument("--rank", type=int, default=1)
        if kind == "diagnose":
            p.add_argument("--lags", type=int, default=4)

    ca = sub.add_parser("calibrate", help="fit k and delta on the training window")
    ca.add_argument("--index", required=True)
    ca.add_argument("--consensus", required=True)
    ca.add_argument("--train-end")
    ca.add_argument("--s0", type=float)
    ca.add_argument("--dt", type=float, default=DEFAULT_DT)
    ca.add_argument("--budget", type=int, default=500)
    ca.add_argument("--n-refine", type=int, default=5)
    ca.add_argument("--tol", type=float, default=1e-10)
    ca.add_argument("--max-iter", type=int, default=2000)
    ca.add_argument("--q-fixed", type=float, default=0.28)
    _add_common(ca)
    ca.set_defaults(func=cmd_calibrate)

    for name, func in (("forecast", cmd_forecast), ("report", cmd_report)):
        p = sub.add_parser(name)
        p.add_argument("--index", required=True)
        if name == "report":
            p.add_argument("--consensus", required=True)
        p.add_argument("--params", help="calibration or parameter JSON (default: OUT/calibration.json)")
        p.add_argument("--train-end")
        p.add_argument("--s0", type=float)
        _add_common(p)
        p.set_defaults(func=func)

    si = sub.add_parser("simulate", help="distribution-level simulation")
    si.add_argument("--engine", choices=("particle", "neumann", "closed-form"), default="particle")
    si.add_argument("--variant", choices=("corrected", "paper"), default="corrected")
    si.add_argument("--index", help="index CSV; default is a constant level")
    si.add_argument("--x-level", type=float, default=2000.0)
    si.add_argument("--horizon", type=float)
    si.add_argument("--s0", type=float)
    si.add_argument("--rel-width", type=float, default=0.1)
    si.add_argument("--dt", type=float, default=1.0 / 2520)
    si.add_argument("--record-dt", type=float, default=1.0 / 252)
    si.add_argument("--n-particles", type=int, default=10_000)
    si.add_argument("--grid-points", type=int, default=2048)
    si.add_argument("--tol", type=float, default=1e-8)
    si.add_argument("--n-max", type=int, default=200)
    _add_params(si)
    _add_common(si)
    si.set_defaults(func=cmd_simulate)

    rp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    rp.add_argument("manifest")
    rp.set_defaults(func=cmd_replay, out=None)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.argv = argv
        if args.command in ("synth", "econ"):
            args.command = f"{args.command} {args.kind}"
        outputs = args.func(args)
        if args.command != "replay":
            _write_manifest(args, outputs)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except ConsensusKineticsError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
