"""Command-line front end.

    extremal <simulate|fit|diagnose|preprocess> [--config FILE] [--seed N] [--out DIR] [key=value ...]

Configuration is a flat ``key=value`` file; later command-line pairs
override it. Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
import warnings

import numpy as np

from . import diagnostics as diag
from .errors import ConfigError, DataError, ExtremalError, InsufficientTailDataError, NumericalError
from .gc import GcParams, gc_fit, gc_simulate
from .glm import GlmParams, glm_fit, glm_simulate
from .gpd import GpdParams, default_location, gpd_fit_marginal
from .pipeline import Path, TrendSeasonModel, detrend_deseasonalize, load_csv
from .rng import RandomStream
from .snt import SntParams, snt_fit, snt_fit_with_marginal, snt_simulate
from .ssm import SsmParams, ssm_fit, ssm_simulate

logger = logging.getLogger("extremal")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
MODELS = ("ssm", "snt", "gc", "glm")
REQUIRED = object()

# model -> {key: default}; REQUIRED marks keys without a default
MODEL_KEYS = {
    "ssm": {
        "mu0": REQUIRED, "phi": REQUIRED, "log_sigma0": REQUIRED, "gamma": REQUIRED,
        "tau": REQUIRED, "xi": 0.0, "innovation_base": "normal", "x0": 0.0,
    },
    "snt": {"mu": REQUIRED, "sigma": REQUIRED, "xi": REQUIRED, "beta": REQUIRED, "x0": None},
    "gc": {"mu": REQUIRED, "sigma": REQUIRED, "xi": REQUIRED, "rho": REQUIRED},
    "glm": {
        "mu": REQUIRED, "beta1": REQUIRED, "beta2": REQUIRED, "gamma1": REQUIRED,
        "gamma2": REQUIRED, "x0": None,
    },
}

FIT_KEYS = {
    "ssm": {"tau": REQUIRED, "innovation_base": "normal"},
    "snt": {"mu": None, "sigma": None, "xi": None},
    "gc": {"mu": None},
    "glm": {"mu": None},
}

COMMON_KEYS = {"seed": None, "out": "."}

STRING_KEYS = {"model", "innovation_base", "input", "simulated", "out", "model_file", "marginal", "lags"}
INT_KEYS = {"seed", "n", "paths", "max_lag"}
BOOL_KEYS = {"inverse"}


def fmt(x) -> str:
    """12 significant digits, '.' as decimal separator."""
    return format(float(x), ".12g")


def fmt_exact(x) -> str:
    """Shortest round-trip representation."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# configuration


def read_config_file(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            out[key.strip()] = value.strip()
    return out


def parse_overrides(pairs) -> dict[str, str]:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _convert(key, value):
    if value is None or not isinstance(value, str):
        return value
    try:
        if key in STRING_KEYS:
            return value
        if key in INT_KEYS:
            return int(value)
        if key in BOOL_KEYS:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return low in ("true", "1", "yes")
        x = float(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {value!r}") from None
    if not math.isfinite(x) and key != "tau":
        raise ConfigError(f"{key} must be finite")
    return x


def resolve(raw: dict[str, str], schema: dict) -> dict:
    """Check ``raw`` against ``schema`` exactly and convert values."""
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    missing = sorted(k for k, d in schema.items() if d is REQUIRED and k not in raw)
    if missing:
        raise ConfigError(f"missing configuration keys: {', '.join(missing)}")
    cfg = {k: _convert(k, raw.get(k, d)) for k, d in schema.items()}
    seed = cfg.get("seed")
    if seed is not None and not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    return cfg


def _model_of(raw):
    model = raw.get("model")
    if model is None:
        raise ConfigError("missing configuration key: model")
    if model not in MODELS:
        raise ConfigError(f"model must be one of {', '.join(MODELS)}, got {model!r}")
    return model


def build_params(model: str, cfg: dict):
    """Model parameter object and start value from a resolved config."""
    if model == "ssm":
        params = SsmParams(
            cfg["mu0"], cfg["phi"], cfg["log_sigma0"], cfg["gamma"], cfg["tau"], cfg["xi"], cfg["innovation_base"]
        )
        return params, cfg["x0"]
    if model == "glm":
        params = GlmParams(cfg["mu"], cfg["beta1"], cfg["beta2"], cfg["gamma1"], cfg["gamma2"])
        return params, cfg["mu"] if cfg["x0"] is None else cfg["x0"]
    g = GpdParams(cfg["mu"], cfg["sigma"], cfg["xi"])
    if model == "snt":
        return SntParams(g, cfg["beta"]), cfg["x0"]
    return GcParams(g, cfg["rho"]), None


def simulate_path(model, params, x0, n, stream) -> Path:
    if model == "ssm":
        return ssm_simulate(params, x0, n, stream)
    if model == "snt":
        return snt_simulate(params, n, stream, x0)
    if model == "gc":
        return gc_simulate(params, n, stream)
    return glm_simulate(params, x0, n, stream)


# ---------------------------------------------------------------------------
# output


class OutputBundle:
    """Collects files in memory; :meth:`commit` writes them all via rename."""

    def __init__(self, directory):
        self.directory = directory
        self.files: dict[str, str] = {}

    def add(self, name, text):
        self.files[name] = text

    def commit(self):
        os.makedirs(self.directory, exist_ok=True)
        staged = []
        try:
            for name, text in self.files.items():
                fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=f".{name}.", suffix=".tmp")
                with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
                staged.append((tmp, os.path.join(self.directory, name)))
        except BaseException:
            for tmp, _ in staged:
                os.unlink(tmp)
            raise
        for tmp, final in staged:
            os.replace(tmp, final)
        return [final for _, final in staged]


def path_csv(path: Path, header_comment: str | None = None, exact: bool = False) -> str:
    f = fmt_exact if exact else fmt
    lines = [f"# {header_comment}"] if header_comment else []
    if path.timestamps is not None:
        lines.append("date,value")
        lines += [f"{d},{f(v)}" for d, v in zip(path.timestamps.astype(str), path.values)]
    else:
        lines.append("t,value")
        lines += [f"{t},{f(v)}" for t, v in enumerate(path.values, start=1)]
    return "\n".join(lines) + "\n"


def kv_text(pairs, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"{k}={v}" for k, v in pairs]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(raw: dict[str, str]) -> list[str]:
    model = _model_of(raw)
    schema = {"model": REQUIRED, "seed": REQUIRED, "n": REQUIRED, "paths": 1, "out": "."}
    schema.update(MODEL_KEYS[model])
    cfg = resolve(raw, schema)
    if cfg["n"] < 1 or cfg["paths"] < 1:
        raise ConfigError("n and paths must be positive")
    params, x0 = build_params(model, cfg)
    base = RandomStream(cfg["seed"])

    bundle = OutputBundle(cfg["out"])
    param_text = " ".join(f"{k}={_show(cfg[k])}" for k in MODEL_KEYS[model] if cfg[k] is not None)
    for k in range(cfg["paths"]):
        path = simulate_path(model, params, x0, cfg["n"], base.substream(k))
        name = "simulated.csv" if cfg["paths"] == 1 else f"simulated_{k + 1:03d}.csv"
        comment = f"model={model} seed={cfg['seed']} path={k + 1} n={cfg['n']} {param_text}"
        bundle.add(name, path_csv(path, comment))
    return bundle.commit()


def _show(v):
    return fmt(v) if isinstance(v, float) else str(v)


def _fit_model(model, series, cfg):
    """Return (ordered key/value pairs, extra comment lines)."""
    if model == "ssm":
        fit = ssm_fit(series, cfg["tau"], cfg["innovation_base"])
        p = fit.params
        pairs = [("mu0", p.mu0), ("phi", p.phi), ("log_sigma0", p.log_sigma0), ("gamma", p.gamma),
                 ("tau", p.tau), ("xi", p.xi), ("innovation_base", p.innovation_base)]
        extra = [f"tail_exceedances={fit.tail.nobs}", f"tail_loglik={fmt(fit.tail.loglik)}"]
        return pairs, extra
    if model == "snt":
        if all(cfg[k] is not None for k in ("mu", "sigma", "xi")):
            g = GpdParams(cfg["mu"], cfg["sigma"], cfg["xi"])
            sfit = snt_fit(series, g)
            extra = ["marginal=given"]
        elif cfg["sigma"] is None and cfg["xi"] is None:
            sfit, marginal = snt_fit_with_marginal(series, cfg["mu"])
            g = marginal.params
            extra = ["marginal=fitted", f"marginal_loglik={fmt(marginal.loglik)}"]
        else:
            raise ConfigError("give all of mu, sigma, xi for a known marginal, or at most mu")
        pairs = [("mu", g.mu), ("sigma", g.sigma), ("xi", g.xi), ("beta", sfit.beta)]
        return pairs, extra + [f"holds={sfit.n_holds}", f"profile_loglik={fmt(sfit.loglik)}"]
    if model == "gc":
        fit = gc_fit(series, cfg["mu"])
        g = fit.params.gpd
        pairs = [("mu", g.mu), ("sigma", g.sigma), ("xi", g.xi), ("rho", fit.params.rho)]
        return pairs, [f"marginal_loglik={fmt(fit.marginal.loglik)}"]
    mu = cfg["mu"]
    if mu is None:
        mu = default_location(series.values)
    fit = glm_fit(series, mu)
    p = fit.params
    pairs = [("mu", p.mu), ("beta1", p.beta1), ("beta2", p.beta2), ("gamma1", p.gamma1), ("gamma2", p.gamma2)]
    return pairs, [f"loglik={fmt(fit.loglik)}", f"null_loglik={fmt(fit.null_loglik)}",
                   f"lr_statistic={fmt(fit.lr_statistic)}"]


def cmd_fit(raw: dict[str, str]) -> list[str]:
    model = _model_of(raw)
    schema = {"model": REQUIRED, "input": REQUIRED, **COMMON_KEYS, **FIT_KEYS[model]}
    cfg = resolve(raw, schema)
    series = load_csv(cfg["input"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            pairs, extra = _fit_model(model, series, cfg)
        except InsufficientTailDataError as exc:
            if exc.partial is not None:
                p = exc.partial.params
                print(
                    f"stage-one estimates: mu0={fmt(p.mu0)} phi={fmt(p.phi)} "
                    f"log_sigma0={fmt(p.log_sigma0)} gamma={fmt(p.gamma)}",
                    file=sys.stderr,
                )
            raise
    comments = [f"fit of {cfg['input']} ({len(series)} observations)"] + extra
    comments += [f"warning: {w.message}" for w in caught]
    pairs = [("model", model)] + [(k, _show(v)) for k, v in pairs]
    text = kv_text(pairs, comments)
    bundle = OutputBundle(cfg["out"])
    bundle.add("fit_params.txt", text)
    files = bundle.commit()
    sys.stdout.write(text)
    return files


def _parse_lags(text):
    try:
        lags = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise ConfigError(f"bad lags list {text!r}") from None
    if not lags or any(lag < 1 for lag in lags):
        raise ConfigError("lags must be positive integers")
    return lags


def _marginal_for(series, cfg):
    if all(cfg[k] is not None for k in ("mu", "sigma", "xi")):
        return GpdParams(cfg["mu"], cfg["sigma"], cfg["xi"])
    return gpd_fit_marginal(series.values, cfg["mu"]).params


def cmd_diagnose(raw: dict[str, str]) -> list[str]:
    schema = {
        "input": REQUIRED, "simulated": REQUIRED, "threshold": REQUIRED, "lags": "1,2,5,10",
        "max_lag": 10, "marginal": "empirical", "model": None, "mu": None, "sigma": None, "xi": None,
        **COMMON_KEYS,
    }
    cfg = resolve(raw, schema)
    lags = _parse_lags(cfg["lags"])
    if cfg["marginal"] not in ("empirical", "parametric"):
        raise ConfigError("marginal must be 'empirical' or 'parametric'")
    if cfg["model"] is not None and cfg["model"] not in MODELS:
        raise ConfigError(f"model must be one of {', '.join(MODELS)}")
    series = {"data": load_csv(cfg["input"]), "simulated": load_csv(cfg["simulated"])}
    glm_source = cfg["model"] == "glm" or any("model=glm" in s.meta.split() for s in series.values())

    reports, marginals = {}, {}
    for label, s in series.items():
        marginals[label] = _marginal_for(s, cfg)
        pp_marginal = marginals[label] if cfg["marginal"] == "parametric" else None
        reports[label] = diag.diagnose(
            s, cfg["threshold"], marginals[label], lags, cfg["max_lag"], pp=not glm_source, pp_marginal=pp_marginal
        )

    bundle = OutputBundle(cfg["out"])
    for label, rep in reports.items():
        for lag, pp in rep.pp.items():
            rows = "\n".join(f"{fmt(u)},{fmt(v)}" for u, v in zip(pp.u, pp.v))
            bundle.add(f"pp_{label}_lag{lag}.csv", f"u,v\n{rows}\n" if rows else "u,v\n")
        gaps = rep.inter_arrivals.gaps
        bundle.add(f"gaps_{label}.csv", "gap\n" + "".join(f"{int(g)}\n" for g in gaps))

    ks_lines = ["series,n,mu,sigma,xi,ks_distance,critical_1pct"]
    for label, rep in reports.items():
        m = marginals[label]
        ks_lines.append(
            f"{label},{len(series[label])},{fmt(m.mu)},{fmt(m.sigma)},{fmt(m.xi)},{fmt(rep.ks)},{fmt(rep.ks_critical)}"
        )
    bundle.add("ks.csv", "\n".join(ks_lines) + "\n")

    depth = min(len(reports["data"].acf), len(reports["simulated"].acf))
    acf_lines = ["lag,data,simulated"] + [
        f"{k},{fmt(reports['data'].acf[k])},{fmt(reports['simulated'].acf[k])}" for k in range(depth)
    ]
    bundle.add("acf.csv", "\n".join(acf_lines) + "\n")

    ia = {label: rep.inter_arrivals for label, rep in reports.items()}
    summary = [
        ("threshold", fmt(cfg["threshold"])),
        ("exceedances_data", len(ia["data"]) + (0 if ia["data"].first_index is None else 1)),
        ("exceedances_simulated", len(ia["simulated"]) + (0 if ia["simulated"].first_index is None else 1)),
        ("mean_gap_data", fmt(ia["data"].mean_gap)),
        ("mean_gap_simulated", fmt(ia["simulated"].mean_gap)),
        ("gap_chisq_distance", fmt(diag.gap_distance(ia["data"].gaps, ia["simulated"].gaps))),
        ("pp_transform", cfg["marginal"]),
    ]
    notes = []
    if glm_source:
        notes.append(reports["data"].pp_note)
    for label, rep in ia.items():
        if rep.insufficient:
            notes.append(f"{label}: fewer than two exceedances; no gaps")
    bundle.add("summary.txt", kv_text(summary, notes))
    return bundle.commit()


def read_trend_model(path) -> TrendSeasonModel:
    raw = read_config_file(path)
    try:
        seasonal = np.array([float(raw[f"day_{k:03d}"]) for k in range(1, 366)])
        return TrendSeasonModel(
            np.datetime64(raw["origin"], "D"), float(raw["slope"]), float(raw["intercept"]), seasonal
        )
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: malformed trend/season model ({exc})") from None


def trend_model_text(model: TrendSeasonModel) -> str:
    pairs = [("origin", str(model.origin)), ("slope", fmt_exact(model.slope)), ("intercept", fmt_exact(model.intercept))]
    pairs += [(f"day_{k + 1:03d}", fmt_exact(v)) for k, v in enumerate(model.seasonal)]
    return kv_text(pairs, ["additive trend and day-of-year model"])


def cmd_preprocess(raw: dict[str, str]) -> list[str]:
    schema = {"input": REQUIRED, "inverse": False, "model_file": None, **COMMON_KEYS}
    cfg = resolve(raw, schema)
    series = load_csv(cfg["input"])
    bundle = OutputBundle(cfg["out"])
    if cfg["inverse"]:
        if cfg["model_file"] is None:
            raise ConfigError("inverse preprocessing needs model_file")
        restored = read_trend_model(cfg["model_file"]).retransform(series)
        bundle.add("reconstructed.csv", path_csv(restored, exact=True))
    else:
        resid, model = detrend_deseasonalize(series)
        bundle.add("residuals.csv", path_csv(resid, f"residuals of {cfg['input']}", exact=True))
        bundle.add("trend_season.txt", trend_model_text(model))
    return bundle.commit()


COMMANDS = {
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "diagnose": cmd_diagnose,
    "preprocess": cmd_preprocess,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="extremal", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--seed", help="random seed (overrides the config)")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("overrides", nargs="*", metavar="key=value")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_intermixed_args(argv)
    try:
        raw = read_config_file(args.config) if args.config else {}
        raw.update(parse_overrides(args.overrides))
        if args.seed is not None:
            raw["seed"] = args.seed
        if args.out is not None:
            raw["out"] = args.out
        if args.command != "simulate":
            raw.pop("seed", None)
        for path in COMMANDS[args.command](raw):
            logger.info("wrote %s", path)
    except ConfigError as exc:
        print(f"extremal: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"extremal: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"extremal: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ExtremalError as exc:
        print(f"extremal: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
