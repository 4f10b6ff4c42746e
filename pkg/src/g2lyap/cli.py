"""Command-line driver.

Every subcommand writes ``<out-dir>/<subcommand>.json`` and, when the result
is a table, ``<out-dir>/<subcommand>.csv``. Option values come from built-in
defaults, then ``--config FILE`` (a JSON object keyed by option name), then
flags on the command line, later sources winning.

Exit status: 0 success, 1 the run finished but a check failed, 2 usage or
input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .engine import (
    WALK_KINDS,
    SpectrumHints,
    WalkConfig,
    analyze_spectrum,
    coupled_estimate,
    estimate_exponents,
    exterior_square_check,
    mirror_check,
)
from .exact_linalg import to_fraction
from .functors import parse_functor
from .hodge import VHSProfile, compare_prediction, conjecture_prediction, kontsevich_sum
from .monodromy import (
    BUILTIN_FILES,
    CocycleGenerators,
    DatasetError,
    certified_generators,
    load_builtin,
    resolve_dataset,
    verify_invariance,
)
from .roots import predict_spectrum, recover_lyapunov_vector, representation_weights

OUTPUT_DIR_ENV = "G2LYAP_OUTPUT_DIR"
EXIT_OK, EXIT_CHECKS_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- value converters ------------------------------------------------------------


def _int(v: Any) -> int:
    if isinstance(v, bool):
        raise ValueError(f"not an integer: {v!r}")
    if isinstance(v, int):
        return v
    s = str(v).strip().replace("_", "")
    try:
        return int(s)
    except ValueError:
        f = float(s)
        if not f.is_integer():
            raise ValueError(f"not an integer: {v!r}") from None
        return int(f)


def _float(v: Any) -> float:
    if isinstance(v, bool):
        raise ValueError(f"not a number: {v!r}")
    return float(v)


def _rational(v: Any) -> Fraction:
    if isinstance(v, float):
        raise ValueError(f"give rationals as integers or 'p/q' strings, not floats: {v!r}")
    return to_fraction(v if isinstance(v, int) else str(v))


def _number(v: Any):
    """Exact when the text is an integer or p/q, float otherwise."""
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return v
    s = str(v).strip()
    try:
        r = Fraction(s)
    except ValueError:
        raise ValueError(f"not a number: {v!r}") from None
    if "." in s or "e" in s.lower():
        return float(s)
    return int(r) if r.denominator == 1 else r


def _triple(v: Any) -> tuple:
    items = v if isinstance(v, (list, tuple)) else str(v).split(",")
    if len(items) != 3:
        raise ValueError(f"expected three comma-separated numbers, got {v!r}")
    return tuple(_number(x) for x in items)


def _int_list(v: Any) -> list[int]:
    items = v if isinstance(v, (list, tuple)) else str(v).split(",")
    return [_int(x) for x in items]


def _str(v: Any) -> str:
    return str(v)


def _choice(*options: str) -> Callable[[Any], str]:
    def conv(v: Any) -> str:
        if v not in options:
            raise ValueError(f"{v!r} not one of {options}")
        return v

    return conv


def _bool(v: Any) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).lower()
    if s in ("1", "true", "yes"):
        return True
    if s in ("0", "false", "no"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _str_list(v: Any) -> list[str]:
    return [str(x) for x in v] if isinstance(v, (list, tuple)) else [str(v)]


def _degrees(v: Any) -> dict[str, str]:
    if isinstance(v, dict):
        return {str(k): str(_rational(x)) for k, x in v.items()}
    out = {}
    for item in _str_list(v):
        for part in item.split(","):
            if "=" not in part:
                raise ValueError(f"degrees are given as LABEL=VALUE, got {part!r}")
            k, x = part.split("=", 1)
            out[k.strip()] = str(_rational(x.strip()))
    return out


# -- option tables ---------------------------------------------------------------

# name -> (converter, default, help); default None means "not set"
_WALK_OPTIONS = {
    "dataset": (_str, "g2-elliptic-surface", "builtin dataset name or path to a dataset JSON file"),
    "steps": (_int, 1_000_000, "total walk steps after burn-in, split across blocks"),
    "blocks": (_int, 20, "independent blocks for standard errors"),
    "walk": (_choice(*WALK_KINDS), "non-backtracking", "random word process"),
    "renorm_interval": (_int, 1, "steps between re-orthonormalizations"),
    "seed": (_int, 0, "master seed (64-bit)"),
    "burn_in": (_int, 1000, "discarded steps at the start of every block"),
    "workers": (_int, 1, "threads running blocks concurrently"),
    "inverses": (_bool, True, "draw inverse generators as well"),
    "tol_sigma": (_float, 3.0, "tolerance of every statistical check, in standard errors"),
}

OPTIONS: dict[str, dict[str, tuple]] = {
    "datasets": {},
    "verify": {
        "dataset": _WALK_OPTIONS["dataset"],
        "max_relation_length": (_int, 4, "longest reduced word searched for relations (<= 8)"),
    },
    "predict": {
        "gamma": (_triple, None, "Lyapunov vector g1,g2,g3 (sum zero, in the positive chamber)"),
        "rep": (_choice("standard", "adjoint"), "standard", "representation"),
    },
    "recover": {
        "exponents": (_triple, None, "top three exponents a,b,c with a >= b >= c >= 0"),
        "tol": (_float, 0.0, "allowed |a - (b + c)|"),
    },
    "estimate": dict(_WALK_OPTIONS),
    "functor-estimate": {
        **_WALK_OPTIONS,
        "functor": (_str_list, ["ext:2", "dual"], "functor spec, repeatable: identity|dual|ext:k|sym:k|tensor(a,b)|sum(a;b)"),
    },
    "formula": {
        "genus": (_int, None, "genus of the base curve"),
        "punctures": (_int, None, "number of punctures"),
        "degree": (_rational, None, "bundle degree for the plain weight-one sum formula"),
        "profile": (_str, None, "VHS profile JSON file"),
        "weight": (_int, None, "weight n of the variation"),
        "hodge_numbers": (_int_list, None, "Hodge numbers h^{n,0},...,h^{0,n}"),
        "k": (_int, None, "number of positive exponents"),
        "degrees": (_degrees, None, "bundle degrees LABEL=VALUE, e.g. 'H^{2,0}=1'"),
        "estimate": (_str, None, "estimate JSON to compare the prediction against"),
        "scale": (_float, None, "time-normalization factor applied to estimated exponents"),
        "tol_sigma": _WALK_OPTIONS["tol_sigma"],
    },
}


@dataclass
class RunConfig:
    subcommand: str
    options: dict[str, Any]
    out_dir: str
    config_file: str | None = None
    write: bool = True
    sources: dict[str, str] = field(default_factory=dict)

    def echo(self) -> dict[str, Any]:
        return {
            "subcommand": self.subcommand,
            "config_file": self.config_file,
            "options": {k: _jsonable(v) for k, v in sorted(self.options.items())},
        }

    def walk_config(self) -> WalkConfig:
        o = self.options
        return WalkConfig(
            steps=o["steps"],
            walk_kind=o["walk"],
            renorm_interval=o["renorm_interval"],
            blocks=o["blocks"],
            master_seed=o["seed"],
            burn_in=o["burn_in"],
            workers=o["workers"],
            inverses=o["inverses"],
        )


def _jsonable(v: Any) -> Any:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="g2lyap", description="G2 monodromy certification and Lyapunov spectra")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    for name, opts in OPTIONS.items():
        p = sub.add_parser(name, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file of option values; flags override it")
        p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_DIR_ENV} or .)")
        p.add_argument("--no-write", action="store_true", help="print the payload instead of writing files")
        for key, (_, default, help_text) in opts.items():
            flag = "--" + key.replace("_", "-")
            shown = "" if default is None else f" (default {default})"
            if key == "functor":
                p.add_argument(flag, dest=key, action="append", help=help_text + shown)
            elif key == "inverses":
                p.add_argument("--no-inverses", dest=key, action="store_const", const="false", help="draw generators only")
            else:
                p.add_argument(flag, dest=key, help=help_text + shown)
    return parser


def parse_run_config(argv: list[str]) -> RunConfig:
    """Merge defaults, the optional config file, and flags into a RunConfig."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand", None)
    if sub is None:
        raise UsageError("g2lyap: a subcommand is required: " + ", ".join(OPTIONS))
    opts = OPTIONS[sub]
    config_file = ns.pop("config", None)
    out_dir = ns.pop("out_dir", None) or os.environ.get(OUTPUT_DIR_ENV) or "."
    write = not ns.pop("no_write", False)

    merged = {k: d for k, (_, d, _) in opts.items() if d is not None}
    sources = {k: "default" for k in merged}
    if config_file:
        try:
            data = json.loads(Path(config_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {config_file}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        for key, value in data.items():
            k = key.replace("-", "_")
            if k not in opts:
                raise UsageError(f"unknown key {key!r} in config file for {sub}")
            merged[k] = _convert(sub, k, value)
            sources[k] = "file"
    for k, value in ns.items():
        merged[k] = _convert(sub, k, value)
        sources[k] = "flag"
    return RunConfig(sub, merged, out_dir, config_file, write, sources)


def _convert(sub: str, key: str, value: Any) -> Any:
    conv = OPTIONS[sub][key][0]
    try:
        return conv(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise UsageError(f"bad value for --{key.replace('_', '-')}: {exc}") from exc


# -- pipelines ---------------------------------------------------------------------


def _require(config: RunConfig, *keys: str) -> None:
    missing = [k for k in keys if config.options.get(k) is None]
    if missing:
        raise UsageError(f"{config.subcommand}: missing " + ", ".join("--" + k.replace("_", "-") for k in missing))


def _load(config: RunConfig) -> CocycleGenerators:
    try:
        return resolve_dataset(config.options["dataset"])
    except DatasetError as exc:
        raise UsageError(str(exc)) from exc


def _run_datasets(config):
    rows = []
    for name in sorted(BUILTIN_FILES):
        ds = load_builtin(name)
        rows.append({"name": name, "dim": ds.dim, "generators": ds.labels, "checksum": ds.checksum, "metadata": ds.metadata})
    table = [["name", "dim", "generators", "checksum"]] + [
        [r["name"], r["dim"], " ".join(r["generators"]), r["checksum"]] for r in rows
    ]
    return {"datasets": rows}, table, None, True


def _run_verify(config):
    ds = _load(config)
    report = verify_invariance(ds, config.options["max_relation_length"])
    return report.to_dict(), None, ds.checksum, report.certified


def _run_predict(config):
    _require(config, "gamma")
    rep = representation_weights(config.options["rep"])
    spectrum = predict_spectrum(rep, config.options["gamma"])
    table = [["index", "value", "std_error"]] + [[i + 1, str(v), 0] for i, v in enumerate(spectrum)]
    result = {"representation": rep.name, "gamma": _jsonable(config.options["gamma"]), "spectrum": [_jsonable(_num(v)) for v in spectrum]}
    return result, table, None, True


def _num(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return int(v)
    return v


def _run_recover(config):
    _require(config, "exponents")
    a, b, c = config.options["exponents"]
    gamma = recover_lyapunov_vector(a, b, c, config.options["tol"])
    std = predict_spectrum(representation_weights("standard"), gamma)
    return {"gamma": _jsonable([_num(g) for g in gamma.coords]), "standard_spectrum": _jsonable([_num(v) for v in std])}, None, None, True


def _hints_for(ds: CocycleGenerators, report, fallback: bool) -> SpectrumHints:
    unimodular = all(abs(g.determinant) == 1 for g in report.generators)
    if fallback or not report.certified:
        return SpectrumHints(expect_symmetry=report.certified or fallback, expect_unit_determinant=unimodular)
    g2 = ds.dim == 7 and (report.trilinear_dim or 0) >= 1
    return SpectrumHints(
        expect_zero=ds.dim % 2 == 1,
        expect_symmetry=True,
        expect_g2_additivity=g2,
        expect_gap=g2,
        expect_unit_determinant=unimodular,
    )


def _prepare_walk(config):
    ds = _load(config)
    report = verify_invariance(ds, max_relation_length=0)
    gens = certified_generators(ds, report)
    fallback = gens is not ds
    try:
        walk = config.walk_config()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return ds, report, gens, fallback, walk


def _estimate_table(results):
    rows = [["functor", "index", "value", "std_error"]]
    for r in results:
        rows += [[r.functor, i + 1, repr(float(v)), repr(float(s))] for i, (v, s) in enumerate(zip(r.exponents, r.std_errors))]
    return rows


def _run_estimate(config):
    ds, report, gens, fallback, walk = _prepare_walk(config)
    result = estimate_exponents(gens, walk)
    diag = analyze_spectrum(result, _hints_for(ds, report, fallback), config.options["tol_sigma"])
    payload = {
        **result.to_dict(),
        "dataset": ds.name,
        "generators_used": gens.labels,
        "fallback": fallback,
        "certified": report.certified,
        "diagnostics": diag.to_dict(),
    }
    table = [row[1:] for row in _estimate_table([result])]
    return payload, table, ds.checksum, diag.passed


def _run_functor_estimate(config):
    ds, report, gens, fallback, walk = _prepare_walk(config)
    try:
        specs = [parse_functor(s) for s in config.options["functor"]]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    results = coupled_estimate(gens, specs, walk)
    tol = config.options["tol_sigma"]
    identity = results[0]
    diag = analyze_spectrum(identity, _hints_for(ds, report, fallback), tol)
    checks = {}
    by_name = {r.functor: r for r in results}
    if "dual" in by_name:
        checks["dual_mirror"] = mirror_check(identity, by_name["dual"], tol)
    if "ext:2" in by_name:
        checks["exterior_square"] = exterior_square_check(identity, by_name["ext:2"], tol)
    passed = diag.passed and all(c["passed"] for c in checks.values())
    payload = {
        "dataset": ds.name,
        "generators_used": gens.labels,
        "fallback": fallback,
        "certified": report.certified,
        "config": walk.to_dict(),
        "results": [r.to_dict() for r in results],
        "diagnostics": diag.to_dict(),
        "functor_checks": checks,
    }
    return payload, _estimate_table(results), ds.checksum, passed


def _run_formula(config):
    o = config.options
    if o.get("profile") or o.get("weight") is not None:
        if o.get("profile"):
            try:
                data = json.loads(Path(o["profile"]).read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read profile {o['profile']}: {exc}") from exc
        else:
            _require(config, "weight", "hodge_numbers", "genus", "punctures")
            data = {k: o[k] for k in ("weight", "hodge_numbers", "genus", "punctures")}
        if o.get("degrees"):
            data = {**data, "degrees": {**data.get("degrees", {}), **o["degrees"]}}
        profile = VHSProfile.from_dict(data)
        _require(config, "k")
        pred = conjecture_prediction(profile, o["k"])
        payload = {"profile": profile.to_dict(), "k": o["k"], "prediction": pred.to_dict()}
        if pred.predicted_sum is not None:
            payload["sum"] = str(pred.predicted_sum)
        passed = True
        if o.get("estimate"):
            _require(config, "scale")
            est = _load_estimate(o["estimate"])
            cmp = compare_prediction(pred, est, o["scale"], o["tol_sigma"])
            payload["comparison"] = cmp.to_dict()
            passed = cmp.consistent
        return payload, None, None, passed
    _require(config, "genus", "punctures", "degree")
    total = kontsevich_sum(o["genus"], o["punctures"], o["degree"])
    return {"genus": o["genus"], "punctures": o["punctures"], "degree": str(o["degree"]), "sum": str(total)}, None, None, True


def _load_estimate(path: str):
    import numpy as np

    from .engine import EstimationResult

    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read estimate {path}: {exc}") from exc
    result = data.get("result", data)
    return EstimationResult(
        np.asarray(result["exponents"]), np.asarray(result["std_errors"]), np.asarray(result["blocks"]), result.get("steps_used", 0)
    )


PIPELINES = {
    "datasets": _run_datasets,
    "verify": _run_verify,
    "predict": _run_predict,
    "recover": _run_recover,
    "estimate": _run_estimate,
    "functor-estimate": _run_functor_estimate,
    "formula": _run_formula,
}


def build_payload(config: RunConfig) -> tuple[dict[str, Any], list | None, bool]:
    result, table, checksum, passed = PIPELINES[config.subcommand](config)
    payload = {
        "tool": "g2lyap",
        "version": __version__,
        "subcommand": config.subcommand,
        "config": config.echo(),
        "dataset_checksum": checksum,
        "passed": passed,
        "result": result,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return payload, table, passed


def execute(config: RunConfig) -> int:
    try:
        payload, table, passed = build_payload(config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ZeroDivisionError, ArithmeticError) as exc:
        print(f"error: {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if config.write:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path = out / f"{config.subcommand}.json"
        json_path.write_text(text, encoding="utf-8")
        written = [json_path]
        if table:
            csv_path = out / f"{config.subcommand}.csv"
            with open(csv_path, "w", newline="", encoding="utf-8") as fh:
                csv.writer(fh, lineterminator="\n").writerows(table)
            written.append(csv_path)
        print(f"{config.subcommand}: {'ok' if passed else 'CHECKS FAILED'}; wrote " + ", ".join(map(str, written)))
    else:
        sys.stdout.write(text)
    return EXIT_OK if passed else EXIT_CHECKS_FAILED


def _origin(exc: BaseException) -> str:
    """Module of the innermost frame that raised, e.g. ``g2lyap.roots``."""
    tb = exc.__traceback__
    name = "g2lyap"
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("g2lyap"):
            name = mod
        tb = tb.tb_next
    return name


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_run_config(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(config)


if __name__ == "__main__":
    sys.exit(main())
