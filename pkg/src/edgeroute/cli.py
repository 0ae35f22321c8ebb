"""Command line interface.

Subcommands: synth (generate a trace), run (replay at one threshold),
sweep (replay over a threshold grid), compare (sweep several routers).
Delimited output goes to --out or stdout; optional figures go to --plot.
Identical invocations produce byte-identical outputs.

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import fields
from io import StringIO
from pathlib import Path

from .costs import SystemParams
from .errors import ConfigError
from .evaluate import RouterConfig, RunMetrics, SweepPoint, compare, run, sweep
from .routing import (
    ConstantScoreProvider,
    RandomScoreProvider,
    ScoreProvider,
    TraceScoreProvider,
)
from .workload import PRESETS, SynthSpec, load_trace, synth_trace, write_trace

PARAMS_ENV_VAR = "EDGEROUTE_PARAMS"

_PARAM_NAMES = tuple(field.name for field in fields(SystemParams))
_SYNTH_NAMES = tuple(field.name for field in fields(SynthSpec))

_SYNTH_DEFAULTS = SynthSpec(
    n_records=1000,
    slm_acc=0.7,
    edge_acc=0.9,
    slm_resp_len=150.0,
    edge_resp_len=500.0,
    prompt_len_mean=80.0,
    score_correlation=1.0,
    seed=0,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _theta_grid(text: str) -> list[float]:
    """Parse start:end:count into an inclusive, evenly spaced grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"theta grid must be start:end:count, got {text!r}")
    start, end = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1:
        raise ValueError(f"theta grid count must be >= 1, got {count}")
    if not (math.isfinite(start) and math.isfinite(end)):
        raise ValueError(f"theta grid endpoints must be finite, got {text!r}")
    if count == 1:
        return [start]
    grid = [start + (end - start) * i / (count - 1) for i in range(count)]
    grid[0], grid[-1] = start, end
    return grid


def _parse_curve(text: str) -> dict:
    """Parse label=NAME,provider=KIND[,context=BOOL][,seed=INT][,score=FLOAT]."""
    spec: dict = {"context": True, "seed": 0, "score": 0.5}
    seen = set()
    for part in text.split(","):
        if "=" not in part:
            raise ValueError(f"curve field {part!r} is not key=value")
        key, value = part.split("=", 1)
        key = key.strip()
        if key in seen:
            raise ValueError(f"curve field {key!r} given twice")
        seen.add(key)
        if key == "label":
            spec["label"] = value
        elif key == "provider":
            if value not in ("trace", "random", "constant"):
                raise ValueError(f"curve provider must be trace|random|constant, got {value!r}")
            spec["provider"] = value
        elif key == "context":
            if value not in ("true", "false"):
                raise ValueError(f"curve context must be true|false, got {value!r}")
            spec["context"] = value == "true"
        elif key == "seed":
            spec["seed"] = int(value)
        elif key == "score":
            spec["score"] = float(value)
        else:
            raise ValueError(f"unknown curve field {key!r}")
    if "label" not in spec or "provider" not in spec:
        raise ValueError(f"curve {text!r} needs label= and provider=")
    return spec


def _load_json_object(path: str, what: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{what} file {path}: expected a JSON object")
    return raw


def _resolve_params(args) -> SystemParams:
    """Defaults, then preset alpha, then params file, then explicit flags.

    The theta field comes only from defaults or the params file; run's
    --theta flag is a decision-threshold override that may leave [0, 1]
    and never enters SystemParams.
    """
    values = {field.name: field.default for field in fields(SystemParams)}
    if getattr(args, "preset", None):
        values["alpha"] = PRESETS[args.preset].alpha
    params_path = args.params or os.environ.get(PARAMS_ENV_VAR)
    if params_path:
        raw = _load_json_object(params_path, "params")
        unknown = set(raw) - set(_PARAM_NAMES)
        if unknown:
            raise ConfigError(f"params file {params_path}: unknown fields {sorted(unknown)}")
        values.update(raw)
    for name in _PARAM_NAMES:
        if name == "theta":
            continue
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return SystemParams(**values)


def _make_provider(args) -> ScoreProvider:
    if args.provider == "trace":
        return TraceScoreProvider()
    if args.provider == "random":
        return RandomScoreProvider(seed=args.seed)
    return ConstantScoreProvider(value=args.score)


def _provider_echo(args) -> dict:
    echo: dict = {"kind": args.provider}
    if args.provider == "random":
        echo["seed"] = args.seed
    if args.provider == "constant":
        echo["score"] = args.score
    return echo


def _params_echo(params: SystemParams) -> dict:
    return {name: getattr(params, name) for name in _PARAM_NAMES}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _fmt_ms(seconds: float | None) -> str:
    return "" if seconds is None else f"{seconds * 1000.0:.3f}"


def _fmt(value) -> str:
    return "" if value is None else str(value)


def _metrics_cells(metrics: RunMetrics) -> list[str]:
    return [
        _fmt_ms(metrics.avg_latency),
        _fmt(metrics.avg_quality),
        _fmt(metrics.llm_usage),
        str(metrics.switch_count),
    ]


def _metrics_json(metrics: RunMetrics) -> dict:
    return {
        "avg_latency_ms": None if metrics.avg_latency is None else metrics.avg_latency * 1000.0,
        "avg_quality": metrics.avg_quality,
        "llm_usage": metrics.llm_usage,
        "switch_count": metrics.switch_count,
    }


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    import csv

    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _cmd_synth(args) -> int:
    values = {name: getattr(_SYNTH_DEFAULTS, name) for name in _SYNTH_NAMES}
    if args.preset:
        preset = PRESETS[args.preset].synth
        values = {name: getattr(preset, name) for name in _SYNTH_NAMES}
    if args.spec:
        raw = _load_json_object(args.spec, "synth spec")
        unknown = set(raw) - set(_SYNTH_NAMES)
        if unknown:
            raise ConfigError(f"synth spec file {args.spec}: unknown fields {sorted(unknown)}")
        values.update(raw)
    for name in _SYNTH_NAMES:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    spec = SynthSpec(**values)
    sessions = synth_trace(spec)
    write_trace(sessions, args.out)
    sys.stderr.write(
        f"wrote {spec.n_records} records in {len(sessions)} sessions to {args.out}\n"
    )
    return 0


def _cmd_run(args) -> int:
    params = _resolve_params(args)
    provider = _make_provider(args)
    trace = load_trace(args.trace)
    metrics = run(
        trace, params, provider, context_aware=args.context_aware, theta=args.theta
    )
    effective_theta = params.theta if args.theta is None else args.theta
    if args.format == "csv":
        text = _csv_text(
            ["avg_latency_ms", "avg_quality", "llm_usage", "switch_count", "turn_count"],
            [_metrics_cells(metrics) + [str(metrics.turn_count)]],
        )
    else:
        payload = {
            "config": {
                "command": "run",
                "trace": args.trace,
                "params": _params_echo(params),
                "provider": _provider_echo(args),
                "context_aware": args.context_aware,
                "theta": effective_theta,
            },
            "metrics": _metrics_json(metrics) | {"turn_count": metrics.turn_count},
        }
        text = _json_text(payload)
    _emit(text, args.out)
    return 0


def _sweep_rows(points: list[SweepPoint]) -> list[list[str]]:
    return [[_fmt(point.theta)] + _metrics_cells(point.metrics) for point in points]


def _sweep_json(points: list[SweepPoint]) -> list[dict]:
    return [{"theta": point.theta} | _metrics_json(point.metrics) for point in points]


def _cmd_sweep(args) -> int:
    params = _resolve_params(args)
    provider = _make_provider(args)
    trace = load_trace(args.trace)
    points = sweep(trace, params, provider, args.thetas, context_aware=args.context_aware)
    if args.format == "csv":
        text = _csv_text(
            ["theta", "avg_latency_ms", "avg_quality", "llm_usage", "switch_count"],
            _sweep_rows(points),
        )
    else:
        payload = {
            "config": {
                "command": "sweep",
                "trace": args.trace,
                "params": _params_echo(params),
                "provider": _provider_echo(args),
                "context_aware": args.context_aware,
                "thetas": sorted(args.thetas),
            },
            "points": _sweep_json(points),
        }
        text = _json_text(payload)
    _emit(text, args.out)
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(points, args.plot)
    return 0


def _cmd_compare(args) -> int:
    params = _resolve_params(args)
    trace = load_trace(args.trace)
    configs = []
    for spec in args.curve:
        if spec["provider"] == "trace":
            provider: ScoreProvider = TraceScoreProvider()
        elif spec["provider"] == "random":
            provider = RandomScoreProvider(seed=spec["seed"])
        else:
            provider = ConstantScoreProvider(value=spec["score"])
        configs.append(
            RouterConfig(label=spec["label"], provider=provider, context_aware=spec["context"])
        )
    curves = compare(trace, params, configs, args.thetas)
    if args.format == "csv":
        rows = []
        for label, points in curves.items():
            rows.extend([[label] + row for row in _sweep_rows(points)])
        text = _csv_text(
            ["label", "theta", "avg_latency_ms", "avg_quality", "llm_usage", "switch_count"],
            rows,
        )
    else:
        payload = {
            "config": {
                "command": "compare",
                "trace": args.trace,
                "params": _params_echo(params),
                "curves": [
                    {
                        "label": spec["label"],
                        "provider": spec["provider"],
                        "context_aware": spec["context"],
                    }
                    | ({"seed": spec["seed"]} if spec["provider"] == "random" else {})
                    | ({"score": spec["score"]} if spec["provider"] == "constant" else {})
                    for spec in args.curve
                ],
                "thetas": sorted(args.thetas),
            },
            "curves": {label: _sweep_json(points) for label, points in curves.items()},
        }
        text = _json_text(payload)
    _emit(text, args.out)
    if args.plot:
        from .plotting import plot_compare

        plot_compare(curves, args.plot)
    return 0


def _add_params_flags(parser) -> None:
    group = parser.add_argument_group(
        "system parameters",
        f"defaults, then --preset alpha, then the params file (--params or ${PARAMS_ENV_VAR}), "
        "then these flags; later wins",
    )
    group.add_argument("--params", help="JSON file with SystemParams fields")
    group.add_argument("--preset", choices=sorted(PRESETS), help="use this preset's alpha")
    group.add_argument("--gamma-s", dest="gamma_s", type=float, help="device seconds per token")
    group.add_argument("--gamma-e", dest="gamma_e", type=float, help="edge seconds per token")
    group.add_argument("--tau-r", dest="tau_r", type=float, help="router seconds per token")
    group.add_argument("--bandwidth", type=float, help="link tokens per second")
    group.add_argument("--overhead", type=float, help="link overhead seconds")
    group.add_argument("--alpha", type=float, help="latency weight in score fusion")


def _add_provider_flags(parser) -> None:
    parser.add_argument(
        "--provider",
        choices=("trace", "random", "constant"),
        default="trace",
        help="difficulty score source (default: trace)",
    )
    parser.add_argument("--seed", type=int, default=0, help="random provider seed")
    parser.add_argument("--score", type=float, default=0.5, help="constant provider score")
    parser.add_argument(
        "--context-aware",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="let cost estimates see accumulated context and switch costs",
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="edgeroute", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_synth = sub.add_parser("synth", help="generate a synthetic counterfactual trace")
    p_synth.add_argument("--preset", choices=sorted(PRESETS), help="benchmark-shaped targets")
    p_synth.add_argument("--spec", help="JSON file with SynthSpec fields")
    p_synth.add_argument("--n", dest="n_records", type=int, help="number of records")
    p_synth.add_argument("--slm-acc", dest="slm_acc", type=float)
    p_synth.add_argument("--edge-acc", dest="edge_acc", type=float)
    p_synth.add_argument("--slm-resp-len", dest="slm_resp_len", type=float)
    p_synth.add_argument("--edge-resp-len", dest="edge_resp_len", type=float)
    p_synth.add_argument("--prompt-len-mean", dest="prompt_len_mean", type=float)
    p_synth.add_argument("--score-correlation", dest="score_correlation", type=float)
    p_synth.add_argument("--quality-scale", dest="quality_scale", type=float)
    p_synth.add_argument("--turns-per-session", dest="turns_per_session", type=int)
    p_synth.add_argument("--seed", type=int, help="generator seed")
    p_synth.add_argument("--out", required=True, help="output JSONL path")
    p_synth.set_defaults(func=_cmd_synth)

    p_run = sub.add_parser("run", help="replay a trace at one threshold")
    p_run.add_argument("--trace", required=True, help="JSONL trace path")
    _add_params_flags(p_run)
    _add_provider_flags(p_run)
    p_run.add_argument(
        "--theta",
        type=float,
        help="decision threshold (may lie outside [0, 1]; default: params theta)",
    )
    p_run.add_argument("--format", choices=("csv", "json"), default="csv")
    p_run.add_argument("--out", help="output path (default: stdout)")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="replay over a threshold grid")
    p_sweep.add_argument("--trace", required=True)
    _add_params_flags(p_sweep)
    _add_provider_flags(p_sweep)
    p_sweep.add_argument(
        "--thetas",
        type=_theta_grid,
        default="0:1:101",
        help="grid as start:end:count, endpoints inclusive (default: 0:1:101)",
    )
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument("--out", help="output path (default: stdout)")
    p_sweep.add_argument("--plot", help="also render tradeoff curves to this image path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_cmp = sub.add_parser("compare", help="sweep several router configurations")
    p_cmp.add_argument("--trace", required=True)
    _add_params_flags(p_cmp)
    p_cmp.add_argument(
        "--curve",
        action="append",
        required=True,
        type=_parse_curve,
        help="label=NAME,provider=trace|random|constant[,context=true|false][,seed=N][,score=X];"
        " repeatable",
    )
    p_cmp.add_argument(
        "--thetas",
        type=_theta_grid,
        default="0:1:101",
        help="grid as start:end:count, endpoints inclusive (default: 0:1:101)",
    )
    p_cmp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_cmp.add_argument("--out", help="output path (default: stdout)")
    p_cmp.add_argument("--plot", help="also render tradeoff curves to this image path")
    p_cmp.set_defaults(func=_cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
