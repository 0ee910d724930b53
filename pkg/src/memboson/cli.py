"""Command-line entry point wiring the modules into reproducible runs.

One binary, subcommand style. Options may be preloaded from a plain-text
``key=value`` config file (``--config``); explicit flags win. Every run
writes a summary JSON with the resolved configuration (seed included) so any
output can be replayed exactly. Failures print one machine-readable JSON
line to stderr and exit with a distinct code: 2 usage, 3 invalid
configuration or input data, 4 missing file, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass

from . import analysis, eventstream, matrices, network, permanent, pipeline, sampling
from .errors import ConfigError, MembosonError

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_MISSING_FILE = 4

# defaults mirroring the reference experiment: 15 usable chip outputs, 80 MHz
# pulse train, 2 ns coincidence window, 0.9/1.5 validation thresholds
DEFAULT_MODES = 15
DEFAULT_PERIOD_NS = eventstream.PULSE_PERIOD_NS
DEFAULT_WINDOW_NS = pipeline.DEFAULT_WINDOW_NS
DEFAULT_A1 = analysis.DEFAULT_A1
DEFAULT_A2 = analysis.DEFAULT_A2


@dataclass
class RunConfig:
    """Resolved run description, persisted to the summary JSON."""

    command: str
    options: dict
    outputs: list
    metrics: dict


def _parse_values(text: str):
    """Parse ``a..b``, ``a..b:step``, or comma-separated integer lists."""
    text = text.strip()
    if ".." in text:
        head, _, tail = text.partition("..")
        if ":" in tail:
            stop_s, _, step_s = tail.partition(":")
            start, stop, step = int(head), int(stop_s), int(step_s)
        else:
            start, stop, step = int(head), int(tail), 1
        return list(range(start, stop + 1, step))
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _load_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line (expected key=value): {line!r}")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _write_summary(args, outputs, metrics) -> str:
    options = {
        k: v for k, v in vars(args).items() if k not in ("func", "summary") and v is not None
    }
    cfg = RunConfig(
        command=args.command,
        options={k: (list(v) if isinstance(v, tuple) else v) for k, v in options.items()},
        outputs=list(outputs),
        metrics=metrics,
    )
    path = args.summary
    if path is None:
        base = outputs[0] if outputs else f"memboson-{args.command}"
        path = f"{base}.summary.json"
    with open(path, "w", encoding="ascii") as fh:
        json.dump(asdict(cfg), fh, indent=1, sort_keys=True, default=str)
        fh.write("\n")
    return path


def _channel_map(args) -> eventstream.ChannelMap:
    if getattr(args, "channel_map", None):
        return eventstream.ChannelMap.load(args.channel_map)
    return eventstream.DEFAULT_CHANNEL_MAP


def _clock(args) -> eventstream.ClockModel:
    return eventstream.ClockModel(
        pulse_period_ns=args.pulse_period_ns,
        signal_slope=args.signal_drift_slope,
        signal_intercept=args.signal_drift_intercept,
        trigger_slope=args.trigger_drift_slope,
        trigger_intercept=args.trigger_drift_intercept,
    )


def _noise(args) -> eventstream.NoiseModel:
    return eventstream.NoiseModel(
        dark_rate_hz=args.dark_rate_hz,
        detection_efficiency=args.efficiency,
        jitter_sigma_ps=args.jitter_ps,
        extra_pair_probability=args.extra_pair_probability,
    )


def _extraction_params(args) -> pipeline.ExtractionParams:
    return pipeline.ExtractionParams(
        fold=args.fold,
        layers=args.layers,
        modes=args.modes,
        window_ns=args.window_ns,
        gather_ns=args.gather_ns,
        section_shift_ns=args.section_shift_ns,
        trigger_count=args.trigger_count,
    )


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_gen_unitary(args):
    U = matrices.haar_random_unitary(args.dim, args.seed)
    matrices.save_matrix(args.out, U)
    dev = matrices.unitarity_deviation(U)
    print(f"wrote {args.dim}x{args.dim} Haar unitary to {args.out} "
          f"(unitarity deviation {dev:.3e})")
    return [args.out], {"unitarity_deviation": dev}


def _cmd_build_net(args):
    net = network.random_network(
        args.modes, args.layers, args.transition, args.seed, loop_mode=args.loop_mode
    )
    U = network.build_scattering_matrix(net)
    matrices.save_matrix(args.out, U)
    outputs = [args.out]
    metrics = {"total_modes": net.total_modes}
    if args.graph_edges or args.graph_json:
        graph = network.layer_graph(net)
        metrics["graph_edges"] = len(graph.edges)
        if args.graph_edges:
            network.write_edge_list(graph, args.graph_edges)
            outputs.append(args.graph_edges)
        if args.graph_json:
            network.write_graph_json(graph, args.graph_json)
            outputs.append(args.graph_json)
    print(f"wrote {U.shape[0]}x{U.shape[1]} scattering matrix to {args.out}")
    return outputs, metrics


def _cmd_distribution(args):
    U = matrices.load_matrix(args.matrix)
    inp = sampling.OccupancyPattern.from_string(args.input)
    dist = sampling.full_distribution(
        U, inp, mode=args.mode, collision_free=args.collision_free,
        workers=args.workers,
    )
    dist.save_csv(args.out)
    print(
        f"wrote {len(dist.patterns)} pattern probabilities to {args.out} "
        f"(pre-normalization weight {dist.raw_weight_sum:.6g})"
    )
    return [args.out], {
        "patterns": len(dist.patterns),
        "raw_weight_sum": dist.raw_weight_sum,
    }


def _cmd_sample(args):
    dist = sampling.Distribution.load_csv(args.dist)
    draws = sampling.draw_samples(dist, args.count, args.seed)
    with open(args.out, "w", encoding="ascii") as fh:
        for pat in draws:
            fh.write(f"{pat}\n")
    print(f"wrote {len(draws)} samples to {args.out}")
    return [args.out], {"samples": len(draws)}


def _cmd_gen_events(args):
    net = network.random_network(
        args.modes, args.layers, args.transition, args.net_seed
    )
    dist = sampling.Distribution.load_csv(args.dist)
    inp = sampling.OccupancyPattern.from_string(args.input)
    ens = eventstream.EventEnsemble.single(inp, dist)
    records, truth = eventstream.generate_stream(
        net,
        ens,
        _clock(args),
        _noise(args),
        args.duration_pulses,
        args.seed,
        firing_probability=args.firing_probability,
        frame_pulses=args.frame_pulses,
        channel_map=_channel_map(args),
        return_truth=True,
    )
    eventstream.write_stream(args.out, records)
    print(f"wrote {records.shape[0]} records ({len(truth)} events) to {args.out}")
    return [args.out], {"records": int(records.shape[0]), "events": len(truth)}


def _cmd_calibrate(args):
    records = eventstream.read_stream(args.stream)
    table = pipeline.calibrate_delays(
        records,
        channel_map=_channel_map(args),
        reference_channel=args.reference_channel,
        window_ns=args.window_ns,
    )
    if args.fit_drift:
        fits = pipeline.fit_drift(
            records,
            max_layer_interval=args.max_layer_interval,
            channel_map=_channel_map(args),
            table=table,
        )
        table = table.with_drift(fits["signal"], fits["trigger"])
    table.save(args.out)
    print(f"wrote calibration for {len(table.offsets_ns)} channels to {args.out}")
    return [args.out], {
        "channels": len(table.offsets_ns),
        "signal_drift": list(table.signal_drift),
        "trigger_drift": list(table.trigger_drift),
    }


def _cmd_extract(args):
    table = pipeline.CalibrationTable.load(args.table)
    params = _extraction_params(args)
    events, stats = pipeline.process_chunked(
        args.stream,
        table,
        params,
        workers=args.workers,
        channel_map=_channel_map(args),
        overlap_ns=args.overlap_ns,
    )
    pipeline.write_events_csv(events, args.out)
    print(
        f"extracted {stats.events} events from {stats.records} records in "
        f"{stats.elapsed_s:.2f} s ({stats.records_per_second:,.0f} records/s, "
        f"workers={stats.workers})"
    )
    return [args.out], {
        "events": stats.events,
        "records": stats.records,
        "records_per_second": stats.records_per_second,
    }


def _cmd_reconstruct(args):
    events = pipeline.read_events_csv(args.events)
    if args.estimator == "counts":
        dist = analysis.reconstruct_from_counts(events, args.total_modes)
    else:
        dist = analysis.reconstruct_from_timestamps(
            events,
            args.total_modes,
            estimator=args.estimator,
            origin_tick=args.origin_tick,
        )
    dist.save_csv(args.out)
    print(f"reconstructed {len(dist.patterns)} pattern probabilities to {args.out}")
    return [args.out], {"patterns": len(dist.patterns), "events": len(events)}


def _cmd_validate(args):
    events = pipeline.read_events_csv(args.events)
    p_ind = sampling.Distribution.load_csv(args.p_ind)
    q_dis = sampling.Distribution.load_csv(args.q_dis)
    trace = analysis.likelihood_ratio_validate(
        events, p_ind, q_dis, a1=args.a1, a2=args.a2, total_modes=args.total_modes
    )
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write("event_index,counter\n")
        for i, c in enumerate(trace.counters, start=1):
            fh.write(f"{i},{c}\n")
    outputs = [args.out]
    if args.plot:
        analysis.plot_counter_traces({"observed": trace}, args.plot)
        outputs.append(args.plot)
    print(f"validation counter after {trace.counters.size} events: {trace.final}")
    return outputs, {"final_counter": trace.final, "events": int(trace.counters.size)}


def _cmd_fidelity(args):
    da = sampling.Distribution.load_csv(args.dist_a)
    db = sampling.Distribution.load_csv(args.dist_b)
    value = analysis.fidelity(da, db)
    outputs = []
    if args.plot:
        analysis.plot_distribution_comparison(da, db, args.plot)
        outputs.append(args.plot)
    print(f"fidelity: {value:.6f}")
    return outputs, {"fidelity": value}


def _cmd_complexity(args):
    metrics = analysis.complexity_metrics(args.layers, args.modes, args.fold)
    print(
        f"log10 combinations C({args.layers * args.modes}, {args.fold}) = "
        f"{metrics['log10_combinations']:.3f}"
    )
    outputs = []
    if args.out:
        layer_values = _parse_values(args.grid_layers)
        fold_values = _parse_values(args.grid_folds)
        rows = analysis.complexity_surface(layer_values, fold_values, args.modes)
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write("layers,fold,log10_combinations\n")
            for n, f, v in rows:
                fh.write(f"{n},{f},{v:.17g}\n")
        outputs.append(args.out)
        print(f"wrote {len(rows)} surface points to {args.out}")
    return outputs, metrics


def _cmd_scaling(args):
    records = eventstream.read_stream(args.stream)
    table = (
        pipeline.CalibrationTable.load(args.table)
        if args.table
        else pipeline.identity_table()
    )
    rows = analysis.scaling_study(
        records,
        table,
        args.modes,
        _parse_values(args.layer_values),
        _parse_values(args.fold_values),
        channel_map=_channel_map(args),
        partitions=args.partitions,
        window_ns=args.window_ns,
        section_shift_ns=args.section_shift_ns,
    )
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write("layers,fold,mean,std,counts\n")
        for row in rows:
            counts = "-".join(str(c) for c in row["counts"])
            fh.write(
                f"{row['layers']},{row['fold']},{row['mean']:.17g},"
                f"{row['std']:.17g},{counts}\n"
            )
    print(f"wrote {len(rows)} grid points to {args.out}")
    return [args.out], {"grid_points": len(rows)}


def _cmd_bench_permanent(args):
    rows = permanent.benchmark_permanents(
        _parse_values(args.dims), seed=args.seed, repeats=args.repeats
    )
    with open(args.out, "w", encoding="ascii") as fh:
        fh.write("n,method,millis\n")
        for n, method, ms in rows:
            fh.write(f"{n},{method},{ms:.6f}\n")
    for n, method, ms in rows:
        print(f"n={n:2d} {method:>10s} {ms:10.3f} ms")
    return [args.out], {"rows": len(rows)}


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="key=value config file; explicit flags win")
    p.add_argument("--summary", help="summary JSON path (default: <out>.summary.json)")


def _add_clock_noise(p):
    p.add_argument("--pulse-period-ns", type=float, default=DEFAULT_PERIOD_NS,
                   help="pulse spacing, ns (80 MHz train)")
    p.add_argument("--signal-drift-slope", type=float, default=0.0,
                   help="signal-class timing drift, ns per layer interval")
    p.add_argument("--signal-drift-intercept", type=float, default=0.0)
    p.add_argument("--trigger-drift-slope", type=float, default=0.0)
    p.add_argument("--trigger-drift-intercept", type=float, default=0.0)
    p.add_argument("--dark-rate-hz", type=float, default=0.0)
    p.add_argument("--efficiency", type=float, default=1.0)
    p.add_argument("--jitter-ps", type=float, default=0.0)
    p.add_argument("--extra-pair-probability", type=float, default=0.0)


def _add_extraction(p):
    p.add_argument("--fold", type=int, required=True, help="signal photons per event")
    p.add_argument("--layers", type=int, required=True, help="sections per event window")
    p.add_argument("--modes", type=int, default=DEFAULT_MODES, help="chip modes per layer")
    p.add_argument("--window-ns", type=float, default=DEFAULT_WINDOW_NS,
                   help="coincidence window, ns")
    p.add_argument("--gather-ns", type=float, default=None,
                   help="gather window, ns (default: (layers-1)*shift + 8.5)")
    p.add_argument("--section-shift-ns", type=float, default=DEFAULT_PERIOD_NS)
    p.add_argument("--trigger-count", type=int, default=None,
                   help="required heralds per event (default: fold)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="memboson",
        description=__doc__.splitlines()[0],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers = {}

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func, command=name)
        _add_common(p)
        subparsers[name] = p
        return p

    p = add("gen-unitary", _cmd_gen_unitary, "draw a Haar-random unitary")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("build-net", _cmd_build_net, "build the looped scattering matrix")
    p.add_argument("--modes", type=int, default=DEFAULT_MODES)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--transition", type=float, required=True,
                   help="loop transition probability per traversal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loop-mode", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--graph-edges", help="write layer-graph edge list")
    p.add_argument("--graph-json", help="write layer-graph JSON adjacency")

    p = add("distribution", _cmd_distribution, "exact output distribution")
    p.add_argument("--matrix", required=True)
    p.add_argument("--input", required=True, help="occupancy string, e.g. 1-0-1-0")
    p.add_argument("--mode", choices=sampling.MODES, default="indistinguishable")
    p.add_argument("--collision-free", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)

    p = add("sample", _cmd_sample, "draw samples from a distribution CSV")
    p.add_argument("--dist", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("gen-events", _cmd_gen_events, "synthesize a detector stream")
    p.add_argument("--modes", type=int, default=DEFAULT_MODES)
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--transition", type=float, default=0.5)
    p.add_argument("--net-seed", type=int, default=0)
    p.add_argument("--input", required=True, help="input occupancy string")
    p.add_argument("--dist", required=True, help="output distribution CSV")
    p.add_argument("--duration-pulses", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--firing-probability", type=float, default=0.2)
    p.add_argument("--frame-pulses", type=int, default=None)
    p.add_argument("--channel-map", help="channel-map file")
    p.add_argument("--out", required=True)
    _add_clock_noise(p)

    p = add("calibrate", _cmd_calibrate, "recover per-channel delay offsets")
    p.add_argument("--stream", required=True)
    p.add_argument("--reference-channel", type=int, default=16)
    p.add_argument("--window-ns", type=float, default=DEFAULT_WINDOW_NS)
    p.add_argument("--fit-drift", action="store_true",
                   help="also fit per-class clock drift")
    p.add_argument("--max-layer-interval", type=int, default=400)
    p.add_argument("--channel-map")
    p.add_argument("--out", required=True)

    p = add("extract", _cmd_extract, "extract multi-fold coincidences")
    p.add_argument("--stream", required=True)
    p.add_argument("--table", required=True)
    _add_extraction(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--overlap-ns", type=float, default=None)
    p.add_argument("--channel-map")
    p.add_argument("--out", required=True)

    p = add("reconstruct", _cmd_reconstruct, "reconstruct pattern probabilities")
    p.add_argument("--events", required=True)
    p.add_argument("--total-modes", type=int, required=True)
    p.add_argument("--estimator",
                   choices=("counts", "first_occurrence", "mean_interval"),
                   default="first_occurrence")
    p.add_argument("--origin-tick", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("validate", _cmd_validate, "banded likelihood-ratio counter test")
    p.add_argument("--events", required=True)
    p.add_argument("--p-ind", required=True, help="indistinguishable model CSV")
    p.add_argument("--q-dis", required=True, help="distinguishable model CSV")
    p.add_argument("--a1", type=float, default=DEFAULT_A1)
    p.add_argument("--a2", type=float, default=DEFAULT_A2)
    p.add_argument("--total-modes", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", help="optional SVG counter trace")

    p = add("fidelity", _cmd_fidelity, "Bhattacharyya fidelity of two CSVs")
    p.add_argument("--dist-a", required=True)
    p.add_argument("--dist-b", required=True)
    p.add_argument("--plot", help="optional SVG bar comparison")

    p = add("complexity", _cmd_complexity, "combination/Hilbert-space metrics")
    p.add_argument("--layers", type=int, required=True)
    p.add_argument("--modes", type=int, default=DEFAULT_MODES)
    p.add_argument("--fold", type=int, required=True)
    p.add_argument("--grid-layers", default="10..10000:500",
                   help="surface grid for --out, e.g. 100..1000:100")
    p.add_argument("--grid-folds", default="2..60:2")
    p.add_argument("--out", help="optional surface CSV")

    p = add("scaling", _cmd_scaling, "coincidence counts vs layers and fold")
    p.add_argument("--stream", required=True)
    p.add_argument("--table")
    p.add_argument("--modes", type=int, default=DEFAULT_MODES)
    p.add_argument("--layer-values", required=True, help="e.g. 100..1000:100")
    p.add_argument("--fold-values", required=True, help="e.g. 5..10")
    p.add_argument("--partitions", type=int, default=10)
    p.add_argument("--window-ns", type=float, default=DEFAULT_WINDOW_NS)
    p.add_argument("--section-shift-ns", type=float, default=DEFAULT_PERIOD_NS)
    p.add_argument("--channel-map")
    p.add_argument("--out", required=True)

    p = add("bench-permanent", _cmd_bench_permanent, "permanents/second vs n")
    p.add_argument("--dims", default="2..16:2")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--out", required=True)

    return parser, subparsers


def _scan_argv(argv):
    """Find the subcommand name and any --config value before strict
    parsing, so config-supplied values can satisfy required options."""
    sub_name = None
    config_path = None
    it = iter(range(len(argv)))
    for i in it:
        tok = argv[i]
        if sub_name is None and not tok.startswith("-"):
            sub_name = tok
        if tok == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif tok.startswith("--config="):
            config_path = tok.split("=", 1)[1]
    return sub_name, config_path


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()

    sub_name, config_path = _scan_argv(argv)
    if config_path and sub_name in subparsers:
        try:
            overrides = _load_config_file(config_path)
        except FileNotFoundError as exc:
            print(json.dumps({"error": str(exc), "type": "missing-file"}),
                  file=sys.stderr)
            return EXIT_MISSING_FILE
        except MembosonError as exc:
            print(json.dumps({"error": str(exc), "type": type(exc).__name__}),
                  file=sys.stderr)
            return EXIT_CONFIG
        sp = subparsers[sub_name]
        actions = {a.dest: a for a in sp._actions}
        unknown = set(overrides) - set(actions)
        if unknown:
            print(
                json.dumps(
                    {
                        "error": f"unknown config keys {sorted(unknown)}",
                        "type": "config",
                    }
                ),
                file=sys.stderr,
            )
            return EXIT_CONFIG
        coerced = {}
        for key, raw in overrides.items():
            action = actions[key]
            if isinstance(action, argparse._StoreTrueAction):
                coerced[key] = raw.lower() in ("1", "true", "yes", "on")
            elif action.type is not None:
                try:
                    coerced[key] = action.type(raw)
                except ValueError as exc:
                    print(
                        json.dumps(
                            {"error": f"config key {key}: {exc}", "type": "config"}
                        ),
                        file=sys.stderr,
                    )
                    return EXIT_CONFIG
            else:
                coerced[key] = raw
            action.required = False  # a config-supplied value satisfies it
        sp.set_defaults(**coerced)

    args = parser.parse_args(argv)  # explicit flags win over config defaults

    t0 = time.perf_counter()
    try:
        outputs, metrics = args.func(args)
    except FileNotFoundError as exc:
        print(json.dumps({"error": str(exc), "type": "missing-file"}), file=sys.stderr)
        return EXIT_MISSING_FILE
    except MembosonError as exc:
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__}),
            file=sys.stderr,
        )
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(
            json.dumps({"error": str(exc), "type": type(exc).__name__}),
            file=sys.stderr,
        )
        return EXIT_FAILURE

    metrics = dict(metrics)
    metrics["elapsed_s"] = time.perf_counter() - t0
    summary_path = _write_summary(args, outputs, metrics)
    print(f"summary: {summary_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
