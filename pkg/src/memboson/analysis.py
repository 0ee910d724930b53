"""Statistics over extracted events: probability reconstruction (by counts
or by timestamps), Bhattacharyya fidelity, banded likelihood-ratio
validation, and combinatorial complexity metrics.

Timestamp reconstruction exploits the Poisson/exponential duality: a
pattern's arrival rate is inversely proportional to its waiting time, so
``p_i = T_i^-1 / sum_j T_j^-1`` with ``T_i`` either the first occurrence
time or the mean inter-arrival time of pattern ``i``. This recovers a
distribution from far fewer events than accumulating counts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from collections import defaultdict

import numpy as np

from .errors import AnalysisError, ConfigError, ValidationError
from .eventstream import DEFAULT_CHANNEL_MAP, ChannelMap
from .pipeline import ExtractionParams, extract_coincidences
from .sampling import Distribution, OccupancyPattern

__all__ = [
    "ValidationTrace",
    "pattern_of_event",
    "reconstruct_from_counts",
    "reconstruct_from_timestamps",
    "fidelity",
    "likelihood_ratio_validate",
    "complexity_metrics",
    "complexity_surface",
    "scaling_study",
    "plot_distribution_comparison",
    "plot_counter_traces",
]

DEFAULT_A1 = 0.9
DEFAULT_A2 = 1.5


def pattern_of_event(event, total_modes: int) -> OccupancyPattern:
    """Output occupancy pattern of an extracted event on the global grid."""
    return OccupancyPattern.from_modes(event.signal_global_channels, total_modes)


def _group_events(events, total_modes):
    groups = defaultdict(list)
    for e in events:
        groups[pattern_of_event(e, total_modes)].append(e.timestamp_tick)
    return groups


def _report_missing(groups, support):
    if support is None:
        return
    missing = [p for p in support if p not in groups]
    if missing:
        warnings.warn(
            f"{len(missing)} support patterns had zero events and were "
            f"excluded: {[str(p) for p in missing[:8]]}"
            + ("..." if len(missing) > 8 else ""),
            stacklevel=3,
        )


def reconstruct_from_counts(events, total_modes: int, support=None) -> Distribution:
    """Empirical distribution by event counts per output pattern."""
    groups = _group_events(events, total_modes)
    if len(groups) < 1:
        raise AnalysisError("no events to reconstruct from")
    _report_missing(groups, support)
    patterns = sorted(groups)
    counts = np.asarray([len(groups[p]) for p in patterns], dtype=np.float64)
    return Distribution(tuple(patterns), counts / counts.sum())


def reconstruct_from_timestamps(
    events,
    total_modes: int,
    estimator: str = "first_occurrence",
    origin_tick: int = 0,
    support=None,
) -> Distribution:
    """Distribution from arrival times: ``p_i`` proportional to the inverse
    of each pattern's characteristic time.

    ``first_occurrence`` uses the first event timestamp per pattern, measured
    from the run start (``origin_tick``, the stream's first record by
    default). ``mean_interval`` uses the mean inter-arrival gap with the run
    start standing in as the zeroth arrival, i.e. ``(t_last - origin) /
    count``, the Poisson rate estimate, well defined from a single event.
    """
    if estimator not in ("first_occurrence", "mean_interval"):
        raise ConfigError(f"unknown estimator {estimator!r}")
    groups = _group_events(events, total_modes)
    if len(groups) < 2:
        raise AnalysisError(
            f"timestamp reconstruction needs >= 2 distinct patterns, got "
            f"{len(groups)}"
        )
    _report_missing(groups, support)
    patterns = sorted(groups)
    weights = np.empty(len(patterns))
    for i, p in enumerate(patterns):
        ticks = groups[p]
        if estimator == "first_occurrence":
            wait = min(ticks) - origin_tick
        else:
            wait = (max(ticks) - origin_tick) / len(ticks)
        if wait <= 0:
            raise AnalysisError(
                f"pattern {p} has nonpositive waiting time {wait}; check "
                f"origin_tick"
            )
        weights[i] = 1.0 / wait
    return Distribution(tuple(patterns), weights / weights.sum())


def fidelity(s: Distribution, t: Distribution) -> float:
    """Bhattacharyya coefficient sum_i sqrt(s_i t_i) over the union support;
    1 iff the distributions coincide."""
    for d in (s, t):
        total = float(np.sum(d.probs))
        if abs(total - 1.0) > 1e-9:
            raise AnalysisError(f"distribution sums to {total!r}, not normalized")
    support = set(s.patterns) | set(t.patterns)
    return float(sum(math.sqrt(s.prob_of(p) * t.prob_of(p)) for p in support))


@dataclass(frozen=True, eq=False)  # ndarray field: no auto __eq__
class ValidationTrace:
    """Running counter of the banded likelihood-ratio test: ``counters[k]``
    is C after event k (starting from C = 0)."""

    counters: np.ndarray
    a1: float
    a2: float

    @property
    def final(self) -> int:
        return int(self.counters[-1]) if self.counters.size else 0


def _counter_step(L: float, a1: float, a2: float) -> int:
    # Bands evaluated in their stated order; the measure-zero boundary
    # L == a1 falls through to the -1 band (its upper edge taken closed).
    if a1 < L < 1.0 / a1:
        return 0
    if 1.0 / a1 <= L < a2:
        return 1
    if L >= a2:
        return 2
    if 1.0 / a2 <= L < a1:
        return -1
    if L <= 1.0 / a2:
        return -2
    return -1


def likelihood_ratio_validate(
    observed,
    p_ind: Distribution,
    q_dis: Distribution,
    a1: float = DEFAULT_A1,
    a2: float = DEFAULT_A2,
    total_modes: int = None,
) -> ValidationTrace:
    """Run the counter test on an ordered event sequence.

    Each event contributes ``L = p_ind(pattern) / q_dis(pattern)``; the
    counter moves 0/+1/+2/-1/-2 depending on which threshold band L falls
    in. A rising trace favors the indistinguishable (genuinely interfering)
    model, a falling one the distinguishable model. ``observed`` may hold
    occupancy patterns directly or extracted events (then ``total_modes`` is
    required).
    """
    if not (0.0 < a1 < 1.0) or not (a2 > 1.0):
        raise ConfigError(f"need 0 < a1 < 1 < a2, got a1={a1}, a2={a2}")
    if 1.0 / a2 >= a1:
        raise ConfigError(f"bands degenerate: 1/a2={1.0 / a2} >= a1={a1}")
    counters = []
    c = 0
    for obs in observed:
        pat = obs
        if not isinstance(obs, OccupancyPattern):
            if total_modes is None:
                raise ConfigError("total_modes is required for event inputs")
            pat = pattern_of_event(obs, total_modes)
        p = p_ind.prob_of(pat)
        q = q_dis.prob_of(pat)
        if p <= 0.0 or q <= 0.0:
            raise ValidationError(
                f"model probability vanishes on observed pattern {pat} "
                f"(p_ind={p}, q_dis={q})"
            )
        c += _counter_step(p / q, a1, a2)
        counters.append(c)
    return ValidationTrace(np.asarray(counters, dtype=np.int64), a1, a2)


def complexity_metrics(layers: int, modes: int, fold: int) -> dict:
    """log10 of the scattershot input-combination count C(layers*modes, fold)
    (also the collision-free output-space, i.e. Hilbert, dimension) via
    log-gamma, overflow-free."""
    total = layers * modes
    if layers < 1 or modes < 1 or fold < 0:
        raise ConfigError("layers, modes must be >= 1 and fold >= 0")
    if fold > total:
        raise ConfigError(f"fold {fold} exceeds total modes {total}")
    log10_comb = (
        math.lgamma(total + 1) - math.lgamma(fold + 1) - math.lgamma(total - fold + 1)
    ) / math.log(10.0)
    return {"log10_combinations": log10_comb, "log10_hilbert": log10_comb}


def complexity_surface(layer_values, fold_values, modes: int):
    """Grid evaluation of the combination enhancement, for plotting; rows of
    ``(layers, fold, log10_combinations)``."""
    rows = []
    for n in layer_values:
        for f in fold_values:
            if f <= n * modes:
                rows.append((n, f, complexity_metrics(n, modes, f)["log10_combinations"]))
    return rows


def scaling_study(
    records,
    table,
    modes: int,
    layer_values,
    fold_values,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
    partitions: int = 10,
    window_ns: float = 2.0,
    section_shift_ns: float = 12.5,
):
    """Extracted-coincidence statistics over a (layer count, fold) grid.

    The stream is cut into ``partitions`` equal time spans; each grid point
    reports the per-partition event counts with their mean and standard
    deviation, mirroring the split-into-equal-parts protocol used for
    layer/photon-number scaling plots.
    """
    if records.shape[0] < 2:
        raise AnalysisError("stream too short for a scaling study")
    t_lo = int(records["tick"][0])
    t_hi = int(records["tick"][-1])
    if t_hi <= t_lo:
        raise AnalysisError("stream spans zero time; cannot partition")
    edges = np.linspace(t_lo, t_hi + 1, partitions + 1)

    rows = []
    for n_layers in layer_values:
        for fold in fold_values:
            params = ExtractionParams(
                fold=fold,
                layers=n_layers,
                modes=modes,
                window_ns=window_ns,
                section_shift_ns=section_shift_ns,
            )
            events = extract_coincidences(records, table, params, channel_map)
            stamps = np.asarray([e.timestamp_tick for e in events], dtype=np.float64)
            counts, _ = np.histogram(stamps, bins=edges)
            rows.append(
                {
                    "layers": int(n_layers),
                    "fold": int(fold),
                    "mean": float(counts.mean()),
                    "std": float(counts.std()),
                    "counts": counts.astype(int).tolist(),
                }
            )
    return rows


def plot_distribution_comparison(measured: Distribution, theory: Distribution, path):
    """Side-by-side bar chart of two distributions (SVG or any matplotlib
    format inferred from the path)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    support = sorted(set(measured.patterns) | set(theory.patterns))
    xs = np.arange(len(support))
    mvals = [measured.prob_of(p) for p in support]
    tvals = [theory.prob_of(p) for p in support]
    fig, ax = plt.subplots(figsize=(max(6, len(support) * 0.35), 4))
    ax.bar(xs - 0.2, mvals, width=0.4, color="0.2", label="measured")
    ax.bar(xs + 0.2, tvals, width=0.4, color="0.7", label="theory")
    ax.set_xticks(xs)
    ax.set_xticklabels([str(p) for p in support], rotation=90, fontsize=6)
    ax.set_ylabel("probability")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_counter_traces(traces: dict, path):
    """Counter-vs-event-index curves for one or more validation traces."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, trace in traces.items():
        ax.plot(np.arange(1, trace.counters.size + 1), trace.counters, label=label)
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.set_xlabel("event index")
    ax.set_ylabel("counter C")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
