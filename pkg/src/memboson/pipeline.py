"""Coincidence extraction machinery: per-channel delay calibration, clock
drift fitting, multi-section coincidence assembly, and chunk-parallel
processing.

Extraction model
----------------
Candidate events are anchored on triggers: a trigger record with no other
trigger in the gather window before it opens a candidate. All records within
the gather window after the anchor are collected; the gather window for a
K-section event is ``(K-1) * 12.5 ns + 8.5 ns`` (21 ns for two sections),
wide enough for every photon of the event but not for the next frame. Each
member is assigned a section by its distance from the anchor, shifted back
by ``section * 12.5 ns``, and corrected for the fitted clock drift; a valid
event must then satisfy, in order:

  1. exactly the required trigger multiplicity in the window;
  2. exactly ``fold`` signal records in the window (any extra signal in the
     gather window marks the candidate suspicious and it is dropped, and so
     does a duplicated (channel, section) pair);
  3. all shifted members inside one closed coincidence window (default 2 ns);
  4. every signal compatible with a herald at the same or an earlier section,
     and never earlier than its herald in raw time.

Surviving events are renumbered onto the global layer*mode grid relative to
the anchor's section and stamped with the last-arriving trigger tick.
Because anchoring is locally decidable (one gather-window look-back), the
record stream can be processed in overlapping chunks with results identical
to a single pass.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    CalibrationError,
    ConfigError,
    StreamOrderError,
    UncalibratableChannelError,
)
from .eventstream import (
    DEFAULT_CHANNEL_MAP,
    N_CHANNELS,
    ROLE_RESERVED,
    ROLE_SIGNAL,
    ROLE_TRIGGER,
    SIGNAL_LAG_NS,
    TICK_NS,
    ChannelMap,
    read_stream,
)

__all__ = [
    "DELAY_SCAN_RANGE_NS",
    "DELAY_SCAN_STEP_NS",
    "CalibrationTable",
    "ExtractionParams",
    "CoincidenceEvent",
    "identity_table",
    "calibrate_delays",
    "fit_drift",
    "extract_coincidences",
    "process_chunked",
    "ChunkStats",
    "write_events_csv",
    "read_events_csv",
]

DELAY_SCAN_RANGE_NS = 37.5
DELAY_SCAN_STEP_NS = 0.5
DEFAULT_WINDOW_NS = 2.0
DEFAULT_SECTION_SHIFT_NS = 12.5
# margin beyond the last section covered by the gather window; 21 ns for two
# sections = one section shift + this margin
GATHER_MARGIN_NS = 8.5


def default_gather_ns(layers: int, section_shift_ns: float = DEFAULT_SECTION_SHIFT_NS) -> float:
    return (layers - 1) * section_shift_ns + GATHER_MARGIN_NS


@dataclass(frozen=True)
class CalibrationTable:
    """Per-channel delay offsets (ns, 0.5 ns grid, within +/-37.5 ns) plus the
    per-class clock drift fits used for section correction."""

    offsets_ns: dict
    signal_drift: tuple = (0.0, 0.0)
    trigger_drift: tuple = (0.0, 0.0)
    reference_channel: int = 16

    def __post_init__(self):
        offs = {int(c): float(o) for c, o in self.offsets_ns.items()}
        for c, o in offs.items():
            if abs(o) > DELAY_SCAN_RANGE_NS + 1e-9:
                raise CalibrationError(f"offset {o} ns for channel {c} out of range")
            if abs(o / DELAY_SCAN_STEP_NS - round(o / DELAY_SCAN_STEP_NS)) > 1e-6:
                raise CalibrationError(
                    f"offset {o} ns for channel {c} not on the "
                    f"{DELAY_SCAN_STEP_NS} ns grid"
                )
        object.__setattr__(self, "offsets_ns", offs)
        object.__setattr__(self, "signal_drift", tuple(self.signal_drift))
        object.__setattr__(self, "trigger_drift", tuple(self.trigger_drift))

    def offset_of(self, channel: int) -> float:
        return self.offsets_ns.get(int(channel), 0.0)

    def offset_vector(self) -> np.ndarray:
        out = np.zeros(N_CHANNELS)
        for c, o in self.offsets_ns.items():
            out[c] = o
        return out

    def with_drift(self, signal_drift, trigger_drift) -> "CalibrationTable":
        return replace(
            self, signal_drift=tuple(signal_drift), trigger_drift=tuple(trigger_drift)
        )

    def save(self, path) -> None:
        doc = {
            "offsets_ns": {str(c): o for c, o in sorted(self.offsets_ns.items())},
            "signal_drift": list(self.signal_drift),
            "trigger_drift": list(self.trigger_drift),
            "reference_channel": self.reference_channel,
        }
        with open(path, "w", encoding="ascii") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CalibrationTable":
        with open(path, "r", encoding="ascii") as fh:
            doc = json.load(fh)
        return cls(
            offsets_ns={int(c): float(o) for c, o in doc["offsets_ns"].items()},
            signal_drift=tuple(doc.get("signal_drift", (0.0, 0.0))),
            trigger_drift=tuple(doc.get("trigger_drift", (0.0, 0.0))),
            reference_channel=int(doc.get("reference_channel", 16)),
        )


def identity_table(reference_channel: int = 16) -> CalibrationTable:
    """All-zero offsets, zero drift; correct for clean synthetic streams."""
    return CalibrationTable(offsets_ns={}, reference_channel=reference_channel)


@dataclass(frozen=True)
class ExtractionParams:
    """Knobs of the coincidence search. ``gather_ns`` defaults to the
    K-section rule; ``trigger_count`` defaults to one herald per signal."""

    fold: int
    layers: int
    modes: int
    window_ns: float = DEFAULT_WINDOW_NS
    gather_ns: float = None
    section_shift_ns: float = DEFAULT_SECTION_SHIFT_NS
    trigger_count: int = None

    def __post_init__(self):
        if self.fold < 1:
            raise ConfigError(f"fold must be >= 1, got {self.fold}")
        if self.layers < 1 or self.modes < 1:
            raise ConfigError("layers and modes must be >= 1")
        if self.window_ns <= 0 or self.section_shift_ns <= 0:
            raise ConfigError("window and section shift must be > 0")
        if self.gather_ns is None:
            object.__setattr__(
                self, "gather_ns", default_gather_ns(self.layers, self.section_shift_ns)
            )
        if self.gather_ns <= 0:
            raise ConfigError(f"gather window must be > 0, got {self.gather_ns}")
        if self.trigger_count is None:
            object.__setattr__(self, "trigger_count", self.fold)
        if self.trigger_count < 1:
            raise ConfigError(f"trigger_count must be >= 1, got {self.trigger_count}")


@dataclass(frozen=True)
class CoincidenceEvent:
    """One post-selected multi-photon event.

    Layers are sections relative to the event's first trigger; global signal
    channels follow the ``layer * modes + chip_mode`` renumbering. The
    timestamp is the raw tick of the last-arriving trigger.
    """

    timestamp_tick: int
    fold: int
    trigger_channels: tuple
    trigger_layers: tuple
    signal_channels: tuple
    signal_layers: tuple
    signal_global_channels: tuple

    @property
    def signature(self) -> tuple:
        return (self.trigger_layers, self.signal_global_channels)


def _corrected_times(records, table: CalibrationTable, channel_map: ChannelMap):
    """Per-record calibrated times (ns): raw + offset, minus the nominal
    signal lag on signal-class channels. Returns (times, raw_offset_times,
    channels, ticks, roles-coded) sorted by corrected time."""
    ch = records["channel"].astype(np.int64)
    if ch.size and ch.max() >= N_CHANNELS:
        raise ConfigError(f"unknown channel {int(ch.max())} in stream")
    ticks = records["tick"].astype(np.int64)
    if ticks.size > 1 and np.any(np.diff(ticks) < 0):
        raise StreamOrderError("stream records are not tick-sorted")

    roles = np.asarray(
        [
            0 if channel_map.roles[c] == ROLE_SIGNAL
            else 1 if channel_map.roles[c] == ROLE_TRIGGER
            else 2
            for c in range(N_CHANNELS)
        ],
        dtype=np.int8,
    )
    rec_roles = roles[ch]
    keep = rec_roles != 2  # reserved channels carry no physics
    ch, ticks, rec_roles = ch[keep], ticks[keep], rec_roles[keep]

    offsets = table.offset_vector()
    raw = ticks * TICK_NS + offsets[ch]
    t = raw - np.where(rec_roles == 0, SIGNAL_LAG_NS, 0.0)
    order = np.argsort(t, kind="stable")
    return t[order], raw[order], ch[order], ticks[order], rec_roles[order]


def calibrate_delays(
    records,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
    reference_channel: int = 16,
    window_ns: float = DEFAULT_WINDOW_NS,
) -> CalibrationTable:
    """Recover each channel's delay offset by scanning -37.5..37.5 ns in
    0.5 ns steps and maximizing coincidences with the reference trigger
    channel (ties resolved toward the smallest magnitude, then the smaller
    offset).

    Signal channels are aligned to their class-nominal position (reference
    time + 5 ns), so a cleanly generated channel calibrates to offset 0 and
    an injected shift of +d ns is recovered as -d ns regardless of class.
    """
    if channel_map.role_of(reference_channel) != ROLE_TRIGGER:
        raise ConfigError(f"reference channel {reference_channel} is not a trigger")
    ch = records["channel"].astype(np.int64)
    ticks = records["tick"].astype(np.int64)
    t = ticks * TICK_NS
    ref_times = np.sort(t[ch == reference_channel])
    if ref_times.size == 0:
        raise CalibrationError(f"no records on reference channel {reference_channel}")

    grid = np.arange(
        -DELAY_SCAN_RANGE_NS, DELAY_SCAN_RANGE_NS + DELAY_SCAN_STEP_NS / 2,
        DELAY_SCAN_STEP_NS,
    )
    # tie-break order: ascending |offset| then ascending offset
    tie_order = np.lexsort((grid, np.abs(grid)))
    half = window_ns / 2.0

    offsets = {}
    dead = []
    for c in sorted(set(ch.tolist())):
        role = channel_map.roles[c]
        if role == ROLE_RESERVED:
            continue
        lag = SIGNAL_LAG_NS if role == ROLE_SIGNAL else 0.0
        tc = np.sort(t[ch == c])
        adj = tc[None, :] + grid[:, None] - lag
        lo = np.searchsorted(ref_times, adj - half)
        hi = np.searchsorted(ref_times, adj + half)
        counts = (hi > lo).sum(axis=1)
        if counts.max() == 0:
            dead.append(c)
            continue
        best = tie_order[np.argmax(counts[tie_order])]
        offsets[c] = float(grid[best])
    if dead:
        raise UncalibratableChannelError(dead)
    return CalibrationTable(offsets_ns=offsets, reference_channel=reference_channel)


def fit_drift(
    records,
    max_layer_interval: int,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
    table: CalibrationTable = None,
    section_shift_ns: float = DEFAULT_SECTION_SHIFT_NS,
    min_span: int = 100,
) -> dict:
    """Least-squares linear fit of timing deviation vs layer interval, per
    channel class.

    Members are paired with anchor triggers (no preceding trigger within the
    look-back window); a member ``k`` sections after its anchor contributes
    the point ``(k, measured - k * section_shift)``. Intervals are assigned
    by nearest section, so the injected drift must stay below half a section
    shift over ``max_layer_interval``; that is the supported regime for
    desk-scale fitting. Requires observed intervals spanning at least ``min_span``
    sections per class.
    """
    table = table if table is not None else identity_table()
    t, _raw, ch, _ticks, roles = _corrected_times(records, table, channel_map)
    lookback = max_layer_interval * section_shift_ns + GATHER_MARGIN_NS

    trig_idx = np.flatnonzero(roles == 1)
    if trig_idx.size == 0:
        raise CalibrationError("stream has no trigger records")
    ttimes = t[trig_idx]
    anchors = trig_idx[
        np.concatenate([[True], np.diff(ttimes) > lookback])
    ]

    pts = {ROLE_SIGNAL: [], ROLE_TRIGGER: []}
    for a in anchors:
        t0 = t[a]
        hi = np.searchsorted(t, t0 + lookback, side="right")
        seg = slice(a, hi)
        dt = t[seg] - t0
        k = np.rint(dt / section_shift_ns).astype(np.int64)
        ok = (k >= 1) & (k <= max_layer_interval)
        dev = dt[ok] - k[ok] * section_shift_ns
        cls = roles[seg][ok]
        kk = k[ok]
        pts[ROLE_SIGNAL].append((kk[cls == 0], dev[cls == 0]))
        pts[ROLE_TRIGGER].append((kk[cls == 1], dev[cls == 1]))

    fits = {}
    for role, chunks in pts.items():
        if chunks:
            ks = np.concatenate([c[0] for c in chunks])
            devs = np.concatenate([c[1] for c in chunks])
        else:
            ks = np.empty(0)
            devs = np.empty(0)
        if ks.size < 2 or ks.max() - ks.min() < min_span:
            raise CalibrationError(
                f"{role} class spans {0 if ks.size == 0 else int(ks.max() - ks.min())} "
                f"layer intervals, need >= {min_span}"
            )
        slope, intercept = np.polyfit(ks, devs, 1)
        fits[role] = (float(slope), float(intercept))
    return fits


def _scan_candidates(
    t,
    raw,
    ch,
    ticks,
    roles,
    anchors,
    gather,
    window,
    shift,
    layers,
    fold,
    tcount,
    sig_slope,
    sig_icpt,
    trig_slope,
    trig_icpt,
    out_tick,
    out_trig_ch,
    out_trig_k,
    out_sig_ch,
    out_sig_k,
):
    """Candidate evaluation kernel (numba-compiled when available).

    For each anchor: bound the gather window, enforce exact trigger/signal
    multiplicities, assign sections (inverting the drift law), test the
    post-shift coincidence span, reject duplicated (channel, section) pairs,
    and require a herald at or before each signal's section and raw time.
    Accepted events are written to the output rows, members sorted by
    (section, channel). Returns the event count.
    """
    n = t.shape[0]
    width = tcount + fold
    mk = np.empty(width, dtype=np.int64)
    mch = np.empty(width, dtype=np.int64)
    mrole = np.empty(width, dtype=np.int8)
    mraw = np.empty(width, dtype=np.float64)
    mtick = np.empty(width, dtype=np.int64)
    n_ev = 0
    for ai in range(anchors.shape[0]):
        a = anchors[ai]
        t0 = t[a]
        lo = a
        while lo > 0 and t[lo - 1] >= t0 - window:
            lo -= 1
        hi = a
        while hi < n and t[hi] <= t0 + gather:
            hi += 1

        ntr = 0
        nsg = 0
        for j in range(lo, hi):
            if roles[j] == 1:
                ntr += 1
            else:
                nsg += 1
        if ntr != tcount or nsg != fold:
            continue

        ok = True
        smin = 1e300
        smax = -1e300
        for w in range(width):
            j = lo + w
            dt = t[j] - t0
            k0 = int(np.rint(dt / shift))
            if k0 <= 0:
                k = k0
            else:
                if roles[j] == 0:
                    k = int(np.rint((dt - sig_icpt) / (shift + sig_slope)))
                else:
                    k = int(np.rint((dt - trig_icpt) / (shift + trig_slope)))
                if k < 1:
                    k = 1
            if k < 0 or k >= layers:
                ok = False
                break
            if k == 0:
                drift = 0.0
            elif roles[j] == 0:
                drift = sig_slope * k + sig_icpt
            else:
                drift = trig_slope * k + trig_icpt
            shifted = dt - k * shift - drift
            if shifted < smin:
                smin = shifted
            if shifted > smax:
                smax = shifted
            mk[w] = k
            mch[w] = ch[j]
            mrole[w] = roles[j]
            mraw[w] = raw[j]
            mtick[w] = ticks[j]
        if not ok or smax - smin > window:
            continue

        dup = False
        for x in range(width):
            for y in range(x + 1, width):
                if mch[x] == mch[y] and mk[x] == mk[y]:
                    dup = True
                    break
            if dup:
                break
        if dup:
            continue

        # stable insertion sort of member indices by (section, channel)
        order = np.empty(width, dtype=np.int64)
        for w in range(width):
            order[w] = w
        for x in range(1, width):
            v = order[x]
            y = x - 1
            while y >= 0 and (
                mk[order[y]] > mk[v]
                or (mk[order[y]] == mk[v] and mch[order[y]] > mch[v])
            ):
                order[y + 1] = order[y]
                y -= 1
            order[y + 1] = v

        # class-sorted sections and raw times follow from the member order
        ti = 0
        si = 0
        last_tick = -1
        for w in range(width):
            j = order[w]
            if mrole[j] == 1:
                out_trig_ch[n_ev, ti] = mch[j]
                out_trig_k[n_ev, ti] = mk[j]
                if mtick[j] > last_tick:
                    last_tick = mtick[j]
                ti += 1
            else:
                out_sig_ch[n_ev, si] = mch[j]
                out_sig_k[n_ev, si] = mk[j]
                si += 1
        if tcount == fold:
            feasible = True
            for w in range(fold):
                if out_trig_k[n_ev, w] > out_sig_k[n_ev, w]:
                    feasible = False
                    break
            if feasible:
                # matched pairwise in section order: signal never earlier
                # than its herald in raw time
                ti = 0
                si = 0
                traw = np.empty(tcount, dtype=np.float64)
                sraw = np.empty(fold, dtype=np.float64)
                for w in range(width):
                    j = order[w]
                    if mrole[j] == 1:
                        traw[ti] = mraw[j]
                        ti += 1
                    else:
                        sraw[si] = mraw[j]
                        si += 1
                for w in range(fold):
                    if sraw[w] < traw[w]:
                        feasible = False
                        break
            if not feasible:
                continue
        else:
            # unequal herald multiplicity: require no signal before the
            # first heralded section
            min_trig = out_trig_k[n_ev, 0]
            for w in range(1, tcount):
                if out_trig_k[n_ev, w] < min_trig:
                    min_trig = out_trig_k[n_ev, w]
            bad = False
            for w in range(fold):
                if out_sig_k[n_ev, w] < min_trig:
                    bad = True
                    break
            if bad:
                continue

        out_tick[n_ev] = last_tick
        n_ev += 1
    return n_ev


try:  # pragma: no cover - taken whenever numba is importable
    import numba

    _scan_candidates_jit = numba.njit(cache=True, nogil=True)(_scan_candidates)
except Exception:
    _scan_candidates_jit = _scan_candidates


def _extract_span(
    t, raw, ch, ticks, roles, span_lo, span_hi, params, table, channel_map
):
    """Evaluate candidates whose anchor lies in [span_lo, span_hi)."""
    gather = params.gather_ns
    trig_idx = np.flatnonzero(roles == 1)
    if trig_idx.size == 0:
        return []
    ttimes = t[trig_idx]
    anchor_mask = np.concatenate([[True], np.diff(ttimes) > gather])
    anchors = trig_idx[anchor_mask & (ttimes >= span_lo) & (ttimes < span_hi)]
    if anchors.size == 0:
        return []

    tcount, fold = params.trigger_count, params.fold
    out_tick = np.empty(anchors.size, dtype=np.int64)
    out_trig_ch = np.empty((anchors.size, tcount), dtype=np.int64)
    out_trig_k = np.empty((anchors.size, tcount), dtype=np.int64)
    out_sig_ch = np.empty((anchors.size, fold), dtype=np.int64)
    out_sig_k = np.empty((anchors.size, fold), dtype=np.int64)
    n_ev = _scan_candidates_jit(
        t,
        raw,
        ch,
        ticks,
        roles,
        anchors,
        params.gather_ns,
        params.window_ns,
        params.section_shift_ns,
        params.layers,
        fold,
        tcount,
        table.signal_drift[0],
        table.signal_drift[1],
        table.trigger_drift[0],
        table.trigger_drift[1],
        out_tick,
        out_trig_ch,
        out_trig_k,
        out_sig_ch,
        out_sig_k,
    )

    sig_chip = {c: i for i, c in enumerate(channel_map.signal_channels)}
    events = []
    for e in range(n_ev):
        sig_layers = tuple(int(v) for v in out_sig_k[e])
        sig_chans = tuple(sig_chip[int(c)] for c in out_sig_ch[e])
        events.append(
            CoincidenceEvent(
                timestamp_tick=int(out_tick[e]),
                fold=fold,
                trigger_channels=tuple(int(c) for c in out_trig_ch[e]),
                trigger_layers=tuple(int(v) for v in out_trig_k[e]),
                signal_channels=sig_chans,
                signal_layers=sig_layers,
                signal_global_channels=tuple(
                    layer * params.modes + chip
                    for layer, chip in zip(sig_layers, sig_chans)
                ),
            )
        )
    return events


def extract_coincidences(
    records,
    table: CalibrationTable,
    params: ExtractionParams,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
):
    """Single-pass coincidence extraction over a tick-sorted record array;
    events are returned in stream order."""
    t, raw, ch, ticks, roles = _corrected_times(records, table, channel_map)
    return _extract_span(
        t, raw, ch, ticks, roles, -np.inf, np.inf, params, table, channel_map
    )


@dataclass(frozen=True)
class ChunkStats:
    records: int
    events: int
    elapsed_s: float
    workers: int

    @property
    def records_per_second(self) -> float:
        return self.records / self.elapsed_s if self.elapsed_s > 0 else float("inf")


def process_chunked(
    path,
    table: CalibrationTable,
    params: ExtractionParams,
    workers: int = 1,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
    overlap_ns: float = None,
):
    """Chunked extraction over a stream file: the time axis is split into
    ``workers`` spans, each evaluated on its span plus ``overlap_ns`` of
    context on both sides.

    The overlap must cover the gather window (anchoring looks back one
    gather window and events extend one gather window forward) and is
    rejected otherwise. Results are identical to the single-pass extraction
    for any worker count. Returns ``(events, ChunkStats)``.
    """
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")
    overlap = params.gather_ns if overlap_ns is None else float(overlap_ns)
    if overlap < params.gather_ns:
        raise ConfigError(
            f"chunk overlap {overlap} ns is smaller than the gather window "
            f"{params.gather_ns} ns; boundary events would be lost"
        )
    records = read_stream(path)
    t0 = time.perf_counter()
    t, raw, ch, ticks, roles = _corrected_times(records, table, channel_map)

    if t.size == 0 or workers == 1:
        spans = [(-np.inf, np.inf)]
    else:
        edges = np.linspace(t[0], t[-1], workers + 1)
        edges[0], edges[-1] = -np.inf, np.inf
        spans = list(zip(edges[:-1], edges[1:]))

    def run_span(span):
        lo, hi = span
        s_lo = 0 if lo == -np.inf else np.searchsorted(t, lo - overlap, side="left")
        s_hi = t.size if hi == np.inf else np.searchsorted(t, hi + overlap, side="right")
        sl = slice(s_lo, s_hi)
        return _extract_span(
            t[sl], raw[sl], ch[sl], ticks[sl], roles[sl], lo, hi, params, table,
            channel_map,
        )

    if len(spans) == 1:
        chunks = [run_span(spans[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run_span, spans))
    events = [e for chunk in chunks for e in chunk]
    elapsed = time.perf_counter() - t0
    return events, ChunkStats(
        records=int(records.shape[0]),
        events=len(events),
        elapsed_s=elapsed,
        workers=workers,
    )


def write_events_csv(events, path) -> None:
    """CSV with columns ``event_timestamp_tick, fold, trigger_layers,
    signal_global_channels`` (lists hyphen-joined)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("event_timestamp_tick,fold,trigger_layers,signal_global_channels\n")
        for e in events:
            trig = "-".join(str(v) for v in e.trigger_layers)
            sig = "-".join(str(v) for v in e.signal_global_channels)
            fh.write(f"{e.timestamp_tick},{e.fold},{trig},{sig}\n")


def read_events_csv(path):
    """Read back the event CSV; channel-level detail not present in the file
    is left empty."""
    events = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("event_timestamp_tick"):
            raise ConfigError(f"{path!r} is not an event CSV")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            tick, fold, trig, sig = line.split(",")
            trig_layers = tuple(int(v) for v in trig.split("-")) if trig else ()
            sig_globals = tuple(int(v) for v in sig.split("-")) if sig else ()
            events.append(
                CoincidenceEvent(
                    timestamp_tick=int(tick),
                    fold=int(fold),
                    trigger_channels=(),
                    trigger_layers=trig_layers,
                    signal_channels=(),
                    signal_layers=(),
                    signal_global_channels=sig_globals,
                )
            )
    return events
