"""Binary timestamped detector records and a synthetic stream generator.

Stream file format ``MBS1``: 4 magic bytes + little-endian u64 record count,
then 9 bytes per record (u8 channel + little-endian u64 timestamp tick).
One tick is 64 ps. Records are tick-sorted within a file.

The generator lays events on a pulse grid (12.5 ns nominal period). Each
event occupies one frame of consecutive pulses ("sections" / "layers"): every
input photon contributes a herald (trigger) record at its layer's pulse time,
every output photon a signal record 5 ns after its layer's pulse time. The
pulse base and the intra-pulse offset are quantized to ticks separately, so a
clean trigger/signal pair is always exactly 78 ticks apart. Optional
per-layer-interval clock drift, Gaussian jitter, per-channel detection
efficiency, dark counts, and spurious extra pair emission turn the clean
timeline into a realistic detector stream. Everything is deterministic per
seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigError,
    PatternError,
    StreamMagicError,
    StreamOrderError,
    StreamTruncatedError,
)
from .sampling import Distribution, OccupancyPattern

__all__ = [
    "TICK_NS",
    "PULSE_PERIOD_NS",
    "SIGNAL_LAG_NS",
    "SIGNAL_LAG_TICKS",
    "N_CHANNELS",
    "RECORD_DTYPE",
    "REFERENCE_SIGNAL_DRIFT",
    "REFERENCE_TRIGGER_DRIFT",
    "ClockModel",
    "NoiseModel",
    "ChannelMap",
    "EventEnsemble",
    "TruthEvent",
    "make_channel_map",
    "records_array",
    "records_from_tags",
    "write_stream",
    "read_stream",
    "generate_stream",
]

TICK_NS = 0.064
PULSE_PERIOD_NS = 12.5
SIGNAL_LAG_NS = 5.0
# round(5 ns / 64 ps) = round(78.125); the generator quantizes the lag
# separately from the pulse base, so this constant is exact on clean streams.
SIGNAL_LAG_TICKS = 78
N_CHANNELS = 32

RECORD_DTYPE = np.dtype([("channel", "u1"), ("tick", "<u8")])

# Empirical pulse-interval drift of a free-running 80 MHz oscillator over
# long acquisitions (ns deviation per layer interval; ns intercept), fitted
# separately on signal-class and trigger-class channels.
REFERENCE_SIGNAL_DRIFT = (0.008744, -0.2105)
REFERENCE_TRIGGER_DRIFT = (0.008358, -0.2764)

ROLE_SIGNAL = "signal"
ROLE_TRIGGER = "trigger"
ROLE_RESERVED = "reserved"
_ROLES = (ROLE_SIGNAL, ROLE_TRIGGER, ROLE_RESERVED)


@dataclass(frozen=True)
class ClockModel:
    """Pulse clock with optional linear timing drift per layer interval.

    The deviation of the spacing between a reference layer and a layer
    ``k`` intervals later is ``slope * k + intercept`` (ns) for ``k >= 1``
    and 0 for ``k = 0``; signal-class and trigger-class channels drift with
    separate coefficients.
    """

    pulse_period_ns: float = PULSE_PERIOD_NS
    signal_slope: float = 0.0
    signal_intercept: float = 0.0
    trigger_slope: float = 0.0
    trigger_intercept: float = 0.0

    def __post_init__(self):
        if not (self.pulse_period_ns > 0):
            raise ConfigError(f"pulse period must be > 0, got {self.pulse_period_ns}")
        for v in (
            self.signal_slope,
            self.signal_intercept,
            self.trigger_slope,
            self.trigger_intercept,
        ):
            if not math.isfinite(v):
                raise ConfigError("drift coefficients must be finite")

    def drift_ns(self, layer_interval, signal_class: bool):
        """Timing deviation at the given layer interval(s); 0 at interval 0."""
        k = np.asarray(layer_interval, dtype=np.float64)
        slope, icpt = (
            (self.signal_slope, self.signal_intercept)
            if signal_class
            else (self.trigger_slope, self.trigger_intercept)
        )
        return np.where(k == 0, 0.0, slope * k + icpt)


def drifting_clock() -> ClockModel:
    """Clock preloaded with the reference drift coefficients."""
    return ClockModel(
        signal_slope=REFERENCE_SIGNAL_DRIFT[0],
        signal_intercept=REFERENCE_SIGNAL_DRIFT[1],
        trigger_slope=REFERENCE_TRIGGER_DRIFT[0],
        trigger_intercept=REFERENCE_TRIGGER_DRIFT[1],
    )


@dataclass(frozen=True, eq=False)  # ndarray fields: no auto __eq__
class NoiseModel:
    """Detection-chain imperfections: dark counts, efficiency, timing jitter,
    per-channel electronics delay, and spurious extra pair emission per
    firing pulse train.

    ``dark_rate_hz``, ``detection_efficiency``, and ``channel_delay_ns``
    accept a scalar (applied to all 32 channels) or a length-32 sequence.
    """

    dark_rate_hz: object = 0.0
    detection_efficiency: object = 1.0
    jitter_sigma_ps: float = 0.0
    channel_delay_ns: object = 0.0
    extra_pair_probability: float = 0.0

    def __post_init__(self):
        rates = np.broadcast_to(
            np.asarray(self.dark_rate_hz, dtype=np.float64), (N_CHANNELS,)
        ).copy()
        effs = np.broadcast_to(
            np.asarray(self.detection_efficiency, dtype=np.float64), (N_CHANNELS,)
        ).copy()
        delays = np.broadcast_to(
            np.asarray(self.channel_delay_ns, dtype=np.float64), (N_CHANNELS,)
        ).copy()
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise ConfigError("dark rates must be finite and >= 0")
        if np.any(effs <= 0) or np.any(effs > 1):
            raise ConfigError("detection efficiencies must lie in (0, 1]")
        if not np.all(np.isfinite(delays)):
            raise ConfigError("channel delays must be finite")
        if self.jitter_sigma_ps < 0:
            raise ConfigError("jitter sigma must be >= 0")
        if not (0.0 <= self.extra_pair_probability < 1.0):
            raise ConfigError("extra_pair_probability must be in [0, 1)")
        object.__setattr__(self, "dark_rate_hz", rates)
        object.__setattr__(self, "detection_efficiency", effs)
        object.__setattr__(self, "channel_delay_ns", delays)


@dataclass(frozen=True)
class ChannelMap:
    """Physical channel assignment: role per channel plus a layer-capable
    flag (informational; reserved channels are ignored by the pipeline).

    Chip output mode ``c`` maps to the c-th signal channel; the herald for a
    photon injected on chip mode ``i`` is the i-th trigger channel.
    """

    roles: tuple
    layer_capable: tuple

    def __post_init__(self):
        if len(self.roles) != N_CHANNELS or len(self.layer_capable) != N_CHANNELS:
            raise ConfigError(f"channel map must cover {N_CHANNELS} channels")
        for r in self.roles:
            if r not in _ROLES:
                raise ConfigError(f"unknown channel role {r!r}")
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(
            self, "layer_capable", tuple(bool(b) for b in self.layer_capable)
        )

    @property
    def signal_channels(self) -> tuple:
        return tuple(c for c in range(N_CHANNELS) if self.roles[c] == ROLE_SIGNAL)

    @property
    def trigger_channels(self) -> tuple:
        return tuple(c for c in range(N_CHANNELS) if self.roles[c] == ROLE_TRIGGER)

    def role_of(self, channel: int) -> str:
        if not (0 <= channel < N_CHANNELS):
            raise ConfigError(f"channel {channel} outside 0..{N_CHANNELS - 1}")
        return self.roles[channel]

    def chip_mode_of(self, channel: int) -> int:
        """Chip output mode addressed by a signal channel."""
        try:
            return self.signal_channels.index(channel)
        except ValueError:
            raise ConfigError(f"channel {channel} is not a signal channel") from None

    def herald_mode_of(self, channel: int) -> int:
        """Chip input mode heralded by a trigger channel."""
        try:
            return self.trigger_channels.index(channel)
        except ValueError:
            raise ConfigError(f"channel {channel} is not a trigger channel") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            for c in range(N_CHANNELS):
                fh.write(f"{c} {self.roles[c]} {int(self.layer_capable[c])}\n")

    @classmethod
    def load(cls, path) -> "ChannelMap":
        roles = [ROLE_RESERVED] * N_CHANNELS
        capable = [False] * N_CHANNELS
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split()
                if len(parts) != 3:
                    raise ConfigError(f"bad channel-map line: {line!r}")
                c = int(parts[0])
                if not (0 <= c < N_CHANNELS):
                    raise ConfigError(f"channel {c} outside 0..{N_CHANNELS - 1}")
                roles[c] = parts[1]
                capable[c] = parts[2] not in ("0", "false", "no")
        return cls(tuple(roles), tuple(capable))


def make_channel_map(signals: int = 16, triggers: int = 8) -> ChannelMap:
    """Contiguous layout: signal channels first, then triggers, rest
    reserved."""
    if signals < 1 or triggers < 1 or signals + triggers > N_CHANNELS:
        raise ConfigError(
            f"cannot fit {signals} signal + {triggers} trigger channels in "
            f"{N_CHANNELS}"
        )
    roles = (
        (ROLE_SIGNAL,) * signals
        + (ROLE_TRIGGER,) * triggers
        + (ROLE_RESERVED,) * (N_CHANNELS - signals - triggers)
    )
    capable = (True,) * (signals + triggers) + (False,) * (
        N_CHANNELS - signals - triggers
    )
    return ChannelMap(roles, capable)


DEFAULT_CHANNEL_MAP = make_channel_map(16, 8)


# ---------------------------------------------------------------------------
# Stream file I/O
# ---------------------------------------------------------------------------

STREAM_MAGIC = b"MBS1"
_HEADER_BYTES = len(STREAM_MAGIC) + 8


def records_array(channels, ticks) -> np.ndarray:
    """Pack parallel channel/tick sequences into the record dtype."""
    ch = np.asarray(channels, dtype=np.uint8)
    tk = np.asarray(ticks, dtype=np.uint64)
    if ch.shape != tk.shape or ch.ndim != 1:
        raise ConfigError("channels and ticks must be equal-length 1-D")
    out = np.empty(ch.shape[0], dtype=RECORD_DTYPE)
    out["channel"] = ch
    out["tick"] = tk
    return out


def records_from_tags(channels, times_ps, resolution_ps: float = 1.0) -> np.ndarray:
    """Map generic time-tagger output onto the stream record layout.

    This is the conversion contract for hardware ingestion: one record per
    tag, ``channel`` = detector index (must be < 32), ``tick`` = tag time
    rounded to the nearest 64 ps. ``times_ps`` is the tag time in units of
    ``resolution_ps``. Parsing any vendor's container format is out of
    scope; parse it elsewhere and feed the arrays through here, then sort
    before :func:`write_stream`.
    """
    t_ps = np.asarray(times_ps, dtype=np.float64) * resolution_ps
    if np.any(t_ps < 0):
        raise ConfigError("tag times must be nonnegative")
    ticks = np.rint(t_ps / (TICK_NS * 1000.0)).astype(np.int64)
    recs = records_array(channels, ticks.astype(np.uint64))
    return recs[np.argsort(recs["tick"], kind="stable")]


def _check_sorted(records: np.ndarray) -> None:
    ticks = records["tick"]
    if ticks.shape[0] > 1 and np.any(np.diff(ticks.astype(np.int64)) < 0):
        raise StreamOrderError("record ticks are not non-decreasing")


def write_stream(path, records) -> None:
    """Write tick-sorted records; raises on unsorted input."""
    recs = np.asarray(records, dtype=RECORD_DTYPE)
    if np.any(recs["channel"] >= N_CHANNELS):
        raise ConfigError("channel ids must be < 32")
    _check_sorted(recs)
    with open(path, "wb") as fh:
        fh.write(STREAM_MAGIC)
        fh.write(np.uint64(recs.shape[0]).tobytes())
        fh.write(recs.tobytes())


def read_stream(path) -> np.ndarray:
    """Read an ``MBS1`` file back into a record array (bit-exact
    round trip)."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER_BYTES)
        if len(head) < _HEADER_BYTES or head[:4] != STREAM_MAGIC:
            raise StreamMagicError(f"{path!r} is not an MBS1 stream")
        count = int(np.frombuffer(head[4:], dtype="<u8")[0])
        body = fh.read()
    expected = count * RECORD_DTYPE.itemsize
    if len(body) < expected:
        raise StreamTruncatedError(
            f"{path!r} declares {count} records but holds "
            f"{len(body) // RECORD_DTYPE.itemsize}"
        )
    records = np.frombuffer(body[:expected], dtype=RECORD_DTYPE).copy()
    _check_sorted(records)
    return records


# ---------------------------------------------------------------------------
# Synthetic stream generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)  # ndarray field: no auto __eq__
class EventEnsemble:
    """What the source can emit: (input pattern, output distribution) pairs
    with selection weights. Each firing frame draws one pair, then one output
    pattern from that pair's distribution.

    Inputs must be collision-free (each heralded photon needs its own
    trigger channel slot).
    """

    pairs: tuple
    weights: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        pairs = tuple((inp, dist) for inp, dist in self.pairs)
        if not pairs:
            raise ConfigError("ensemble needs at least one (input, outputs) pair")
        size = pairs[0][0].size
        for inp, dist in pairs:
            if not isinstance(inp, OccupancyPattern) or not isinstance(
                dist, Distribution
            ):
                raise ConfigError("pairs must be (OccupancyPattern, Distribution)")
            if not inp.collision_free:
                raise PatternError(f"ensemble input {inp} is not collision-free")
            if inp.size != size or any(p.size != size for p in dist.patterns):
                raise PatternError("all ensemble patterns must share one mode count")
        w = (
            np.full(len(pairs), 1.0 / len(pairs))
            if self.weights is None
            else np.asarray(self.weights, dtype=np.float64)
        )
        if w.shape != (len(pairs),) or np.any(w < 0) or w.sum() <= 0:
            raise ConfigError("bad ensemble weights")
        w = w / w.sum()
        w.setflags(write=False)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "weights", w)

    @classmethod
    def single(cls, input_pattern: OccupancyPattern, dist: Distribution):
        return cls(((input_pattern, dist),))

    @property
    def total_modes(self) -> int:
        return self.pairs[0][0].size


@dataclass(frozen=True)
class TruthEvent:
    """Ground-truth log entry for one emitted event."""

    frame: int
    base_pulse: int
    input_pattern: OccupancyPattern
    output_pattern: OccupancyPattern

    def signature(self, modes: int) -> tuple:
        """(trigger layers, signal global modes) relative to the first input
        layer, matching what extraction reports."""
        in_modes = self.input_pattern.mode_indices()
        base_layer = min(g // modes for g in in_modes)
        trig_layers = tuple(sorted(g // modes - base_layer for g in in_modes))
        sig_globals = tuple(
            sorted(g - base_layer * modes for g in self.output_pattern.mode_indices())
        )
        return trig_layers, sig_globals


def _layer_and_chip(pattern: OccupancyPattern, modes: int):
    """Per photon (layer, chip mode) arrays for a global-mode pattern."""
    g = np.asarray(pattern.mode_indices(), dtype=np.int64)
    return g // modes, g % modes


def generate_stream(
    net,
    ensemble: EventEnsemble,
    clock: ClockModel,
    noise: NoiseModel,
    duration_pulses: int,
    seed: int,
    *,
    firing_probability: float = 0.2,
    frame_pulses: int = None,
    channel_map: ChannelMap = DEFAULT_CHANNEL_MAP,
    return_truth: bool = False,
):
    """Synthesize a tick-sorted detector stream.

    ``net`` supplies the per-layer mode count (its ``layers`` is the default
    frame length); patterns in ``ensemble`` live on the global layer*mode
    grid. Frames of ``frame_pulses`` pulses tile the duration; each frame
    fires independently with ``firing_probability`` and a firing frame emits
    one event (plus, with ``noise.extra_pair_probability``, a spurious second
    draw on the same frame). Returns the record array, plus the ground-truth
    event list when ``return_truth`` is set.
    """
    modes = net.modes
    frame_pulses = int(frame_pulses if frame_pulses is not None else net.layers)
    if frame_pulses < 1:
        raise ConfigError(f"frame_pulses must be >= 1, got {frame_pulses}")
    if not (0.0 < firing_probability <= 1.0):
        raise ConfigError(f"firing_probability must be in (0, 1], got {firing_probability}")
    if ensemble.total_modes % modes != 0:
        raise ConfigError(
            f"ensemble patterns cover {ensemble.total_modes} global modes, "
            f"not a multiple of {modes} chip modes"
        )
    sig_ch = channel_map.signal_channels
    trig_ch = channel_map.trigger_channels
    if modes > len(sig_ch):
        raise ConfigError(
            f"{modes} chip modes need {modes} signal channels, map has {len(sig_ch)}"
        )

    rng = np.random.default_rng(seed)
    n_frames = int(duration_pulses) // frame_pulses
    period = clock.pulse_period_ns

    firing = np.flatnonzero(rng.random(n_frames) < firing_probability)
    pair_idx = (
        rng.choice(len(ensemble.pairs), size=firing.size, p=ensemble.weights)
        if len(ensemble.pairs) > 1
        else np.zeros(firing.size, dtype=np.int64)
    )
    if noise.extra_pair_probability > 0.0 and firing.size:
        extra_mask = rng.random(firing.size) < noise.extra_pair_probability
        extra_frames = firing[extra_mask]
        extra_pairs = (
            rng.choice(len(ensemble.pairs), size=extra_frames.size, p=ensemble.weights)
            if len(ensemble.pairs) > 1
            else np.zeros(extra_frames.size, dtype=np.int64)
        )
        firing = np.concatenate([firing, extra_frames])
        pair_idx = np.concatenate([pair_idx, extra_pairs])

    jitter_ns = noise.jitter_sigma_ps / 1000.0
    effs = noise.detection_efficiency

    all_channels = []
    all_ticks = []
    truth = []

    for k, (inp, dist) in enumerate(ensemble.pairs):
        frames_k = firing[pair_idx == k]
        if frames_k.size == 0:
            continue
        # draw one output pattern per firing frame of this pair
        cdf = np.cumsum(dist.probs)
        cdf[-1] = 1.0
        out_idx = np.searchsorted(cdf, rng.random(frames_k.size), side="right")

        in_layers, in_chips = _layer_and_chip(inp, modes)
        if in_layers.size and in_layers.max() >= frame_pulses:
            raise ConfigError(
                f"input pattern {inp} spans layer {in_layers.max()}, beyond the "
                f"{frame_pulses}-pulse frame"
            )
        if in_chips.size and in_chips.max() >= len(trig_ch):
            raise ConfigError(
                f"input chip mode {in_chips.max()} has no trigger channel "
                f"({len(trig_ch)} available)"
            )
        trig_channels = np.asarray([trig_ch[c] for c in in_chips], dtype=np.int64)
        trig_intra = clock.drift_ns(in_layers, signal_class=False)

        for o in np.unique(out_idx):
            frames_o = frames_k[out_idx == o]
            outp = dist.patterns[o]
            out_layers, out_chips = _layer_and_chip(outp, modes)
            if out_layers.size and out_layers.max() >= frame_pulses:
                raise ConfigError(
                    f"output pattern {outp} spans layer {out_layers.max()}, "
                    f"beyond the {frame_pulses}-pulse frame"
                )
            sig_channels = np.asarray(
                [sig_ch[c] for c in out_chips], dtype=np.int64
            )
            sig_intra = SIGNAL_LAG_NS + clock.drift_ns(out_layers, signal_class=True)

            layers = np.concatenate([in_layers, out_layers])
            channels = np.concatenate([trig_channels, sig_channels])
            intra = np.concatenate([trig_intra, sig_intra])

            pulses = frames_o[:, None] * frame_pulses + layers[None, :]
            base_ticks = np.rint(pulses * (period / TICK_NS)).astype(np.int64)
            intra_all = np.broadcast_to(
                intra + noise.channel_delay_ns[channels],
                (frames_o.size, intra.size),
            ).astype(np.float64)
            if jitter_ns > 0.0:
                intra_all = intra_all + rng.normal(
                    0.0, jitter_ns, size=intra_all.shape
                )
            ticks = base_ticks + np.rint(intra_all / TICK_NS).astype(np.int64)
            chans = np.broadcast_to(channels, ticks.shape)

            keep = rng.random(ticks.shape) < effs[chans]
            all_channels.append(chans[keep].astype(np.uint8))
            all_ticks.append(ticks[keep])

            if return_truth:
                base = frames_o * frame_pulses
                truth.extend(
                    TruthEvent(int(f), int(b), inp, outp)
                    for f, b in zip(frames_o, base)
                )

    # dark counts, Poisson per channel over the full duration
    duration_ns = duration_pulses * period
    duration_ticks = max(int(duration_ns / TICK_NS), 1)
    for c in range(N_CHANNELS):
        rate = noise.dark_rate_hz[c]
        if rate <= 0.0:
            continue
        n_dark = rng.poisson(rate * duration_ns * 1e-9)
        if n_dark:
            all_channels.append(np.full(n_dark, c, dtype=np.uint8))
            all_ticks.append(
                rng.integers(0, duration_ticks, size=n_dark, dtype=np.int64)
            )

    if all_channels:
        channels = np.concatenate(all_channels)
        ticks = np.concatenate(all_ticks)
    else:
        channels = np.empty(0, dtype=np.uint8)
        ticks = np.empty(0, dtype=np.int64)
    np.clip(ticks, 0, None, out=ticks)

    order = np.lexsort((channels, ticks))
    channels = channels[order]
    ticks = ticks[order]
    if ticks.size:
        dup = np.concatenate(
            [[False], (np.diff(ticks) == 0) & (np.diff(channels.astype(np.int16)) == 0)]
        )
        channels = channels[~dup]
        ticks = ticks[~dup]

    records = records_array(channels, ticks.astype(np.uint64))
    if return_truth:
        truth.sort(key=lambda e: e.frame)
        return records, truth
    return records
