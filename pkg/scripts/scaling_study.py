#!/usr/bin/env python3
"""Layer-count and fold scaling study on a synthetic stream.

Builds one long stream whose events carry 5..10 photons with geometric
abundance and one photon parked up to ~950 sections downstream, then
extracts coincidences over a grid of section-window sizes and folds.
Counts rise with the layer window (more loop-delayed photons captured) and
fall geometrically with the fold. Results are written as CSV with
per-partition counts, mean, and standard deviation.
"""

import argparse
import pathlib

import numpy as np

from memboson.analysis import scaling_study
from memboson.eventstream import (
    ClockModel,
    EventEnsemble,
    NoiseModel,
    generate_stream,
    make_channel_map,
)
from memboson.network import LayeredNetwork
from memboson.pipeline import identity_table
from memboson.sampling import Distribution, OccupancyPattern


def build_stream(seed, frames, frame=2000, modes=10, max_far=950, far_step=7):
    cmap = make_channel_map(modes, modes)
    pairs, weights = [], []
    far_layers = list(range(0, max_far, far_step))
    for fold in range(5, 11):
        w_fold = 2.0 ** -(fold - 5)
        for far in far_layers:
            occ_in = [0] * (frame * modes)
            occ_out = [0] * (frame * modes)
            for c in range(fold):
                occ_in[c] = 1
            for c in range(fold - 1):
                occ_out[c] = 1
            occ_out[far * modes + fold - 1] = 1
            pairs.append(
                (
                    OccupancyPattern(tuple(occ_in)),
                    Distribution(
                        (OccupancyPattern(tuple(occ_out)),), np.array([1.0])
                    ),
                )
            )
            weights.append(w_fold / len(far_layers))
    net = LayeredNetwork(
        modes=modes, layers=frame, transition=0.0,
        blocks=tuple(np.eye(modes) for _ in range(frame)),
    )
    records = generate_stream(
        net, EventEnsemble(tuple(pairs), np.asarray(weights)), ClockModel(),
        NoiseModel(), duration_pulses=frame * frames, seed=seed,
        firing_probability=0.5, channel_map=cmap,
    )
    return records, cmap, modes


def write_rows(rows, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write("layers,fold,mean,std,counts\n")
        for row in rows:
            counts = "-".join(str(c) for c in row["counts"])
            fh.write(
                f"{row['layers']},{row['fold']},{row['mean']:.17g},"
                f"{row['std']:.17g},{counts}\n"
            )


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="scaling_out")
    ap.add_argument("--seed", type=int, default=900)
    ap.add_argument("--frames", type=int, default=70_000)
    ap.add_argument("--partitions", type=int, default=10)
    args = ap.parse_args()

    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    records, cmap, modes = build_stream(args.seed, args.frames)
    print(f"stream: {records.shape[0]} records")

    layer_rows = scaling_study(
        records, identity_table(), modes,
        layer_values=range(100, 1001, 100), fold_values=[5],
        channel_map=cmap, partitions=args.partitions,
    )
    write_rows(layer_rows, out / "counts_vs_layers.csv")
    print("fold 5, layer window 100..1000:")
    for row in layer_rows:
        print(f"  N={row['layers']:5d}  mean {row['mean']:8.1f} "
              f"+/- {row['std']:.1f}")

    fold_rows = scaling_study(
        records, identity_table(), modes,
        layer_values=[1000], fold_values=range(5, 11),
        channel_map=cmap, partitions=args.partitions,
    )
    write_rows(fold_rows, out / "counts_vs_fold.csv")
    print("layer window 1000, fold 5..10:")
    for row in fold_rows:
        print(f"  fold={row['fold']:2d}  mean {row['mean']:8.1f} "
              f"+/- {row['std']:.1f}")
    print(f"CSV tables in {out}/")


if __name__ == "__main__":
    main()
