"""Exact multi-photon output statistics and samplers.

The probability weight of scattering an input occupancy pattern S into an
output pattern T through a matrix U is

    indistinguishable:  |perm(U_TS)|^2 / (prod_i s_i! * prod_j t_j!)
    distinguishable:    perm(|U_TS|^2 entrywise) / (prod_i s_i! * prod_j t_j!)

where U_TS repeats output rows per t and input columns per s. For a unitary
U the indistinguishable weights over all outputs sum to 1; for the lossy
looped-network matrix they do not, and :func:`full_distribution` renormalizes
over the enumerated (post-selected) outcome set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement

import numpy as np

from .errors import ConfigError, PatternError, SizeLimitError
from .matrices import as_complex_matrix, submatrix
from .permanent import permanent_ryser

__all__ = [
    "MAX_PHOTONS",
    "MAX_ENUMERATION",
    "OccupancyPattern",
    "Distribution",
    "pattern_weight",
    "enumerate_output_patterns",
    "full_distribution",
    "draw_samples",
    "scattershot_inputs",
    "total_variation_distance",
]

MAX_PHOTONS = 10
MAX_ENUMERATION = 10_000_000

MODES = ("indistinguishable", "distinguishable")


@dataclass(frozen=True, order=True)
class OccupancyPattern:
    """Photon occupation counts over the global (layer x chip-mode) modes."""

    occupancies: tuple

    def __post_init__(self):
        occ = tuple(int(c) for c in self.occupancies)
        if len(occ) < 1 or any(c < 0 for c in occ):
            raise PatternError(f"invalid occupancies {occ}")
        object.__setattr__(self, "occupancies", occ)

    @property
    def total(self) -> int:
        return sum(self.occupancies)

    @property
    def size(self) -> int:
        return len(self.occupancies)

    @property
    def collision_free(self) -> bool:
        return all(c <= 1 for c in self.occupancies)

    def mode_indices(self) -> tuple:
        """Flatten to one mode index per photon, e.g. (1,0,2) -> (0, 2, 2)."""
        out = []
        for m, c in enumerate(self.occupancies):
            out.extend([m] * c)
        return tuple(out)

    @classmethod
    def from_modes(cls, indices, size: int) -> "OccupancyPattern":
        occ = [0] * size
        for m in indices:
            occ[m] += 1
        return cls(tuple(occ))

    @classmethod
    def from_string(cls, text: str) -> "OccupancyPattern":
        return cls(tuple(int(tok) for tok in text.strip().split("-")))

    def __str__(self) -> str:
        return "-".join(str(c) for c in self.occupancies)


@dataclass(frozen=True, eq=False)  # ndarray field: no auto __eq__
class Distribution:
    """Normalized probability vector over distinct occupancy patterns.

    ``raw_weight_sum`` records the pre-normalization total weight; it equals
    1 for a unitary matrix with full Fock enumeration and is the
    post-selection normalization constant otherwise.
    """

    patterns: tuple
    probs: np.ndarray = field(repr=False)
    raw_weight_sum: float = 1.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        patterns = tuple(self.patterns)
        if probs.shape != (len(patterns),):
            raise PatternError(
                f"{len(patterns)} patterns but {probs.shape} probabilities"
            )
        if len(set(patterns)) != len(patterns):
            raise PatternError("patterns must be distinct")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise PatternError("probabilities must be finite and nonnegative")
        if abs(probs.sum() - 1.0) > 1e-9:
            raise PatternError(f"probabilities sum to {probs.sum()!r}, not 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "patterns", patterns)

    def prob_of(self, pattern: OccupancyPattern) -> float:
        try:
            return float(self.probs[self._index()[pattern]])
        except KeyError:
            return 0.0

    def _index(self) -> dict:
        idx = getattr(self, "_idx_cache", None)
        if idx is None:
            idx = {p: k for k, p in enumerate(self.patterns)}
            object.__setattr__(self, "_idx_cache", idx)
        return idx

    def save_csv(self, path) -> None:
        """One row per pattern: ``occupancy-string, probability`` (exact
        double round trip)."""
        with open(path, "w", encoding="ascii") as fh:
            for pat, p in zip(self.patterns, self.probs):
                fh.write(f"{pat},{p:.17g}\n")

    @classmethod
    def load_csv(cls, path) -> "Distribution":
        patterns, probs = [], []
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                occ, prob = line.rsplit(",", 1)
                patterns.append(OccupancyPattern.from_string(occ))
                probs.append(float(prob))
        return cls(tuple(patterns), np.asarray(probs))


def _factorial_norm(pattern: OccupancyPattern) -> float:
    out = 1.0
    for c in pattern.occupancies:
        out *= math.factorial(c)
    return out


def pattern_weight(U, input_pattern, output_pattern, mode="indistinguishable") -> float:
    """Unnormalized transition weight from ``input_pattern`` to
    ``output_pattern`` through ``U`` (equals the probability when U is
    unitary)."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    A = as_complex_matrix(U)
    if input_pattern.total != output_pattern.total:
        raise PatternError(
            f"photon count mismatch: input {input_pattern.total} vs output "
            f"{output_pattern.total}"
        )
    if input_pattern.total > MAX_PHOTONS:
        raise SizeLimitError(
            f"pattern weights capped at {MAX_PHOTONS} photons, got "
            f"{input_pattern.total}"
        )
    if input_pattern.size != A.shape[1] or output_pattern.size != A.shape[0]:
        raise PatternError(
            f"pattern lengths ({input_pattern.size}, {output_pattern.size}) do "
            f"not match matrix shape {A.shape}"
        )
    if input_pattern.total == 0:
        return 1.0
    sub = submatrix(A, output_pattern.occupancies, input_pattern.occupancies)
    norm = _factorial_norm(input_pattern) * _factorial_norm(output_pattern)
    if mode == "indistinguishable":
        return float(abs(permanent_ryser(sub)) ** 2 / norm)
    return float(permanent_ryser(np.abs(sub) ** 2).real / norm)


def enumerate_output_patterns(modes: int, photons: int, collision_free: bool = False):
    """All occupancy patterns of ``photons`` photons over ``modes`` modes, in
    lexicographic mode-index order. Guarded at 1e7 patterns."""
    count = (
        math.comb(modes, photons)
        if collision_free
        else math.comb(modes + photons - 1, photons)
    )
    if collision_free and photons > modes:
        raise PatternError(
            f"cannot place {photons} collision-free photons in {modes} modes"
        )
    if count > MAX_ENUMERATION:
        raise SizeLimitError(
            f"enumeration of {count} patterns exceeds the {MAX_ENUMERATION} cap"
        )
    chooser = combinations if collision_free else combinations_with_replacement
    for idx in chooser(range(modes), photons):
        yield OccupancyPattern.from_modes(idx, modes)


def full_distribution(
    U, input_pattern, mode="indistinguishable", collision_free=False, workers=1
) -> Distribution:
    """Exact renormalized distribution over every output pattern (or every
    collision-free pattern) reachable from ``input_pattern``.

    With ``workers > 1`` the pattern list is evaluated in contiguous chunks
    on a thread pool; chunk results are merged in pattern order, so the
    output is identical for any worker count.
    """
    A = as_complex_matrix(U)
    patterns = tuple(
        enumerate_output_patterns(A.shape[0], input_pattern.total, collision_free)
    )
    if workers <= 1 or len(patterns) < 64:
        weights = np.asarray(
            [pattern_weight(A, input_pattern, t, mode) for t in patterns]
        )
    else:
        from concurrent.futures import ThreadPoolExecutor

        bounds = [len(patterns) * k // workers for k in range(workers + 1)]

        def chunk(lo, hi):
            return [pattern_weight(A, input_pattern, t, mode) for t in patterns[lo:hi]]

        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, bounds[:-1], bounds[1:]))
        weights = np.asarray([w for part in parts for w in part])
    total = float(weights.sum())
    if total <= 0.0:
        raise PatternError("all output weights are zero; nothing to normalize")
    return Distribution(patterns, weights / total, raw_weight_sum=total)


def draw_samples(dist: Distribution, count: int, seed: int):
    """Inverse-CDF sampling; deterministic per seed."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    return [dist.patterns[i] for i in idx]


def scattershot_inputs(
    layers: int,
    modes: int,
    fold: int,
    count: int,
    heralding_efficiency: float = 1.0,
    seed: int = 0,
):
    """Random heralded input patterns: ``count`` draws, each a uniform
    ``fold``-photon collision-free combination over the ``layers * modes``
    global modes.

    Post-selecting on exactly ``fold`` heralds firing makes the conditional
    law uniform over combinations regardless of the per-source efficiency,
    so ``heralding_efficiency`` affects only the implied raw event rate; it
    is validated here and used by rate estimates, not by the draw itself.
    """
    total = layers * modes
    if fold > total:
        raise PatternError(f"cannot herald {fold} photons over {total} modes")
    if fold < 1:
        raise PatternError(f"fold must be >= 1, got {fold}")
    if not (0.0 < heralding_efficiency <= 1.0):
        raise ConfigError(
            f"heralding_efficiency must be in (0, 1], got {heralding_efficiency}"
        )
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        slots = rng.choice(total, size=fold, replace=False)
        out.append(OccupancyPattern.from_modes(slots, total))
    return out


def total_variation_distance(a: Distribution, b: Distribution) -> float:
    """TVD over the union support of two distributions."""
    support = set(a.patterns) | set(b.patterns)
    return 0.5 * sum(abs(a.prob_of(p) - b.prob_of(p)) for p in support)
