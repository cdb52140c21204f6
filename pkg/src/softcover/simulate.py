"""Finite-blocklength validation: fixed-composition codebooks, the induced
output mixture, likelihood-ratio statistics, type-class codeword counts, and
exact or Monte Carlo error probabilities of the threshold test.

Randomness. Codebooks use numpy's PCG64 bit generator. A run is keyed by a
user seed; trial ``t`` of a Monte Carlo run draws from
``PCG64(SeedSequence((seed, t)))``, so trials are independent streams and
results do not depend on scheduling or worker count.

Exact sums enumerate the whole output space, which is capped at
``EXHAUSTIVE_BUDGET`` sequences; per-trial error probabilities are exact and
only the codebook average is sampled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measures import (
    Channel,
    Distribution,
    JointType,
    channel_surprisal,
    entropy_vec,
    kl_vec,
)
from ._pool import map_indexed

EXHAUSTIVE_BUDGET = 20_000_000
_ENUM_CHUNK = 1 << 16


class CompositionError(ValueError):
    """The requested blocklength cannot carry the input distribution."""


class BudgetError(ValueError):
    """Exhaustive output enumeration would exceed the sequence budget."""


def quantized_composition(n: int, p_in: Distribution) -> np.ndarray:
    """Integer symbol counts approximating ``n * p_in``.

    Counts are rounded to the nearest integers with a largest-remainder fix
    so they sum to ``n``. Blocklengths that would distort some symbol's mass
    by half a slot or more (rounding ties included, e.g. odd ``n`` for a
    uniform binary input) are rejected along with a suggestion of a nearby
    valid blocklength.
    """
    if n < 1:
        raise CompositionError(f"blocklength must be >= 1, got {n}")
    raw = n * p_in.probs
    counts = np.floor(raw).astype(np.int64)
    deficit = n - int(counts.sum())
    if deficit:
        order = np.argsort(-(raw - counts), kind="stable")
        counts[order[:deficit]] += 1
    err = np.abs(counts - raw)
    worst = int(np.argmax(err))
    if err[worst] >= 0.5 - 1e-9:
        suggestion = _suggest_blocklength(n, p_in)
        hint = f"; try n = {suggestion}" if suggestion else ""
        raise CompositionError(
            f"blocklength {n} distorts the mass of symbol {worst} by "
            f"{err[worst] / n:.3g} (more than half a slot){hint}")
    return counts


def _suggest_blocklength(n: int, p_in: Distribution) -> Optional[int]:
    for cand in range(n + 1, n + 8 * p_in.size + 1):
        raw = cand * p_in.probs
        if np.all(np.abs(raw - np.round(raw)) < 0.5 - 1e-9):
            return cand
    return None


@dataclass(frozen=True, eq=False)
class Codebook:
    """Fixed-composition codebook: ``M`` rows of length ``n`` over the input
    alphabet, every row a permutation of the same symbol counts."""

    codewords: np.ndarray
    n: int
    rate_nominal: float
    composition: np.ndarray

    def __init__(self, codewords, n: int, rate_nominal: float, composition):
        mat = np.array(codewords, dtype=np.int64)
        comp = np.array(composition, dtype=np.int64)
        if mat.ndim != 2 or mat.shape[1] != n:
            raise ValueError("codewords must be an (M, n) integer matrix")
        if mat.shape[0] < 1:
            raise ValueError("a codebook holds at least one codeword")
        for m in range(mat.shape[0]):
            got = np.bincount(mat[m], minlength=comp.size)
            if got.size > comp.size or not np.array_equal(got, comp):
                raise ValueError(f"codeword {m} is not in the type class")
        mat.setflags(write=False)
        comp.setflags(write=False)
        object.__setattr__(self, "codewords", mat)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "rate_nominal", rate_nominal)
        object.__setattr__(self, "composition", comp)

    @property
    def size(self) -> int:
        return self.codewords.shape[0]

    @property
    def realized_rate(self) -> float:
        return math.log(self.size) / self.n

    def input_type(self) -> Distribution:
        return Distribution(self.composition / self.n)


def codebook_size(n: int, rate: float) -> int:
    return max(1, round(math.exp(n * rate)))


def sample_codebook(n: int, rate: float, p_in: Distribution, seed) -> Codebook:
    """Draw ``round(e^{n rate})`` codewords uniformly from the quantized type
    class; ``seed`` may be an integer or a tuple of integers."""
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    counts = quantized_composition(n, p_in)
    m = codebook_size(n, rate)
    base = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    mat = rng.permuted(np.tile(base, (m, 1)), axis=1)
    return Codebook(mat, n, rate, counts)


def mixture_prob(cb: Codebook, w: Channel, y) -> float:
    """Probability of ``y`` under the codebook-averaged channel output."""
    y = _as_sequence(y, cb.n, w.num_outputs)
    per = w.rows[cb.codewords, np.broadcast_to(y, cb.codewords.shape)]
    return float(per.prod(axis=1).mean())


def _as_sequence(y, n: int, ny: int) -> np.ndarray:
    arr = np.asarray(y, dtype=np.int64)
    if arr.shape != (n,):
        raise ValueError(f"sequence must have length {n}")
    if arr.min() < 0 or arr.max() >= ny:
        raise ValueError("sequence contains symbols outside the alphabet")
    return arr


def llr(cb: Codebook, w: Channel, p_out: Distribution, y) -> float:
    """Normalized log-likelihood ratio of the mixture against the product
    distribution; ``-inf`` when the mixture assigns zero to ``y``."""
    y = _as_sequence(y, cb.n, w.num_outputs)
    p_null = float(np.prod(p_out.probs[y]))
    if p_null <= 0.0:
        raise ValueError("y has zero probability under the null product law")
    mix = mixture_prob(cb, w, y)
    if mix == 0.0:
        return -math.inf
    return (math.log(mix) - math.log(p_null)) / cb.n


def joint_type_counts(x: np.ndarray, y: np.ndarray, nx: int, ny: int
                      ) -> np.ndarray:
    """Occurrence counts of each (input, output) symbol pair."""
    codes = np.asarray(x) * ny + np.asarray(y)
    return np.bincount(codes, minlength=nx * ny).reshape(nx, ny)


def _counts_to_joint_type(counts: np.ndarray, n: int) -> JointType:
    row_sums = counts.sum(axis=1)
    cond = np.empty(counts.shape, dtype=float)
    for a in range(counts.shape[0]):
        if row_sums[a] > 0:
            cond[a] = counts[a] / row_sums[a]
        else:
            cond[a] = 1.0 / counts.shape[1]  # unused input symbol
    return JointType(Distribution(row_sums / n), cond)


def llr_from_types(cb: Codebook, w: Channel, p_out: Distribution, y) -> float:
    """Likelihood-ratio statistic recomputed through the type decomposition
    of the unnormalized mixture: codewords are grouped by their joint type
    with ``y``, each group contributes its count times the per-type channel
    likelihood, and the null probability enters through the entropy and
    divergence of the empirical output type. Independent of
    :func:`mixture_prob`, which multiplies raw transition probabilities."""
    y = _as_sequence(y, cb.n, w.num_outputs)
    n = cb.n
    groups: dict[bytes, list] = {}
    for m in range(cb.size):
        counts = joint_type_counts(cb.codewords[m], y, w.num_inputs,
                                   w.num_outputs)
        key = counts.tobytes()
        if key in groups:
            groups[key][0] += 1
        else:
            groups[key] = [1, counts]
    s_total = 0.0
    for count, counts in groups.values():
        surprisal = channel_surprisal(_counts_to_joint_type(counts, n), w)
        s_total += count * math.exp(-n * surprisal)
    if s_total == 0.0:
        return -math.inf
    y_type = np.bincount(y, minlength=w.num_outputs) / n
    h_y = float(entropy_vec(y_type))
    d_m = float(kl_vec(y_type, p_out.probs))
    return math.log(s_total) / n - cb.realized_rate + h_y + d_m


def tce(cb: Codebook, y, counts) -> int:
    """Number of codewords whose joint type with ``y`` equals ``counts``."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 2:
        raise ValueError("counts must be a 2-D integer matrix")
    y = _as_sequence(y, cb.n, counts.shape[1])
    if counts.sum() != cb.n:
        raise ValueError("joint counts must sum to the blocklength")
    if not np.array_equal(counts.sum(axis=1), cb.composition):
        raise ValueError("input marginal of counts must match the codebook "
                         "composition")
    y_marg = np.bincount(y, minlength=counts.shape[1])
    if not np.array_equal(counts.sum(axis=0), y_marg):
        raise ValueError("output marginal of counts must match the type of y")
    nx, ny = counts.shape
    codes = cb.codewords * ny + y[None, :]
    hist = np.zeros((cb.size, nx * ny), dtype=np.int64)
    np.add.at(hist, (np.arange(cb.size)[:, None], codes), 1)
    return int((hist == counts.ravel()).all(axis=1).sum())


def s_threshold(tau: float, rate: float, y, p_out: Distribution) -> float:
    """Exponent of the acceptance threshold on the unnormalized mixture: the
    test accepts the codeword hypothesis iff the unnormalized mixture is at
    least ``e^{n * s_threshold}``. Pass the realized rate of the codebook."""
    y = np.asarray(y, dtype=np.int64)
    y_type = np.bincount(y, minlength=p_out.size) / y.size
    h_y = float(entropy_vec(y_type))
    d_m = float(kl_vec(y_type, p_out.probs))
    return tau + rate - h_y - d_m


# ---------------------------------------------------------------------------
# exact error probabilities by exhaustive output enumeration
# ---------------------------------------------------------------------------

def _output_blocks(ny: int, n: int):
    total = ny ** n
    powers = ny ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.int64)
        yield (idx[:, None] // powers) % ny


def _check_budget(ny: int, n: int):
    total = ny ** n
    if total > EXHAUSTIVE_BUDGET:
        raise BudgetError(
            f"{ny}^{n} = {total} output sequences exceed the exhaustive "
            f"budget of {EXHAUSTIVE_BUDGET}; reduce the blocklength or rely "
            f"on the Monte Carlo codebook average at a smaller n")


def exact_error_probs(cb: Codebook, w: Channel, p_out: Distribution,
                      tau: float) -> tuple[float, float]:
    """Exact false-alarm and missed-detection probabilities of the threshold
    test for one fixed codebook, by summing over every output sequence."""
    _check_budget(w.num_outputs, cb.n)
    n = cb.n
    with np.errstate(divide="ignore"):
        log_w = np.log(w.rows)
        log_p = np.log(p_out.probs)
    m = cb.size
    alpha_parts: list[float] = []
    beta_parts: list[float] = []
    for block in _output_blocks(w.num_outputs, n):
        lp_null = log_p[block].sum(axis=1)
        s_mix = np.zeros(block.shape[0])
        for i in range(m):
            with np.errstate(invalid="ignore"):
                lw = log_w[cb.codewords[i][None, :], block].sum(axis=1)
            s_mix += np.where(np.isfinite(lw), np.exp(lw), 0.0)
        mix = s_mix / m
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = (np.log(mix) - lp_null) / n
        accept = lam >= tau  # NaN (both laws zero) compares False
        alpha_parts.append(float(np.exp(lp_null)[accept].sum()))
        beta_parts.append(float(mix[~accept].sum()))
    return math.fsum(alpha_parts), math.fsum(beta_parts)


def alpha_exact_given_codebook(cb: Codebook, w: Channel, p_out: Distribution,
                               tau: float) -> float:
    """Exact null-hypothesis mass of the acceptance region."""
    return exact_error_probs(cb, w, p_out, tau)[0]


def beta_exact_given_codebook(cb: Codebook, w: Channel, p_out: Distribution,
                              tau: float) -> float:
    """Exact mixture mass of the rejection region."""
    return exact_error_probs(cb, w, p_out, tau)[1]


# ---------------------------------------------------------------------------
# codebook-averaged estimates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    trials: int
    seed: int


def type_class_size(counts: np.ndarray) -> int:
    total = int(counts.sum())
    size = math.factorial(total)
    for c in counts:
        size //= math.factorial(int(c))
    return size


def exact_r0_error_probs(n: int, w: Channel, p_in: Distribution, tau: float
                         ) -> tuple[float, float]:
    """Exact single-codeword error probabilities averaged over a uniformly
    drawn codeword from the type class.

    Relabeling positions permutes the output space without changing either
    the product law or the per-codeword channel law, so every codeword in the
    class yields identical inner sums; the average equals the value at one
    canonical codeword.
    """
    counts = quantized_composition(n, p_in)
    canonical = np.repeat(np.arange(counts.size, dtype=np.int64), counts)
    cb = Codebook(canonical[None, :], n, 0.0, counts)
    p_out = Distribution(p_in.probs @ w.rows)
    return exact_error_probs(cb, w, p_out, tau)


def estimate_error_probs(n: int, rate: float, w: Channel, p_in: Distribution,
                         tau: float, codebook_trials: int, seed: int,
                         mode: str = "mc") -> tuple[SimEstimate, SimEstimate]:
    """Codebook-averaged error probabilities.

    ``mode="mc"`` draws ``codebook_trials`` codebooks (trial ``t`` on its own
    stream from ``(seed, t)``) and averages the exact per-codebook sums;
    ``mode="exact-r0"`` requires ``rate == 0`` and returns the exact average
    over the whole single-codeword ensemble.
    """
    if mode == "exact-r0":
        if rate != 0:
            raise ValueError("exact-r0 mode requires rate = 0")
        alpha, beta = exact_r0_error_probs(n, w, p_in, tau)
        ensemble = type_class_size(quantized_composition(n, p_in))
        return (SimEstimate(alpha, 0.0, ensemble, seed),
                SimEstimate(beta, 0.0, ensemble, seed))
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    if codebook_trials < 1:
        raise ValueError("codebook_trials must be >= 1")
    results = per_trial_error_probs(n, rate, w, p_in, tau, codebook_trials,
                                    seed)
    return (estimate_from_values([r[0] for r in results], seed),
            estimate_from_values([r[1] for r in results], seed))


def per_trial_error_probs(n: int, rate: float, w: Channel,
                          p_in: Distribution, tau: float, trials: int,
                          seed: int) -> list[tuple[float, float]]:
    """Exact per-codebook (alpha, beta) pairs for each Monte Carlo trial."""
    p_out = Distribution(p_in.probs @ w.rows)

    def one_trial(t: int) -> tuple[float, float]:
        cb = sample_codebook(n, rate, p_in, (seed, t))
        return exact_error_probs(cb, w, p_out, tau)

    return map_indexed(one_trial, range(trials))


def estimate_from_values(values: list[float], seed: int) -> SimEstimate:
    """Aggregate per-trial values with compensated summation; order-free."""
    trials = len(values)
    mean = math.fsum(values) / trials
    if trials > 1:
        var = math.fsum((v - mean) ** 2 for v in values) / (trials - 1)
        se = math.sqrt(var / trials)
    else:
        se = 0.0
    return SimEstimate(mean, se, trials, seed)
