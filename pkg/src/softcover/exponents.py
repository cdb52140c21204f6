"""Variational error-exponent solvers over joint-type space.

The false-alarm exponent minimizes ``D_m(Q_Y) + [I_Q(X;Y) - R]_+`` over joint
types whose likelihood-ratio level stays above the decision threshold; the
missed-detection exponent minimizes the conditional divergence ``D_c`` over
types whose level falls below it, with an extra interference ceiling active
at non-positive thresholds.

The generic solver lays a dense grid over the free conditional coordinates
(one simplex per input symbol), splits the non-smooth clipped rate term by
solving the bulk branch (``I_Q <= R``) and the sparse branch (``I_Q >= R``)
separately, and polishes the incumbent with successively shrunken boxes.
Joint types that violate the channel support carry an infinite conditional
divergence and a level of ``-inf``; they drop out of both problems without
special casing, which is what produces the strictly positive false-alarm
floor on singular channels such as the Z-channel.

Determinism: candidates are scanned in a fixed row-major order, the first
incumbent wins ties, and refinement only replaces an incumbent on a strict
improvement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .measures import (
    Channel,
    Distribution,
    JointType,
    cond_entropy_vec,
    cond_kl_vec,
    entropy_vec,
    kl_vec,
    mix_vec,
    output_marginal,
)

_BRANCH_TOL = 1e-12
_CHUNK_ROWS = 1 << 18
_SIMPLEX_TOL = 1e-9
_DELTA_QUANT = 6  # decimal places used to memoize the interference ceiling

BULK = "bulk"
SPARSE = "sparse"


@dataclass(frozen=True)
class SolverConfig:
    """Grid-and-polish solver settings.

    ``grid_points_per_dim`` is the number of samples per free conditional
    coordinate, ``refinement_rounds`` local polish passes shrink the search
    box by ``refinement_shrink`` around the incumbent each round, and
    ``constraint_slack`` loosens the threshold constraints by a fixed amount
    of nats (zero by default).
    """

    grid_points_per_dim: int = 401
    refinement_rounds: int = 4
    refinement_shrink: float = 0.1
    constraint_slack: float = 0.0
    tie_break: str = "first"

    def __post_init__(self):
        if self.grid_points_per_dim < 17:
            raise ValueError("grid_points_per_dim must be >= 17")
        if self.refinement_rounds < 0:
            raise ValueError("refinement_rounds must be >= 0")
        if not (0.0 < self.refinement_shrink < 1.0):
            raise ValueError("refinement_shrink must lie in (0, 1)")
        if self.constraint_slack < 0.0:
            raise ValueError("constraint_slack must be >= 0")
        if self.tie_break != "first":
            raise ValueError(f"unknown tie_break rule {self.tie_break!r}")


def default_config(w: Channel) -> SolverConfig:
    """Pick a grid density suited to the channel's free dimension count."""
    dims = w.num_inputs * (w.num_outputs - 1)
    if dims <= 2:
        pts = 401
    elif dims == 3:
        pts = 61
    elif dims == 4:
        pts = 25
    elif dims <= 6:
        pts = 17
    else:
        raise ValueError(
            f"default configuration supports at most 6 free dimensions, the "
            f"channel has {dims}; pass an explicit SolverConfig")
    return SolverConfig(grid_points_per_dim=pts)


@dataclass(frozen=True)
class ExponentResult:
    """Outcome of one exponent minimization.

    ``value`` is in nats and is ``+inf`` exactly when the feasible set is
    empty, in which case no minimizer or branch tag is reported.
    """

    value: float
    minimizer: Optional[JointType]
    branch: Optional[str]
    feasible: bool

    def __post_init__(self):
        infeasible = math.isinf(self.value) and self.value > 0
        if infeasible != (not self.feasible) or infeasible != (self.minimizer is None):
            raise ValueError("inconsistent ExponentResult: value/feasible/minimizer")


class _RatedBundle(NamedTuple):
    cond: np.ndarray
    q_y: np.ndarray
    d_m: np.ndarray
    d_c: np.ndarray
    i_q: np.ndarray
    lam: np.ndarray


class _Bundle:
    """Measure arrays for a block of candidate conditionals. Everything here
    is threshold- and rate-independent, so grid bundles can be cached per
    channel and reused across solver calls; ``at_rate`` attaches the level."""

    __slots__ = ("cond", "q_y", "d_m", "d_c", "i_q")

    def __init__(self, cond, w_rows, p_in, p_out_probs):
        self.cond = cond
        self.q_y = mix_vec(cond, p_in)
        self.d_m = kl_vec(self.q_y, p_out_probs)
        self.d_c = cond_kl_vec(cond, w_rows, p_in)
        self.i_q = np.maximum(
            entropy_vec(self.q_y) - cond_entropy_vec(cond, p_in), 0.0)

    def at_rate(self, rate: float) -> _RatedBundle:
        with np.errstate(invalid="ignore"):
            raw = self.d_m - self.d_c + np.maximum(self.i_q - rate, 0.0)
        lam = np.where(np.isfinite(self.d_c), raw, -np.inf)
        return _RatedBundle(self.cond, self.q_y, self.d_m, self.d_c,
                            self.i_q, lam)


def _row_grid(ny: int, g: int, lo=None, hi=None) -> np.ndarray:
    """Candidate stochastic rows; coordinates 1..ny-1 are gridded over the
    given per-coordinate box and coordinate 0 absorbs the remainder."""
    if lo is None:
        lo = np.zeros(ny - 1)
    if hi is None:
        hi = np.ones(ny - 1)
    axes = [np.linspace(lo[i], hi[i], g) for i in range(ny - 1)]
    if ny == 2:
        free = axes[0][:, None]
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.stack([m.ravel() for m in mesh], axis=1)
    head = 1.0 - free.sum(axis=1)
    keep = head >= -_SIMPLEX_TOL
    free = free[keep]
    head = np.clip(head[keep], 0.0, 1.0)
    return np.column_stack([head, free])


def _joint_chunks(row_lists: Sequence[np.ndarray]) -> Iterator[np.ndarray]:
    """Cartesian product of per-input row candidates, yielded in row-major
    order (first input slowest) in memory-bounded blocks."""
    sizes = [len(r) for r in row_lists]
    total = math.prod(sizes)
    nx = len(row_lists)
    ny = row_lists[0].shape[1]
    for start in range(0, total, _CHUNK_ROWS):
        idx = np.arange(start, min(start + _CHUNK_ROWS, total))
        cond = np.empty((idx.size, nx, ny))
        rem = idx
        for x in range(nx - 1, -1, -1):
            cond[:, x, :] = row_lists[x][rem % sizes[x]]
            rem = rem // sizes[x]
        yield cond


@dataclass
class _Incumbent:
    value: float
    cond: np.ndarray
    i_q: float


_CACHE_CANDIDATE_LIMIT = 2_000_000
_BUNDLE_CACHE: dict[tuple, list[_Bundle]] = {}
_BUNDLE_CACHE_SLOTS = 4


def _refine_points(ny: int, g: int) -> int:
    """Per-dimension density inside the shrunken polish boxes; boxes are
    tiny, so far fewer points than the base grid are needed, and rows with
    several free coordinates get fewer points per coordinate."""
    per_row = {2: 51, 3: 13}.get(ny, 9)
    return min(g, per_row)


def _full_row_lists(w: Channel, g: int):
    ny = w.num_outputs
    return [_row_grid(ny, g) for _ in range(w.num_inputs)]


def _base_bundles(w: Channel, p_in, p_out_probs, g: int):
    """Measure bundles of the full base grid, cached per channel when the
    candidate count is moderate, otherwise streamed."""
    row_lists = _full_row_lists(w, g)
    total = math.prod(len(r) for r in row_lists)
    if total > _CACHE_CANDIDATE_LIMIT:
        return (_Bundle(cond, w.rows, p_in, p_out_probs)
                for cond in _joint_chunks(row_lists))
    key = (w.rows.tobytes(), p_in.tobytes(), p_out_probs.tobytes(), g)
    if key not in _BUNDLE_CACHE:
        if len(_BUNDLE_CACHE) >= _BUNDLE_CACHE_SLOTS:
            _BUNDLE_CACHE.pop(next(iter(_BUNDLE_CACHE)))
        _BUNDLE_CACHE[key] = [_Bundle(cond, w.rows, p_in, p_out_probs)
                              for cond in _joint_chunks(row_lists)]
    return _BUNDLE_CACHE[key]


def _consider(bundle: _RatedBundle, objective, feasible,
              incumbent: Optional[_Incumbent]) -> Optional[_Incumbent]:
    with np.errstate(invalid="ignore"):
        masked = np.where(feasible(bundle), objective(bundle), np.inf)
    masked = np.where(np.isnan(masked), np.inf, masked)
    j = int(np.argmin(masked))
    v = float(masked[j])
    if math.isfinite(v) and (incumbent is None or v < incumbent.value):
        return _Incumbent(v, np.array(bundle.cond[j]), float(bundle.i_q[j]))
    return incumbent


def _optimize(w, p_in, p_out_probs, rate, cfg: SolverConfig, objective, feasible,
              seeds=()) -> Optional[_Incumbent]:
    """Full-box scan plus shrinking-box polish around the incumbent.

    Seeds are evaluated ahead of the lattice, so a seed wins all ties; each
    polish round scans the incumbent itself first for the same reason.
    """
    g = cfg.grid_points_per_dim
    best = None
    if seeds:
        seed_bundle = _Bundle(np.stack(list(seeds)), w.rows, p_in,
                              p_out_probs).at_rate(rate)
        best = _consider(seed_bundle, objective, feasible, best)
    for bundle in _base_bundles(w, p_in, p_out_probs, g):
        best = _consider(bundle.at_rate(rate), objective, feasible, best)
    if best is None:
        return None
    g_refine = _refine_points(w.num_outputs, g)
    for level in range(1, cfg.refinement_rounds + 1):
        width = cfg.refinement_shrink ** level
        row_lists = []
        for x in range(w.num_inputs):
            center = best.cond[x, 1:]
            lo = np.clip(center - width / 2, 0.0, 1.0)
            hi = np.clip(center + width / 2, 0.0, 1.0)
            grid = _row_grid(w.num_outputs, g_refine, lo, hi)
            row_lists.append(np.vstack([best.cond[x][None, :], grid]))
        for cond in _joint_chunks(row_lists):
            bundle = _Bundle(cond, w.rows, p_in, p_out_probs).at_rate(rate)
            best = _consider(bundle, objective, feasible, best)
    return best


def _count_near_minimum(w, p_in, p_out_probs, rate, cfg, objective, feasible,
                        value: float, atol: float = 1e-9) -> int:
    """Number of base-grid candidates whose feasible objective is within
    ``atol`` of ``value`` (multiplicity diagnostic for tie-broken argmins)."""
    count = 0
    for bundle in _base_bundles(w, p_in, p_out_probs, cfg.grid_points_per_dim):
        b = bundle.at_rate(rate)
        with np.errstate(invalid="ignore"):
            masked = np.where(feasible(b), objective(b), np.inf)
        count += int(np.count_nonzero(masked <= value + atol))
    return count


def _lambda_extremum(w, p_in, p_out_probs, rate, cfg, *, minimize: bool
                     ) -> Optional[_Incumbent]:
    sign = 1.0 if minimize else -1.0
    res = _optimize(
        w, p_in, p_out_probs, rate, cfg,
        objective=lambda b: sign * b.lam,
        feasible=lambda b: np.isfinite(b.lam),
        seeds=[np.array(w.rows)])
    if res is not None:
        res.value = sign * res.value
    return res


def _as_joint_type(p_in_dist: Distribution, cond: np.ndarray) -> JointType:
    cleaned = np.clip(cond, 0.0, 1.0)
    cleaned = cleaned / cleaned.sum(axis=1, keepdims=True)
    return JointType(p_in_dist, cleaned)


def _branch_feasible(base, branch: str, rate: float):
    if branch == BULK:
        return lambda b: base(b) & (b.i_q <= rate + _BRANCH_TOL)
    return lambda b: base(b) & (b.i_q >= rate - _BRANCH_TOL)


def _pick(bulk: Optional[_Incumbent], sparse: Optional[_Incumbent]):
    """Smaller of the two branch minima; ties resolve to the bulk branch."""
    if bulk is None and sparse is None:
        return None, None
    if sparse is None or (bulk is not None and bulk.value <= sparse.value):
        return bulk, BULK
    return sparse, SPARSE


def fa_exponent(w: Channel, p_in: Distribution, tau: float, rate: float,
                cfg: Optional[SolverConfig] = None) -> ExponentResult:
    """False-alarm exponent at threshold ``tau`` and codebook rate ``rate``.

    Minimizes ``D_m + [I_Q - R]_+`` over joint types whose level is at least
    ``tau``; returns an infeasible result (value ``+inf``) when no type
    reaches the threshold. ``tau = -inf`` is accepted and yields the
    unconstrained minimum over channel-compatible types.
    """
    if not rate >= 0.0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    cfg = cfg or default_config(w)
    p_out = output_marginal(p_in, w)
    return _fa_core(w, p_in.probs, p_in, p_out.probs, tau, rate, cfg)


def _branch_level_extremum(w, p_in_probs, p_out_probs, rate, cfg, branch,
                           *, minimize: bool) -> Optional[_Incumbent]:
    """Polished extremum of the level within one branch; thin feasible
    slivers near a branch's level extremum fall between base grid points, so
    each branch run is seeded with this point."""
    sign = 1.0 if minimize else -1.0
    res = _optimize(
        w, p_in_probs, p_out_probs, rate, cfg,
        objective=lambda b: sign * b.lam,
        feasible=_branch_feasible(lambda b: np.isfinite(b.lam), branch, rate),
        seeds=[np.array(w.rows)])
    if res is not None:
        res.value = sign * res.value
    return res


def _fa_core(w, p_in_probs, p_in_dist, p_out_probs, tau, rate, cfg
             ) -> ExponentResult:
    slack = cfg.constraint_slack

    def base(b):
        return np.isfinite(b.lam) & (b.lam >= tau - slack)

    def objective(b):
        return b.d_m + np.maximum(b.i_q - rate, 0.0)

    results = []
    for branch in (BULK, SPARSE):
        seeds = [np.array(w.rows)]
        top = _branch_level_extremum(w, p_in_probs, p_out_probs, rate, cfg,
                                     branch, minimize=False)
        if top is not None:
            seeds.append(top.cond)
        results.append(
            _optimize(w, p_in_probs, p_out_probs, rate, cfg, objective,
                      _branch_feasible(base, branch, rate), seeds=seeds))
    best, branch = _pick(*results)
    if best is None:
        return ExponentResult(math.inf, None, None, False)
    return ExponentResult(best.value, _as_joint_type(p_in_dist, best.cond),
                          branch, True)


def md_exponent(w: Channel, p_in: Distribution, tau: float, rate: float,
                cfg: Optional[SolverConfig] = None) -> ExponentResult:
    """Missed-detection exponent at threshold ``tau`` and rate ``rate > 0``.

    Minimizes ``D_c`` over the closure of the strict sublevel set of the
    likelihood-ratio level; feasibility requires the level minimum to lie
    strictly below ``tau``. For ``tau <= 0`` candidates must additionally
    keep the interference ceiling of their output marginal below ``tau``.
    """
    if rate == 0:
        raise ValueError(
            "rate = 0 reduces to a single-codeword test; use r0_exponents")
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    cfg = cfg or default_config(w)
    p_out = output_marginal(p_in, w)
    return _md_core(w, p_in.probs, p_in, p_out.probs, tau, rate, cfg,
                    use_ceiling=tau <= 0)


def _md_core(w, p_in_probs, p_in_dist, p_out_probs, tau, rate, cfg,
             use_ceiling: bool) -> ExponentResult:
    slack = cfg.constraint_slack
    bottoms = {
        branch: _branch_level_extremum(w, p_in_probs, p_out_probs, rate, cfg,
                                       branch, minimize=True)
        for branch in (BULK, SPARSE)
    }
    lam_min = min((b.value for b in bottoms.values() if b is not None),
                  default=math.inf)
    if not lam_min < tau - slack:
        return ExponentResult(math.inf, None, None, False)
    gate = _CeilingGate(w, p_in_probs, p_out_probs, rate, cfg) if use_ceiling else None

    def base(b):
        mask = np.isfinite(b.d_c) & (b.lam <= tau + slack)
        if gate is not None and mask.any():
            idx = np.flatnonzero(mask)
            ceil = gate.values(b.q_y[idx])
            mask = mask.copy()
            mask[idx] = ceil <= tau + slack
        return mask

    results = []
    for branch in (BULK, SPARSE):
        seeds = [np.array(w.rows)]
        if bottoms[branch] is not None:
            seeds.append(bottoms[branch].cond)
        results.append(
            _optimize(w, p_in_probs, p_out_probs, rate, cfg,
                      objective=lambda b: b.d_c,
                      feasible=_branch_feasible(base, branch, rate),
                      seeds=seeds))
    best, branch = _pick(*results)
    if best is None:
        return ExponentResult(math.inf, None, None, False)
    return ExponentResult(best.value, _as_joint_type(p_in_dist, best.cond),
                          branch, True)


def r0_exponents(w: Channel, p_in: Distribution, tau: float,
                 cfg: Optional[SolverConfig] = None
                 ) -> tuple[ExponentResult, ExponentResult]:
    """Both exponents for a single-codeword codebook (rate zero).

    The two variational problems are solved with the rate pinned at zero and
    the interference ceiling disabled, since a lone codeword has nothing to
    interfere with it.
    """
    cfg = cfg or default_config(w)
    p_out = output_marginal(p_in, w)
    fa = _fa_core(w, p_in.probs, p_in, p_out.probs, tau, 0.0, cfg)
    md = _md_core(w, p_in.probs, p_in, p_out.probs, tau, 0.0, cfg,
                  use_ceiling=False)
    return fa, md


# ---------------------------------------------------------------------------
# interference ceiling: the largest level reachable by rate-feasible types
# sharing a prescribed output marginal
# ---------------------------------------------------------------------------

def _fiber_values(first_rows: np.ndarray, q_out: np.ndarray, w: Channel,
                  p_in: np.ndarray):
    """Evaluate fiber candidates with the last conditional row derived from
    the output-marginal constraint; returns (d_c, i_q, valid, cond)."""
    partial = np.einsum("...xy,x->...y", first_rows, p_in[:-1])
    last = (q_out - partial) / p_in[-1]
    valid = (last >= -_SIMPLEX_TOL).all(axis=-1)
    last = np.clip(last, 0.0, 1.0)
    cond = np.concatenate([first_rows, last[..., None, :]], axis=-2)
    d_c = cond_kl_vec(cond, w.rows, p_in)
    i_q = np.maximum(entropy_vec(q_out) - cond_entropy_vec(cond, p_in), 0.0)
    return d_c, i_q, valid, cond


class _CeilingGate:
    """Memoized batch evaluator for the interference ceiling, keyed by the
    output marginal rounded to a fixed quantization."""

    def __init__(self, w: Channel, p_in: np.ndarray, p_out_probs: np.ndarray,
                 rate: float, cfg: SolverConfig):
        self.w = w
        self.p_in = p_in
        self.p_out_probs = p_out_probs
        self.rate = rate
        self.cfg = cfg
        self.memo: dict[bytes, float] = {}
        ny = w.num_outputs
        lists = [_row_grid(ny, cfg.grid_points_per_dim)
                 for _ in range(w.num_inputs - 1)]
        if len(lists) == 1:
            self.first_rows = lists[0]
        else:
            blocks = list(_joint_chunks(lists))
            self.first_rows = np.concatenate(blocks, axis=0)

    def values(self, q_y_block: np.ndarray) -> np.ndarray:
        rounded = np.round(q_y_block, _DELTA_QUANT)
        uniq, inverse = np.unique(rounded, axis=0, return_inverse=True)
        out = np.empty(uniq.shape[0])
        fresh = [u for u in range(uniq.shape[0])
                 if uniq[u].tobytes() not in self.memo]
        if fresh:
            d_m = kl_vec(uniq[fresh], self.p_out_probs)
            for i, u in enumerate(fresh):
                self.memo[uniq[u].tobytes()] = self._one(uniq[u], float(d_m[i]))
        for u in range(uniq.shape[0]):
            out[u] = self.memo[uniq[u].tobytes()]
        return out[inverse.reshape(-1)]

    def _one(self, q_out: np.ndarray, d_m: float) -> float:
        if not math.isfinite(d_m):
            return -math.inf
        fr = self.first_rows
        if fr.ndim == 2:
            fr = fr[:, None, :]
        d_c, i_q, valid, _ = _fiber_values(fr, q_out, self.w, self.p_in)
        ok = valid & np.isfinite(d_c) & (i_q <= self.rate + _BRANCH_TOL)
        if not ok.any():
            return -math.inf
        return float(d_m - d_c[ok].min())


def interference_level(q_out: Distribution, w: Channel, p_in: Distribution,
                       rate: float, cfg: Optional[SolverConfig] = None) -> float:
    """Largest level achievable by joint types with output marginal ``q_out``
    and mutual information at most ``rate``.

    Returns ``-inf`` when no channel-compatible type meets both constraints;
    the data-processing inequality caps the value at zero otherwise. Uses the
    fiber parameterization (all conditional rows free except the last, which
    is solved from the marginal constraint) with the same shrinking-box
    polish as the exponent solvers.
    """
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    cfg = cfg or default_config(w)
    p_out = output_marginal(p_in, w)
    d_m = float(kl_vec(q_out.probs, p_out.probs))
    if not math.isfinite(d_m):
        return -math.inf
    g = cfg.grid_points_per_dim
    ny = w.num_outputs
    n_free = w.num_inputs - 1

    def scan(row_lists, best):
        if len(row_lists) == 1:
            blocks = (row_lists[0][:, None, :],)
        else:
            blocks = _joint_chunks(row_lists)
        for fr in blocks:
            d_c, i_q, valid, cond = _fiber_values(fr, q_out.probs, w,
                                                  p_in.probs)
            ok = valid & np.isfinite(d_c) & (i_q <= rate + _BRANCH_TOL)
            masked = np.where(ok, d_c, np.inf)
            j = int(np.argmin(masked))
            if math.isfinite(masked[j]) and (best is None or masked[j] < best[0]):
                best = (float(masked[j]), np.array(cond[j, :-1]))
        return best

    best = scan([_row_grid(ny, g) for _ in range(n_free)], None)
    if best is None:
        return -math.inf
    for level in range(1, cfg.refinement_rounds + 1):
        width = cfg.refinement_shrink ** level
        row_lists = []
        for x in range(n_free):
            center = best[1][x, 1:]
            lo = np.clip(center - width / 2, 0.0, 1.0)
            hi = np.clip(center + width / 2, 0.0, 1.0)
            row_lists.append(np.vstack([best[1][x][None, :],
                                        _row_grid(ny, g, lo, hi)]))
        best = scan(row_lists, best)
    return d_m - best[0]


# ---------------------------------------------------------------------------
# closed-form Z-channel oracle: a 1-D exhaustive scan over q = Q(0|1) with
# the clean-input row pinned, used as an independent check on the generic
# solver
# ---------------------------------------------------------------------------

_Z_CACHE: dict[tuple[float, int], tuple[np.ndarray, ...]] = {}


def _hb(u: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(u > 0, u * np.log(u), 0.0)
        b = np.where(u < 1, (1 - u) * np.log1p(-u), 0.0)
    return -(a + b)


def _db(u: np.ndarray, v: float) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(u > 0, u * (np.log(u) - math.log(v)), 0.0)
        b = np.where(u < 1, (1 - u) * (np.log1p(-u) - math.log1p(-v)), 0.0)
    return a + b


def _z_slice(w_param: float, grid: int):
    key = (w_param, grid)
    if key not in _Z_CACHE:
        q = np.linspace(0.0, 1.0, grid)
        out0 = (1.0 + q) / 2.0
        d_m = _db(out0, (1.0 + w_param) / 2.0)
        d_c = 0.5 * _db(q, w_param)
        i_q = np.maximum(_hb(out0) - 0.5 * _hb(q), 0.0)
        _Z_CACHE[key] = (q, d_m, d_c, i_q)
    return _Z_CACHE[key]


def _z_joint_type(q: float) -> JointType:
    return JointType(Distribution([0.5, 0.5]), [[1.0, 0.0], [q, 1.0 - q]])


def zchannel_oracle_fa(w_param: float, rate: float, tau: float,
                       grid: int = 1_000_000) -> ExponentResult:
    """Exhaustive 1-D false-alarm scan for the binary Z-channel with uniform
    input; independent of the generic grid solver."""
    if not 0.0 < w_param < 1.0:
        raise ValueError("w_param must lie in (0, 1)")
    q, d_m, d_c, i_q = _z_slice(w_param, grid)
    lam = d_m - d_c + np.maximum(i_q - rate, 0.0)
    cost = d_m + np.maximum(i_q - rate, 0.0)
    masked = np.where(lam >= tau, cost, np.inf)
    j = int(np.argmin(masked))
    if not math.isfinite(masked[j]):
        return ExponentResult(math.inf, None, None, False)
    branch = SPARSE if i_q[j] > rate else BULK
    return ExponentResult(float(masked[j]), _z_joint_type(float(q[j])),
                          branch, True)


def zchannel_oracle_md(w_param: float, rate: float, tau: float,
                       grid: int = 1_000_000) -> ExponentResult:
    """Exhaustive 1-D missed-detection scan for the binary Z-channel with
    uniform input, including the interference ceiling for ``tau <= 0``
    (on this slice the ceiling of a bulk point is its own level, and sparse
    output marginals admit no rate-feasible interferer)."""
    if not 0.0 < w_param < 1.0:
        raise ValueError("w_param must lie in (0, 1)")
    if not rate > 0:
        raise ValueError(f"rate must be > 0, got {rate}")
    q, d_m, d_c, i_q = _z_slice(w_param, grid)
    lam = d_m - d_c + np.maximum(i_q - rate, 0.0)
    if not float(lam.min()) < tau:
        return ExponentResult(math.inf, None, None, False)
    feas = lam <= tau
    if tau <= 0:
        ceiling = np.where(i_q <= rate, d_m - d_c, -np.inf)
        feas &= ceiling <= tau
    masked = np.where(feas, d_c, np.inf)
    j = int(np.argmin(masked))
    if not math.isfinite(masked[j]):
        return ExponentResult(math.inf, None, None, False)
    branch = SPARSE if i_q[j] > rate else BULK
    return ExponentResult(float(masked[j]), _z_joint_type(float(q[j])),
                          branch, True)
