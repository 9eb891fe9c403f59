"""Exact path simulation for the fractional renewal counting process.

Interarrival draws use the exponential mixture transformation

    gap = (-ln U) * ( [sin(pi*order) / tan(pi*order*V) - cos(pi*order)]
                      / rate )**(1/order)

with independent uniforms U, V, an exact (rejection-free) sampler of the
Mittag-Leffler gap law that collapses to -ln(U)/rate at order 1.  Its
correctness is a Laplace transform identity: conditioning on V turns the
transform of the draw into the average of 1/(1 + s*R(V)) over the bracket
factor R, which integrates to 1/(1 + s**order), the transform of the gap
density.  The bracket is evaluated in the algebraically identical ratio
form sin(pi*order*(1-V)) / sin(pi*order*V), avoiding the tangent blow-up
near V = 0 without changing the distribution.

Bulk generation is chunked and partitioned over deterministic worker
substreams of a counter-based generator, so results depend only on
(seed, workers, n_paths), never on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .distributions import FppParams
from .errors import EmptyInputError, InvalidParamError

__all__ = [
    "CountingPath",
    "SimConfig",
    "make_rng",
    "worker_rngs",
    "sample_poisson_path",
    "sample_ml_interarrival",
    "sample_fpp_path",
    "path_integral",
    "random_sum_integral",
    "empirical_cf",
    "iter_path_chunks",
    "count_moments",
    "integral_samples",
    "random_sum_samples",
    "conditional_jump_times",
]

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class CountingPath:
    """One realized trajectory: a horizon and the jump epochs inside it."""

    horizon: float
    jump_times: tuple

    def __post_init__(self) -> None:
        if not (math.isfinite(self.horizon) and self.horizon > 0.0):
            raise InvalidParamError(
                f"horizon must be finite and > 0, got {self.horizon!r}"
            )
        times = tuple(float(x) for x in self.jump_times)
        object.__setattr__(self, "jump_times", times)
        prev = 0.0
        for x in times:
            if not x > prev:
                raise InvalidParamError(
                    "jump times must be strictly increasing within (0, horizon]"
                )
            prev = x
        if times and times[-1] > self.horizon:
            raise InvalidParamError("jump times must not exceed the horizon")

    @property
    def count(self) -> int:
        return len(self.jump_times)


@dataclass(frozen=True)
class SimConfig:
    """Seeded Monte Carlo run description; outputs are a pure function of it."""

    seed: int
    n_paths: int
    workers: int = 1

    def __post_init__(self) -> None:
        if int(self.seed) != self.seed or not (0 <= self.seed < 2**64):
            raise InvalidParamError(
                f"seed must be an integer in [0, 2**64), got {self.seed!r}"
            )
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise InvalidParamError(f"n_paths must be >= 1, got {self.n_paths!r}")
        if int(self.workers) != self.workers or self.workers < 1:
            raise InvalidParamError(f"workers must be >= 1, got {self.workers!r}")


def make_rng(seed: int) -> np.random.Generator:
    """Root generator for one-off draws; counter-based for splittability."""
    return np.random.Generator(np.random.Philox(key=seed))


def worker_rngs(cfg: SimConfig) -> list:
    """Independent substream per worker, fixed by (seed, worker index)."""
    return [
        np.random.Generator(np.random.Philox(key=cfg.seed).jumped(w))
        for w in range(cfg.workers)
    ]


def _worker_shares(n_paths: int, workers: int) -> list:
    base, extra = divmod(n_paths, workers)
    return [base + (1 if w < extra else 0) for w in range(workers)]


def sample_ml_interarrival(params: FppParams, rng: np.random.Generator) -> float:
    """One gap draw; exact for every order, exponential at order 1."""
    lam = params.rate
    nu = params.order
    expo = -math.log1p(-rng.random())
    if nu == 1.0:
        return max(expo / lam, _TINY)
    v = rng.random()
    ang = math.pi * nu
    mix = math.sin(ang * (1.0 - v)) / math.sin(ang * v)
    return max(expo * (mix / lam) ** (1.0 / nu), _TINY)


def _gap_block(
    params: FppParams, rng: np.random.Generator, shape: tuple
) -> np.ndarray:
    """Matrix of i.i.d. gap draws mirroring sample_ml_interarrival."""
    lam = params.rate
    nu = params.order
    expo = -np.log1p(-rng.random(shape))
    if nu == 1.0:
        return np.maximum(expo / lam, _TINY)
    v = rng.random(shape)
    ang = math.pi * nu
    mix = np.sin(ang * (1.0 - v)) / np.sin(ang * v)
    return np.maximum(expo * (mix / lam) ** (1.0 / nu), _TINY)


def sample_fpp_path(
    params: FppParams, horizon: float, rng: np.random.Generator
) -> CountingPath:
    """Renewal path of Mittag-Leffler gaps truncated at the horizon."""
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise InvalidParamError(f"horizon must be finite and > 0, got {horizon!r}")
    times = []
    t = 0.0
    while True:
        t += sample_ml_interarrival(params, rng)
        if t > horizon:
            break
        times.append(t)
    return CountingPath(horizon=horizon, jump_times=tuple(times))


def sample_poisson_path(
    rate: float, horizon: float, rng: np.random.Generator
) -> CountingPath:
    """Classical path: exponential gaps, i.e. order fixed at 1."""
    if not (math.isfinite(rate) and rate > 0.0):
        raise InvalidParamError(f"rate must be finite and > 0, got {rate!r}")
    return sample_fpp_path(FppParams(rate=rate, order=1.0), horizon, rng)


def path_integral(path: CountingPath) -> float:
    """Exact time integral of the counting trajectory over its horizon.

    The unit-step structure makes the area a plain sum of horizon minus
    jump time; the interval-by-interval accumulation must agree with it
    and is asserted to in debug runs.
    """
    T = path.horizon
    taus = path.jump_times
    value = math.fsum(T - tau for tau in taus)
    if __debug__ and taus:
        n = len(taus)
        pieces = math.fsum(
            (taus[j] - taus[j - 1]) * j for j in range(1, n)
        ) + n * (T - taus[-1])
        assert abs(pieces - value) <= 1e-9 * max(1.0, abs(value))
    return value


def random_sum_integral(
    rate: float, horizon: float, rng: np.random.Generator
) -> float:
    """Draw from the random-sum form: a Poisson count of uniform epochs."""
    if not (math.isfinite(rate) and rate > 0.0):
        raise InvalidParamError(f"rate must be finite and > 0, got {rate!r}")
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise InvalidParamError(f"horizon must be finite and > 0, got {horizon!r}")
    n = int(rng.poisson(rate * horizon))
    if n == 0:
        return 0.0
    return float(rng.random(n).sum() * horizon)


def empirical_cf(samples, mu_grid) -> np.ndarray:
    """Empirical characteristic function of samples on a frequency grid."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptyInputError("empirical_cf needs at least one sample")
    mus = np.asarray(mu_grid, dtype=float)
    out = np.empty(mus.shape, dtype=complex)
    for i, mu in np.ndenumerate(mus):
        out[i] = np.exp(1j * mu * x).mean()
    return out


def iter_path_chunks(
    params: FppParams,
    horizon: float,
    cfg: SimConfig,
    chunk_size: int = 65536,
) -> Iterator[tuple]:
    """Yield (jump_times, counts) chunks covering cfg.n_paths paths.

    jump_times is a (paths, width) array whose row i holds the counts[i]
    jumps of path i in increasing order, padded with inf.  Chunks arrive
    in worker order, then path order within the worker, so any fold over
    them is deterministic.
    """
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise InvalidParamError(f"horizon must be finite and > 0, got {horizon!r}")
    if chunk_size < 1:
        raise InvalidParamError(f"chunk_size must be >= 1, got {chunk_size!r}")
    nu = params.order
    mean_count = params.rate * horizon**nu / math.gamma(nu + 1.0)
    start_cols = max(4, int(mean_count + 4.0 * math.sqrt(mean_count) + 4.0))
    rngs = worker_rngs(cfg)
    for w, share in enumerate(_worker_shares(cfg.n_paths, cfg.workers)):
        rng = rngs[w]
        done = 0
        while done < share:
            m = min(chunk_size, share - done)
            yield _simulate_chunk(params, horizon, rng, m, start_cols)
            done += m


def _simulate_chunk(
    params: FppParams,
    horizon: float,
    rng: np.random.Generator,
    m: int,
    start_cols: int,
) -> tuple:
    """Vectorized renewal of m paths; returns (jump_times, counts)."""
    times = np.cumsum(_gap_block(params, rng, (m, start_cols)), axis=1)
    # a row stays active while its last drawn jump is still inside the
    # horizon; all active rows always share the same filled width
    active = times[:, -1] <= horizon
    ext = max(4, start_cols // 2)
    while np.any(active):
        idx = np.nonzero(active)[0]
        gaps = _gap_block(params, rng, (idx.size, ext))
        fresh = times[idx, -1][:, None] + np.cumsum(gaps, axis=1)
        times = np.concatenate(
            [times, np.full((m, ext), np.inf)], axis=1
        )
        times[idx, -ext:] = fresh
        active = np.zeros(m, dtype=bool)
        active[idx] = fresh[:, -1] <= horizon
    inside = times <= horizon
    counts = inside.sum(axis=1)
    times[~inside] = np.inf
    width = int(counts.max()) if m else 0
    return times[:, : max(width, 1)], counts


def count_moments(params: FppParams, horizon: float, cfg: SimConfig) -> tuple:
    """Empirical (mean, unbiased variance) of the count over cfg.n_paths."""
    s1 = 0.0
    s2 = 0.0
    n = 0
    for _, counts in iter_path_chunks(params, horizon, cfg):
        c = counts.astype(float)
        s1 += c.sum()
        s2 += (c * c).sum()
        n += c.size
    mean = s1 / n
    var = (s2 - n * mean * mean) / (n - 1) if n > 1 else 0.0
    return mean, var


def integral_samples(
    params: FppParams, horizon: float, cfg: SimConfig
) -> np.ndarray:
    """Per-path time integral of the count, one value per simulated path."""
    parts = []
    for times, counts in iter_path_chunks(params, horizon, cfg):
        finite_sum = np.where(np.isfinite(times), times, 0.0).sum(axis=1)
        parts.append(counts * horizon - finite_sum)
    return np.concatenate(parts)


def random_sum_samples(rate: float, horizon: float, cfg: SimConfig) -> np.ndarray:
    """Bulk draws of the random-sum integral form, in worker order."""
    if not (math.isfinite(rate) and rate > 0.0):
        raise InvalidParamError(f"rate must be finite and > 0, got {rate!r}")
    if not (math.isfinite(horizon) and horizon > 0.0):
        raise InvalidParamError(f"horizon must be finite and > 0, got {horizon!r}")
    rngs = worker_rngs(cfg)
    parts = []
    for w, share in enumerate(_worker_shares(cfg.n_paths, cfg.workers)):
        if share == 0:
            continue
        rng = rngs[w]
        counts = rng.poisson(rate * horizon, share)
        total = int(counts.sum())
        u = rng.random(total) * horizon
        csum = np.concatenate([[0.0], np.cumsum(u)])
        ends = np.cumsum(counts)
        parts.append(csum[ends] - csum[ends - counts])
    return np.concatenate(parts)


def conditional_jump_times(
    params: FppParams,
    horizon: float,
    count: int,
    cfg: SimConfig,
) -> np.ndarray:
    """Jump epochs of exactly-count paths, by rejection over cfg.n_paths.

    Returns an (accepted, count) array; the caller chooses cfg.n_paths
    large enough for the acceptance yield it needs.
    """
    if int(count) != count or count < 1:
        raise InvalidParamError(f"count must be an integer >= 1, got {count!r}")
    count = int(count)
    rows = []
    for times, counts in iter_path_chunks(params, horizon, cfg):
        mask = counts == count
        if np.any(mask):
            block = times[mask]
            if block.shape[1] < count:
                block = np.pad(
                    block,
                    ((0, 0), (0, count - block.shape[1])),
                    constant_values=np.inf,
                )
            rows.append(block[:, :count])
    if not rows:
        return np.empty((0, count))
    return np.concatenate(rows, axis=0)
