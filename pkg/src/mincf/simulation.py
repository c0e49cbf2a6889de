"""Monte Carlo engine: null distributions, p-values, power, study runs.

The null distribution of the test statistic does not depend on (c, phi), so
one simulation per (family, n, gamma) serves every dataset of that shape.
Replicate i draws from its own counter-derived random substream, which makes
results bit-identical for a fixed seed no matter how many workers run or how
the replicates are batched.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, EngineError
from .estimation import fit_batch, mle, standardize
from .families import (
    AlternativeSpec,
    Family,
    ParamPair,
    STANDARD_PARAMS,
    parse_alternative,
    sample_alternative,
    sample_null,
)
from .stat import batch_statistics, l_constant, lambda_table, statistic

#: Bump when the statistic implementation changes; cached nulls are keyed on it.
STATISTIC_CODE_VERSION = "1"

#: Replicates per work unit. Fixed so that the chunk layout (and therefore
#: every floating-point reduction) is independent of the worker count.
_CHUNK = 512

_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class NullDistribution:
    """Sorted Monte Carlo null statistics for one (family, n, gamma)."""

    family: Family
    n: int
    gamma: float
    replicates: int
    sorted_stats: np.ndarray
    seed: int
    redraws: int = 0

    def __post_init__(self):
        stats = np.asarray(self.sorted_stats, dtype=float)
        if stats.size != self.replicates:
            raise ConfigError("sorted_stats length must equal replicates")


@dataclass(frozen=True)
class TestResult:
    """Outcome of testing one dataset at one gamma."""

    family: Family
    n: int
    gamma: float
    statistic: float
    p_value: float
    estimate: object
    replicates: int
    seed: int


@dataclass(frozen=True)
class PowerResult:
    """Empirical rejection rate of one study cell."""

    family: Family
    alternative: AlternativeSpec
    n: int
    gamma: float
    alpha: float
    rejections: int
    replicates: int
    rate: float


@dataclass(frozen=True)
class StudyConfig:
    """Declarative description of a power study."""

    families: tuple[Family, ...]
    alternatives: tuple[AlternativeSpec, ...]
    gammas: tuple[float, ...] = (0.5, 1.0, 5.0)
    sample_sizes: tuple[int, ...] = (20, 50)
    alpha: float = 0.05
    replicates: int = 10000
    crit_replicates: int | None = None
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "sample_sizes", tuple(int(n) for n in self.sample_sizes))
        if not self.families or not self.alternatives or not self.gammas or not self.sample_sizes:
            raise ConfigError("families, alternatives, gammas and sample_sizes must be nonempty")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.replicates < 100:
            raise ConfigError("need at least 100 replicates")

    @property
    def effective_crit_replicates(self) -> int:
        return self.crit_replicates if self.crit_replicates is not None else 2 * self.replicates

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        known = {
            "families", "alternatives", "gammas", "sample_sizes", "alpha",
            "replicates", "crit_replicates", "seed",
        }
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown study config fields: {sorted(extra)}")
        if "families" not in d or "alternatives" not in d:
            raise ConfigError("study config needs 'families' and 'alternatives'")
        kwargs = dict(d)
        kwargs["families"] = tuple(Family.parse(f) for f in d["families"])
        kwargs["alternatives"] = tuple(
            a if isinstance(a, AlternativeSpec) else parse_alternative(a)
            for a in d["alternatives"]
        )
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "families": [f.value for f in self.families],
            "alternatives": [str(a) for a in self.alternatives],
            "gammas": list(self.gammas),
            "sample_sizes": list(self.sample_sizes),
            "alpha": self.alpha,
            "replicates": self.replicates,
            "crit_replicates": self.effective_crit_replicates,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    results: tuple[PowerResult, ...]
    failures: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Replicate engine.
# ---------------------------------------------------------------------------

def _draw(sampler, n: int, rng: np.random.Generator) -> np.ndarray:
    kind = sampler[0]
    if kind == "null":
        _, family, c, phi = sampler
        return sample_null(family, ParamPair(c, phi), n, rng)
    _, spec = sampler
    return sample_alternative(spec, n, rng)


def _simulate_chunk(family, n, gamma, seed, i0, i1, sampler, table, l_const):
    """Statistics for replicates [i0, i1); returns (stats, redraws, failed)."""
    count = i1 - i0
    rngs = [
        np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        for i in range(i0, i1)
    ]
    x = np.empty((count, n))
    for j in range(count):
        x[j] = _draw(sampler, n, rngs[j])

    stats = np.empty(count)
    pending = np.arange(count)
    redraws = 0
    ever_failed: set[int] = set()
    for attempt in range(_MAX_ATTEMPTS):
        c, phi, ok, _ = fit_batch(family, x[pending])
        good = pending[ok]
        if good.size:
            y = (x[good] / c[ok, None]) ** phi[ok, None]
            stats[good] = batch_statistics(family, gamma, y, table, l_const)
        pending = pending[~ok]
        if pending.size == 0:
            break
        redraws += pending.size
        ever_failed.update(int(j) for j in pending)
        for j in pending:
            x[j] = _draw(sampler, n, rngs[j])
    else:
        raise EngineError(
            f"replicates kept failing the MLE after {_MAX_ATTEMPTS} redraws "
            f"({family.value}, n={n})"
        )
    return stats, redraws, len(ever_failed)


def _simulate_chunk_star(args):
    return _simulate_chunk(*args)


def _simulate_statistics(family, n, gamma, big_n, seed, sampler, workers):
    """All replicate statistics, chunked deterministically."""
    table = lambda_table(family, gamma)
    l_const = l_constant(family, gamma)
    chunks = [
        (family, n, gamma, seed, i0, min(i0 + _CHUNK, big_n), sampler, table, l_const)
        for i0 in range(0, big_n, _CHUNK)
    ]
    if workers <= 1 or len(chunks) == 1:
        parts = [_simulate_chunk(*c) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_simulate_chunk_star, chunks))
    stats = np.concatenate([p[0] for p in parts])
    redraws = sum(p[1] for p in parts)
    failed = sum(p[2] for p in parts)
    if failed > 0.01 * big_n:
        raise EngineError(
            f"MLE failed on {failed} of {big_n} replicates "
            f"({family.value}, n={n}, gamma={gamma})"
        )
    return stats, redraws


def build_null(
    family: Family,
    n: int,
    gamma: float,
    replicates: int,
    seed: int,
    *,
    params: ParamPair = STANDARD_PARAMS,
    workers: int = 1,
    cache: "NullCache | None" = None,
) -> NullDistribution:
    """Simulate the null distribution of the statistic for (family, n, gamma).

    Every replicate draws a fresh sample from the family member given by
    ``params`` (the standard member by default; exact invariance makes the
    law identical for any choice), refits the MLE, standardizes and computes
    the statistic. Replicates whose MLE degenerates are redrawn from the
    replicate's own substream and counted in ``redraws``.
    """
    if n < 3:
        raise DomainError("need n >= 3")
    if replicates < 100:
        raise DomainError("need at least 100 replicates")
    standard = params == STANDARD_PARAMS
    if cache is not None and standard:
        hit = cache.load(family, n, gamma, replicates, seed)
        if hit is not None:
            return hit
    sampler = ("null", family, params.c, params.phi)
    stats, redraws = _simulate_statistics(
        family, n, gamma, replicates, seed, sampler, workers
    )
    null = NullDistribution(
        family=family, n=n, gamma=float(gamma), replicates=replicates,
        sorted_stats=np.sort(stats), seed=seed, redraws=redraws,
    )
    if cache is not None and standard:
        cache.save(null)
    return null


def critical_value(null: NullDistribution, alpha: float) -> float:
    """Empirical upper-alpha critical value: order statistic ceil((1-a)(N+1))."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    n_rep = null.replicates
    rank = int(np.ceil((1.0 - alpha) * (n_rep + 1)))
    rank = min(max(rank, 1), n_rep)
    return float(null.sorted_stats[rank - 1])


def p_value(null: NullDistribution, observed: float) -> float:
    """Monte Carlo p-value (1 + #{null stats >= observed}) / (N + 1)."""
    if not np.isfinite(observed):
        raise DomainError("observed statistic must be finite")
    exceed = null.replicates - np.searchsorted(null.sorted_stats, observed, side="left")
    return float((1 + exceed) / (null.replicates + 1))


def power(
    family: Family,
    alt: AlternativeSpec,
    n: int,
    gamma: float,
    alpha: float,
    replicates: int,
    null: NullDistribution,
    seed: int,
    *,
    workers: int = 1,
) -> PowerResult:
    """Empirical rejection rate against a fixed alternative."""
    if (null.family, null.n) != (family, n) or null.gamma != float(gamma):
        raise ConfigError("null distribution does not match (family, n, gamma)")
    cv = critical_value(null, alpha)
    stats, _ = _simulate_statistics(
        family, n, gamma, replicates, seed, ("alt", alt), workers
    )
    rejections = int((stats > cv).sum())
    return PowerResult(
        family=family, alternative=alt, n=n, gamma=float(gamma), alpha=alpha,
        rejections=rejections, replicates=replicates,
        rate=rejections / replicates,
    )


def derive_seed(base: int, key: tuple[int, ...]) -> int:
    """Deterministic 63-bit child seed for a labelled sub-experiment."""
    state = np.random.SeedSequence(base, spawn_key=key).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def gof_test(
    data,
    family: Family,
    gammas,
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
    cache: "NullCache | None" = None,
) -> list[TestResult]:
    """Full test of one dataset: fit, standardize, statistic and p-value per gamma."""
    x = np.asarray(data, dtype=float).ravel()
    est = mle(family, x)
    y = standardize(x, est)
    out = []
    for gamma in gammas:
        breakdown = statistic(family, y, float(gamma))
        null = build_null(
            family, x.size, float(gamma), replicates, seed,
            workers=workers, cache=cache,
        )
        out.append(
            TestResult(
                family=family, n=x.size, gamma=float(gamma),
                statistic=breakdown.value, p_value=p_value(null, breakdown.value),
                estimate=est, replicates=replicates, seed=seed,
            )
        )
    return out


def run_study(
    config: StudyConfig,
    *,
    workers: int = 1,
    cache: "NullCache | None" = None,
    progress=None,
) -> StudyResult:
    """Run a full power study: one null per (family, n, gamma), then all cells.

    Cell failures are collected and reported without aborting the rest of
    the study. Results are deterministic functions of the config seed.
    """
    results: list[PowerResult] = []
    failures: list[str] = []
    n_crit = config.effective_crit_replicates
    for fi, family in enumerate(config.families):
        for ni, n in enumerate(config.sample_sizes):
            for gi, gamma in enumerate(config.gammas):
                label = f"{family.value} n={n} gamma={gamma:g}"
                try:
                    null = build_null(
                        family, n, gamma, n_crit,
                        derive_seed(config.seed, (0, fi, ni, gi)),
                        workers=workers, cache=cache,
                    )
                except Exception as exc:
                    failures.append(f"null {label}: {exc}")
                    continue
                for ai, alt in enumerate(config.alternatives):
                    try:
                        res = power(
                            family, alt, n, gamma, config.alpha,
                            config.replicates, null,
                            derive_seed(config.seed, (1, fi, ni, gi, ai)),
                            workers=workers,
                        )
                        results.append(res)
                        if progress is not None:
                            progress(res)
                    except Exception as exc:
                        failures.append(f"power {label} vs {alt}: {exc}")
    return StudyResult(config=config, results=tuple(results), failures=tuple(failures))


# ---------------------------------------------------------------------------
# On-disk cache of null distributions.
# ---------------------------------------------------------------------------

class NullCache:
    """Directory of simulated null distributions, keyed by their parameters.

    Files are numpy archives holding the full header next to the sorted
    statistics, so a load round-trips losslessly; a version tag invalidates
    caches produced by older statistic implementations.
    """

    def __init__(self, directory):
        self.directory = os.fspath(directory)
        os.makedirs(self.directory, exist_ok=True)

    def _path(self, family: Family, n: int, gamma: float, replicates: int, seed: int) -> str:
        name = (
            f"{family.value}_n{n}_g{float(gamma)!r}_N{replicates}"
            f"_s{seed}_v{STATISTIC_CODE_VERSION}.npz"
        )
        return os.path.join(self.directory, name)

    def load(self, family, n, gamma, replicates, seed) -> NullDistribution | None:
        path = self._path(family, n, gamma, replicates, seed)
        if not os.path.exists(path):
            return None
        with np.load(path) as payload:
            header_ok = (
                str(payload["family"]) == family.value
                and int(payload["n"]) == n
                and float(payload["gamma"]) == float(gamma)
                and int(payload["replicates"]) == replicates
                and int(payload["seed"]) == seed
                and str(payload["version"]) == STATISTIC_CODE_VERSION
            )
            if not header_ok:
                return None
            return NullDistribution(
                family=family, n=n, gamma=float(gamma), replicates=replicates,
                sorted_stats=payload["sorted_stats"].copy(), seed=seed,
                redraws=int(payload["redraws"]),
            )

    def save(self, null: NullDistribution) -> str:
        path = self._path(null.family, null.n, null.gamma, null.replicates, null.seed)
        tmp = path + ".tmp.npz"
        np.savez(
            tmp,
            family=null.family.value,
            n=null.n,
            gamma=np.float64(null.gamma),
            replicates=null.replicates,
            seed=null.seed,
            version=STATISTIC_CODE_VERSION,
            redraws=null.redraws,
            sorted_stats=null.sorted_stats,
        )
        os.replace(tmp, path)
        return path
