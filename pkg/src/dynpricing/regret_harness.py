"""Monte Carlo regret estimation and log-log slope fitting.

Regret of a policy is 1 - (mean realized revenue) / (deterministic optimum).
The deterministic optimum is an upper bound on every policy's expected
revenue, so regret estimates are non-negative up to Monte Carlo noise.

Replication cells are keyed by (root seed, market size, rep index), so two
policies swept with the same root seed face identical demand randomness
cell for cell, and rerunning any sweep reproduces every cell bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .demand import ProblemInstance, deterministic_value
from .errors import UndefinedRegretError
from .market_sim import run_policy
from .policies import PolicyConfig, make_policy


@dataclass(frozen=True)
class RegretPoint:
    n: int
    mean_regret: float
    std_error: float
    replications: int
    mean_revenue: float
    deterministic_value: float


@dataclass(frozen=True)
class RegretReport:
    per_n: tuple[RegretPoint, ...]
    slope: float
    intercept: float
    r_squared: float
    warnings: tuple[str, ...] = ()


def _simulate_cell(args):
    instance, config, root_seed, rep = args
    policy = make_policy(config, instance)
    trace = run_policy(instance, policy, seed=(root_seed, instance.market_size, rep))
    return trace.terminal_revenue


def estimate_regret(
    instance: ProblemInstance,
    config: PolicyConfig,
    replications: int,
    seed: int,
    workers: int | None = None,
) -> RegretPoint:
    """Mean regret with a delta-method standard error (J^D is a constant).

    The synthetic policy bypasses simulation entirely and reports the exact
    power law coefficient * n^(-1/2); it exists to calibrate the slope fit.
    Callable-backed demand models may not pickle; run those with workers=1.
    """
    if replications < 2:
        raise ValueError("need at least 2 replications")
    n = instance.market_size
    jd = deterministic_value(
        instance.demand, instance.inventory, instance.horizon, n
    )
    if jd <= 0.0:
        raise UndefinedRegretError(
            f"deterministic optimum is {jd}; regret is undefined"
        )
    if config.name == "synthetic":
        regret = config.coefficient / math.sqrt(n)
        return RegretPoint(n, regret, 0.0, replications, jd * (1 - regret), jd)
    cells = [(instance, config, seed, rep) for rep in range(replications)]
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            revenues = np.fromiter(
                pool.map(_simulate_cell, cells, chunksize=64), dtype=float
            )
    else:
        revenues = np.fromiter(map(_simulate_cell, cells), dtype=float)
    mean_rev = float(revenues.mean())
    se_rev = float(revenues.std(ddof=1) / math.sqrt(replications))
    return RegretPoint(
        n=n,
        mean_regret=1.0 - mean_rev / jd,
        std_error=se_rev / jd,
        replications=replications,
        mean_revenue=mean_rev,
        deterministic_value=jd,
    )


def fit_loglog(ns, means):
    """OLS of ln(mean) on ln(n): returns (slope, intercept, r_squared)."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(means, dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return float(slope), float(intercept), r2


def sweep(
    instance: ProblemInstance,
    config: PolicyConfig,
    n_values,
    replications: int,
    seed: int,
    workers: int | None = None,
) -> RegretReport:
    """Regret across market sizes plus the fitted log-log slope.

    Non-positive regret estimates (possible for near-optimal policies at
    small n) are excluded from the fit with a warning rather than clamped.
    """
    n_values = [int(n) for n in n_values]
    if len(set(n_values)) < 3:
        raise ValueError("need at least 3 distinct market sizes for a slope")
    points = tuple(
        estimate_regret(instance.with_market_size(n), config, replications, seed, workers)
        for n in n_values
    )
    warnings = []
    usable = [p for p in points if p.mean_regret > 0.0]
    for p in points:
        if p.mean_regret <= 0.0:
            warnings.append(
                f"n={p.n}: mean regret {p.mean_regret!r} <= 0 excluded from log fit"
            )
    if len(usable) >= 2:
        slope, intercept, r2 = fit_loglog(
            [p.n for p in usable], [p.mean_regret for p in usable]
        )
    else:
        slope = intercept = r2 = float("nan")
        warnings.append("fewer than 2 positive regret points; slope undefined")
    return RegretReport(points, slope, intercept, r2, tuple(warnings))


def check_revenue_bound(point: RegretPoint) -> tuple[bool, str]:
    """Mean revenue must not exceed the deterministic optimum by > 4 SE."""
    se_rev = point.std_error * point.deterministic_value
    limit = point.deterministic_value + 4.0 * se_rev
    ok = point.mean_revenue <= limit
    msg = (
        f"n={point.n}: mean revenue {point.mean_revenue!r} vs "
        f"deterministic optimum {point.deterministic_value!r} + 4 SE ({limit!r})"
    )
    return ok, ("ok: " if ok else "VIOLATED: ") + msg


def _write_csv(path, meta, header, rows):
    lines = [f"# {key} {value}" for key, value in meta]
    lines.append(header)
    lines.extend(rows)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def csv_meta(version: str, config_hash: str, seed) -> list[tuple[str, str]]:
    return [("version", version), ("config_hash", config_hash), ("seed", str(seed))]


def write_regret_csv(path, labelled_points, meta) -> None:
    """Rows of (n, policy, replications, mean_regret, std_error).

    labelled_points: iterable of (policy_name, RegretPoint).  Floats use
    shortest round-trip formatting so identical runs give identical bytes.
    """
    rows = [
        f"{p.n},{name},{p.replications},{p.mean_regret!r},{p.std_error!r}"
        for name, p in labelled_points
    ]
    _write_csv(path, meta, "n,policy,replications,mean_regret,std_error", rows)


def write_slope_csv(path, labelled_reports, meta) -> None:
    """Rows of (policy, slope, intercept, r_squared) per fitted report."""
    rows = [
        f"{name},{r.slope!r},{r.intercept!r},{r.r_squared!r}"
        for name, r in labelled_reports
    ]
    _write_csv(path, meta, "policy,slope,intercept,r_squared", rows)
