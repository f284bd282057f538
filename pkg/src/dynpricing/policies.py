"""Pricing policies speaking the simulator's segment protocol.

Every policy yields (price, duration) segments and receives the realized
sales count of the segment it just posted.  The learning policies follow
the shrinking-interval scheme: test a price grid on the current interval,
estimate the demand rate at each grid point, re-center a narrower interval
on the estimated optimum, and finally commit to a single price for the
rest of the season.

The main (two-track) policy watches for the inventory-constrained price
sitting significantly above the revenue-maximizing price; when detected it
hands over to a dedicated constrained track whose symmetric shrinks and
denser grids suit root-finding rather than peak-finding.  The kink variant
is a single track with symmetric shrinks and no final-price adjustment,
built for revenue curves with a concave corner.

All policies track their own clock and never request past the season end;
if the upcoming iteration no longer fits, learning stops and the best
current estimate is applied for the remainder (the first iteration, having
no predecessor, is instead truncated to whatever time is left).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .demand import DemandModel, ProblemInstance, deterministic_price
from .errors import ConfigError
from .schedules import (
    KinkSchedule,
    LearningSchedule,
    build_kink_schedule,
    build_schedule,
)

_T_EPS = 1e-12

POLICY_NAMES = ("dpa", "dpa2", "clairvoyant", "single_phase", "fixed", "synthetic")


class SeasonPolicy:
    """Generator-backed policy base; subclasses implement _season()."""

    def __init__(self):
        self._gen = None
        self._done = False

    def _season(self):
        raise NotImplementedError

    def next_segment(self, last_sales):
        """Next (price, duration) request, or None when the season plan ends."""
        if self._done:
            return None
        try:
            if self._gen is None:
                self._gen = self._season()
                return self._gen.send(None)
            return self._gen.send(last_sales)
        except StopIteration:
            self._done = True
            return None


class ClairvoyantPolicy(SeasonPolicy):
    """Posts the deterministic-optimal fixed price for the whole season."""

    def __init__(self, instance: ProblemInstance):
        super().__init__()
        self.instance = instance
        self.applied_price = deterministic_price(
            instance.demand, instance.inventory, instance.horizon
        )

    def _season(self):
        yield (self.applied_price, self.instance.horizon)


class FixedPricePolicy(SeasonPolicy):
    """Posts one given price for the whole season."""

    def __init__(self, instance: ProblemInstance, price: float):
        super().__init__()
        self.instance = instance
        self.applied_price = float(price)

    def _season(self):
        yield (self.applied_price, self.instance.horizon)


class SinglePhaseGridPolicy(SeasonPolicy):
    """Learn-then-earn baseline: one exploration pass, one committed price.

    Tests an even grid spanning the price interval for a learn_fraction
    share of the season, then posts the better of the estimated
    revenue-maximizing and inventory-clearing prices.  Defaults follow the
    classical one-phase tuning: learn_fraction n^(-1/4) and grid size
    ceil(n^(1/4)).
    """

    def __init__(
        self,
        instance: ProblemInstance,
        learn_fraction: float | None = None,
        grid_size: int | None = None,
    ):
        super().__init__()
        n = instance.market_size
        if learn_fraction is None:
            learn_fraction = n ** (-0.25)
        if grid_size is None:
            grid_size = int(math.ceil(n**0.25))
        if not (0.0 < learn_fraction <= 1.0):
            raise ValueError("learn_fraction must lie in (0, 1]")
        if grid_size < 2:
            raise ValueError("grid_size must be at least 2")
        self.instance = instance
        self.learn_fraction = float(learn_fraction)
        self.grid_size = int(grid_size)
        self.applied_price = None

    def _season(self):
        inst = self.instance
        model = inst.demand
        n, T = inst.market_size, inst.horizon
        target = inst.inventory / T
        grid = np.linspace(model.price_floor, model.price_ceil, self.grid_size)
        delta = self.learn_fraction * T / self.grid_size
        t = 0.0
        d_hat = np.empty(self.grid_size)
        for j, pj in enumerate(grid):
            sales = yield (float(pj), delta)
            d_hat[j] = sales / (n * delta)
            t += delta
        p_u = float(grid[int(np.argmax(grid * d_hat))])
        p_c = float(grid[int(np.argmin(np.abs(d_hat - target)))])
        self.applied_price = max(p_u, p_c)
        if T - t > _T_EPS:
            yield (self.applied_price, T - t)


class _IntervalLearner(SeasonPolicy):
    """Shared bookkeeping for the shrinking-interval policies."""

    def __init__(self, instance: ProblemInstance):
        super().__init__()
        self.instance = instance
        model = instance.demand
        self.p_lo = model.price_floor
        self.p_hi = model.price_ceil
        self.ln_n = math.log(instance.market_size)
        self.target = instance.inventory / instance.horizon
        self.interval_history = []  # (track, iteration, lo, hi) as used
        self.u_estimates = []  # (iteration, p_u, p_c)
        self.c_estimates = []  # (iteration, q)
        self.applied_price = None
        self.degenerate = False
        self.truncated_learning = False
        self._t = 0.0
        self._degenerate_width = max(1e-12, 1e-10 * (self.p_hi - self.p_lo))

    def _grid_pass(self, lo, step, kappa, delta):
        """Test kappa left-endpoint grid prices for delta each; returns d_hat."""
        n = self.instance.market_size
        d_hat = np.empty(kappa)
        for j in range(kappa):
            sales = yield (lo + j * step, delta)
            d_hat[j] = sales / (n * delta)
            self._t += delta
        return d_hat

    def _shrink(self, center, left_width, right_width):
        lo = max(center - left_width, self.p_lo)
        hi = min(center + right_width, self.p_hi)
        return lo, hi


class DpaPolicy(_IntervalLearner):
    """Two-track learning policy.

    Track selection: after each revenue-track iteration the inventory
    estimate is compared against the revenue estimate; a gap beyond the
    transition threshold flips the policy into the constrained track.  The
    final committed price is nudged up by twice the threshold width on the
    revenue track (selling slightly high costs little revenue but guards
    the inventory), and used as-is on the constrained track.

    The transition threshold is 2 sqrt(log n) grid steps.  In practical
    mode the sqrt(log n) slack is dropped along with the other polylog
    factors: at reachable n it exceeds the structural gap the shrinks
    leave between the two estimates (a third of the interval against
    2 sqrt(log n) / kappa_i of it), and the test would never fire.
    """

    def __init__(
        self,
        instance: ProblemInstance,
        schedule: LearningSchedule | None = None,
        *,
        delta: float = 0.49,
        log_mode: str = "practical",
        step3_interval: str = "last",
        transition_log_factor: bool | None = None,
    ):
        super().__init__(instance)
        if schedule is None:
            schedule = build_schedule(instance.market_size, delta, log_mode)
        if step3_interval not in ("last", "full"):
            raise ValueError("step3_interval must be 'last' or 'full'")
        self.schedule = schedule
        self.step3_interval = step3_interval
        if transition_log_factor is None:
            transition_log_factor = schedule.log_mode == "theoretical"
        self.transition_factor = (
            2.0 * math.sqrt(self.ln_n) if transition_log_factor else 2.0
        )
        self.entered_step3 = False
        self.i0 = None

    def _season(self):
        inst = self.instance
        sched = self.schedule
        T = inst.horizon
        lo, hi = self.p_lo, self.p_hi
        best = None  # (price, grid step) feeding the final adjustment
        c_seed = None  # constrained-track estimate carried into step 3
        for i in range(1, sched.N_u + 1):
            tau = sched.tau_u[i - 1] * T
            truncated = False
            if self._t + tau > T + _T_EPS:
                if best is not None or c_seed is not None:
                    break
                tau = T - self._t
                if tau <= _T_EPS:
                    break
                truncated = True
                self.truncated_learning = True
            kappa = sched.kappa_u[i - 1]
            step = (hi - lo) / kappa
            self.interval_history.append(("u", i, lo, hi))
            d_hat = yield from self._grid_pass(lo, step, kappa, tau / kappa)
            prices = lo + step * np.arange(kappa)
            p_u = float(prices[int(np.argmax(prices * d_hat))])
            p_c = float(prices[int(np.argmin(np.abs(d_hat - self.target)))])
            self.u_estimates.append((i, p_u, p_c))
            if truncated:
                best = (max(p_u, p_c), step)
                break
            if p_c > p_u + self.transition_factor * step:
                self.entered_step3 = True
                self.i0 = i
                c_seed = (p_c, step)
                break
            best = (max(p_u, p_c), step)
            lo, hi = self._shrink(
                best[0], (self.ln_n / 3.0) * step, (2.0 * self.ln_n / 3.0) * step
            )
            if hi - lo <= self._degenerate_width:
                self.degenerate = True
                break
        if self.entered_step3:
            if self.step3_interval == "full":
                lo, hi = self.p_lo, self.p_hi
            q_best = c_seed[0]
            for i in range(1, sched.N_c + 1):
                tau = sched.tau_c[i - 1] * T
                if self._t + tau > T + _T_EPS:
                    break
                kappa = sched.kappa_c[i - 1]
                step = (hi - lo) / kappa
                self.interval_history.append(("c", i, lo, hi))
                d_hat = yield from self._grid_pass(lo, step, kappa, tau / kappa)
                prices = lo + step * np.arange(kappa)
                q_best = float(prices[int(np.argmin(np.abs(d_hat - self.target)))])
                self.c_estimates.append((i, q_best))
                lo, hi = self._shrink(
                    q_best, (self.ln_n / 2.0) * step, (self.ln_n / 2.0) * step
                )
                if hi - lo <= self._degenerate_width:
                    self.degenerate = True
                    break
            final_price = q_best
        else:
            # revenue track: shade the commitment up by the threshold width
            final_price = min(
                best[0] + 2.0 * math.sqrt(self.ln_n) * best[1], self.p_hi
            )
        self.applied_price = final_price
        remaining = T - self._t
        if remaining > _T_EPS:
            yield (final_price, remaining)


class KinkPolicy(_IntervalLearner):
    """Single-track learner for revenue curves with a concave corner.

    Same grid/estimate/shrink loop as the revenue track, but shrinks are
    symmetric, the interval re-centers on max(p_c_hat, p_u_hat), and the
    final price is committed without any upward adjustment: under the
    corner's linear growth condition the estimate itself is already
    accurate enough, and shading up would cost linearly.
    """

    def __init__(
        self,
        instance: ProblemInstance,
        schedule: KinkSchedule | None = None,
        *,
        delta: float = 0.49,
        log_mode: str = "practical",
    ):
        super().__init__(instance)
        if schedule is None:
            schedule = build_kink_schedule(instance.market_size, delta, log_mode)
        self.schedule = schedule

    def _season(self):
        inst = self.instance
        sched = self.schedule
        T = inst.horizon
        lo, hi = self.p_lo, self.p_hi
        best = None
        for i in range(1, sched.N + 1):
            tau = sched.tau[i - 1] * T
            truncated = False
            if self._t + tau > T + _T_EPS:
                if best is not None:
                    break
                tau = T - self._t
                if tau <= _T_EPS:
                    break
                truncated = True
                self.truncated_learning = True
            kappa = sched.kappa[i - 1]
            step = (hi - lo) / kappa
            self.interval_history.append(("kink", i, lo, hi))
            d_hat = yield from self._grid_pass(lo, step, kappa, tau / kappa)
            prices = lo + step * np.arange(kappa)
            p_u = float(prices[int(np.argmax(prices * d_hat))])
            p_c = float(prices[int(np.argmin(np.abs(d_hat - self.target)))])
            self.u_estimates.append((i, p_u, p_c))
            best = max(p_u, p_c)
            if truncated:
                break
            lo, hi = self._shrink(
                best, (self.ln_n / 2.0) * step, (self.ln_n / 2.0) * step
            )
            if hi - lo <= self._degenerate_width:
                self.degenerate = True
                break
        self.applied_price = best
        remaining = T - self._t
        if remaining > _T_EPS:
            yield (best, remaining)


@dataclass(frozen=True)
class PolicyConfig:
    """Picklable policy description; make_policy turns it into an instance."""

    name: str
    delta: float = 0.49
    log_mode: str = "practical"
    step3_interval: str = "last"
    learn_fraction: float | None = None
    grid_size: int | None = None
    price: float | None = None
    coefficient: float = 1.0  # synthetic stub: regret = coefficient * n^(-1/2)

    def __post_init__(self):
        if self.name not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {self.name!r}; know {POLICY_NAMES}")
        if self.name == "fixed" and self.price is None:
            raise ConfigError("fixed policy needs a price")


def make_policy(config: PolicyConfig, instance: ProblemInstance) -> SeasonPolicy:
    """Fresh policy instance for one replication."""
    if config.name == "dpa":
        return DpaPolicy(
            instance,
            delta=config.delta,
            log_mode=config.log_mode,
            step3_interval=config.step3_interval,
        )
    if config.name == "dpa2":
        return KinkPolicy(instance, delta=config.delta, log_mode=config.log_mode)
    if config.name == "clairvoyant":
        return ClairvoyantPolicy(instance)
    if config.name == "single_phase":
        return SinglePhaseGridPolicy(instance, config.learn_fraction, config.grid_size)
    if config.name == "fixed":
        return FixedPricePolicy(instance, config.price)
    raise ConfigError(f"policy {config.name!r} cannot be simulated directly")
