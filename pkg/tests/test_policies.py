"""Policy behavior: baselines, interval learning, track transition."""

import math

import numpy as np
import pytest

from dynpricing.demand import (
    ExponentialDemand,
    LinearDemand,
    PiecewiseLinearDemand,
    ProblemInstance,
)
from dynpricing.errors import ConfigError
from dynpricing.market_sim import P_INF, run_policy
from dynpricing.policies import (
    ClairvoyantPolicy,
    DpaPolicy,
    FixedPricePolicy,
    KinkPolicy,
    PolicyConfig,
    SinglePhaseGridPolicy,
    make_policy,
)

LIN = LinearDemand(30.0, 3.0)
EXP = ExponentialDemand(80.0, 0.5)
KINKED = PiecewiseLinearDemand(84.0, 1.0, 4.0, 60.0, price_floor=2.0, price_ceil=5.0)


def lin_instance(n):
    return ProblemInstance(LIN, 20.0, 1.0, n)


def exp_instance(n):
    return ProblemInstance(EXP, 20.0, 1.0, n)


def segments_cover_season(trace):
    t = 0.0
    for seg in trace.segments:
        assert seg.t_start == pytest.approx(t, abs=1e-9)
        t += seg.duration
    assert t == pytest.approx(trace.horizon, abs=1e-9)


class TestBaselines:
    def test_clairvoyant_posts_the_benchmark_price(self):
        inst = lin_instance(1000)
        pol = ClairvoyantPolicy(inst)
        assert pol.applied_price == pytest.approx(5.0, abs=1e-6)
        trace = run_policy(inst, pol, seed=(0, 1000, 0))
        assert len(trace.segments) == 1
        segments_cover_season(trace)

    def test_fixed_price(self):
        inst = lin_instance(1000)
        trace = run_policy(inst, FixedPricePolicy(inst, 3.0), seed=(0, 1000, 0))
        assert trace.segments[0].price == 3.0

    def test_single_phase_grid_then_commit(self):
        inst = lin_instance(10**4)
        pol = SinglePhaseGridPolicy(inst, learn_fraction=0.2, grid_size=5)
        trace = run_policy(inst, pol, seed=(0, 10**4, 0))
        grid_prices = [s.price for s in trace.segments[:5]]
        assert grid_prices == pytest.approx(list(np.linspace(0.1, 10.0, 5)))
        for seg in trace.segments[:5]:
            assert seg.duration == pytest.approx(0.2 / 5)
        assert trace.segments[5].duration == pytest.approx(0.8)
        assert trace.segments[5].price == pol.applied_price
        segments_cover_season(trace)

    def test_single_phase_default_tuning(self):
        pol = SinglePhaseGridPolicy(lin_instance(10**4))
        assert pol.grid_size == 10  # ceil(n^(1/4))
        assert pol.learn_fraction == pytest.approx(0.1)  # n^(-1/4)

    def test_single_phase_validation(self):
        with pytest.raises(ValueError):
            SinglePhaseGridPolicy(lin_instance(100), learn_fraction=1.5)
        with pytest.raises(ValueError):
            SinglePhaseGridPolicy(lin_instance(100), grid_size=1)


class TestDpaStructure:
    def test_season_is_gapless_and_never_overruns(self):
        inst = lin_instance(10**4)
        trace = run_policy(inst, DpaPolicy(inst), seed=(0, 10**4, 0))
        segments_cover_season(trace)

    def test_interval_shrink_geometry(self):
        # widths follow w' <= ln(n) * w / kappa with the asymmetric 1/3-2/3
        # split around the estimate; clamping can only make them narrower
        inst = lin_instance(10**4)
        pol = DpaPolicy(inst)
        run_policy(inst, pol, seed=(0, 10**4, 0))
        hist = pol.interval_history
        assert hist[0] == ("u", 1, LIN.price_floor, LIN.price_ceil)
        ln_n = math.log(10**4)
        for (_, i, lo, hi), (_, j, lo2, hi2) in zip(hist, hist[1:]):
            kappa = pol.schedule.kappa_u[i - 1]
            step = (hi - lo) / kappa
            assert hi2 - lo2 <= ln_n * step + 1e-12
            assert lo2 >= LIN.price_floor - 1e-12
            assert hi2 <= LIN.price_ceil + 1e-12

    def test_linear_stays_on_the_revenue_track(self):
        inst = lin_instance(10**4)
        pol = DpaPolicy(inst)
        run_policy(inst, pol, seed=(0, 10**4, 0))
        assert not pol.entered_step3
        assert pol.c_estimates == []
        # committed price carries the upward adjustment, capped at the ceiling
        _, p_u, p_c = pol.u_estimates[-1]
        last = pol.interval_history[-1]
        step = (last[3] - last[2]) / pol.schedule.kappa_u[last[1] - 1]
        expect = min(max(p_u, p_c) + 2.0 * math.sqrt(pol.ln_n) * step, 10.0)
        assert pol.applied_price == pytest.approx(expect, rel=1e-12)

    def test_exponential_hands_over_to_the_constrained_track(self):
        inst = exp_instance(10**4)
        pol = DpaPolicy(inst)
        run_policy(inst, pol, seed=(0, 10**4, 0))
        assert pol.entered_step3
        assert pol.c_estimates  # at least one constrained iteration ran
        # the committed price is the last clearing estimate, unadjusted
        assert pol.applied_price == pol.c_estimates[-1][1]
        # and should approximate the true clearing price 2 ln 4 = 2.77
        assert abs(pol.applied_price - 2.0 * math.log(4.0)) < 0.25

    def test_constrained_track_inherits_the_last_interval(self):
        inst = exp_instance(10**4)
        pol = DpaPolicy(inst, step3_interval="last")
        run_policy(inst, pol, seed=(0, 10**4, 0))
        last_u = [row for row in pol.interval_history if row[0] == "u"][-1]
        first_c = [row for row in pol.interval_history if row[0] == "c"][0]
        assert (first_c[2], first_c[3]) == (last_u[2], last_u[3])

        pol_full = DpaPolicy(inst, step3_interval="full")
        run_policy(inst, pol_full, seed=(0, 10**4, 0))
        first_c = [row for row in pol_full.interval_history if row[0] == "c"][0]
        assert (first_c[2], first_c[3]) == (EXP.price_floor, EXP.price_ceil)

    def test_transition_threshold_keeps_log_factor_in_theoretical_mode(self):
        inst = exp_instance(10**4)
        assert DpaPolicy(inst).transition_factor == 2.0
        theo = DpaPolicy(inst, log_mode="theoretical")
        assert theo.transition_factor == pytest.approx(2.0 * math.sqrt(math.log(10**4)))
        forced = DpaPolicy(inst, transition_log_factor=True)
        assert forced.transition_factor == theo.transition_factor

    def test_theoretical_first_period_truncates_to_the_season(self):
        # tau_1 = n^(-0.49) (ln n)^3.5 = 26.6 seasons at n = 1e4: learning
        # is cut to the season length and the estimate is still recorded
        inst = lin_instance(10**4)
        pol = DpaPolicy(inst, log_mode="theoretical")
        trace = run_policy(inst, pol, seed=(0, 10**4, 0))
        assert pol.truncated_learning
        assert len(pol.interval_history) == 1
        assert len(pol.u_estimates) == 1
        assert pol.applied_price is not None
        segments_cover_season(trace)

    def test_invalid_step3_interval(self):
        with pytest.raises(ValueError):
            DpaPolicy(lin_instance(100), step3_interval="middle")


class TestKinkPolicy:
    def test_commits_the_raw_estimate(self):
        inst = ProblemInstance(KINKED, 81.0, 1.0, 10**4)
        pol = KinkPolicy(inst)
        trace = run_policy(inst, pol, seed=(0, 10**4, 0))
        _, p_u, p_c = pol.u_estimates[-1]
        assert pol.applied_price == max(p_u, p_c)
        segments_cover_season(trace)

    def test_shrinks_are_symmetric(self):
        inst = ProblemInstance(KINKED, 81.0, 1.0, 10**4)
        pol = KinkPolicy(inst)
        run_policy(inst, pol, seed=(0, 10**4, 0))
        hist = pol.interval_history
        ln_n = math.log(10**4)
        for (_, i, lo, hi), (_, _, lo2, hi2), (_, pu, pc) in zip(
            hist, hist[1:], pol.u_estimates
        ):
            step = (hi - lo) / pol.schedule.kappa[i - 1]
            center = max(pu, pc)
            # interior shrinks sit centered; box clamps cut one side only
            assert lo2 == pytest.approx(max(center - ln_n / 2 * step, 2.0), abs=1e-12)
            assert hi2 == pytest.approx(min(center + ln_n / 2 * step, 5.0), abs=1e-12)

    def test_finds_the_corner(self):
        inst = ProblemInstance(KINKED, 81.0, 1.0, 10**4)
        pol = KinkPolicy(inst)
        run_policy(inst, pol, seed=(0, 10**4, 0))
        assert abs(pol.applied_price - 4.0) < 0.05


class TestConfig:
    def test_unknown_policy_rejected(self):
        with pytest.raises(ConfigError):
            PolicyConfig("greedy")

    def test_fixed_needs_a_price(self):
        with pytest.raises(ConfigError):
            PolicyConfig("fixed")

    def test_dispatch(self):
        inst = lin_instance(100)
        assert isinstance(make_policy(PolicyConfig("dpa"), inst), DpaPolicy)
        assert isinstance(make_policy(PolicyConfig("dpa2"), inst), KinkPolicy)
        assert isinstance(make_policy(PolicyConfig("clairvoyant"), inst), ClairvoyantPolicy)
        assert isinstance(make_policy(PolicyConfig("single_phase"), inst), SinglePhaseGridPolicy)
        assert isinstance(make_policy(PolicyConfig("fixed", price=2.0), inst), FixedPricePolicy)

    def test_synthetic_cannot_be_instantiated(self):
        with pytest.raises(ConfigError):
            make_policy(PolicyConfig("synthetic"), lin_instance(100))
