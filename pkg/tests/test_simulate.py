import json

import numpy as np
import pytest

from macdmt.dmt import ChannelSpec
from macdmt.errors import DomainError, InsufficientTrialsError, NotPsdError
from macdmt.numerics import RngStream
from macdmt.simulate import (
    McEstimate,
    avg_mutual_info,
    clopper_pearson,
    correlation_preset,
    db_to_linear,
    estimate_jensen_outage,
    estimate_outage,
    estimate_total_outage,
    fit_snr_exponent,
    jensen_info,
    load_covariance,
    parse_snr_grid,
    rayleigh_outage_probability,
    sample_channel,
)


def scalar_spec():
    return ChannelSpec(1, 1, 1, 1, np.eye(1))


def flat_spec(block_len=2):
    return ChannelSpec(1, 1, 1, block_len, correlation_preset("flat", block_len))


class TestPresets:
    def test_flat(self):
        cov = correlation_preset("flat", 2)
        assert np.array_equal(cov, np.ones((2, 2)))

    def test_iid(self):
        assert np.array_equal(correlation_preset("iid", 3), np.eye(3))

    def test_exponential(self):
        cov = correlation_preset("exponential", 2, 0.5)
        assert np.allclose(cov, [[1, 0.5], [0.5, 1]])

    def test_exponential_needs_param(self):
        with pytest.raises(DomainError):
            correlation_preset("exponential", 2)

    def test_unknown(self):
        with pytest.raises(DomainError):
            correlation_preset("bogus", 2)


class TestCovarianceFile:
    def test_round_trip(self, tmp_path):
        cov = correlation_preset("exponential", 3, 0.7)
        path = tmp_path / "cov.json"
        path.write_text(json.dumps(
            {"n": 3, "re": cov.real.tolist(), "im": cov.imag.tolist()}
        ))
        assert np.allclose(load_covariance(path), cov)

    def test_rejects_non_psd_with_report(self, tmp_path):
        bad = [[1.0, 2.0], [2.0, 1.0]]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n": 2, "re": bad, "im": [[0, 0], [0, 0]]}))
        with pytest.raises(NotPsdError, match="eigenvalues"):
            load_covariance(path)


class TestSampling:
    def test_flat_slots_identical(self):
        spec = ChannelSpec(2, 2, 3, 4, correlation_preset("flat", 4))
        real = sample_channel(spec, RngStream(5))
        for u in range(2):
            for n in range(1, 4):
                assert np.allclose(real.slots[u, n], real.slots[u, 0], atol=1e-12)

    def test_entry_variance(self):
        from macdmt.simulate import _sample_slots, _sqrt_cov

        spec = ChannelSpec(1, 1, 1, 1, np.eye(1))
        slots = _sample_slots(spec, RngStream(2).generator(), 100_000, _sqrt_cov(spec))
        var = np.mean(np.abs(slots) ** 2)
        assert abs(var - 1.0) < 0.01

    def test_iid_slots_uncorrelated(self):
        from macdmt.simulate import _sample_slots, _sqrt_cov

        spec = ChannelSpec(1, 1, 1, 2, correlation_preset("iid", 2))
        draws = _sample_slots(spec, RngStream(3).generator(), 100_000,
                              _sqrt_cov(spec))[:, 0, :, 0, 0]
        corr = np.mean(draws[:, 0] * draws[:, 1].conj())
        assert abs(corr) < 0.01

    def test_covariance_reproduction(self):
        from macdmt.simulate import _sample_slots, _sqrt_cov

        n_draws = 100_000
        spec = ChannelSpec(1, 1, 1, 2, correlation_preset("exponential", 2, 0.7))
        draws = _sample_slots(spec, RngStream(4).generator(), n_draws,
                              _sqrt_cov(spec))[:, 0, :, 0, 0]
        emp = draws.T @ draws.conj() / n_draws
        se = 3.0 / np.sqrt(n_draws)
        assert np.all(np.abs(emp - spec.covariance) < 3 * se + 0.02)

    def test_stacking_shape(self):
        spec = ChannelSpec(2, 3, 4, 2, correlation_preset("iid", 2))
        real = sample_channel(spec, RngStream(6))
        assert real.stacked((1, 2)).shape == (2, 4, 6)
        assert real.stacked((2,)).shape == (2, 4, 3)


class TestMutualInfo:
    def test_zero_snr(self):
        real = sample_channel(scalar_spec(), RngStream(7))
        assert avg_mutual_info(real, (1,), 0.0) == 0.0
        assert jensen_info(real, (1,), 0.0) == 0.0

    def test_scalar_reduction(self):
        real = sample_channel(scalar_spec(), RngStream(8))
        h = real.slots[0, 0, 0, 0]
        got = avg_mutual_info(real, (1,), 10.0)
        assert np.isclose(got, np.log(1 + 10.0 * abs(h) ** 2), rtol=1e-12)

    def test_flat_preset_matches_jensen(self):
        spec = flat_spec(3)
        real = sample_channel(spec, RngStream(9))
        assert np.isclose(
            avg_mutual_info(real, (1,), 7.0), jensen_info(real, (1,), 7.0), rtol=1e-10
        )

    def test_single_slot_identical(self):
        spec = ChannelSpec(2, 1, 2, 1, np.eye(1))
        real = sample_channel(spec, RngStream(10))
        for subset in [(1,), (2,), (1, 2)]:
            assert avg_mutual_info(real, subset, 15.0) == jensen_info(real, subset, 15.0)

    def test_jensen_dimension_branch(self):
        # mr > |S| mt: the concatenation uses per-slot conjugate transposes
        spec = ChannelSpec(2, 3, 4, 2, correlation_preset("iid", 2))
        real = sample_channel(spec, RngStream(11))
        h = real.stacked((1,))  # (2, 4, 3)
        wide = np.concatenate([h[0].conj().T, h[1].conj().T], axis=1)
        assert wide.shape == (3, 8)
        direct = np.log(np.linalg.det(
            np.eye(3) + (20.0 / (3 * 2)) * wide @ wide.conj().T
        )).real
        assert np.isclose(jensen_info(real, (1,), 20.0), direct, rtol=1e-10)

    def test_jensen_dominates_everywhere(self):
        spec = ChannelSpec(2, 2, 3, 2, correlation_preset("exponential", 2, 0.7))
        for b in range(100):
            real = sample_channel(spec, RngStream(12), block=b)
            for subset in [(1,), (2,), (1, 2)]:
                assert avg_mutual_info(real, subset, 30.0) <= jensen_info(
                    real, subset, 30.0
                ) + 1e-12


class TestOutageEstimators:
    def test_zero_rate_zero_outage(self):
        est = estimate_outage(scalar_spec(), (0.0,), (1,), 100.0, 2000, RngStream(13))
        assert est.p_hat == 0.0

    def test_rejects_low_snr(self):
        with pytest.raises(DomainError):
            estimate_outage(scalar_spec(), (0.5,), (1,), 1.0, 10, RngStream(14))

    def test_matches_rayleigh_oracle(self):
        spec = scalar_spec()
        for snr_db in (10.0, 20.0):
            snr = db_to_linear(snr_db)
            est = estimate_outage(spec, (0.5,), (1,), snr, 100_000, RngStream(15))
            p = rayleigh_outage_probability(snr, 0.5)
            assert abs(est.p_hat - p) <= max(est.ci95, 3e-4)

    def test_oracle_coverage(self):
        spec = scalar_spec()
        snr = db_to_linear(15.0)
        p = rayleigh_outage_probability(snr, 0.5)
        hits = 0
        for seed in range(20):
            est = estimate_outage(spec, (0.5,), (1,), snr, 20_000, RngStream(seed))
            hits += abs(est.p_hat - p) <= est.ci95
        assert hits >= 17

    def test_wald_invariant(self):
        est = estimate_outage(scalar_spec(), (0.5,), (1,), 100.0, 5000, RngStream(16))
        assert est.successes == round(est.p_hat * est.trials)
        expect = 1.96 * np.sqrt(est.p_hat * (1 - est.p_hat) / est.trials)
        assert np.isclose(est.ci95, expect)

    def test_jensen_below_outage_same_seed(self):
        spec = ChannelSpec(1, 2, 2, 2, correlation_preset("exponential", 2, 0.7))
        for snr_db in (10.0, 18.0):
            snr = db_to_linear(snr_db)
            a = estimate_outage(spec, (1.2,), (1,), snr, 20_000, RngStream(17))
            b = estimate_jensen_outage(spec, (1.2,), (1,), snr, 20_000, RngStream(17))
            assert b.successes <= a.successes

    def test_jensen_identical_at_single_slot(self):
        spec = ChannelSpec(2, 1, 2, 1, np.eye(1))
        a = estimate_outage(spec, (0.7, 0.7), (1, 2), 200.0, 30_000, RngStream(18))
        b = estimate_jensen_outage(spec, (0.7, 0.7), (1, 2), 200.0, 30_000, RngStream(18))
        assert a.successes == b.successes

    def test_total_outage_bounds(self):
        spec = ChannelSpec(2, 1, 2, 1, np.eye(1))
        rng = RngStream(19)
        snr = 50.0
        total = estimate_total_outage(spec, (0.6, 0.6), snr, 20_000, rng)
        singles = [
            estimate_outage(spec, (0.6, 0.6), s, snr, 20_000, rng)
            for s in [(1,), (2,), (1, 2)]
        ]
        assert total.successes >= max(e.successes for e in singles)
        assert total.successes <= sum(e.successes for e in singles)

    def test_total_single_user_equals_marginal(self):
        spec = scalar_spec()
        a = estimate_total_outage(spec, (0.5,), 100.0, 10_000, RngStream(20))
        b = estimate_outage(spec, (0.5,), (1,), 100.0, 10_000, RngStream(20))
        assert a.successes == b.successes

    def test_thread_count_invariance(self):
        spec = ChannelSpec(2, 1, 2, 1, np.eye(1))
        a = estimate_outage(spec, (0.7, 0.7), (1, 2), 100.0, 30_000, RngStream(21))
        b = estimate_outage(spec, (0.7, 0.7), (1, 2), 100.0, 30_000, RngStream(21),
                            threads=4)
        assert a == b

    def test_monotone_in_snr(self):
        spec = ChannelSpec(2, 1, 2, 1, np.eye(1))
        estimates = [
            estimate_outage(spec, (0.6, 0.6), (1, 2), db_to_linear(db), 20_000,
                            RngStream(24))
            for db in (10.0, 15.0, 20.0, 25.0)
        ]
        for a, b in zip(estimates, estimates[1:]):
            assert b.p_hat <= a.p_hat + a.ci95 + b.ci95

    def test_fixed_rate_target(self):
        spec = scalar_spec()
        snr = db_to_linear(20.0)
        est = estimate_outage(spec, (0.0,), (1,), snr, 200_000, RngStream(22),
                              fixed_rate_nats=1.0)
        p = rayleigh_outage_probability(snr, 0.0, fixed_rate_nats=1.0)
        assert p > 0
        assert abs(est.p_hat - p) <= max(est.ci95, 3e-4)


class TestSlopeFit:
    def test_exact_quadratic_decay(self):
        pts = [(db, (10 ** (db / 10)) ** -2.0) for db in (10, 20, 30, 40)]
        fit = fit_snr_exponent(pts)
        assert np.isclose(fit.exponent, 2.0, atol=1e-12)
        assert fit.stderr == 0.0

    def test_intercept_invariance(self):
        pts = [(db, 7.3 * (10 ** (db / 10)) ** -1.0) for db in (10, 15, 20)]
        fit = fit_snr_exponent(pts)
        assert np.isclose(fit.exponent, 1.0, atol=1e-12)

    def test_rejects_zero_estimates(self):
        est = McEstimate(0.0, 0, 10, 0.0, RngStream(0))
        with pytest.raises(InsufficientTrialsError, match="20"):
            fit_snr_exponent([(10.0, 0.5), (20.0, est), (30.0, 0.1)])

    def test_needs_three_points(self):
        with pytest.raises(DomainError):
            fit_snr_exponent([(10.0, 0.5), (20.0, 0.1)])

    def test_scalar_rayleigh_exponent(self):
        spec = scalar_spec()
        pts = []
        for snr_db in (15.0, 20.0, 25.0, 30.0):
            snr = db_to_linear(snr_db)
            pts.append((snr_db, estimate_outage(spec, (0.5,), (1,), snr, 100_000,
                                                RngStream(23))))
        fit = fit_snr_exponent(pts)
        assert abs(fit.exponent - 0.5) < 0.25


class TestSmallHelpers:
    def test_parse_grid(self):
        assert parse_snr_grid("10:20:5") == [10.0, 15.0, 20.0]
        assert parse_snr_grid("10,12.5") == [10.0, 12.5]
        with pytest.raises(DomainError):
            parse_snr_grid("10:20:0")

    def test_clopper_pearson(self):
        lo, hi = clopper_pearson(0, 50)
        assert lo == 0.0 and 0 < hi < 0.1
        lo, hi = clopper_pearson(5, 50)
        assert 0 < lo < 0.1 < hi < 0.25
