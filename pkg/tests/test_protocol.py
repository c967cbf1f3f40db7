"""Tests for the protocol runners and their analytic counterparts."""

import math

import numpy as np
import pytest
from scipy import stats

from b92sim.errors import ParameterError
from b92sim.protocol import (
    B92Record,
    ProtocolParams,
    Tallies,
    expected_rates,
    reduction_equivalence,
    run_b92,
    run_protocol1,
)
from b92sim.quantum import (
    DensityMatrix,
    KrausChannel,
    depolarizing_channel,
    identity_channel,
    projector,
    signal_state,
)
from oracles import depolarizing_rates, random_density_matrix

ALPHA_02 = math.sqrt(0.2)


def binom_sigma(n: int, q: float) -> float:
    return math.sqrt(n * q * (1.0 - q))


class TestExpectedRates:
    def test_identity_channel(self):
        alpha = 0.4
        r = expected_rates(alpha, identity_channel())
        assert r.r_err == pytest.approx(0.0, abs=1e-14)
        assert r.r_bit == pytest.approx(0.0, abs=1e-14)
        assert r.r_ph == pytest.approx(0.0, abs=1e-14)
        assert r.r_fil == pytest.approx(2 * alpha**2 * (1 - alpha**2), abs=1e-13)

    def test_benchmark_point_two_paths(self):
        # numeric 4x4 path against the hand-derived closed forms
        r = expected_rates(ALPHA_02, depolarizing_channel(0.03))
        oracle = depolarizing_rates(0.2, 0.03)
        assert r.r_fil == pytest.approx(0.3272, abs=1e-9)
        assert r.r_fil == pytest.approx(oracle["r_fil"], abs=1e-12)
        assert r.r_err == pytest.approx(0.01, abs=1e-9)
        assert r.r_err == pytest.approx(oracle["r_err"], abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.01, 0.03, 0.1, 0.4])
    @pytest.mark.parametrize("alpha_sq", [0.1, 0.2, 0.35])
    def test_closed_forms_across_grid(self, p, alpha_sq):
        r = expected_rates(math.sqrt(alpha_sq), depolarizing_channel(p))
        oracle = depolarizing_rates(alpha_sq, p)
        assert r.r_fil == pytest.approx(oracle["r_fil"], abs=1e-12)
        assert r.r_err == pytest.approx(oracle["r_err"], abs=1e-12)
        assert r.r_bit == pytest.approx(oracle["r_bit"], abs=1e-12)
        assert r.r_ph == pytest.approx(oracle["r_ph"], abs=1e-12)
        np.testing.assert_allclose(r.r_xx, oracle["r_xx"], atol=1e-12)
        np.testing.assert_allclose(r.s_check, oracle["s_check"], atol=1e-12)

    def test_fully_depolarizing_closed_form(self):
        alpha = 0.35
        r = expected_rates(alpha, depolarizing_channel(0.75))
        # output state is rho_A (x) I/2, so every rate is elementary
        a2, b2 = alpha**2, 1 - alpha**2
        assert r.r_fil == pytest.approx(0.5, abs=1e-12)
        assert r.r_err == pytest.approx(0.25, abs=1e-12)
        np.testing.assert_allclose(
            r.r_xx, np.array([[b2 / 2, b2 / 2], [a2 / 2, a2 / 2]]), atol=1e-12
        )
        # filtered state carries weight (a2+b2^2... ) check via direct sums
        assert r.r_bit == pytest.approx(r.r_fil / 2.0, abs=1e-12)

    def test_error_rate_equals_bit_rate(self):
        # the check-pair error probability must equal the filtered bit-error
        # weight for every channel (this identity underlies the estimation)
        rng = np.random.default_rng(5)
        for p in (0.0, 0.02, 0.2, 0.6):
            r = expected_rates(0.45, depolarizing_channel(p))
            assert r.r_err == pytest.approx(r.r_bit, abs=1e-12)


class TestRunProtocol1:
    def test_noiseless_run_has_no_errors(self):
        params = ProtocolParams(alpha=ALPHA_02, n_pairs=20_000, channel=identity_channel(), seed=3)
        t = run_protocol1(params)
        assert t.n_err == 0
        assert t.n_bit == 0
        assert t.n_ph == 0

    def test_noiseless_filter_rate(self):
        n = 100_000
        params = ProtocolParams(alpha=ALPHA_02, n_pairs=n, channel=identity_channel(), seed=11)
        t = run_protocol1(params)
        assert abs(t.n_fil - 0.32 * n) < 4 * binom_sigma(n, 0.32)

    def test_benchmark_error_rate(self):
        n = 100_000
        params = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(0.03), seed=17
        )
        t = run_protocol1(params)
        assert abs(t.n_err - 0.01 * n) < 4 * binom_sigma(n, 0.01)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("p", [0.01, 0.03])
    def test_all_tallies_track_expected_rates(self, seed, p):
        n = 100_000
        params = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(p), seed=seed
        )
        t = run_protocol1(params)
        r = expected_rates(ALPHA_02, depolarizing_channel(p))
        checks = [
            (t.n_err, r.r_err),
            (t.n_fil, r.r_fil),
            (t.n_bit, r.r_bit),
            (t.n_ph, r.r_ph),
        ]
        checks += [(t.n_xx[i, j], r.r_xx[i, j]) for i in (0, 1) for j in (0, 1)]
        checks += [(t.m_check[i, j], r.s_check[i, j]) for i in (0, 1) for j in (0, 1)]
        for count, rate in checks:
            sigma = binom_sigma(n, rate)
            assert abs(count - n * rate) <= max(4 * sigma, 1e-9)

    @pytest.mark.parametrize("seed", range(20))
    def test_bernoulli_consistency_at_hoeffding_scale(self, seed):
        # the filter acts diagonally in X, so the weighted X-outcome counts
        # must track n_fil and n_ph within a few sqrt(N)
        n = 100_000
        a2, b2 = 0.2, 0.8
        params = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(0.03), seed=seed
        )
        t = run_protocol1(params)
        weighted_fil = a2 * (t.n_xx[0, 0] + t.n_xx[1, 0]) + b2 * (t.n_xx[0, 1] + t.n_xx[1, 1])
        assert abs(weighted_fil - t.n_fil) < 5 * math.sqrt(n)
        weighted_ph = a2 * t.n_xx[1, 0] + b2 * t.n_xx[0, 1]
        assert abs(weighted_ph - t.n_ph) < 5 * math.sqrt(n)

    @pytest.mark.parametrize(
        "channel",
        [
            identity_channel(),
            depolarizing_channel(0.1),
            KrausChannel(
                (
                    math.sqrt(0.7) * np.eye(2, dtype=complex),
                    math.sqrt(0.3) * np.array([[0, 1], [1, 0]], dtype=complex),
                )
            ),
        ],
    )
    def test_alice_marginal_untouched_by_channel(self, channel):
        n = 100_000
        params = ProtocolParams(alpha=ALPHA_02, n_pairs=n, channel=channel, seed=23)
        t = run_protocol1(params)
        assert abs(0.2 * n - (t.n_xx[1, 0] + t.n_xx[1, 1])) < 5 * math.sqrt(n)

    def test_deterministic_given_seed(self):
        params = ProtocolParams(
            alpha=0.4, n_pairs=5_000, channel=depolarizing_channel(0.05), seed=99
        )
        t1 = run_protocol1(params)
        t2 = run_protocol1(params)
        assert t1.n_err == t2.n_err and t1.n_fil == t2.n_fil
        np.testing.assert_array_equal(t1.n_xx, t2.n_xx)
        np.testing.assert_array_equal(t1.m_check, t2.m_check)

    def test_invalid_params_rejected(self):
        with pytest.raises(ParameterError):
            ProtocolParams(alpha=0.8, n_pairs=10, channel=identity_channel())
        with pytest.raises(ParameterError):
            ProtocolParams(alpha=0.2, n_pairs=0, channel=identity_channel())


class TestRunB92:
    def test_noiseless_sifted_bits_agree(self):
        params = ProtocolParams(alpha=0.3, n_pairs=20_000, channel=identity_channel(), seed=2)
        rec = run_b92(params)
        np.testing.assert_array_equal(rec.sifted_alice, rec.sifted_bob)

    def test_noiseless_conclusive_fraction(self):
        n = 100_000
        params = ProtocolParams(alpha=ALPHA_02, n_pairs=n, channel=identity_channel(), seed=8)
        rec = run_b92(params)
        kept = n - int(rec.null_flags.sum())
        assert abs(kept - 0.32 * n) < 4 * binom_sigma(n, 0.32)

    def test_benchmark_sifted_error_fraction(self):
        # conditional error rate = r_err / r_fil = (p/3) / 0.3272
        n = 200_000
        params = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(0.03), seed=31
        )
        rec = run_b92(params)
        errors = int(np.sum(rec.sifted_alice != rec.sifted_bob))
        kept = rec.sifted_alice.size
        rate = 0.01 / 0.3272
        assert abs(errors - kept * rate) < 4 * binom_sigma(kept, rate)

    def test_sifted_statistics_match_check_pairs(self):
        # the reduction: joint (sent bit, outcome) statistics of the
        # prepare-and-measure run equal the check-pair statistics
        n = 100_000
        p = 0.03
        params_a = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(p), seed=41
        )
        params_b = ProtocolParams(
            alpha=ALPHA_02, n_pairs=n, channel=depolarizing_channel(p), seed=42
        )
        rec = run_b92(params_a)
        b92_counts = np.zeros((2, 3), dtype=np.int64)
        for j in (0, 1):
            for b in (0, 1, 2):
                b92_counts[j, b] = np.sum((rec.alice_bits == j) & (rec.bob_outcomes == b))

        rng = np.random.Generator(np.random.Philox(params_b.seed))
        rng.permutation(2 * n)
        from b92sim.protocol import _check_joint_probs, _post_channel_state

        rho = _post_channel_state(ALPHA_02, depolarizing_channel(p))
        joint = _check_joint_probs(rho, ALPHA_02)
        outcomes = rng.choice(6, size=n, p=joint.reshape(-1))
        check_counts = np.bincount(outcomes, minlength=6).reshape(2, 3)

        table = np.vstack([b92_counts.reshape(-1), check_counts.reshape(-1)])
        _, p_value, _, _ = stats.chi2_contingency(table)
        assert p_value > 1e-3


class TestReductionEquivalence:
    def test_clean_signal_cannot_err(self):
        alpha = 0.37
        rho = DensityMatrix(projector(signal_state(0, alpha).amplitudes))
        direct, via_filter = reduction_equivalence(rho, alpha)
        assert direct[1] == pytest.approx(0.0, abs=1e-14)
        assert via_filter[1] == pytest.approx(0.0, abs=1e-14)

    def test_maximally_mixed_input(self):
        direct, via_filter = reduction_equivalence(DensityMatrix(np.eye(2) / 2), ALPHA_02)
        np.testing.assert_allclose(direct, [0.25, 0.25, 0.5], atol=1e-13)
        np.testing.assert_allclose(via_filter, [0.25, 0.25, 0.5], atol=1e-13)

    def test_total_variation_vanishes_on_random_states(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            rho = DensityMatrix(random_density_matrix(2, rng))
            direct, via_filter = reduction_equivalence(rho, 0.3)
            assert 0.5 * np.abs(direct - via_filter).sum() < 1e-12


class TestTalliesValidation:
    def test_count_sums_enforced(self):
        with pytest.raises(ParameterError):
            Tallies(
                n_pairs=10,
                n_err=0,
                n_fil=5,
                n_bit=0,
                n_ph=0,
                n_xx=np.zeros((2, 2), dtype=int),
                m_check=np.full((2, 2), 25, dtype=int),
            )

    def test_filtered_counts_bounded(self):
        good = np.array([[5, 2], [2, 1]])
        with pytest.raises(ParameterError):
            Tallies(n_pairs=10, n_err=0, n_fil=3, n_bit=4, n_ph=0, n_xx=good, m_check=good)
