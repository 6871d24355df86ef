import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singtrace.ideals import (
    COMMUTATOR_SUBSPACE,
    INCONCLUSIVE,
    MEASURABLE,
    PartialSumSeries,
    counting_ratio,
    decay_exponent,
    dyadic_window,
    eigenvalue_partial_sums,
    fit_to_json,
    geometric_grid,
    holder_product_check,
    ideal_diagnostics,
    log_fit,
    lorentz_norm_m1inf,
    quasi_norm_pinf,
    series_to_csv,
    universal_measurability_test,
)
from singtrace.operators import ContractViolation, Operator

from conftest import random_unitary


def harmonic(N):
    return 1.0 / (np.arange(N) + 1.0)


class TestQuasiNorm:
    def test_harmonic_attains_one(self):
        # (k+1) * 1/(k+1) == 1 for every k
        assert quasi_norm_pinf(harmonic(1000), 1.0) == pytest.approx(1.0)

    def test_rank_one(self):
        assert quasi_norm_pinf(np.array([1.0, 0, 0]), 2.0) == pytest.approx(1.0)

    def test_inverse_sqrt(self):
        mu = (np.arange(1000) + 1.0) ** -0.5
        assert quasi_norm_pinf(mu, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_nonpositive_p(self):
        with pytest.raises(ContractViolation):
            quasi_norm_pinf(harmonic(5), 0.0)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2 ** 31),
           scale=st.floats(1e-3, 1e3))
    def test_positive_homogeneity_exact(self, seed, scale):
        rng = np.random.default_rng(seed)
        mu = np.sort(rng.random(50))[::-1]
        base = quasi_norm_pinf(mu, 1.0)
        assert quasi_norm_pinf(scale * mu, 1.0) == pytest.approx(
            scale * base, rel=1e-12)


class TestLorentzNorm:
    def test_harmonic_value(self):
        # oracle: direct cumulative sums; sup attained at n=0 with 1/log 2
        mu = harmonic(100_000)
        sums = np.cumsum(mu)
        oracle = float(np.max(sums / np.log(np.arange(100_000) + 2.0)))
        got = lorentz_norm_m1inf(mu)
        assert got == pytest.approx(oracle)
        assert 1.0 <= got <= 1.6
        assert got == pytest.approx(1.0 / np.log(2.0), rel=1e-9)

    def test_zero(self):
        assert lorentz_norm_m1inf(np.zeros(10)) == 0.0

    def test_rank_one(self):
        got = lorentz_norm_m1inf(np.array([1.0, 0.0, 0.0]))
        assert got == pytest.approx(1.0 / np.log(2.0))


class TestHolder:
    def test_two_inverse_sqrt_factors(self):
        mu = (np.arange(400) + 1.0) ** -0.5
        A = Operator(mu.astype(complex))
        rep = holder_product_check([(A, 2.0), (A, 2.0)])
        assert rep["p"] == pytest.approx(1.0)
        assert rep["product_quasi_norm"] == pytest.approx(1.0, abs=1e-12)
        assert rep["factor_norm_product"] == pytest.approx(1.0, abs=1e-12)
        assert rep["constant"] == pytest.approx(1.0, abs=1e-12)
        assert rep["passed"]

    def test_zero_factor(self):
        A = Operator(np.zeros(8, dtype=complex))
        B = Operator(harmonic(8).astype(complex))
        rep = holder_product_check([(A, 1.0), (B, 1.0)])
        assert rep["product_quasi_norm"] == 0.0
        assert rep["passed"]

    def test_circle_phase_commutators(self, circle64):
        from singtrace.triples import f_comm

        u = circle64.monomial((1,))
        A = circle64.compress(f_comm(u, circle64))
        B = circle64.compress(f_comm(u.adjoint(), circle64))
        rep = holder_product_check([(A, 1.0), (B, 1.0)])
        assert rep["p"] == pytest.approx(0.5)
        assert rep["passed"]

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            holder_product_check([(Operator(np.ones(3)), 1.0),
                                  (Operator(np.ones(4)), 1.0)])


class TestPartialSums:
    def test_harmonic_sums_match_direct_summation(self):
        N = 1000
        series = eigenvalue_partial_sums(Operator(harmonic(N).astype(complex)))
        oracle = np.cumsum(harmonic(N))
        np.testing.assert_allclose(series.sums.real, oracle, atol=1e-12)
        np.testing.assert_allclose(series.sums.imag, 0.0, atol=1e-12)

    def test_alternating_sums_bounded(self):
        N = 2000
        v = ((-1.0) ** np.arange(N)) / (np.arange(N) + 1.0)
        series = eigenvalue_partial_sums(Operator(v.astype(complex)))
        assert np.max(np.abs(series.sums)) <= 1.0 + 1e-12

    def test_nilpotent_sums_zero(self):
        T = Operator(np.array([[0.0, 1.0], [0.0, 0.0]]))
        series = eigenvalue_partial_sums(T)
        np.testing.assert_allclose(series.sums, 0.0, atol=1e-14)

    def test_psd_sums_real_nonneg_nondecreasing(self):
        rng = np.random.default_rng(17)
        H = rng.standard_normal((40, 40))
        T = Operator((H @ H.T).astype(complex))
        sums = eigenvalue_partial_sums(T).sums
        assert np.max(np.abs(sums.imag)) <= 1e-9
        real = sums.real
        assert real[0] >= 0
        assert np.all(np.diff(real) >= -1e-10)


class TestLogFit:
    def test_exact_logarithmic_model(self):
        n = np.arange(5000)
        series = PartialSumSeries(2.0 * np.log(n + 1.0) + 0.3)
        fit = log_fit(series)
        assert fit.z == pytest.approx(2.0, abs=1e-10)
        assert fit.residual_sup <= 1e-10

    def test_bounded_series_has_negligible_slope(self):
        n = np.arange(10_000)
        series = PartialSumSeries(np.sin(n.astype(float)))
        fit = log_fit(series)
        assert abs(fit.z) <= 0.5
        assert fit.residual_sup <= 2.0

    def test_harmonic_slope_one(self):
        # oracle: direct summation of 1/(k+1)
        sums = np.cumsum(harmonic(10_000))
        fit = log_fit(PartialSumSeries(sums))
        assert fit.z == pytest.approx(1.0, abs=0.01)

    def test_degenerate_window_rejected(self):
        series = PartialSumSeries(np.ones(100))
        with pytest.raises(ContractViolation):
            log_fit(series, window=(50, 52))

    def test_reordering_within_tie_groups_invariant(self):
        # +/- pairs of equal modulus: any intra-group order gives the same
        # fit because samples snap to group boundaries
        N = 4096
        mu = 1.0 / (np.arange(N // 2) + 1.0)
        fwd = np.empty(N, dtype=complex)
        fwd[0::2], fwd[1::2] = mu * 1j, -mu * 1j
        rev = np.empty(N, dtype=complex)
        rev[0::2], rev[1::2] = -mu * 1j, mu * 1j
        f1 = log_fit(eigenvalue_partial_sums(Operator(fwd)))
        f2 = log_fit(eigenvalue_partial_sums(Operator(rev)))
        assert abs(f1.z - f2.z) <= 1e-10


class TestMeasurability:
    def test_harmonic_measurable(self):
        verdict = universal_measurability_test(
            Operator(harmonic(20_000).astype(complex)))
        assert verdict.kind == MEASURABLE
        assert verdict.z == pytest.approx(1.0, abs=0.02)

    def test_alternating_commutator_subspace(self):
        N = 20_000
        v = ((-1.0) ** np.arange(N)) / (np.arange(N) + 1.0)
        verdict = universal_measurability_test(Operator(v.astype(complex)))
        assert verdict.kind == COMMUTATOR_SUBSPACE
        assert abs(verdict.z) <= 0.02

    def test_inconclusive_on_wild_growth(self):
        # sqrt growth cannot be written as z log(n+1) + O(1) at tol 0.5
        n = np.arange(100_000, dtype=float)
        verdict = universal_measurability_test(PartialSumSeries(np.sqrt(n)))
        assert verdict.kind == INCONCLUSIVE

    def test_macaev_spike_sequence_not_measurable(self):
        # non-increasing mu with plateaus 2^j/k_j on [k_j/2^j, k_j],
        # k_j = 2^(2^j): bounded log-means but sup k*mu(k) unbounded, and
        # the partial sums oscillate too much for any z log(n+1) + O(1)
        N = 70_000
        k = np.arange(N) + 1.0
        mu = 1.0 / k
        for j in (2, 3, 4):
            kj = 2 ** (2 ** j)
            lo = max(kj // (2 ** j), 1)
            if kj <= N:
                mu[lo - 1:kj] = np.maximum(mu[lo - 1:kj], (2.0 ** j) / kj)
        mu = np.minimum.accumulate(mu)  # enforce monotonicity exactly
        assert lorentz_norm_m1inf(mu) < 5.0
        assert quasi_norm_pinf(mu, 1.0) >= 8.0  # far above the harmonic 1
        verdict = universal_measurability_test(
            Operator(mu.astype(complex)), tol=0.5)
        assert verdict.kind == INCONCLUSIVE

    def test_unitary_conjugation_invariance(self):
        rng = np.random.default_rng(23)
        N = 512
        T = np.diag(harmonic(N)).astype(complex)
        U = random_unitary(rng, N)
        v1 = universal_measurability_test(Operator(T))
        v2 = universal_measurability_test(Operator(U @ T @ U.conj().T))
        assert v1.kind == v2.kind == MEASURABLE
        assert abs(v1.z - v2.z) <= 1e-6

    def test_circle_pairing_measurable_z_two(self, circle256):
        from singtrace.hochschild import circle_winding_cycle, omega
        from singtrace.triples import resolvent_weight

        c = circle_winding_cycle(circle256)
        T = omega(c, circle256) @ circle256.compress(
            resolvent_weight(circle256, 1))
        verdict = universal_measurability_test(
            T, window=circle256.fit_window())
        assert verdict.kind == MEASURABLE
        assert verdict.z == pytest.approx(2.0, abs=0.1)


class TestDiagnostics:
    def test_decay_exponent_harmonic(self):
        assert decay_exponent(harmonic(50_000)) == pytest.approx(-1.0, abs=0.01)

    def test_ideal_diagnostics_flags(self):
        diag = ideal_diagnostics(harmonic(10_000), p=1.0)
        assert diag.verdicts["weak_lp"]
        assert diag.quasi_norm_pinf == pytest.approx(1.0)

    def test_counting_ratio_bounded_for_weak_l1(self):
        # Tr E_{|T|}(1/n, inf) = O(n) for harmonic decay
        T = Operator(harmonic(100_000))
        ns = geometric_grid(8, 10_000, 2.0)
        ratios = counting_ratio(T, 1.0, ns)
        assert ratios.max() <= 2.0

    def test_grids_and_windows(self):
        g = geometric_grid(4, 64, 2.0)
        assert g[0] == 4 and g[-1] == 64
        assert np.all(np.diff(g) > 0)
        lo, hi = dyadic_window(10_000)
        assert lo == 100 and hi < 10_000


class TestSerialization:
    def test_series_csv(self, tmp_path):
        series = PartialSumSeries(np.array([1 + 1j, 2.5, 3 - 0.5j]))
        path = tmp_path / "series.csv"
        series_to_csv(series, path)
        rows = path.read_text().strip().splitlines()
        assert rows[0] == "n,re_sum,im_sum"
        assert len(rows) == 4

    def test_fit_json(self, tmp_path):
        fit = log_fit(PartialSumSeries(np.log(np.arange(4096) + 1.0)))
        path = tmp_path / "fit.json"
        fit_to_json(fit, path)
        import json

        payload = json.loads(path.read_text())
        assert payload["z"][0] == pytest.approx(1.0, abs=1e-9)
