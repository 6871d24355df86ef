import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from singtrace.ideals import quasi_norm_pinf, universal_measurability_test
from singtrace.operators import (
    ContractViolation,
    Operator,
    anticommutator,
    commutator,
    singular_values,
)
from singtrace.triples import (
    build_circle,
    build_diagonal_toy,
    build_model,
    build_nc_torus,
    delta,
    f_comm,
    invertible_double,
    partial_d,
    qc_seminorm,
    realize,
    resolvent_weight,
    summability_report,
)


class TestCircle:
    def test_shift_raises_mode_exactly(self, circle64):
        u = circle64.monomial((1,))
        du = partial_d(u, circle64)
        U = realize(u, circle64)
        assert circle64.interior_norm(du - U) == 0.0

    def test_phase_commutator_rank_one(self, circle64):
        u = circle64.monomial((1,))
        fu = f_comm(u, circle64)
        mat = fu.sparse()
        assert mat.nnz == 1
        center = circle64.dim // 2  # index of mode 0
        assert mat[center, center - 1] == pytest.approx(2.0)

    def test_weight_singular_value_pairs(self, circle64):
        mu = singular_values(circle64.compress(
            resolvent_weight(circle64, 1))).mu
        want = [1.0, 2 ** -0.5, 2 ** -0.5, 5 ** -0.5, 5 ** -0.5]
        np.testing.assert_allclose(mu[:5], want, atol=1e-12)

    def test_requires_minimum_size(self):
        with pytest.raises(ContractViolation):
            build_circle(4)


class TestTorus:
    def test_commutative_at_theta_zero(self):
        # the formal algebra still carries lam powers; the twist only
        # evaluates away on realization
        m = build_nc_torus(8, theta=0.0)
        U = m.monomial((1, 0))
        V = m.monomial((0, 1))
        assert m.interior_norm(realize(U * V - V * U, m)) <= 1e-12
        gap = commutator(realize(U, m), realize(V, m))
        assert m.interior_norm(gap) <= 1e-12

    def test_twist_relation_on_interior(self, torus12):
        # V U = exp(2 pi i theta) U V, checked on realized matrices
        m = torus12
        U = realize(m.monomial((1, 0)), m)
        V = realize(m.monomial((0, 1)), m)
        lam = np.exp(2j * np.pi * m.theta)
        gap = (V @ U) - lam * (U @ V)
        assert m.interior_norm(gap) <= 1e-12

    def test_grading_relations_exact(self, torus12):
        m = torus12
        assert anticommutator(m.Gamma, m.D).norm_bound() == 0.0
        for g in m.generators().values():
            assert commutator(m.Gamma, realize(g, m)).norm_bound() == 0.0
        eye = Operator(np.ones(m.dim, dtype=complex))
        assert (m.Gamma @ m.Gamma - eye).norm_bound() == 0.0

    def test_phase_squares_to_identity(self, torus12):
        m = torus12
        eye = Operator(np.ones(m.dim, dtype=complex))
        assert (m.F @ m.F - eye).norm_bound() <= 1e-10
        assert (m.F @ m.absD - m.D).norm_bound() <= 1e-10
        # graded kernel block: F anticommutes with Gamma everywhere
        assert anticommutator(m.Gamma, m.F).norm_bound() <= 1e-12

    def test_word_algebra_twist_bookkeeping(self, torus12):
        m = torus12
        U = m.monomial((1, 0))
        V = m.monomial((0, 1))
        VU = V * U
        assert VU.terms == {((1, 1), 1): 1.0 + 0j}
        UV = U * V
        assert UV.terms == {((1, 1), 0): 1.0 + 0j}

    def test_adjoint_twist(self, torus12):
        m = torus12
        w = m.monomial((2, -1))
        prod = w * w.adjoint()
        assert prod.terms == {((0, 0), 0): 1.0 + 0j}


class TestToy:
    def test_all_derivations_vanish(self, toy1000):
        a = toy1000.monomial((3,), coeff=2.0 - 1j)
        assert partial_d(a, toy1000).norm_bound() == 0.0
        assert delta(a, toy1000).norm_bound() == 0.0
        assert f_comm(a, toy1000).norm_bound() == 0.0

    def test_weight_is_harmonic_like(self, toy1000):
        mu = singular_values(resolvent_weight(toy1000, 1)).mu
        k = np.arange(1000) + 1.0
        np.testing.assert_allclose(mu, np.sort((1 + k ** 2) ** -0.5)[::-1])

    def test_weight_measurable_with_unit_trace(self):
        for p in (1, 3):
            m = build_diagonal_toy(50_000, decay_exponent=p)
            verdict = universal_measurability_test(resolvent_weight(m))
            assert verdict.kind == "measurable"
            assert verdict.z == pytest.approx(1.0, abs=0.05)


class TestRealize:
    def test_identity_word(self, circle64):
        one = circle64.one()
        got = realize(one, circle64)
        assert (got - Operator(np.ones(circle64.dim, complex))).norm_bound() == 0.0

    def test_shift_compose_to_interior_identity(self, circle64):
        u = circle64.monomial((1,))
        prod = realize(u, circle64) @ realize(u.adjoint(), circle64)
        eye = Operator(np.ones(circle64.dim, complex))
        assert circle64.interior_norm(prod - eye) == 0.0

    def test_empty_element_is_zero(self, circle64):
        zero = circle64.monomial((1,)) - circle64.monomial((1,))
        assert zero.is_zero()
        assert realize(zero, circle64).norm_bound() == 0.0

    def test_band_exceeding_buffer_rejected(self, circle64):
        with pytest.raises(ContractViolation):
            realize(circle64.monomial((circle64.B + 1,)), circle64)

    def test_symbolic_product_matches_matrix_product_on_interior(self, torus12):
        m = torus12
        a = m.monomial((1, 0), coeff=1.5) + m.monomial((0, -1), coeff=0.5j)
        b = m.monomial((1, 1), coeff=-2.0)
        sym = realize(a * b, m)
        mat = realize(a, m) @ realize(b, m)
        assert m.interior_norm(sym - mat) <= 1e-12


class TestDerivations:
    def test_delta_of_shift_band_structure(self, circle64):
        # [|D|, u] maps mode k to (|k+1| - |k|) mode k+1
        m = circle64
        d = delta(m.monomial((1,)), m).sparse()
        R = m.N + m.B
        for k in (-5, -1, 0, 7):
            i = k + R
            assert d[i + 1, i] == pytest.approx(abs(k + 1) - abs(k))

    @settings(max_examples=20, deadline=None)
    @given(e1=st.integers(-3, 3), e2=st.integers(-3, 3),
           c1=st.floats(-2, 2), c2=st.floats(-2, 2))
    def test_leibniz_on_interior(self, e1, e2, c1, c2):
        m = build_circle(16)
        a = m.monomial((e1,), coeff=c1 + 0.5j)
        b = m.monomial((e2,), coeff=c2 - 0.25j)
        A, B = realize(a, m), realize(b, m)
        ab = realize(a * b, m)
        for der, gen in ((partial_d, m.D), (delta, m.absD)):
            lhs = commutator(gen, ab)
            rhs = (der(a, m) @ B) + (A @ der(b, m))
            # symbolic product and matrix product differ only at the edge
            correction = commutator(gen, ab - A @ B)
            assert m.interior_norm(lhs - rhs - correction) <= 1e-10

    def test_kogom_base_identity_on_double(self, circle64):
        # [D0, a] = ([F, delta(a)] |D0|^-1 + delta(a) D0^-1 + [F, a]) |D0|
        double, _ = invertible_double(circle64)
        a = double.monomial((1,), coeff=1.0) + double.monomial((-2,), coeff=0.5)
        A = realize(a, double)
        from singtrace.operators import hermitian_calculus

        d0 = commutator(double.D, A)
        da = commutator(double.absD, A)
        fa = commutator(double.F, A)
        fda = commutator(double.F, da)
        abs_inv = hermitian_calculus(double.absD, lambda x: 1.0 / x)
        d0_inv = abs_inv @ double.F
        rhs = ((fda @ abs_inv) + (da @ d0_inv) + fa) @ double.absD
        assert double.interior_norm(d0 - rhs) <= 1e-10


class TestSeminorms:
    def test_identity_norm_one(self, circle64):
        assert qc_seminorm(circle64.one(), circle64, 0) == pytest.approx(1.0)

    def test_shift_growth_bounded(self, circle64):
        u = circle64.monomial((1,))
        q0 = qc_seminorm(u, circle64, 0)
        for n in (1, 2, 3):
            assert qc_seminorm(u, circle64, n) <= (2.0 ** n) * q0 + 1e-9

    def test_toy_flat(self, toy1000):
        a = toy1000.monomial((2,))
        q0 = qc_seminorm(a, toy1000, 0)
        assert qc_seminorm(a, toy1000, 3) == pytest.approx(q0)

    def test_order_cap(self, circle64):
        with pytest.raises(ContractViolation):
            qc_seminorm(circle64.one(), circle64, 9)


class TestInvertibleDouble:
    def test_circle_closed_forms(self, circle64):
        double, D1 = invertible_double(circle64)
        k = circle64.modes
        sign = np.where(k >= 0, 1.0, -1.0)
        np.testing.assert_allclose(double.D.diag().real,
                                   sign * np.sqrt(1.0 + k ** 2), atol=1e-12)
        np.testing.assert_allclose(
            D1.diag().real, sign / (np.abs(k) + np.sqrt(1.0 + k ** 2)),
            atol=1e-12)
        ev = np.abs(double.D.diag())
        assert ev.min() >= 1.0

    def test_perturbation_in_weak_l1(self, circle64):
        double, D1 = invertible_double(circle64)
        qn = quasi_norm_pinf(singular_values(D1), circle64.p)
        assert np.isfinite(qn)
        assert qn == double.metadata["D1_quasi_norm_p"]

    def test_invertible_model_keeps_phase(self, toy1000):
        # toy D is psd with |D| >= 1 already; the double keeps F = identity
        double, _ = invertible_double(toy1000)
        assert (double.F - toy1000.F).norm_bound() == 0.0

    def test_torus_double(self, torus12):
        double, D1 = invertible_double(torus12)
        ev = np.abs(double.compress(double.absD).diag().real)
        assert ev.min() >= 1.0
        assert double.F is torus12.F


class TestSummability:
    def test_circle_decay_exponent(self, circle256):
        diag = summability_report(circle256)
        assert diag.verdicts["weight_decay_exponent"] == pytest.approx(-1.0, abs=0.1)
        norms = diag.verdicts["generator_quasi_norms"]
        assert norms["[F,u]"] == pytest.approx(2.0, abs=1e-9)
        assert np.isfinite(norms["[F,delta(u)]"])

    def test_torus_decay_exponent(self, torus16):
        # lattice counting: #{|n| <= R} ~ pi R^2 makes the p=2 weight harmonic
        diag = summability_report(torus16)
        assert diag.verdicts["weight_decay_exponent"] == pytest.approx(-1.0, abs=0.15)

    def test_toy_p3(self):
        m = build_diagonal_toy(20_000, decay_exponent=3)
        diag = summability_report(m)
        assert diag.verdicts["weight_decay_exponent"] == pytest.approx(-1.0, abs=0.05)


class TestInteriorWindow:
    def test_buffer_independence(self):
        # products of band-limited words agree after compression for any
        # buffer at least as large as the total band
        small = build_circle(32, buffer=6)
        large = build_circle(32, buffer=12)
        for model in (small, large):
            u = model.monomial((1,))
            w = model.monomial((-2,))
            prod = realize(u, model) @ realize(w, model) @ realize(u, model)
            model._probe = model.compress(prod).matrix()
        np.testing.assert_allclose(small._probe, large._probe, atol=1e-14)


class TestDescriptor:
    def test_json_fields(self, torus12):
        payload = json.loads(torus12.descriptor_json())
        assert payload["name"] == "nc_torus"
        assert payload["p"] == 2
        assert payload["parity"] == "even"
        assert payload["theta"] == pytest.approx(np.sqrt(0.5))
        assert payload["working_dim"] == torus12.dim
        assert payload["reliable_count"] == torus12.reliable_count

    def test_build_model_registry(self):
        assert build_model("circle", 16).name == "circle"
        assert build_model("toy", 64, p=2).p == 2
        with pytest.raises(ContractViolation):
            build_model("sphere", 10)
