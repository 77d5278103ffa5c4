import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import STRINGS_PI, STRINGS_PI_TILDE
from wavelq import (
    DiscreteSystem,
    RiccatiFault,
    build_discrete,
    care_residual,
    fare_residual,
    solve_care,
    solve_fare,
    solve_input_lyapunov,
    solve_output_lyapunov,
    spectral_radius,
)
from wavelq.examples import (
    build_strings,
    care_closed_form_from_output,
    heat_exchanger_care_closed_form,
)
from wavelq.riccati import solve_stein, value_iteration


def scipy_care(D):
    """Independent oracle: scipy's generalized-eigenvalue DARE with cross term."""
    R = np.eye(D.p) + D.D_d.T @ D.D_d
    return sla.solve_discrete_are(D.A_d, D.B_d, D.C_d.T @ D.C_d, R, s=D.C_d.T @ D.D_d)


def random_system(seed, n=3, p=2, m=2, scale=0.9):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    A *= scale / max(spectral_radius(A), 1e-3)
    return DiscreteSystem(A, rng.normal(size=(n, p)), rng.normal(size=(m, n)), rng.normal(size=(m, p)))


@pytest.fixture(scope="module")
def strings_D():
    return build_discrete(build_strings())


class TestCare:
    def test_strings_matches_printed(self, strings_D):
        sol = solve_care(strings_D)
        assert sol.converged
        assert np.abs(sol.Pi - STRINGS_PI).max() < 5e-4
        assert sol.Pi[0, 0] == pytest.approx(1.6415, abs=5e-4)
        assert sol.Pi[1, 3] == pytest.approx(-4.1131, abs=5e-4)

    def test_strings_matches_scipy(self, strings_D):
        np.testing.assert_allclose(solve_care(strings_D).Pi, scipy_care(strings_D), atol=1e-10)

    def test_heat_exchanger_closed_form(self, he_case):
        params, disc, lq = he_case
        D = disc.discrete
        np.testing.assert_allclose(lq.Pi, care_closed_form_from_output(D.C_d), atol=1e-10)
        np.testing.assert_allclose(lq.Pi, heat_exchanger_care_closed_form(params), atol=1e-8)

    def test_zero_output(self):
        D = DiscreteSystem([[0.5, 0.1], [0, -0.3]], [[1.0], [2.0]], [[0.0, 0.0]], [[1.0]])
        sol = solve_care(D)
        assert sol.converged and not np.any(sol.Pi)

    def test_unstabilizable_diverges(self):
        sol = solve_care(DiscreteSystem([[2.0]], [[0.0]], [[1.0]], [[0.0]]))
        assert not sol.converged

    def test_iteration_cap(self):
        sol = solve_care(DiscreteSystem([[0.999]], [[0.0]], [[1.0]], [[0.0]]), max_iters=5)
        assert not sol.converged and sol.iterations == 5

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 1.8))
    def test_matches_scipy_oracle(self, seed, scale):
        D = random_system(seed, scale=scale)
        sol = solve_care(D)
        assert sol.converged
        ref = scipy_care(D)
        assert np.abs(sol.Pi - ref).max() < 1e-7 * (1 + np.abs(ref).max())

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_iterates_nondecreasing(self, seed):
        D = random_system(seed, scale=1.3)
        its = []
        value_iteration(D, max_iters=200, callback=lambda k, P: its.append(P.copy()))
        for a, b in zip(its, its[1:]):
            assert np.linalg.eigvalsh(b - a).min() >= -1e-12 * (1 + np.linalg.norm(b))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_converged_solutions_are_valid(self, seed):
        sol = solve_care(random_system(seed, scale=1.2))
        if sol.converged:
            assert sol.residual < 1e-8 * (1 + np.linalg.norm(sol.Pi))
            assert sol.min_eigenvalue >= -1e-10 and sol.nonnegative

    def test_symmetry_fault(self, monkeypatch):
        import wavelq.riccati as ric

        real = ric.sla.cho_solve
        # corrupt the gain solve so the iterate loses symmetry
        monkeypatch.setattr(ric.sla, "cho_solve",
                            lambda c, b, **kw: real(c, b, **kw) + np.triu(np.ones_like(b), 1))
        D = DiscreteSystem(np.eye(2) * 0.5, np.eye(2), np.eye(2), np.zeros((2, 2)))
        with pytest.raises(RiccatiFault):
            value_iteration(D)

    def test_residual_zero_pi(self):
        C = np.array([[1.0, 2.0]])
        Dd = np.array([[0.5]])
        D = DiscreteSystem(np.eye(2) * 0.3, [[1.0], [0.0]], C, Dd)
        expect = C.T @ C - C.T @ Dd @ np.linalg.inv(np.eye(1) + Dd.T @ Dd) @ Dd.T @ C
        assert care_residual(D, np.zeros((2, 2))) == pytest.approx(np.linalg.norm(expect), rel=1e-14)
        Dz = DiscreteSystem(np.eye(2) * 0.3, [[1.0], [0.0]], np.zeros((1, 2)), Dd)
        assert care_residual(Dz, np.zeros((2, 2))) == 0.0

    def test_closed_form_residual(self, he_case):
        _, disc, _ = he_case
        D = disc.discrete
        assert care_residual(D, care_closed_form_from_output(D.C_d)) < 1e-12

    def test_serialization(self, strings_D):
        d = solve_care(strings_D).to_dict()
        assert set(d) == {"Pi", "residual", "iterations", "converged"}


class TestFare:
    def test_strings_matches_printed(self, strings_D):
        sol = solve_fare(strings_D)
        assert sol.converged
        assert np.abs(sol.Pi - STRINGS_PI_TILDE).max() < 5e-4
        assert sol.Pi[3, 3] == pytest.approx(0.5, abs=5e-4)

    def test_is_dual_care(self, strings_D):
        a, b = solve_fare(strings_D), solve_care(strings_D.dual())
        np.testing.assert_array_equal(a.Pi, b.Pi)
        assert a.iterations == b.iterations and a.kind == "fare"

    def test_zero_input(self):
        D = DiscreteSystem([[0.5, 0.0], [0.2, 0.1]], np.zeros((2, 1)), [[1.0, 1.0]], [[0.0]])
        sol = solve_fare(D)
        assert sol.converged and not np.any(sol.Pi)

    def test_heat_exchanger(self, he_case):
        _, disc, lq = he_case
        assert lq.fare.converged and lq.fare.nonnegative
        assert fare_residual(disc.discrete, lq.Pi_tilde) < 1e-12


class TestLyapunov:
    def test_heat_exchanger_output(self, he_case):
        D = he_case[1].discrete
        sol = solve_output_lyapunov(D)
        assert sol.exists and sol.conclusive
        np.testing.assert_allclose(sol.L, D.C_d.T @ D.C_d, atol=1e-14)

    def test_heat_exchanger_input(self, he_case):
        D = he_case[1].discrete
        sol = solve_input_lyapunov(D)
        assert sol.exists
        np.testing.assert_allclose(sol.L, D.B_d @ D.B_d.T, atol=1e-14)

    def test_scalar_geometric_series(self):
        D = DiscreteSystem([[0.5]], [[1.0]], [[1.0]], [[0.0]])
        assert solve_output_lyapunov(D).L[0, 0] == pytest.approx(4 / 3, rel=1e-14)
        assert solve_input_lyapunov(D).L[0, 0] == pytest.approx(4 / 3, rel=1e-14)

    def test_unstable_scalar_negative(self):
        sol = solve_input_lyapunov(DiscreteSystem([[2.0]], [[1.0]], [[1.0]], [[0.0]]))
        assert sol.L[0, 0] == pytest.approx(-1 / 3, rel=1e-14)
        assert not sol.exists and sol.conclusive

    def test_strings_not_stable(self, strings_D):
        sol = solve_output_lyapunov(strings_D)
        assert not sol.exists
        assert spectral_radius(strings_D.A_d) > 1

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_series_agreement(self, seed):
        D = random_system(seed, scale=0.8)
        L = np.zeros((D.n, D.n))
        Aj = np.eye(D.n)
        W = D.C_d.T @ D.C_d
        for _ in range(200):
            L += Aj.T @ W @ Aj
            Aj = Aj @ D.A_d
        np.testing.assert_allclose(solve_output_lyapunov(D).L, L, atol=1e-8)

    def test_matches_scipy(self):
        D = random_system(7, scale=0.7)
        ref = sla.solve_discrete_lyapunov(D.A_d.T, D.C_d.T @ D.C_d)
        np.testing.assert_allclose(solve_stein(D.A_d, D.C_d.T @ D.C_d).L, ref, atol=1e-12)


class TestSpectralRadius:
    def test_strings(self, strings_D):
        assert spectral_radius(strings_D.A_d) == pytest.approx(1 + np.sqrt(2), abs=1e-12)

    def test_identity(self):
        assert spectral_radius(np.eye(4)) == 1.0

    def test_rejects_rectangular(self):
        with pytest.raises(ValueError):
            spectral_radius(np.ones((2, 3)))
