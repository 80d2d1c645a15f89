import numpy as np
import pytest
import scipy.optimize

from sparsetf import (
    LinearOperatorSpec,
    PenaltyConfig,
    apply_operator,
    apply_operator_adjoint,
    estimate_operator_norm,
    make_penalty,
    prox_psi,
    psi_value,
)
from sparsetf.errors import LengthMismatch, ShapeMismatch

from oracles import dense_dct2_matrix, dense_operator_matrix, flatten_grid, ref_prox_psi, ref_psi_value


def spec(kind, shape=(6, 5)):
    return LinearOperatorSpec(kind=kind, grid_shape=shape)


class TestOperators:
    def test_identity_flattens_column_major(self, rng):
        sigma = rng.standard_normal((4, 3))
        out = apply_operator(spec("identity", (4, 3)), sigma)
        assert np.array_equal(out, sigma.ravel(order="F"))
        back = apply_operator_adjoint(spec("identity", (4, 3)), out)
        assert np.array_equal(back, sigma)

    def test_gradient_of_constant_is_zero(self):
        out = apply_operator(spec("gradient"), np.full((6, 5), 3.7))
        assert np.allclose(out, 0.0)

    def test_gradient_one_hot_adjoint_stencil(self):
        # Adjoint of a one-hot dual vector reads one signed column of B^T.
        sp = spec("gradient", (3, 3))
        y = np.zeros(sp.output_length)
        y[1] = 1.0  # freq channel, pixel (m=1, n=0)
        back = apply_operator_adjoint(sp, y)
        expected = np.zeros((3, 3))
        expected[2, 0] = 1.0
        expected[1, 0] = -1.0
        assert np.array_equal(back, expected)

    def test_dct_channels_preserve_energy(self, rng):
        sigma = rng.standard_normal((8, 6))
        grad = apply_operator(spec("gradient", (8, 6)), sigma)
        dct = apply_operator(spec("dct_gradient", (8, 6)), sigma)
        half = sigma.size
        assert np.linalg.norm(dct[:half]) == pytest.approx(np.linalg.norm(grad[:half]), rel=1e-10)
        assert np.linalg.norm(dct[half:]) == pytest.approx(np.linalg.norm(grad[half:]), rel=1e-10)

    def test_matches_dense_matrices(self, rng):
        for kind in ("identity", "gradient", "dct_gradient"):
            sp = spec(kind, (5, 4))
            B = dense_operator_matrix(kind, (5, 4))
            sigma = rng.standard_normal((5, 4))
            assert np.allclose(apply_operator(sp, sigma), B @ flatten_grid(sigma), atol=1e-12)
            y = rng.standard_normal(sp.output_length)
            assert np.allclose(flatten_grid(apply_operator_adjoint(sp, y)), B.T @ y, atol=1e-12)

    def test_scipy_dct_matches_definition(self, rng):
        import scipy.fft

        x = rng.standard_normal(9)
        assert np.allclose(scipy.fft.dct(x, type=2, norm="ortho"), dense_dct2_matrix(9) @ x, atol=1e-12)

    def test_adjoint_inner_products(self, rng):
        for kind in ("identity", "gradient", "dct_gradient"):
            sp = spec(kind, (7, 6))
            for _ in range(50):
                sigma = rng.standard_normal((7, 6))
                y = rng.standard_normal(sp.output_length)
                lhs = np.dot(apply_operator(sp, sigma), y)
                rhs = np.sum(sigma * apply_operator_adjoint(sp, y))
                assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(rhs))

    def test_shape_checks(self):
        with pytest.raises(ShapeMismatch):
            apply_operator(spec("gradient", (4, 4)), np.zeros((3, 4)))
        with pytest.raises(LengthMismatch):
            apply_operator_adjoint(spec("gradient", (4, 4)), np.zeros(5))


class TestOperatorNorm:
    def test_identity_is_exactly_one(self):
        assert estimate_operator_norm(spec("identity")) == 1.0

    def test_gradient_norm_64(self):
        est = estimate_operator_norm(spec("gradient", (64, 64)))
        assert 2.7 <= est <= 2.8285

    def test_matches_dense_svd_small_grids(self):
        for shape in ((4, 4), (8, 5), (16, 16)):
            for kind in ("gradient", "dct_gradient"):
                est = estimate_operator_norm(spec(kind, shape))
                dense = np.linalg.svd(dense_operator_matrix(kind, shape), compute_uv=False)[0]
                assert est == pytest.approx(dense, abs=1e-6)

    def test_dct_equals_gradient_norm(self):
        g = estimate_operator_norm(spec("gradient", (12, 9)))
        c = estimate_operator_norm(spec("dct_gradient", (12, 9)))
        assert c == pytest.approx(g, abs=1e-6)


class TestPenaltyConfig:
    def test_nuclear_requires_identity(self):
        with pytest.raises(ValueError):
            PenaltyConfig(psi_kind="nuclear", operator=spec("gradient"), lam=1.0)

    def test_group_requires_gradient(self):
        with pytest.raises(ValueError):
            PenaltyConfig(psi_kind="group_l21", operator=spec("identity"), lam=1.0)

    def test_power_values(self):
        with pytest.raises(ValueError):
            PenaltyConfig(psi_kind="p_power", operator=spec("identity"), lam=1.0, power=5)

    def test_presets(self):
        cfg = make_penalty("tv", (6, 5), lam=40.0, scale=0.25)
        assert cfg.psi_kind == "group_l21" and cfg.operator.kind == "gradient"
        assert make_penalty("p3", (6, 5), 1.0).power == 3


class TestPsiValue:
    def test_l1(self):
        cfg = make_penalty("l1", (2, 1), lam=1.0)
        assert psi_value(cfg, np.array([3.0, -4.0])) == 7.0

    def test_nuclear_diagonal(self):
        cfg = make_penalty("nuclear", (2, 2), lam=1.0)
        z = flatten_grid(np.diag([3.0, 1.0]))
        assert psi_value(cfg, z) == pytest.approx(4.0, abs=1e-12)

    def test_group_single_pixel(self):
        cfg = make_penalty("tv", (1, 1), lam=1.0)
        assert psi_value(cfg, np.array([3.0, 4.0])) == pytest.approx(5.0)

    def test_scale_multiplies(self):
        cfg = make_penalty("l1", (2, 1), lam=1.0, scale=2.0)
        assert psi_value(cfg, np.array([3.0, -4.0])) == 14.0

    def test_matches_reference(self, rng):
        for name, kind, power in (("l1", "l1", None), ("nuclear", "nuclear", None),
                                  ("tv", "group_l21", None), ("p3", "p_power", 3)):
            cfg = make_penalty(name, (4, 3), lam=1.0)
            z = rng.standard_normal(cfg.operator.output_length)
            assert psi_value(cfg, z) == pytest.approx(
                ref_psi_value(kind, z, shape=(4, 3), power=power), rel=1e-12
            )


class TestProxPsi:
    def test_l1_soft_threshold(self):
        cfg = make_penalty("l1", (2, 1), lam=1.0)
        assert np.allclose(prox_psi(cfg, 1.0, np.array([2.0, -0.5])), [1.0, 0.0])

    def test_group_shrink(self):
        cfg = make_penalty("tv", (1, 1), lam=1.0)
        assert np.allclose(prox_psi(cfg, 2.5, np.array([3.0, 4.0])), [1.5, 2.0])

    def test_nuclear_diagonal_svt(self):
        cfg = make_penalty("nuclear", (2, 2), lam=1.0)
        z = flatten_grid(np.diag([3.0, 1.0]))
        out = prox_psi(cfg, 1.0, z).reshape((2, 2), order="F")
        assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)

    def test_p2_closed_form(self):
        cfg = make_penalty("p2", (1, 1), lam=1.0)
        assert prox_psi(cfg, 1.0, np.array([3.0]))[0] == pytest.approx(1.0)

    def test_p3_quadratic_formula(self):
        cfg = make_penalty("p3", (1, 1), lam=1.0)
        expected = (-1.0 + np.sqrt(85.0)) / 6.0
        assert prox_psi(cfg, 1.0, np.array([7.0]))[0] == pytest.approx(expected, abs=1e-12)

    def test_zero_is_identity(self, rng):
        cfg = make_penalty("zero", (3, 2), lam=1.0)
        z = rng.standard_normal(6)
        assert np.array_equal(prox_psi(cfg, 2.0, z), z)

    def test_matches_reference_prox(self, rng):
        cases = (("l1", "l1", None), ("nuclear", "nuclear", None),
                 ("tv", "group_l21", None), ("p3", "p_power", 3), ("p4", "p_power", 4))
        for name, kind, power in cases:
            cfg = make_penalty(name, (4, 4), lam=1.0)
            for gamma in (0.1, 0.9, 3.0):
                z = rng.standard_normal(cfg.operator.output_length) * 2.0
                ours = prox_psi(cfg, gamma, z)
                ref = ref_prox_psi(kind, gamma, z, shape=(4, 4), power=power)
                assert np.allclose(ours, ref, atol=1e-10)

    def test_separable_kinds_match_scalar_minimizer(self, rng):
        # 1-d numerical minimization of gamma*psi(t) + (t - z)^2 / 2 per entry.
        for name, power in (("l1", 1), ("p2", 2), ("p3", 3), ("p4", 4)):
            cfg = make_penalty(name, (3, 1), lam=1.0)
            z = rng.standard_normal(3) * 3.0
            gamma = 0.8
            ours = prox_psi(cfg, gamma, z)
            for k, zk in enumerate(z):
                res = scipy.optimize.minimize_scalar(
                    lambda t: gamma * abs(t) ** power + 0.5 * (t - zk) ** 2,
                    bounds=(-abs(zk) - 1, abs(zk) + 1),
                    method="bounded",
                    options={"xatol": 1e-10},
                )
                assert abs(ours[k] - res.x) <= 1e-6

    def test_group_matches_2d_minimizer(self, rng):
        cfg = make_penalty("tv", (1, 1), lam=1.0)
        gamma = 1.3
        for _ in range(20):
            z = rng.standard_normal(2) * 3.0
            ours = prox_psi(cfg, gamma, z)
            res = scipy.optimize.minimize(
                lambda t: gamma * np.linalg.norm(t) + 0.5 * np.sum((t - z) ** 2),
                x0=z * 0.5,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
            )
            assert np.allclose(ours, res.x, atol=1e-6)

    def test_nuclear_matches_svd_oracle_8x8(self, rng):
        import scipy.linalg

        cfg = make_penalty("nuclear", (8, 8), lam=1.0)
        z = rng.standard_normal(64)
        for gamma in (0.2, 1.0, 4.0):
            ours = prox_psi(cfg, gamma, z)
            u, s, vt = scipy.linalg.svd(z.reshape((8, 8), order="F"))
            ref = (u[:, :8] @ np.diag(np.maximum(s - gamma, 0.0)) @ vt).ravel(order="F")
            assert np.allclose(ours, ref, atol=1e-10)

    def test_soft_threshold_subgradient(self, rng):
        cfg = make_penalty("l1", (5, 4), lam=1.0)
        gamma = 0.7
        z = rng.standard_normal(20) * 2.0
        out = prox_psi(cfg, gamma, z)
        nz = out != 0
        assert np.allclose(z[nz] - out[nz], gamma * np.sign(out[nz]), atol=1e-12)
        assert np.all(np.abs(z[~nz]) <= gamma + 1e-12)

    def test_nonexpansive_and_never_increases_value(self, rng):
        for name in ("l1", "nuclear", "tv", "harmonic", "p2", "p3", "p4", "zero"):
            cfg = make_penalty(name, (4, 4), lam=1.0)
            n = cfg.operator.output_length
            gamma = 0.9
            a = rng.standard_normal(n)
            b = rng.standard_normal(n)
            pa, pb = prox_psi(cfg, gamma, a), prox_psi(cfg, gamma, b)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12
            assert psi_value(cfg, pa) <= psi_value(cfg, a) + 1e-12
