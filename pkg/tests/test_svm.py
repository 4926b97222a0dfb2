import math

import numpy as np
import pytest
from scipy import integrate

from oracles import grid_moments
from sda.bench import prepare_dataset
from sda.config import RunConfig
from sda.data import Dataset, split_dataset
from sda.errors import DataError, DegenerateError
from sda.nn import NetworkParams
from sda.samplers import make_rng
from sda.svm import (
    SvmSdaModel,
    fit_svm,
    latent_moments,
    predict_svm,
    sample_lambda,
    sample_w0_svm,
    sample_z0_svm,
    w0_moments,
)


def svm_logpost(y, f, W0, lam, tau0, tauz):
    return lambda z: -((1 + lam - y * z * W0) ** 2) / (2 * tau0**2 * lam) - (z - f) ** 2 / (2 * tauz**2)


class TestHingeMixture:
    def test_quadrature_reproduces_hinge(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = rng.choice([-1.0, 1.0])
            z0, W0, tau = rng.normal(), rng.normal(), rng.uniform(0.5, 2.0)
            u = y * z0 * W0

            def kernel(lam):
                return math.exp(-((1 + lam - u) ** 2) / (2 * tau**2 * lam)) / (tau * math.sqrt(2 * math.pi * lam))

            val, _ = integrate.quad(kernel, 0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)
            target = math.exp(-2 / tau**2 * max(1 - u, 0.0))
            assert abs(val - target) / target < 1e-4


class TestLambda:
    def test_zero_score(self):
        n = 100_000
        lam = sample_lambda(np.ones(n), np.zeros(n), 1.0, 1.0, make_rng(0))
        # 1/lam ~ IG(1, 1): mean 1, variance 1
        assert abs(np.mean(1 / lam) - 1.0) < 4 * math.sqrt(1.0 / n)

    def test_on_margin(self):
        n = 100_000
        lam = sample_lambda(np.ones(n), np.ones(n), 1.0, 1.0, make_rng(1))
        assert np.all(np.isfinite(lam)) and np.all(lam > 0)
        # E[lam] = 1/mu + 1/shape with mu = 1e8 (floored gap), shape = tau0**-2 = 1
        assert abs(lam.mean() - (1e-8 + 1.0)) < 4 * math.sqrt(1e-8 + 2.0) / math.sqrt(n)

    def test_positive_and_deterministic(self, rng):
        y = rng.choice([-1.0, 1.0], size=50)
        z = rng.normal(size=50)
        a = sample_lambda(y, z, 0.7, 1.0, make_rng(2))
        b = sample_lambda(y, z, 0.7, 1.0, make_rng(2))
        assert np.all(a > 0) and a.tobytes() == b.tobytes()

    def test_bad_tau(self):
        with pytest.raises(ValueError):
            sample_lambda(np.ones(2), np.ones(2), 1.0, 0.0, make_rng(0))


class TestW0:
    def test_single_point(self):
        mu, var = w0_moments([1.0], [2.0], [1.0])
        assert mu == 1.0 and var == 0.25

    def test_scaling(self, rng):
        y = rng.choice([-1.0, 1.0], size=20)
        z, lam = rng.normal(size=20), rng.uniform(0.5, 2, size=20)
        assert w0_moments(y, 3.0 * z, lam)[0] == pytest.approx(w0_moments(y, z, lam)[0] / 3.0, rel=1e-12)

    def test_small_slack_limit(self, rng):
        y = rng.choice([-1.0, 1.0], size=20)
        z = rng.normal(size=20)
        mu, _ = w0_moments(y, z, np.full(20, 1e-12))
        assert mu == pytest.approx(np.sum(y * z) / np.sum(z * z), rel=1e-9)

    def test_matches_printed_formula(self, rng):
        y = rng.choice([-1.0, 1.0], size=15)
        z, lam = rng.normal(size=15), rng.uniform(0.1, 3, size=15)
        num = sum(y[i] * z[i] * (1 + lam[i]) / lam[i] for i in range(15))
        den = sum(y[i] ** 2 * z[i] ** 2 / lam[i] for i in range(15))
        mu, var = w0_moments(y, z, lam)
        assert abs(mu - num / den) < 1e-12 and abs(var - 1 / den) < 1e-12

    def test_all_zero_latents(self):
        with pytest.raises(DegenerateError):
            sample_w0_svm(np.ones(3), np.zeros(3), np.ones(3), make_rng(0))

    def test_draw_moments(self):
        draws = np.array([sample_w0_svm([1.0], [2.0], [1.0], make_rng(9, i)) for i in range(20_000)])
        assert abs(draws.mean() - 1.0) < 4 * math.sqrt(0.25 / 20_000)


class TestZ0:
    def test_unit_case(self):
        mean, var = latent_moments(np.array([1.0, -1.0]), np.array([0.3, 0.3]), 1.0, np.ones(2), 1.0, 1.0)
        np.testing.assert_allclose(mean, [(2 + 0.3) / 2, (-2 + 0.3) / 2])
        assert np.all(var == 0.5)
        gm, gv = grid_moments(svm_logpost(1.0, 0.3, 1.0, 1.0, 1.0, 1.0))
        assert abs(gm - mean[0]) < 1e-3 and abs(gv - 0.5) < 1e-3

    def test_pinned_to_network(self):
        mean, _ = latent_moments(np.array([1.0]), np.array([0.4]), 2.0, np.array([0.5]), 1.0, 1e-6)
        assert mean[0] == pytest.approx(0.4, abs=1e-9)

    def test_large_slack_against_grid(self):
        y, f, W0, lam = -1.0, 0.8, 1.5, 1e6
        mean, var = latent_moments(np.array([y]), np.array([f]), W0, np.array([lam]), 1.0, 1.0)
        gm, gv = grid_moments(svm_logpost(y, f, W0, lam, 1.0, 1.0))
        assert abs(gm - mean[0]) < 1e-3 and abs(gv - var[0]) < 1e-3

    def test_sampler_uses_copy_slacks(self):
        n, J = 3, 2
        lam = np.concatenate([np.full(n, 1e-6), np.full(n, 1e6)])
        z = sample_z0_svm(np.ones(n), np.zeros(n), 1.0, lam, 1.0, 1.0, make_rng(0), J)
        # tiny slack drags copy 0 onto y / W0 = 1; huge slack leaves copy 1 near f = 0 mixed with y
        assert np.all(np.abs(z[:n] - 1.0) < 0.01)

    def test_paper_literal_form(self):
        mean, var = latent_moments(np.array([1.0]), np.array([0.5]), 2.0, np.array([3.0]), 1.0, 1.0, True)
        assert mean[0] == pytest.approx((2 + 0.5 * 3) / (2 + 3))
        assert var[0] == pytest.approx(3 / (4 + 3))


def blobs(seed, n=400):
    return prepare_dataset(RunConfig(dataset="blobs", n=n, seed=seed))


class TestFit:
    def test_separable_blobs(self):
        errs = [fit_svm(RunConfig(method="sda-svm", dataset="blobs", epochs=10, seed=s), blobs(s))[1]
                .series("test_err")[-1] for s in range(3)]
        assert max(errs) < 0.02

    def test_two_layer_dropout_configuration_runs(self):
        cfg = RunConfig(method="sda-svm", dataset="blobs", hidden=(32, 32), dropout=(0.4, 0.3), J=10,
                        tau0=1.0, tauz=1.0, epochs=2, seed=1)
        model, log = fit_svm(cfg, blobs(1, 100))
        assert model.J == 10 and len(log.series("test_err")) == 2

    def test_paper_literal_runs(self):
        cfg = RunConfig(method="sda-svm", dataset="blobs", epochs=3, seed=2, paper_literal=True)
        _, log = fit_svm(cfg, blobs(2, 100))
        assert np.isfinite(log.series("train_err")).all()

    def test_single_class(self):
        rng = np.random.default_rng(0)
        data = split_dataset(Dataset(rng.normal(size=(20, 2)), np.ones(20), "binary"), 0.7, rng)
        with pytest.raises(DataError):
            fit_svm(RunConfig(method="sda-svm"), data)

    def test_reproducible(self):
        cfg = RunConfig(method="sda-svm", dataset="blobs", epochs=3, seed=3, J=2)
        a, la = fit_svm(cfg, blobs(3, 100))
        b, lb = fit_svm(cfg, blobs(3, 100))
        assert a.W0 == b.W0 and la.records == lb.records


class TestPredict:
    def net(self, w):
        return NetworkParams((1, 1), [np.array([[w]])], [np.array([0.0])])

    def test_positive(self):
        assert predict_svm(SvmSdaModel(self.net(1.0), W0=2.0), np.array([[0.5]]))[0] == 1.0

    def test_flip(self):
        X = np.array([[-2.0], [0.5], [3.0]])
        a = predict_svm(SvmSdaModel(self.net(1.0), W0=1.5), X)
        b = predict_svm(SvmSdaModel(self.net(1.0), W0=-1.5), X)
        np.testing.assert_array_equal(a, -b)

    def test_zero_score_is_negative(self):
        assert predict_svm(SvmSdaModel(self.net(1.0), W0=0.0), np.array([[1.0]]))[0] == -1.0
