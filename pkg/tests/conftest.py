import json
import math
import sys

import numpy as np
import pytest

from wishart_rates import ModelParams, fixture_path
from wishart_rates.config import load_config

BASE_X = [[0.21, 0.003], [0.003, 0.7]]
HUMPED_X = [[0.3780, 0.0054], [0.0054, 1.2600]]


def base_raw():
    return json.loads(fixture_path("base.json").read_text())


@pytest.fixture(scope="session")
def base_params():
    return load_config(fixture_path("base.json")).model


@pytest.fixture(scope="session")
def humped_params():
    return load_config(fixture_path("humped.json")).model


@pytest.fixture
def base_config_file(tmp_path):
    def make(**overrides):
        raw = base_raw()
        raw.update(overrides)
        path = tmp_path / "model.json"
        path.write_text(json.dumps(raw))
        return path

    return make


def scalar_params(m, q, b, alpha=3.0, a=0.0, x=0.05):
    return ModelParams(a=a, alpha=alpha, B=[[b]], M=[[m]], Q=[[q]], X=[[x]])


class ScalarCIR:
    """Textbook CIR bond functions, written without any package code.

    A scalar Wishart state with parameters ``(m, q, alpha)`` is a CIR process
    ``dx = kappa (theta - x) dt + sigma sqrt(x) dW`` with ``kappa = -2m``,
    ``sigma = 2q`` and ``kappa * theta = alpha * q**2``. The bond
    exponent is ``b * x``, which is again CIR after rescaling by ``b``.
    """

    def __init__(self, m, q, alpha, b, a):
        self.kappa = -2.0 * m
        self.theta = alpha * q * q / self.kappa * b
        self.sigma = 2.0 * q * math.sqrt(b)
        self.b = b
        self.a = a
        self.gamma = math.sqrt(self.kappa**2 + 2.0 * self.sigma**2)

    def _B(self, tau):
        g, k = self.gamma, self.kappa
        e = math.expm1(g * tau)
        return 2.0 * e / ((g + k) * e + 2.0 * g)

    def _log_A(self, tau):
        g, k = self.gamma, self.kappa
        e = math.expm1(g * tau)
        num = 2.0 * g * math.exp((k + g) * tau / 2.0)
        return 2.0 * k * self.theta / self.sigma**2 * math.log(num / ((g + k) * e + 2.0 * g))

    def psi(self, tau):
        return self.b * self._B(tau)

    def phi(self, tau):
        return -self._log_A(tau) + self.a * tau

    def price(self, tau, x):
        return math.exp(-self.phi(tau) - self.psi(tau) * x)

    def long_yield(self):
        return 2.0 * self.kappa * self.theta / (self.kappa + self.gamma) + self.a

    def mean(self, t, x0):
        kappa, theta = self.kappa, self.theta / self.b
        return theta + (x0 - theta) * math.exp(-kappa * t)


def cir_for(p):
    return ScalarCIR(m=p.M[0, 0], q=p.Q[0, 0], alpha=p.alpha, b=p.B[0, 0], a=p.a)


def random_params(rng, d, relaxed=False):
    """A random valid parameter set of dimension ``d``.

    M is a diagonal-dominant matrix with a negative diagonal (hence Hurwitz),
    Q a perturbed diagonal, B and X Gram matrices shifted to be well inside
    the PD cone.
    """
    while True:
        M = -np.diag(rng.uniform(0.5, 2.0, d)) + 0.15 * rng.normal(size=(d, d))
        Q = np.diag(rng.uniform(0.3, 1.0, d)) + 0.2 * rng.normal(size=(d, d))
        G = rng.normal(size=(d, d))
        B = (G @ G.T / d + 0.2 * np.eye(d)) * rng.uniform(0.005, 0.05)
        H = rng.normal(size=(d, d))
        X = (H @ H.T / d + 0.1 * np.eye(d)) * rng.uniform(0.1, 2.0)
        low = d - 1 + 0.2 if relaxed else d + 1
        alpha = rng.uniform(low, d + 3)
        if np.max(np.linalg.eigvals(M).real) > -0.1 or np.linalg.cond(Q) > 50:
            continue
        return ModelParams(a=rng.uniform(0, 0.02), alpha=alpha, B=B, M=M, Q=Q, X=X, relaxed_gindikin=relaxed)


def random_draws(n, seed, dims=(1, 2, 3)):
    rng = np.random.default_rng(seed)
    return [random_params(rng, dims[k % len(dims)]) for k in range(n)]


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
