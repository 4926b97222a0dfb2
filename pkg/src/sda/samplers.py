"""Random variates, the Polya-Gamma EM weight and normal-mixture identity checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ValidationError


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the sub-stream identified by ``key`` under ``seed``.

    Distinct keys give statistically independent streams; the same
    ``(seed, key)`` always gives the same stream.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_normal(rng: np.random.Generator, mu, sigma, size=None):
    sigma_arr = np.asarray(sigma, dtype=float)
    if np.any(~(sigma_arr > 0)):
        raise ValidationError("sigma must be positive")
    return rng.normal(mu, sigma, size=size)


def sample_inverse_gaussian(rng: np.random.Generator, mu, lam, size=None):
    """Inverse-Gaussian variates (mean ``mu``, shape ``lam``).

    Michael, Schucany & Haas (1976): transform a chi-square(1) draw to the
    smaller root of the quadratic, then pick that root or ``mu**2 / root``
    with probability ``mu / (mu + root)``.
    """
    mu = np.asarray(mu, dtype=float)
    lam = np.asarray(lam, dtype=float)
    if np.any(~(mu > 0)) or np.any(~(lam > 0)):
        raise ValidationError("inverse-Gaussian parameters must be positive")
    if size is None:
        size = np.broadcast(mu, lam).shape
    nu = rng.standard_normal(size)
    u = rng.random(size)
    r = mu * nu * nu / (2.0 * lam)
    # mu * (1 + r - sqrt(r^2 + 2r)) without the cancellation for large r
    x = mu / (1.0 + r + np.sqrt(r * (r + 2.0)))
    out = np.where(u <= mu / (mu + x), x, mu * mu / x)
    return out[()] if out.ndim == 0 else out


def pg_em_weight(z):
    """Conditional mean of a PG(1, z) variable: ``(sigmoid(z) - 1/2) / z = tanh(z/2) / (2z)``.

    Even in z, decreasing in |z|, equal to 1/4 at z = 0.
    """
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-4
    safe = np.where(small, 1.0, z)
    out = np.where(small, 0.25 - z * z / 48.0, np.tanh(safe / 2.0) / (2.0 * safe))
    return out[()] if out.ndim == 0 else out


# -- mixture identities ------------------------------------------------------

KINDS = ("relu", "lasso", "check", "logit")


@dataclass(frozen=True)
class MixtureIdentity:
    """One row of the normal scale-mixture table.

    relu:  a, c          lasso: c
    check: c, tau        logit: a, b, psi   (kappa = a - b/2)
    """

    kind: str
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    tau: float = 0.5
    psi: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown identity kind {self.kind!r}")
        if self.c <= 0:
            raise ValidationError("c must be positive")
        if self.kind == "relu" and self.a <= 0:
            raise ValidationError("relu identity needs a > 0")
        if self.kind == "check" and not 0 < self.tau < 1:
            raise ValidationError("tau must lie in (0, 1)")
        if self.kind == "logit" and self.b <= 0:
            raise ValidationError("logit identity needs b > 0")

    @property
    def kappa(self) -> float:
        return self.a - self.b / 2.0


@dataclass
class QuadSettings:
    epsabs: float = 1e-11
    epsrel: float = 1e-10
    limit: int = 200


@dataclass
class IdentityCheck:
    lhs: float
    rhs: float
    abs_err: float
    quad_err: float = 0.0
    converged: bool = True
    notes: list[str] = field(default_factory=list)


def check_loss(x, tau):
    return 0.5 * abs(x) + (tau - 0.5) * x


def _mixture_integrand(ident: MixtureIdentity, x: float):
    c = ident.c
    if ident.kind == "relu":
        shift, rate = ident.a, 0.0
    elif ident.kind == "lasso":
        shift, rate = 0.0, 0.5
    else:
        shift, rate = 2.0 * ident.tau - 1.0, 2.0 * ident.tau * (1.0 - ident.tau)

    def f(lam):
        return math.exp(-((x + shift * lam) ** 2) / (2.0 * c * lam) - rate * lam) / math.sqrt(2.0 * math.pi * c * lam)

    return f


def identity_rhs(ident: MixtureIdentity, x: float = 0.0) -> float:
    c = ident.c
    if ident.kind == "relu":
        return math.exp(-2.0 * max(ident.a * x, 0.0) / c) / ident.a
    if ident.kind == "lasso":
        return math.exp(-abs(x) / c) / c
    if ident.kind == "check":
        return math.exp(-2.0 * check_loss(x, ident.tau) / c) / c
    psi, a, b = ident.psi, ident.a, ident.b
    return math.exp(a * psi - b * math.log1p(math.exp(psi)))


def identity_lhs(ident: MixtureIdentity, x: float = 0.0, quad: QuadSettings | None = None):
    """Left side of the identity; returns ``(value, quad_error_estimate, converged)``.

    Mixture kinds integrate over lambda in (0, inf) after lambda = t / (1 - t).
    The logit row uses the closed-form PG(b, 0) Laplace transform
    ``E[exp(-omega psi^2 / 2)] = cosh(psi / 2) ** -b``.
    """
    if ident.kind == "logit":
        psi, b = ident.psi, ident.b
        val = math.exp(ident.kappa * psi - b * math.log(2.0) - b * math.log(math.cosh(psi / 2.0)))
        return val, 0.0, True

    quad = quad or QuadSettings()
    f = _mixture_integrand(ident, x)

    def g(t):
        if t <= 0.0 or t >= 1.0:
            return 0.0
        s = 1.0 - t
        return f(t / s) / (s * s)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(g, 0.0, 1.0, epsabs=quad.epsabs, epsrel=quad.epsrel, limit=quad.limit)
            ok = True
        except integrate.IntegrationWarning:
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(g, 0.0, 1.0, epsabs=quad.epsabs, epsrel=quad.epsrel, limit=quad.limit)
            ok = False
    return val, err, ok


def verify_identity(ident: MixtureIdentity, x: float = 0.0, quad: QuadSettings | None = None) -> IdentityCheck:
    lhs, qerr, ok = identity_lhs(ident, x, quad)
    rhs = identity_rhs(ident, x)
    res = IdentityCheck(lhs, rhs, abs(lhs - rhs), qerr, ok)
    if not ok:
        res.notes.append(f"quadrature did not reach tolerance (estimate {qerr:.2e})")
    if ident.kind == "lasso" and ident.c != 1.0:
        res.notes.append("lasso row only balances at c = 1 (integral scales as c**-0.5)")
    if ident.kind == "check" and ident.c != 1.0:
        res.notes.append("check row only balances at c = 1")
    return res


def standard_identity_suite():
    """Parameter grid used by ``verify-identities`` and the acceptance tests."""
    xs = np.linspace(-3.0, 3.0, 13)
    cases = []
    for a in (0.5, 1.0, 2.0):
        for c in (0.5, 1.0, 2.0):
            cases += [(MixtureIdentity("relu", a=a, c=c), float(x)) for x in xs]
    for tau in (0.25, 0.5, 0.9):
        cases += [(MixtureIdentity("check", tau=tau, c=1.0), float(x)) for x in xs]
    cases += [(MixtureIdentity("lasso", c=1.0), float(x)) for x in xs]
    for a in (0.5, 1.0, 2.0):
        for b in (0.5, 1.0, 2.0):
            cases += [(MixtureIdentity("logit", a=a, b=b, psi=float(psi)), 0.0) for psi in np.linspace(-4, 4, 17)]
    return cases
