"""Entropy densities ``h`` with gradient and Hessian evaluators.

All evaluators accept states of shape ``(..., n)``.
"""

import math
import warnings

import numpy as np
from scipy import integrate

from .. import models as _models
from ..errors import ContractViolation, DomainError, NotClosed, NotNormallyElliptic, QuadratureError
from ..ellipticity import is_normally_elliptic
from ..lyapunov import solve_lyapunov
from ..verdict import Verdict

VOLUME_FILLING_LOWER_LIMIT = 0.5


class EntropyDensity:
    kind = "abstract"

    def value(self, u):
        raise NotImplementedError

    def gradient(self, u):
        raise NotImplementedError

    def hessian(self, u):
        raise NotImplementedError

    def describe(self):
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


def _positive_state(u):
    u = np.asarray(u, dtype=float)
    if np.any(~np.isfinite(u)) or np.any(u <= 0):
        raise DomainError("entropy evaluated at a state with a non-positive component")
    return u


# ---------------------------------------------------------------- Boltzmann


class BoltzmannEntropy(EntropyDensity):
    """``h(u) = sum_i pi_i u_i (log u_i - 1)``."""

    kind = "Boltzmann"

    def __init__(self, pi):
        pi = np.asarray(pi, dtype=float)
        if pi.ndim != 1 or np.any(~np.isfinite(pi)) or np.any(pi <= 0):
            raise ContractViolation("Boltzmann weights must be positive")
        self.pi = pi

    def value(self, u):
        u = _positive_state(u)
        return np.sum(self.pi * u * (np.log(u) - 1.0), axis=-1)

    def gradient(self, u):
        return self.pi * np.log(_positive_state(u))

    def hessian(self, u):
        u = _positive_state(u)
        d = self.pi / u
        return d[..., :, None] * np.eye(len(self.pi))

    def describe(self):
        return {"kind": self.kind, "pi": self.pi.tolist()}


def boltzmann_entropy(pi):
    return BoltzmannEntropy(pi)


# ---------------------------------------------------------------- quadratic


class QuadraticEntropy(EntropyDensity):
    """``h(u) = u^T H u / 2`` with a constant symmetric ``H``."""

    kind = "Quadratic"

    def __init__(self, H, provenance="lyapunov"):
        self.H = np.asarray(H, dtype=float)
        self.provenance = provenance

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * np.einsum("...i,ij,...j->...", u, self.H, u)

    def gradient(self, u):
        return np.asarray(u, dtype=float) @ self.H.T

    def hessian(self, u):
        u = np.asarray(u, dtype=float)
        return np.broadcast_to(self.H, u.shape[:-1] + self.H.shape).copy()

    def describe(self):
        return {"kind": self.kind, "H": self.H.tolist(), "provenance": self.provenance}


def quadratic_entropy_from_lyapunov(A):
    """Quadratic entropy for a constant normally elliptic ``A``: ``H A + A^T H = I``.

    Then ``h'' A = H A`` has symmetric part ``I/2``.
    """
    A = np.asarray(A, dtype=float)
    verdict, margin = is_normally_elliptic(A)
    if verdict is not Verdict.PASS:
        raise NotNormallyElliptic(f"min real part of the spectrum is {margin:.3g}")
    return QuadraticEntropy(solve_lyapunov(A, np.eye(A.shape[0])))


# ---------------------------------------------------------------- separable


class Species1D:
    """One-dimensional convex piece ``h_i`` with its first two derivatives."""

    def __init__(self, value, d1, d2, label, domain_lo=0.0):
        self._value, self._d1, self._d2 = value, d1, d2
        self.label = label
        self.domain_lo = domain_lo

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(~np.isfinite(x)) or np.any(x <= self.domain_lo):
            raise DomainError(f"{self.label}: argument outside ({self.domain_lo}, inf)")
        return x

    def value(self, x):
        return self._value(self._check(x))

    def d1(self, x):
        return self._d1(self._check(x))

    def d2(self, x):
        return self._d2(self._check(x))


def log_species(weight=1.0):
    """``weight * x (log x - 1)``; second derivative ``weight / x``."""
    return Species1D(
        lambda x: weight * x * (np.log(x) - 1.0),
        lambda x: weight * np.log(x),
        lambda x: weight / x,
        f"{weight:g} x(log x - 1)",
    )


def monomial_species(coef, power):
    """Convex piece with second derivative ``coef * x**(power - 2)`` (power >= 2)."""
    if power < 2 or coef <= 0:
        raise ContractViolation("monomial species needs power >= 2 and positive coefficient")
    k = float(power)
    return Species1D(
        lambda x: coef * x**k / (k * (k - 1.0)),
        lambda x: coef * x ** (k - 1.0) / (k - 1.0),
        lambda x: coef * x ** (k - 2.0),
        f"{coef:g} x^{power:g}/{power * (power - 1):g}",
        domain_lo=-np.inf if power == 2 else 0.0,
    )


def _quad(f, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if not np.isfinite(val):
        raise QuadratureError("non-finite integral")
    return val


def quadrature_species(weight, ref, label):
    """Piece with ``h'' = weight`` and ``h(ref) = h'(ref) = 0``, built by adaptive quadrature.

    ``h(x) = int_ref^x (x - s) weight(s) ds``, which equals the iterated
    double integral of ``weight`` from ``ref``.
    """
    def d1(x):
        return np.vectorize(lambda t: _quad(weight, ref, t))(x)

    def value(x):
        return np.vectorize(lambda t: _quad(lambda s: (t - s) * weight(s), ref, t))(x)

    def d2(x):
        return np.vectorize(weight, otypes=[float])(x)

    return Species1D(value, d1, d2, label)


class SeparableEntropy(EntropyDensity):
    """``h(u) = sum_i h_i(u_i)``."""

    kind = "Separable"

    def __init__(self, species, provenance=""):
        self.species = list(species)
        self.provenance = provenance

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return sum(s.value(u[..., i]) for i, s in enumerate(self.species))

    def gradient(self, u):
        u = np.asarray(u, dtype=float)
        return np.stack([s.d1(u[..., i]) for i, s in enumerate(self.species)], axis=-1)

    def hessian(self, u):
        u = np.asarray(u, dtype=float)
        d = np.stack([s.d2(u[..., i]) for i, s in enumerate(self.species)], axis=-1)
        return d[..., :, None] * np.eye(len(self.species))

    def describe(self):
        return {"kind": self.kind, "species": [s.label for s in self.species], "provenance": self.provenance}


def keller_segel_entropy(delta):
    """``h(u) = u1 (log u1 - 1) + u2^2 / (2 delta)`` from ``h'' = diag(u1, delta)^-1``."""
    return SeparableEntropy([log_species(1.0), monomial_species(1.0 / delta, 2)],
                            provenance="h'' = inverse of the diagonal factor diag(u1, delta)")


def cubic_entropy(n=3):
    """``h(u) = sum_i u_i^3 / 6``, i.e. ``h'' = diag(u)``."""
    return SeparableEntropy([monomial_species(1.0, 3) for _ in range(n)],
                            provenance="h'' = diagonal factor diag(u) of A(u) = A2 diag(u)")


def _scan_sign(f, lo, hi, label, points=257):
    x = np.linspace(lo, hi, points)
    vals = np.array([f(t) for t in x], dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals == 0) or (np.any(vals > 0) and np.any(vals < 0)):
        raise ContractViolation(f"{label} changes sign or vanishes on [{lo}, {hi}]")
    return np.sign(vals[0])


def separable_entropy_2species(b1, b2, c1, c2, bounds, reference=None):
    """Separable entropy for ``A = [[a11, b1(u1) b2(u2)], [c1(u1) c2(u2), a22]]``.

    Symmetry of ``h'' A`` forces ``h1'' = |c1/b1|`` and ``h2'' = |b2/c2|`` (up to a
    common factor, set to one). Each ``h_i`` is the iterated integral of its
    weight from the reference point, evaluated by adaptive quadrature.

    Parameters
    ----------
    b1, b2, c1, c2 : callable
        Scalar functions of one variable.
    bounds : pair or pair of pairs
        Interval(s) for ``u1`` and ``u2``; a single ``(lo, hi)`` applies to both.
    reference : pair, optional
        Base points ``(u1*, u2*)``; defaults to the interval midpoints.
    """
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape == (2,):
        bounds = np.stack([bounds, bounds])
    (lo1, hi1), (lo2, hi2) = bounds
    s1 = _scan_sign(lambda t: b1(t) * c1(t), lo1, hi1, "b1*c1")
    s2 = _scan_sign(lambda t: b2(t) * c2(t), lo2, hi2, "b2*c2")
    if s1 * s2 <= 0:
        raise ContractViolation("b1 b2 c1 c2 must be positive")
    if reference is None:
        reference = (0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2))
    w1 = lambda s: abs(c1(s) / b1(s))  # noqa: E731
    w2 = lambda s: abs(b2(s) / c2(s))  # noqa: E731
    return SeparableEntropy(
        [quadrature_species(w1, reference[0], "|c1/b1|"), quadrature_species(w2, reference[1], "|b2/c2|")],
        provenance="two-species symmetric construction",
    )


# ---------------------------------------------------------------- volume filling


def _gl_integral(f, a, b, nodes=48):
    """Gauss-Legendre integral of ``f`` over ``[a, b]`` (arrays of endpoints)."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    t = mid[..., None] + half[..., None] * x
    return half * np.sum(w * f(t), axis=-1)


class VolumeFillingEntropy(EntropyDensity):
    """``h(u) = sum_i u_i (log u_i - 1) + int_a^{u_0} log q(s) ds + chi(u)`` with ``q(s) = s^gamma``.

    ``chi`` is either quadratic, ``u^T C u / 2``, or separable with
    ``chi_i' = log p_i`` for ``p_i(x) = beta_i + x^{s_i}``.
    """

    kind = "VolumeFilling"

    def __init__(self, n, gamma, C=None, beta=None, s=None):
        self.n = n
        self.gamma = float(gamma)
        self.C = None if C is None else np.asarray(C, dtype=float)
        self.beta = None if beta is None else np.asarray(beta, dtype=float)
        self.s = None if s is None else np.asarray(s, dtype=float)
        if self.C is None and self.beta is None:
            self.C = np.zeros((n, n))

    def _check(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.n:
            raise DomainError("state dimension mismatch")
        u0 = 1.0 - np.sum(u, axis=-1)
        if np.any(~np.isfinite(u)) or np.any(u <= 0) or np.any(u0 <= 0):
            raise DomainError("volume-filling entropy needs u in the open Gibbs simplex")
        return u, u0

    @staticmethod
    def _xlogx_minus_x(x):
        return x * np.log(x) - x

    def _chi(self, u):
        if self.C is not None:
            return 0.5 * np.einsum("...i,ij,...j->...", u, self.C, u)
        total = np.zeros(u.shape[:-1])
        a = VOLUME_FILLING_LOWER_LIMIT
        for i in range(self.n):
            b, s = self.beta[i], self.s[i]
            x = u[..., i]
            if b == 0:
                total = total + s * (self._xlogx_minus_x(x) - self._xlogx_minus_x(a))
            else:
                total = total + _gl_integral(lambda t: np.log(b + t**s), np.full_like(x, a), x)
        return total

    def _chi_grad(self, u):
        if self.C is not None:
            return u @ self.C.T
        return np.log(self.beta + u**self.s)

    def _chi_hess(self, u):
        if self.C is not None:
            return np.broadcast_to(self.C, u.shape[:-1] + self.C.shape)
        p = self.beta + u**self.s
        dp = self.s * u ** (self.s - 1.0)
        return (dp / p)[..., :, None] * np.eye(self.n)

    def value(self, u):
        u, u0 = self._check(u)
        a = VOLUME_FILLING_LOWER_LIMIT
        free = self.gamma * (self._xlogx_minus_x(u0) - self._xlogx_minus_x(a))
        return np.sum(u * (np.log(u) - 1.0), axis=-1) + free + self._chi(u)

    def gradient(self, u):
        u, u0 = self._check(u)
        return np.log(u) - self.gamma * np.log(u0)[..., None] + self._chi_grad(u)

    def hessian(self, u):
        u, u0 = self._check(u)
        ratio = (self.gamma / u0)[..., None, None]
        return (1.0 / u)[..., :, None] * np.eye(self.n) + ratio * np.ones((self.n, self.n)) + self._chi_hess(u)

    def describe(self):
        d = {"kind": self.kind, "gamma": self.gamma, "lower_limit": VOLUME_FILLING_LOWER_LIMIT}
        if self.C is not None:
            d["chi"] = {"type": "quadratic", "C": self.C.tolist()}
        else:
            d["chi"] = {"type": "separable_log_p", "beta": self.beta.tolist(), "s": self.s.tolist()}
        return d


def volume_filling_entropy(model):
    """Volume-filling entropy for a model with a common ``q`` and ``p_i = exp(dchi/du_i)``."""
    P = model.params
    if model.family == "VolumeFillingChi":
        C = P["C"]
        if np.linalg.eigvalsh(C)[0] < -1e-12 * max(1.0, np.max(np.abs(C))):
            raise ContractViolation("chi(u) = u^T C u / 2 must be convex (C positive semidefinite)")
        return VolumeFillingEntropy(model.n, P["gamma"], C=C)
    if model.family == "VolumeFillingSeparable":
        g = P["gamma"]
        if not np.allclose(g, g[0], rtol=0, atol=0):
            raise ContractViolation("the entropy construction needs a common q, i.e. equal gamma_i")
        return VolumeFillingEntropy(model.n, g[0], beta=P["beta"], s=P["s"])
    raise ContractViolation(f"{model.family} is not a volume-filling family")


# ---------------------------------------------------------------- potential


class PotentialEntropy(EntropyDensity):
    """Entropy with ``dh/du_i = pi_i p_i(u)`` reconstructed along straight segments.

    ``h(u) = int_0^1 sum_i pi_i p_i(r + t (u - r)) (u - r)_i dt`` for the reference
    point ``r``. Polynomial pressures are integrated exactly by a Gauss-Legendre
    rule of matching degree; other families use 64 nodes.
    """

    kind = "Potential"

    def __init__(self, model, pi, reference):
        self.model = model
        self.pi = np.asarray(pi, dtype=float)
        self.reference = np.asarray(reference, dtype=float)
        if model.family in ("FluidPoly", "DeltaFPoly"):
            deg = max(p.degree for p in model.polys)
            self.nodes = max(1, math.ceil((deg + 1) / 2))
        elif model.family in ("SktLinear", "FluidLinear"):
            self.nodes = 1
        else:
            self.nodes = 64
        self.closed_form = model.family == "FluidLinear"
        if self.closed_form:
            self.S = self.pi[:, None] * model.params["a"]

    def value(self, u):
        u = _models.check_domain(self.model, u)
        if self.closed_form:
            return 0.5 * np.einsum("...i,ij,...j->...", u, self.S, u)
        d = u - self.reference
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        t = 0.5 * (x + 1.0)
        pts = self.reference + t[:, None] * d[..., None, :]
        integrand = np.sum(self.pi * _models.pressures(self.model, pts) * d[..., None, :], axis=-1)
        return 0.5 * np.sum(w * integrand, axis=-1)

    def gradient(self, u):
        u = _models.check_domain(self.model, u)
        return self.pi * _models.pressures(self.model, u)

    def hessian(self, u):
        u = _models.check_domain(self.model, u)
        return self.pi[:, None] * _models.pressure_jacobian_batch(self.model, u)

    def describe(self):
        d = {"kind": self.kind, "pi": self.pi.tolist(), "reference": self.reference.tolist(),
             "quadrature_nodes": self.nodes}
        if self.closed_form:
            d["closed_form"] = "h(u) = 1/2 sum_ij pi_i a_ij u_i u_j"
        return d


def curl_defect(model, pi, u):
    """Max relative asymmetry of ``(pi_i dp_i/du_j)`` at the states ``u``."""
    W = np.asarray(pi, dtype=float)[:, None] * _models.pressure_jacobian_batch(model, np.atleast_2d(u))
    diff = np.abs(W - np.swapaxes(W, -1, -2))
    scale = np.maximum(np.max(np.abs(W), axis=(-1, -2)), 1e-300)
    return float(np.max(np.max(diff, axis=(-1, -2)) / scale))


def potential_entropy(model, pi, reference=None, samples=None, tol=1e-7):
    """Second (potential) entropy with ``dh/du_i = pi_i p_i``.

    The weighted field must be curl free; this is checked at ``samples``
    (default: 32 domain samples). Convexity is not assumed here.
    """
    _models.pressure_jacobian_batch(model, np.ones(model.n) * 0.1)  # raises UnsupportedError early
    if reference is None:
        reference = _models.sample_domain(model, 1)[0]
    reference = _models.check_domain(model, reference)
    if samples is None:
        samples = _models.sample_domain(model, 32, seed=0)
    defect = curl_defect(model, pi, samples)
    if defect > tol:
        raise NotClosed(f"curl defect {defect:.3g} exceeds {tol:g}")
    return PotentialEntropy(model, pi, reference)
