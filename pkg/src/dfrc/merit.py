"""Radar merit functions over the per-subcarrier SINR vector.

Every merit function f maps a non-negative SINR vector to a scalar, is
increasing in each coordinate, and is either concave or admits a concave
quadratic minorizer at any expansion point.  The designer only touches the
uniform :class:`SmoothOracle` interface (value / gradient / Hessian), so all
variants run through the same optimization path:

* ``PowerMean(p, weights)``      -- p-th power mean, p <= 1 (concave)
* ``QuasiArithmeticMean``        -- generator-based mean, certified concave
* ``MutualInformation``          -- weighted sum of log(1 + x_k) (concave)
* ``FisherInformation``          -- weighted sum of x_k^2/(1+x_k), tangent-line minorizer
* ``DetectionProbability``       -- weighted sum of Pfa^(1/(1+x_k)), quadratic minorizer
* ``RelativeEntropySum``         -- weighted sum of two divergences, quadratic minorizer
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "SmoothOracle",
    "MeritFunction",
    "PowerMean",
    "QuasiArithmeticMean",
    "MutualInformation",
    "FisherInformation",
    "DetectionProbability",
    "RelativeEntropySum",
    "Generator",
    "exp_mean_generator",
    "radical_mean_generator",
    "log_generator",
    "power_generator",
    "generator_concavity_test",
    "merit_from_config",
]

_GEOMETRIC_P = 1e-8  # |p| below this is treated as the geometric-mean limit


class DomainError(ValueError):
    """Evaluation requested outside the differentiable domain."""


@dataclass(frozen=True)
class SmoothOracle:
    """Bundle of callbacks for a twice-differentiable function of the SINR vector."""

    value: callable
    gradient: callable
    hessian: callable


def _check_weights(weights):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("weights must be a non-empty vector")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    if abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must sum to one")
    return w


def _as_x(x, k):
    x = np.asarray(x, dtype=float)
    if x.shape != (k,):
        raise ValueError(f"expected a SINR vector of length {k}")
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise DomainError("SINR entries must be finite and non-negative")
    return x


class MeritFunction:
    """Base class; subclasses fill in value/gradient/hessian and concavity."""

    is_concave = False

    def __init__(self, weights):
        self.weights = _check_weights(weights)
        self.size = self.weights.size

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def hessian(self, x):
        raise NotImplementedError

    def on_boundary(self, x):
        """True when the zero-SINR convention decides the value at ``x``."""
        return False

    def oracle(self):
        return SmoothOracle(self.value, self.gradient, self.hessian)

    def minorizer_at(self, x0):
        """Concave surrogate touching f at ``x0`` and below f everywhere.

        Concave variants minorize themselves; the others return the quadratic
        (or tangent-line) lower bound built from their curvature bound.
        """
        if self.is_concave:
            return self.oracle()
        x0 = _as_x(x0, self.size)
        f0 = self.value(x0)
        g0 = self.gradient(x0)
        curv = self._minorizer_curvature()  # c_k >= 0; surrogate adds -c_k (x_k - x0_k)^2

        def value(x):
            d = _as_x(x, self.size) - x0
            return f0 + g0 @ d - curv @ d**2

        def gradient(x):
            d = _as_x(x, self.size) - x0
            return g0 - 2.0 * curv * d

        def hessian(x):
            return np.diag(-2.0 * curv)

        return SmoothOracle(value, gradient, hessian)

    def _minorizer_curvature(self):
        raise NotImplementedError


class PowerMean(MeritFunction):
    """p-th power mean of the SINRs, p <= 1.

    p = 1 is the arithmetic mean, p -> 0 the geometric mean, p = -1 the
    harmonic mean, and p -> -inf the minimum.  For p < 0 the value is zero
    whenever some coordinate is zero (limit convention); p -> 0 is evaluated
    through the exp-log form.  Concave on the non-negative orthant.
    """

    is_concave = True

    def __init__(self, p, weights):
        super().__init__(weights)
        if p > 1:
            raise ValueError("power mean requires p <= 1 for concavity")
        self.p = float(p)

    def on_boundary(self, x):
        x = _as_x(x, self.size)
        return bool(self.p < 1 and not np.all(x > 0))

    def value(self, x):
        x = _as_x(x, self.size)
        p, w = self.p, self.weights
        if p == 1.0:
            return float(w @ x)
        if np.any(x == 0.0):
            if abs(p) < _GEOMETRIC_P or p < 0:
                return 0.0
            return float((w @ x**p) ** (1.0 / p))
        if abs(p) < _GEOMETRIC_P:
            return float(math.exp(w @ np.log(x)))
        # log-domain evaluation keeps large |p| finite
        lx = np.log(x)
        shift = (p * lx).max()
        return float(math.exp((shift + math.log(w @ np.exp(p * lx - shift))) / p))

    def _interior(self, x):
        x = _as_x(x, self.size)
        if self.p < 1 and np.any(x == 0.0):
            raise DomainError("power mean with p < 1 is not differentiable at zero SINR")
        return x

    def gradient(self, x):
        x = self._interior(x)
        p, w = self.p, self.weights
        if p == 1.0:
            return w.copy()
        f = self.value(x)
        if abs(p) < _GEOMETRIC_P:
            return f * w / x
        return np.exp((1.0 - p) * math.log(f) + np.log(w) + (p - 1.0) * np.log(x))

    def hessian(self, x):
        x = self._interior(x)
        p, w = self.p, self.weights
        kk = self.size
        if p == 1.0:
            return np.zeros((kk, kk))
        f = self.value(x)
        lf, lw, lx = math.log(f), np.log(w), np.log(x)
        if abs(p) < _GEOMETRIC_P:
            h = np.outer(f * w / x, w / x)
            h[np.diag_indices(kk)] -= f * w / x**2
            return h
        cross = lw[:, None] + lw[None, :] + (p - 1.0) * (lx[:, None] + lx[None, :])
        h = (1.0 - p) * np.exp((1.0 - 2.0 * p) * lf + cross)
        h[np.diag_indices(kk)] += (p - 1.0) * np.exp((1.0 - p) * lf + lw + (p - 2.0) * lx)
        return h


@dataclass(frozen=True)
class Generator:
    """Strictly monotone generator of a quasi-arithmetic mean with derivatives."""

    fn: callable
    deriv: callable
    second_deriv: callable
    inverse: callable
    name: str = "custom"


def exp_mean_generator(a):
    """gamma(x) = a^x with a in (0, 1); yields the exponential mean."""
    if not 0.0 < a < 1.0:
        raise ValueError("exponential mean requires a in (0, 1)")
    la = math.log(a)
    return Generator(
        fn=lambda x: a**x,
        deriv=lambda x: la * a**x,
        second_deriv=lambda x: la * la * a**x,
        inverse=lambda y: math.log(y) / la,
        name=f"exp-mean(a={a})",
    )


def radical_mean_generator(a):
    """gamma(x) = a^(1/x) with a > 1; yields the radical mean."""
    if not a > 1.0:
        raise ValueError("radical mean requires a > 1")
    la = math.log(a)
    return Generator(
        fn=lambda x: a ** (1.0 / x),
        deriv=lambda x: -la * a ** (1.0 / x) / x**2,
        second_deriv=lambda x: a ** (1.0 / x) * (la * la / x**4 + 2.0 * la / x**3),
        inverse=lambda y: la / math.log(y),
        name=f"radical-mean(a={a})",
    )


def log_generator():
    """gamma(x) = ln x; yields the geometric mean."""
    return Generator(
        fn=math.log,
        deriv=lambda x: 1.0 / x,
        second_deriv=lambda x: -1.0 / x**2,
        inverse=math.exp,
        name="log",
    )


def power_generator(p):
    """gamma(x) = x^p, p <= 1 and p != 0; yields the p-th power mean."""
    if p > 1 or p == 0:
        raise ValueError("power generator requires p <= 1, p != 0")
    return Generator(
        fn=lambda x: x**p,
        deriv=lambda x: p * x ** (p - 1.0),
        second_deriv=lambda x: p * (p - 1.0) * x ** (p - 2.0),
        inverse=lambda y: y ** (1.0 / p),
        name=f"power(p={p})",
    )


_BUILTIN_CONCAVE = {"exp-mean", "radical-mean", "log", "power"}


def generator_concavity_test(gamma, deriv, second_deriv, grid, ratio=None, tol=1e-9):
    """Numerical concavity certificate for a quasi-arithmetic mean.

    The mean generated by a strictly monotone gamma is concave exactly when
    the ratio gamma'/gamma'' is convex, provided gamma is either increasing
    and strictly concave or decreasing and strictly convex on the domain.
    The sign pattern is checked on ``grid``; midpoint convexity of the ratio
    is then tested on every grid pair.  Returns ``"concave"``,
    ``"not-concave"``, or ``"inconclusive"`` (sign pattern violated).
    """
    grid = np.asarray(sorted(grid), dtype=float)
    if grid.size < 2:
        return "inconclusive"
    d1 = np.array([deriv(x) for x in grid])
    d2 = np.array([second_deriv(x) for x in grid])
    increasing_concave = np.all(d1 > 0) and np.all(d2 < 0)
    decreasing_convex = np.all(d1 < 0) and np.all(d2 > 0)
    if not (increasing_concave or decreasing_convex):
        return "inconclusive"
    if ratio is None:
        ratio = lambda x: deriv(x) / second_deriv(x)
    r = np.array([ratio(x) for x in grid])
    scale = max(1.0, float(np.abs(r).max()))
    for i in range(grid.size):
        for j in range(i + 1, grid.size):
            mid = 0.5 * (grid[i] + grid[j])
            if ratio(mid) > 0.5 * (r[i] + r[j]) + tol * scale:
                return "not-concave"
    return "concave"


class QuasiArithmeticMean(MeritFunction):
    """Quasi-arithmetic mean gamma^-1(sum_k mu_k gamma(x_k)).

    Only generators whose mean is concave are accepted (the optimizer has no
    surrogate for a non-concave mean); the certificate runs at construction
    unless the generator is one of the built-in concave families.
    """

    is_concave = True

    def __init__(self, generator, weights, concavity_grid=None):
        super().__init__(weights)
        self.generator = generator
        family = generator.name.split("(")[0]
        if family not in _BUILTIN_CONCAVE:
            grid = concavity_grid if concavity_grid is not None else np.geomspace(0.05, 50.0, 25)
            verdict = generator_concavity_test(generator.fn, generator.deriv, generator.second_deriv, grid)
            if verdict != "concave":
                raise ValueError(f"generator {generator.name!r} not certified concave ({verdict})")

    def _interior(self, x):
        x = _as_x(x, self.size)
        if np.any(x == 0.0):
            raise DomainError("quasi-arithmetic mean is evaluated on positive SINRs")
        return x

    def value(self, x):
        x = self._interior(x)
        g = self.generator
        return float(g.inverse(float(self.weights @ np.array([g.fn(v) for v in x]))))

    def gradient(self, x):
        x = self._interior(x)
        g = self.generator
        f = self.value(x)
        dgf = g.deriv(f)
        return self.weights * np.array([g.deriv(v) for v in x]) / dgf

    def hessian(self, x):
        x = self._interior(x)
        g = self.generator
        f = self.value(x)
        d1f, d2f = g.deriv(f), g.second_deriv(f)
        wd1 = self.weights * np.array([g.deriv(v) for v in x])
        h = -np.outer(wd1, wd1) * d2f / d1f**3
        h[np.diag_indices(self.size)] += self.weights * np.array([g.second_deriv(v) for v in x]) / d1f
        return h


class MutualInformation(MeritFunction):
    """Weighted sum of log(1 + x_k); concave."""

    is_concave = True

    def __init__(self, weights):
        super().__init__(weights)

    def value(self, x):
        return float(self.weights @ np.log1p(_as_x(x, self.size)))

    def gradient(self, x):
        return self.weights / (1.0 + _as_x(x, self.size))

    def hessian(self, x):
        return np.diag(-self.weights / (1.0 + _as_x(x, self.size)) ** 2)


class FisherInformation(MeritFunction):
    """Weighted sum of x_k^2/(1+x_k); each term convex, tangent-line minorizer."""

    is_concave = False

    def __init__(self, weights):
        super().__init__(weights)

    def value(self, x):
        x = _as_x(x, self.size)
        return float(self.weights @ (x**2 / (1.0 + x)))

    def gradient(self, x):
        x = _as_x(x, self.size)
        return self.weights * (2.0 * x + x**2) / (1.0 + x) ** 2

    def hessian(self, x):
        x = _as_x(x, self.size)
        return np.diag(self.weights * 2.0 / (1.0 + x) ** 3)

    def _minorizer_curvature(self):
        return np.zeros(self.size)  # terms are convex: the tangent line minorizes


class DetectionProbability(MeritFunction):
    """Weighted sum of Pfa_k^(1/(1+x_k)), the detection probability per subcarrier.

    The second derivative of each term is bounded below by
    -(sqrt(3)-3)^4 e^(sqrt(3)-3) / (sqrt(3) ln(Pfa)^2), so a quadratic with
    half that curvature minorizes the term at any expansion point.
    """

    is_concave = False

    def __init__(self, weights, false_alarm_prob):
        super().__init__(weights)
        pfa = np.broadcast_to(np.asarray(false_alarm_prob, dtype=float), (self.size,)).copy()
        if np.any((pfa <= 0) | (pfa >= 1)):
            raise ValueError("false-alarm probabilities must lie in (0, 1)")
        self.false_alarm_prob = pfa
        self._log_pfa = np.log(pfa)
        s3 = math.sqrt(3.0)
        self._curvature = self.weights * (3.0 - s3) ** 4 * math.exp(s3 - 3.0) / (2.0 * s3 * self._log_pfa**2)

    def value(self, x):
        x = _as_x(x, self.size)
        return float(self.weights @ self.false_alarm_prob ** (1.0 / (1.0 + x)))

    def gradient(self, x):
        x = _as_x(x, self.size)
        t = self.false_alarm_prob ** (1.0 / (1.0 + x))
        return -self.weights * t * self._log_pfa / (1.0 + x) ** 2

    def hessian(self, x):
        x = _as_x(x, self.size)
        t = self.false_alarm_prob ** (1.0 / (1.0 + x))
        d2 = t * (self._log_pfa**2 / (1.0 + x) ** 4 + 2.0 * self._log_pfa / (1.0 + x) ** 3)
        return np.diag(self.weights * d2)

    def _minorizer_curvature(self):
        return self._curvature


class RelativeEntropySum(MeritFunction):
    """Weighted sum of the two detection-test divergences per subcarrier.

    Term k is (1-2w_k) log(1+x) + x (w_k x - (1-2w_k)) / (1+x) with balance
    w_k in [0, 1].  For w_k >= 1/2 the term is convex (tangent-line
    minorizer); otherwise its curvature is bounded below by
    -(1-2w_k)^3 / (27 (1-w_k)^2) and a quadratic minorizer applies.
    """

    is_concave = False

    def __init__(self, weights, balance):
        super().__init__(weights)
        w = np.broadcast_to(np.asarray(balance, dtype=float), (self.size,)).copy()
        if np.any((w < 0) | (w > 1)):
            raise ValueError("balance parameters must lie in [0, 1]")
        self.balance = w
        curv = np.zeros(self.size)
        low = w < 0.5
        curv[low] = (1.0 - 2.0 * w[low]) ** 3 / (54.0 * (1.0 - w[low]) ** 2)
        self._curvature = self.weights * curv

    def value(self, x):
        x = _as_x(x, self.size)
        w = self.balance
        terms = (1.0 - 2.0 * w) * np.log1p(x) + x * (w * x - (1.0 - 2.0 * w)) / (1.0 + x)
        return float(self.weights @ terms)

    def gradient(self, x):
        x = _as_x(x, self.size)
        return self.weights * x * (1.0 + self.balance * x) / (1.0 + x) ** 2

    def hessian(self, x):
        x = _as_x(x, self.size)
        return np.diag(self.weights * (1.0 - (1.0 - 2.0 * self.balance) * x) / (1.0 + x) ** 3)

    def _minorizer_curvature(self):
        return self._curvature


def merit_from_config(config, num_subcarriers):
    """Build a merit function from its config block.

    ``config`` is a dict with a ``variant`` key plus the variant's parameters;
    omitted ``weights`` default to uniform.  Recognized variants:
    ``power-mean`` (p), ``quasi-arithmetic`` (generator, a or p),
    ``mutual-info``, ``fisher-info``, ``detection-prob`` (false_alarm_prob),
    ``relative-entropy`` (balance).
    """
    cfg = dict(config)
    variant = cfg.pop("variant", None)
    weights = cfg.pop("weights", None)
    if weights is None:
        weights = np.full(num_subcarriers, 1.0 / num_subcarriers)
    if variant == "power-mean":
        return PowerMean(float(cfg.get("p", 1.0)), weights)
    if variant == "quasi-arithmetic":
        name = cfg.get("generator")
        if name == "exp-mean":
            gen = exp_mean_generator(float(cfg.get("a", 0.5)))
        elif name == "radical-mean":
            gen = radical_mean_generator(float(cfg.get("a", 2.0)))
        elif name == "log":
            gen = log_generator()
        elif name == "power":
            gen = power_generator(float(cfg.get("p", 1.0)))
        else:
            raise ValueError(f"unknown generator {name!r} (expected exp-mean, radical-mean, log, or power)")
        return QuasiArithmeticMean(gen, weights)
    if variant == "mutual-info":
        return MutualInformation(weights)
    if variant == "fisher-info":
        return FisherInformation(weights)
    if variant == "detection-prob":
        return DetectionProbability(weights, cfg.get("false_alarm_prob", 1e-4))
    if variant == "relative-entropy":
        return RelativeEntropySum(weights, cfg.get("balance", 0.0))
    raise ValueError(f"unknown merit variant {variant!r}")
