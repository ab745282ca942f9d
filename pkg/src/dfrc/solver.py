"""Feasible-start log-barrier solver for smooth concave maximization.

Solves problems of the form

    maximize f(x)   subject to   x^T Q_i x + 2 q_i^T x + c_i <= 0   (Q_i PSD)
                                 a_j^T x + b_j <= 0
                                 x_e = v_e                           (pins)

with f concave and twice differentiable, over a real vector x.  Complex code
vectors are embedded into reals by :func:`lift_vector` / :func:`lift_hermitian`
so Hermitian quadratic forms become symmetric PSD forms of the stacked
real/imaginary parts.

The method is a standard barrier path: damped Newton with backtracking on
t*f(x) + sum_i log(-g_i(x)), with the barrier weight increased tenfold per
stage until the duality-gap proxy m/t drops below the requested tolerance.
Every iterate is strictly feasible.  A start sitting numerically on a
constraint boundary (routine when warm-starting from a previous optimizer
pass) is absorbed by relaxing that constraint by at most 1e-9 of its scale;
constraints marked non-relaxable (sign bounds of domain-restricted
variables) are never shifted.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .merit import DomainError, SmoothOracle

__all__ = [
    "InfeasibleStartError",
    "LinearConstraint",
    "QuadraticConstraint",
    "EqualityPin",
    "ConvexProgram",
    "SolveReport",
    "lift_hermitian",
    "lift_vector",
    "unlift_vector",
    "solve",
]

log = logging.getLogger(__name__)

_RELAX_TRIGGER = 1e-10  # start slack below trigger*scale gets nudged
_RELAX_CAP = 1e-9  # largest allowed shift, in units of the constraint scale
_NEWTON_CAP = 60
_DECREMENT_TOL = 1e-9
_ARMIJO = 0.01
_SHRINK = 0.5


class InfeasibleStartError(RuntimeError):
    """The supplied start violates a constraint by more than the relax budget."""


def lift_vector(u):
    """Complex n-vector -> real 2n-vector (Re; Im)."""
    u = np.asarray(u)
    return np.concatenate([u.real, u.imag])


def unlift_vector(x):
    """Inverse of :func:`lift_vector`."""
    x = np.asarray(x, dtype=float)
    n = x.size // 2
    return x[:n] + 1j * x[n:]


def lift_hermitian(a, tol=1e-10):
    """Hermitian form -> symmetric real form preserving u^H A u = x^T A~ x.

    With A = R + jS (R symmetric, S antisymmetric) the lift is
    [[R, -S], [S, R]]; it is PSD exactly when A is.
    """
    a = np.asarray(a)
    scale = np.abs(a).max()
    if scale > 0 and np.abs(a - a.conj().T).max() > tol * scale:
        raise ValueError("lift_hermitian expects a Hermitian matrix")
    r, s = a.real, a.imag
    top = np.hstack([r, -s])
    bot = np.hstack([s, r])
    lifted = np.vstack([top, bot])
    return 0.5 * (lifted + lifted.T)


@dataclass(frozen=True)
class QuadraticConstraint:
    """x^T Q x + 2 q^T x + c <= 0 with Q symmetric PSD (Q may be None for linear)."""

    quad: np.ndarray
    lin: np.ndarray
    const: float
    name: str = "quad"
    scale: float = 1.0
    relaxable: bool = True


@dataclass(frozen=True)
class LinearConstraint:
    """a^T x + b <= 0."""

    lin: np.ndarray
    const: float
    name: str = "lin"
    scale: float = 1.0
    relaxable: bool = True


@dataclass(frozen=True)
class EqualityPin:
    index: int
    value: float


@dataclass
class ConvexProgram:
    dimension: int
    objective: SmoothOracle
    quadratics: list = field(default_factory=list)
    linears: list = field(default_factory=list)
    pins: list = field(default_factory=list)
    start: np.ndarray = None


@dataclass
class SolveReport:
    x: np.ndarray
    objective: float
    outer_iterations: int
    newton_steps: int
    max_violation: float  # against the unrelaxed constraints, in scale units
    gap: float  # m / t at exit
    stalled: bool = False
    relaxed: int = 0


class _Folded:
    """Program with pinned coordinates eliminated and constraints stacked."""

    def __init__(self, program):
        n = program.dimension
        pins = {p.index: float(p.value) for p in program.pins}
        if any(not 0 <= i < n for i in pins):
            raise ValueError("pin index out of range")
        self.free = np.array([i for i in range(n) if i not in pins], dtype=int)
        self.full_dim = n
        base = np.zeros(n)
        for i, v in pins.items():
            base[i] = v
        self.base = base
        self.nf = self.free.size
        obj = program.objective

        def embed(xr):
            z = base.copy()
            z[self.free] = xr
            return z

        self.embed = embed
        self.value = lambda xr: float(obj.value(embed(xr)))
        self.gradient = lambda xr: np.asarray(obj.gradient(embed(xr)), dtype=float)[self.free]
        self.hessian = lambda xr: np.asarray(obj.hessian(embed(xr)), dtype=float)[np.ix_(self.free, self.free)]

        qs, q_lin, q_const = [], [], []
        self.q_meta, self.l_meta = [], []
        for con in program.quadratics:
            big_q = np.asarray(con.quad, dtype=float)
            big_l = np.asarray(con.lin, dtype=float)
            qf = big_q[np.ix_(self.free, self.free)]
            lf = big_l[self.free] + big_q[np.ix_(self.free, np.arange(n))] @ base
            cf = con.const + 2.0 * big_l @ base + base @ big_q @ base
            qs.append(qf)
            q_lin.append(lf)
            q_const.append(cf)
            self.q_meta.append(con)
        self.qstack = np.array(qs) if qs else np.zeros((0, self.nf, self.nf))
        self.qlin = np.array(q_lin) if q_lin else np.zeros((0, self.nf))
        self.qconst = np.array(q_const) if q_const else np.zeros(0)

        a_rows, b_vals = [], []
        for con in program.linears:
            big_a = np.asarray(con.lin, dtype=float)
            a_rows.append(big_a[self.free])
            b_vals.append(con.const + big_a @ base)
            self.l_meta.append(con)
        self.amat = np.array(a_rows) if a_rows else np.zeros((0, self.nf))
        self.bvec = np.array(b_vals) if b_vals else np.zeros(0)
        self.nq = self.qstack.shape[0]
        self.nl = self.amat.shape[0]
        self.m = self.nq + self.nl
        self.scales = np.array([c.scale for c in self.q_meta] + [c.scale for c in self.l_meta], dtype=float)
        self.relaxable = np.array([c.relaxable for c in self.q_meta] + [c.relaxable for c in self.l_meta], dtype=bool)
        self.names = [c.name for c in self.q_meta] + [c.name for c in self.l_meta]

    def constraints(self, xr):
        """Values g_i(xr) stacked quadratics-then-linears."""
        if self.nq:
            qx = self.qstack @ xr
            gq = np.einsum("i,qi->q", xr, qx) + 2.0 * (self.qlin @ xr) + self.qconst
        else:
            qx = np.zeros((0, self.nf))
            gq = np.zeros(0)
        gl = self.amat @ xr + self.bvec if self.nl else np.zeros(0)
        return np.concatenate([gq, gl]), qx

    def constraint_grads(self, xr, qx):
        rows = []
        if self.nq:
            rows.append(2.0 * (qx + self.qlin))
        if self.nl:
            rows.append(self.amat)
        if rows:
            return np.vstack(rows)
        return np.zeros((0, self.nf))


def _line_objective(folded, xr, direction):
    """Per-constraint coefficients of g_i(xr + alpha d) = g + alpha gd + alpha^2 dQd."""
    g, qx = folded.constraints(xr)
    if folded.nq:
        qd = folded.qstack @ direction
        gd_q = 2.0 * (np.einsum("i,qi->q", direction, qx) + folded.qlin @ direction)
        dqd = np.einsum("i,qi->q", direction, qd)
    else:
        gd_q, dqd = np.zeros(0), np.zeros(0)
    gd_l = folded.amat @ direction if folded.nl else np.zeros(0)
    gd = np.concatenate([gd_q, gd_l])
    curv = np.concatenate([dqd, np.zeros(folded.nl)])
    return g, gd, curv


def solve(program, tol=1e-7, max_stages=40, log_trace=False):
    """Run the barrier path on ``program``; see the module docstring.

    Returns a :class:`SolveReport` whose ``x`` is strictly feasible for the
    (possibly hairline-relaxed) constraints and within ``tol`` of optimal in
    the duality-gap proxy.  Raises :class:`InfeasibleStartError` when the
    start violates a constraint beyond the relax budget.
    """
    folded = _Folded(program)
    if program.start is None:
        raise ValueError("a strictly feasible start is required")
    x = np.asarray(program.start, dtype=float)[folded.free].copy()
    f0 = folded.value(x)

    # absorb boundary contact at the start
    g, _ = folded.constraints(x)
    relaxed = 0
    if folded.m:
        slack = -g
        margin = _RELAX_TRIGGER * folded.scales
        for i in np.flatnonzero(slack < margin):
            shift = margin[i] - slack[i]
            if not folded.relaxable[i] or shift > _RELAX_CAP * folded.scales[i]:
                raise InfeasibleStartError(
                    f"constraint {folded.names[i]!r} violated at the start by {-slack[i]:.3e} (scale {folded.scales[i]:.3e})"
                )
            if i < folded.nq:
                folded.qconst[i] -= shift
            else:
                folded.bvec[i - folded.nq] -= shift
            relaxed += 1

    if folded.m == 0:
        # unconstrained concave maximization: plain damped Newton
        x, steps = _newton(folded, x, t=1.0, barrier=False)
        fx = folded.value(x)
        return SolveReport(folded.embed(x), fx, 1, steps, 0.0, 0.0, relaxed=relaxed)

    t = 1.0
    total_steps = 0
    stages = 0
    stalled = False
    for _ in range(max_stages):
        stages += 1
        x, steps = _newton(folded, x, t)
        total_steps += steps
        if steps < 0:  # line search died; keep best iterate
            total_steps -= steps
            stalled = True
            break
        if folded.m / t <= tol:
            break
        t *= 10.0
    gap = folded.m / t
    fx = folded.value(x)
    if fx < f0:  # concave path should never end below the start; guard float noise
        x = np.asarray(program.start, dtype=float)[folded.free].copy()
        fx = f0
    g, _ = folded.constraints(x)
    violation = float(np.max(np.maximum(g, 0.0) / folded.scales)) if folded.m else 0.0
    if log_trace:
        log.debug("solve: %d stages, %d newton steps, gap %.2e, violation %.2e", stages, total_steps, gap, violation)
    return SolveReport(folded.embed(x), fx, stages, total_steps, violation, gap, stalled=stalled, relaxed=relaxed)


def _psi(folded, xr, t, barrier=True):
    try:
        val = t * folded.value(xr)
    except (DomainError, FloatingPointError, ValueError):
        return -np.inf, None
    if not np.isfinite(val):
        return -np.inf, None
    if not barrier or folded.m == 0:
        return val, None
    g, qx = folded.constraints(xr)
    s = -g
    if np.any(s <= 0.0):
        return -np.inf, None
    return val + float(np.sum(np.log(s))), (g, qx, s)


def _newton(folded, x, t, barrier=True):
    """Damped Newton on the barrier-weighted objective; returns (x, steps).

    A negative step count signals a dead line search (caller treats the
    current iterate as a stall point).
    """
    psi, aux = _psi(folded, x, t, barrier)
    if aux is None and barrier and folded.m:
        # the start must be strictly feasible; caller guarantees it
        raise InfeasibleStartError("interior point lost (numerical)")
    steps = 0
    for _ in range(_NEWTON_CAP):
        grad_f = folded.gradient(x)
        hess_f = folded.hessian(x)
        if barrier and folded.m:
            g, qx, s = aux if aux is not None else (None, None, None)
            if g is None:
                g, qx = folded.constraints(x)
                s = -g
            grads = folded.constraint_grads(x, qx)
            grad = t * grad_f - grads.T @ (1.0 / s)
            neg_h = -t * hess_f
            if folded.nq:
                neg_h += np.tensordot(2.0 / s[: folded.nq], folded.qstack, axes=1)
            scaled = grads / s[:, None]
            neg_h += scaled.T @ scaled
        else:
            grad = t * grad_f
            neg_h = -t * hess_f
        direction = _solve_step(neg_h, grad)
        if direction is None:
            return x, -max(steps, 1)
        decrement = float(grad @ direction)
        if decrement <= 2.0 * _DECREMENT_TOL:
            return x, steps
        # backtracking: stay strictly feasible, then Armijo on psi
        g_now, gd, curv = _line_objective(folded, x, direction, qx if (barrier and folded.m and folded.nq) else np.zeros((0, folded.nf)))
        alpha = 1.0
        accepted = False
        while alpha > 1e-14:
            if barrier and folded.m:
                g_new = g_now + alpha * gd + alpha**2 * curv
                if np.any(g_new >= 0.0):
                    alpha *= _SHRINK
                    continue
            psi_new, aux_new = _psi(folded, x + alpha * direction, t, barrier)
            if psi_new >= psi + _ARMIJO * alpha * decrement and np.isfinite(psi_new):
                x = x + alpha * direction
                psi, aux = psi_new, aux_new
                accepted = True
                break
            alpha *= _SHRINK
        steps += 1
        if not accepted:
            return x, -steps
    return x, steps


def _solve_step(neg_h, grad):
    """Solve neg_h d = grad with escalating diagonal regularization."""
    n = neg_h.shape[0]
    reg = 0.0
    trace_scale = max(float(np.trace(neg_h)) / n, 1e-300)
    for attempt in range(6):
        try:
            c, low = scipy.linalg.cho_factor(neg_h + reg * np.eye(n), lower=True, check_finite=False)
            return scipy.linalg.cho_solve((c, low), grad, check_finite=False)
        except scipy.linalg.LinAlgError:
            reg = trace_scale * 10.0 ** (-10 + 2 * attempt)
    return None
