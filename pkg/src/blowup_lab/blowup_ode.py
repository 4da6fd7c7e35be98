r"""Comparison ODE for the averaged functional: integration, blow-up detection, lifespan fits.

The minimal dynamics saturating the differential inequality are

.. math::

    X'' = a^2 X + \frac{C X^2}{D\, e^{a t} (t + R_0)^{(n-1)/2}} .

With :math:`X = e^{a t} Z` the exponential cancels exactly,

.. math::

    Z'' + 2 a Z' = \frac{C}{D} \frac{Z^2}{(t + R_0)^{(n-1)/2}},

so the solver integrates ``(Z, Z')``. This is what lets an n = 3 run reach
lifespans like ``e^{10}`` without ``X`` overflowing.
"""

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import simpson, trapezoid
from scipy.interpolate import CubicHermiteSpline


class NumericalFailure(RuntimeError):
    """The integrator produced a non-finite state before reaching blow-up."""


class SweepError(RuntimeError):
    """One or more runs in a lifespan sweep failed."""

    def __init__(self, message, offending):
        super().__init__(message)
        self.offending = offending


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class OdeParams:
    """Parameters of the comparison ODE.

    ``X(0) = split * eps * x0`` and ``X'(0) = (1 - split) * eps * x0`` so that
    ``X(0) + X'(0) = eps * x0``.
    """

    n: int = 3
    C: float = 1.0
    R0: float = 1.0
    a: float = 1.0
    domain_factor: float = 1.0
    eps: float = 0.1
    x0: float = 1.0
    split: float = 1.0

    def validate(self):
        errors = []
        if self.n not in (1, 2, 3):
            errors.append("n must be 1..3")
        if not self.C >= 0:
            errors.append("C must be >= 0")
        if not self.R0 >= 1:
            errors.append("R0 must be >= 1")
        if not self.a >= 1:
            errors.append("a must be >= 1")
        if not self.domain_factor > 0:
            errors.append("domain_factor must be > 0")
        if not self.eps > 0:
            errors.append("eps must be > 0")
        if not self.x0 >= 0:
            errors.append("x0 must be >= 0")
        if not 0 <= self.split <= 1:
            errors.append("split must lie in [0, 1]")
        vals = (self.C, self.R0, self.a, self.domain_factor, self.eps, self.x0)
        if not all(math.isfinite(v) for v in vals):
            errors.append("all constants must be finite")
        if errors:
            raise ValueError("; ".join(errors))
        return self

    @property
    def decay_power(self):
        return 0.5 * (self.n - 1)

    def initial_X(self):
        amp = self.eps * self.x0
        return self.split * amp, (1.0 - self.split) * amp


@dataclass
class BlowupOutcome:
    """Result of one integration; the trajectory is stored as ``(t, Z, Z')``."""

    blew_up: bool
    t_blow: float
    reason: str  # "threshold", "step-collapse" or "horizon"
    t: np.ndarray
    Z: np.ndarray
    dZ: np.ndarray
    a: float = 1.0
    steps: int = 0

    @property
    def log_X(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.a * self.t + np.log(self.Z)

    @property
    def X(self):
        with np.errstate(over="ignore"):
            return np.exp(self.a * self.t) * self.Z

    @property
    def dX(self):
        with np.errstate(over="ignore"):
            return np.exp(self.a * self.t) * (self.a * self.Z + self.dZ)


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = _A[6] + (0.0,)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

RTOL = 1e-10
ATOL = 1e-12
COLLAPSE = 1e-12


def _dopri(rhs, t0, y0, horizon, above, rtol=RTOL, atol=ATOL, max_step=math.inf, h0=1e-3):
    """Adaptive DP54 for a two-component state.

    ``above(t, y)`` reports whether the state is past the blow-up threshold.
    Returns ``(ts, ys, reason)``; reason is ``step-collapse`` only when the
    threshold was also exceeded.
    """
    t = t0
    y = (float(y0[0]), float(y0[1]))
    ts = [t]
    ys = [y]
    k1 = rhs(t, y)
    h = min(h0, max_step, horizon - t0)
    while True:
        if t >= horizon:
            return ts, ys, "horizon"
        h = min(h, horizon - t, max_step)
        ks = [k1]
        for i in range(1, 7):
            ai = _A[i]
            yi0 = y[0] + h * sum(ai[j] * ks[j][0] for j in range(i))
            yi1 = y[1] + h * sum(ai[j] * ks[j][1] for j in range(i))
            ks.append(rhs(t + _C[i] * h, (yi0, yi1)))
        ynew = (
            y[0] + h * sum(_B5[j] * ks[j][0] for j in range(6)),
            y[1] + h * sum(_B5[j] * ks[j][1] for j in range(6)),
        )
        if not (math.isfinite(ynew[0]) and math.isfinite(ynew[1])):
            err = math.inf
        else:
            e0 = h * sum(_E[j] * ks[j][0] for j in range(7))
            e1 = h * sum(_E[j] * ks[j][1] for j in range(7))
            s0 = atol + rtol * max(abs(y[0]), abs(ynew[0]))
            s1 = atol + rtol * max(abs(y[1]), abs(ynew[1]))
            err = math.sqrt(0.5 * ((e0 / s0) ** 2 + (e1 / s1) ** 2))
        if err <= 1.0:
            t = t + h
            y = ynew
            k1 = ks[6]
            ts.append(t)
            ys.append(y)
            factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h *= factor
        else:
            h *= 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
        if h < COLLAPSE * (abs(t) + 1.0):
            if above(t, y):
                return ts, ys, "step-collapse"
            if not (math.isfinite(y[0]) and math.isfinite(y[1])):
                raise NumericalFailure(f"non-finite state at t={t}")
            raise NumericalFailure(f"step size collapsed at t={t} below the blow-up threshold")


def _extrapolate_pole(ts, zs):
    # near a double pole Z^{-1/2} is linear in t; secant through the last two samples
    (t1, z1), (t2, z2) = (ts[-2], zs[-2]), (ts[-1], zs[-1])
    if z1 <= 0 or z2 <= 0 or z2 <= z1:
        return t2
    g1, g2 = z1 ** -0.5, z2 ** -0.5
    return t2 + g2 * (t2 - t1) / (g1 - g2)


def integrate(params, horizon=1e6, threshold=1e9, rtol=RTOL, atol=ATOL, max_step=math.inf):
    """Integrate the minimal comparison ODE and detect blow-up.

    Blow-up requires both ``X > threshold`` and a collapse of the step size
    below ``1e-12 (t + 1)``; the blow-up time is then extrapolated from the
    last step assuming the double-pole profile of a Riccati singularity.
    """
    params.validate()
    X0, V0 = params.initial_X()
    if not threshold > X0:
        raise ValueError("threshold must exceed X(0)")
    a = params.a
    k = params.C / params.domain_factor
    p = params.decay_power
    R0 = params.R0
    log_thr = math.log(threshold)

    if p == 0:
        def rhs(t, y):
            return (y[1], -2.0 * a * y[1] + k * y[0] * y[0])
    else:
        def rhs(t, y):
            return (y[1], -2.0 * a * y[1] + k * y[0] * y[0] * (t + R0) ** -p)

    def above(t, y):
        return y[0] > 0 and a * t + math.log(y[0]) > log_thr

    ts, ys, reason = _dopri(rhs, 0.0, (X0, V0 - a * X0), horizon, above, rtol, atol, max_step)
    t = np.array(ts)
    ya = np.array(ys)
    if reason == "horizon":
        return BlowupOutcome(False, float(horizon), reason, t, ya[:, 0], ya[:, 1], a, len(ts) - 1)
    t_blow = _extrapolate_pole(ts, ya[:, 0])
    return BlowupOutcome(True, float(t_blow), reason, t, ya[:, 0], ya[:, 1], a, len(ts) - 1)


def integrate_riccati(X0, V0, horizon=10.0, threshold=1e9, rtol=RTOL, atol=ATOL):
    """Pure ``X'' = X**2``; the exact solution ``6 (T - t)**-2`` is the oracle."""

    def rhs(t, y):
        return (y[1], y[0] * y[0])

    def above(t, y):
        return y[0] > threshold

    ts, ys, reason = _dopri(rhs, 0.0, (X0, V0), horizon, above, rtol, atol)
    t = np.array(ts)
    ya = np.array(ys)
    if reason == "horizon":
        return BlowupOutcome(False, float(horizon), reason, t, ya[:, 0], ya[:, 1], 0.0, len(ts) - 1)
    return BlowupOutcome(True, float(_extrapolate_pole(ts, ya[:, 0])), reason, t, ya[:, 0], ya[:, 1], 0.0, len(ts) - 1)


# -- lifespan sweeps ----------------------------------------------------------


@dataclass
class LifespanFit:
    epsilons: list
    lifespans: list
    model: str  # "power" (T ~ K eps^p) or "exp" (log T ~ K / eps + c)
    params: dict
    r_squared: float
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def exponent(self):
        return self.params["exponent"] if self.model == "power" else None


def fit_lifespan(epsilons, lifespans, model):
    """Least-squares fit of the lifespan law; returns ``(params, r_squared)``."""
    eps = np.asarray(epsilons, dtype=float)
    T = np.asarray(lifespans, dtype=float)
    if eps.size != T.size or eps.size < 4:
        raise ValueError("need at least 4 (eps, T) pairs of equal length")
    logT = np.log(T)
    if model == "power":
        xs = np.log(eps)
    elif model == "exp":
        xs = 1.0 / eps
    else:
        raise ValueError(f"unknown model {model!r}")
    slope, intercept = np.polyfit(xs, logT, 1)
    resid = logT - (slope * xs + intercept)
    ss_tot = float(np.sum((logT - logT.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(1.0, max(0.0, r2))
    if model == "power":
        return {"exponent": float(slope), "K": float(math.exp(intercept))}, r2
    return {"K": float(slope), "log_prefactor": float(intercept)}, r2


def default_model(n):
    return "exp" if n == 3 else "power"


def _sweep_one(job):
    params, horizon, threshold = job
    try:
        return integrate(params, horizon=horizon, threshold=threshold)
    except NumericalFailure as exc:
        return exc


def lifespan_sweep(template, epsilons, model=None, horizon=1e6, threshold=1e9, jobs=1):
    """Run ``integrate`` for each epsilon and fit the lifespan law.

    Runs are independent; with ``jobs > 1`` they execute in worker processes
    and are merged back in the order of ``epsilons``.
    """
    eps = [float(e) for e in epsilons]
    if len(eps) < 4:
        raise ValueError("need at least 4 epsilons")
    if max(eps) / min(eps) < 4:
        raise ValueError("epsilons must span at least a factor of 4")
    model = model or default_model(template.n)
    jobs_in = [(replace(template, eps=e), horizon, threshold) for e in eps]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_one, jobs_in))
    else:
        results = [_sweep_one(j) for j in jobs_in]
    bad = [e for e, r in zip(eps, results) if isinstance(r, Exception) or not r.blew_up]
    if bad:
        raise SweepError(f"runs failed or did not blow up for eps={bad}", bad)
    T = [r.t_blow for r in results]
    fit_params, r2 = fit_lifespan(eps, T, model)
    return LifespanFit(eps, T, model, fit_params, r2, results)


# -- cutoff and the logarithmic change of variables ---------------------------


def _glue(x):
    # exp(-1/x) for x > 0 and its first two derivatives
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    f = np.where(pos, np.exp(-1.0 / xs), 0.0)
    f1 = np.where(pos, f / xs ** 2, 0.0)
    f2 = np.where(pos, f * (1.0 / xs ** 4 - 2.0 / xs ** 3), 0.0)
    return f, f1, f2


class CutoffFunction:
    """Smooth cutoff: 1 below 1/8, 0 above 7/8, built from the ``exp(-1/x)`` glue."""

    lo = 1.0 / 8.0
    hi = 7.0 / 8.0

    def _step(self, u):
        f, f1, f2 = _glue(u)
        g, g1, g2 = _glue(1.0 - u)
        den = f + g
        S = f / den
        N = f1 * g + f * g1
        S1 = N / den ** 2
        dden = f1 - g1
        dN = f2 * g - f * g2
        S2 = dN / den ** 2 - 2.0 * N * dden / den ** 3
        return S, S1, S2

    def derivatives(self, tau):
        """Return ``(chi, chi', chi'')`` at ``tau``."""
        tau = np.asarray(tau, dtype=float)
        width = self.hi - self.lo
        u = (self.hi - tau) / width
        S, S1, S2 = self._step(u)
        return S, -S1 / width, S2 / width ** 2

    def __call__(self, tau):
        return self.derivatives(tau)[0]


CHI = CutoffFunction()


@dataclass
class ChangeOfVariablesReport:
    residual: float
    samples: int
    tau: np.ndarray = field(repr=False)
    lhs: np.ndarray = field(repr=False)
    rhs: np.ndarray = field(repr=False)


def change_of_variables_check(outcome, params, window=0.9, min_samples=100):
    """Check the trajectory against the equation in ``tau = ln(t + R0)``.

    In that variable the ODE reads ``d/dtau(Z_t) + 2 a Z_tau = (C/D) Z^2
    e^{(1-p) tau}`` with ``Z_t = e^{-tau} Z_tau``; for n = 3, R0 = 1, a = 1 this is
    ``d/dtau(e^{-tau} Z_tau) + 2 Z_tau = C Z^2``. ``d/dtau(Z_t)`` is taken by
    finite differences of the stored samples, so the residual measures how
    well the sampled trajectory obeys the transformed equation.
    """
    t_end = window * outcome.t_blow if outcome.blew_up else outcome.t[-1]
    keep = outcome.t <= t_end
    if keep.sum() < min_samples:
        raise InsufficientData(f"only {int(keep.sum())} samples before blow-up (need {min_samples})")
    t = outcome.t[keep]
    Z = outcome.Z[keep]
    Zt = outcome.dZ[keep]
    tau = np.log(t + params.R0)
    Ztau = (t + params.R0) * Zt
    dZt = np.gradient(Zt, tau, edge_order=2)
    k = params.C / params.domain_factor
    lhs = dZt + 2.0 * params.a * Ztau
    rhs = k * Z * Z * np.exp((1.0 - params.decay_power) * tau)
    scale = max(np.max(np.abs(dZt)), np.max(np.abs(2.0 * params.a * Ztau)), np.max(np.abs(rhs)))
    if scale == 0:
        res = 0.0
    else:
        res = float(np.max(np.abs(lhs - rhs)) / scale)
    return ChangeOfVariablesReport(res, int(keep.sum()), tau, lhs, rhs)


def resample_tau(outcome, params, T, panels):
    """Z on a uniform tau grid over ``[0, T]`` by cubic Hermite interpolation in t."""
    spline = CubicHermiteSpline(outcome.t, outcome.Z, outcome.dZ)
    tau = np.linspace(0.0, T, panels + 1)
    t = np.exp(tau) - params.R0
    if t[-1] > outcome.t[-1]:
        raise InsufficientData("tau window extends beyond the trajectory")
    Z = spline(t)
    Ztau = (t + params.R0) * spline(t, 1)
    return tau, Z, Ztau


@dataclass
class WeakFormReport:
    four_terms: tuple
    boundary: float  # Z'(0) + 2 Z(0)
    nonlinear: float  # C * int chi^4 Z^2
    gap: float  # sum(four_terms) - (boundary + nonlinear), e^{-tau} form
    gap_plus: float  # same with e^{+tau} in place of e^{-tau}
    ibp_residual: float = math.nan
    cs_constant: float = math.nan
    exact_variant: str = ""


def _simpson(y, tau):
    return float(simpson(y, x=tau))


def weak_form_check(tau, Z, T, C, dZ=None, d2Z=None, dZ0=None):
    """Both sides of the cutoff-weighted identity on ``[0, T]`` (uniform tau grid).

    Left side: the four boundary-free integrals obtained by integrating
    ``(d/dtau(e^{-tau} Z') + 2 Z') chi^4(tau/T)`` by parts; right side:
    ``Z'(0) + 2 Z(0) + C int chi^4 Z^2``. The same bookkeeping is repeated with
    ``e^{+tau}`` so the two readings of the weight can be compared.
    When ``dZ`` and ``d2Z`` are supplied the strong form is integrated
    directly and ``ibp_residual`` checks the integration by parts itself.
    """
    tau = np.asarray(tau, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if tau.size < 3 or tau.size % 2 == 0:
        raise ValueError("Simpson rule needs an odd number (>= 3) of samples")
    chi, d1, d2 = CHI.derivatives(tau / T)
    em = np.exp(-tau)
    ep = np.exp(tau)

    def terms(w, sign):
        return (
            sign * 4.0 * _simpson(w * Z * chi ** 3 * d1, tau) / T,
            12.0 * _simpson(w * Z * chi ** 2 * d1 ** 2, tau) / T ** 2,
            4.0 * _simpson(w * Z * chi ** 3 * d2, tau) / T ** 2,
            -8.0 * _simpson(Z * chi ** 3 * d1, tau) / T,
        )

    T = float(T)
    four = tuple(float(v) for v in terms(em, -1.0))
    four_plus = tuple(float(v) for v in terms(ep, 1.0))
    if dZ0 is None:
        dZ0 = float(dZ[0]) if dZ is not None else float(np.gradient(Z, tau, edge_order=2)[0])
    boundary = float(dZ0) + 2.0 * float(Z[0])
    quad = chi ** 4 * Z * Z
    nonlinear = C * _simpson(quad, tau)
    if abs(_simpson(quad, tau) - trapezoid(quad, x=tau)) > 1e-3 * max(abs(_simpson(quad, tau)), 1e-300):
        warnings.warn("Simpson and trapezoid disagree; input may be under-resolved or non-smooth")
    gap = sum(four) - (boundary + nonlinear)
    gap_plus = sum(four_plus) - (boundary + nonlinear)
    ibp = math.nan
    if dZ is not None and d2Z is not None:
        strong = _simpson((em * (np.asarray(d2Z) - np.asarray(dZ)) + 2.0 * np.asarray(dZ)) * chi ** 4, tau)
        ibp = float(strong - (sum(four) - boundary))
    l2 = math.sqrt(max(_simpson(quad, tau), 0.0))
    cs = float(abs(sum(four)) / ((T ** -1.5 + T ** -0.5) * l2)) if l2 > 0 else math.nan
    exact = "e^{-tau}" if abs(gap) <= abs(gap_plus) else "e^{+tau}"
    return WeakFormReport(four, boundary, nonlinear, gap, gap_plus, ibp, cs, exact)
