"""Exponential, Weibull, log-logistic and log-normal duration models.

All four are fitted to right-censored data by maximum likelihood. Optimisation
runs on unconstrained parameters (log rate, log shape, log sigma, mu) with
analytic gradients and Hessians; the covariance is carried back to the
natural scale by the delta method.

Parametrisations::

    Exponential  S(t) = exp(-lam t)
    Weibull      S(t) = exp(-(lam t)^alpha)
    LogLogistic  S(t) = 1 / (1 + (lam t)^alpha)
    LogNormal    S(t) = 1 - Phi((log t - mu) / sigma)
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .core import Cohort
from .errors import DegenerateDataError, InvalidInputError, NumericalError

EXPONENTIAL = "Exponential"
WEIBULL = "Weibull"
LOGLOGISTIC = "LogLogistic"
LOGNORMAL = "LogNormal"
FAMILIES = (EXPONENTIAL, WEIBULL, LOGLOGISTIC, LOGNORMAL)

PARAM_NAMES = {
    EXPONENTIAL: ("lam",),
    WEIBULL: ("lam", "alpha"),
    LOGLOGISTIC: ("lam", "alpha"),
    LOGNORMAL: ("mu", "sigma"),
}

_ALIASES = {
    "exponential": EXPONENTIAL,
    "exp": EXPONENTIAL,
    "weibull": WEIBULL,
    "loglogistic": LOGLOGISTIC,
    "log-logistic": LOGLOGISTIC,
    "lognormal": LOGNORMAL,
    "log-normal": LOGNORMAL,
}

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
DEFAULT_RESOLUTION_HOURS = 1.0 / 3600.0


def family_tag(name):
    """Canonical family tag for a case-insensitive name."""
    if name in FAMILIES:
        return name
    try:
        return _ALIASES[str(name).lower()]
    except KeyError:
        raise InvalidInputError(
            f"unknown family {name!r}; expected one of {', '.join(FAMILIES)}"
        ) from None


@dataclass(frozen=True)
class Family:
    """A distribution family together with concrete parameter values."""

    tag: str
    params: tuple

    def __post_init__(self):
        tag = family_tag(self.tag)
        params = tuple(float(p) for p in np.atleast_1d(self.params))
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "params", params)
        if len(params) != len(PARAM_NAMES[tag]):
            raise InvalidInputError(f"{tag} takes parameters {PARAM_NAMES[tag]}, got {params}")
        if not all(math.isfinite(p) for p in params):
            raise InvalidInputError("parameters must be finite")
        positive = params[1:] if tag == LOGNORMAL else params
        if any(p <= 0 for p in positive):
            raise InvalidInputError(f"{tag} parameters {params} violate positivity")

    @classmethod
    def exponential(cls, lam):
        return cls(EXPONENTIAL, (lam,))

    @classmethod
    def weibull(cls, lam, alpha):
        return cls(WEIBULL, (lam, alpha))

    @classmethod
    def loglogistic(cls, lam, alpha):
        return cls(LOGLOGISTIC, (lam, alpha))

    @classmethod
    def lognormal(cls, mu, sigma):
        return cls(LOGNORMAL, (mu, sigma))

    @property
    def names(self):
        return PARAM_NAMES[self.tag]

    def as_dict(self):
        return dict(zip(self.names, self.params))

    # log-scale functions are the primitives; everything else derives from them

    def log_survival(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            if self.tag == EXPONENTIAL:
                return -self.params[0] * t
            if self.tag == WEIBULL:
                lam, alpha = self.params
                return -((lam * t) ** alpha)
            if self.tag == LOGLOGISTIC:
                lam, alpha = self.params
                return -np.logaddexp(0.0, alpha * np.log(lam * t))
            mu, sigma = self.params
            return numerics.log_std_normal_sf((np.log(t) - mu) / sigma)

    def log_hazard(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if self.tag == EXPONENTIAL:
                return np.full(t.shape, math.log(self.params[0])) if t.ndim else math.log(self.params[0])
            if self.tag == WEIBULL:
                lam, alpha = self.params
                # (alpha - 1) * log(lam t) is exactly 0 when alpha == 1, even at t == 0
                shape_term = 0.0 if alpha == 1.0 else (alpha - 1.0) * np.log(lam * t)
                return math.log(lam * alpha) + shape_term
            if self.tag == LOGLOGISTIC:
                lam, alpha = self.params
                u = alpha * np.log(lam * t)
                return math.log(lam * alpha) + u - np.log(lam * t) - np.logaddexp(0.0, u)
            mu, sigma = self.params
            z = (np.log(t) - mu) / sigma
            return (
                -0.5 * z * z - _HALF_LOG_2PI - np.log(sigma * t) - numerics.log_std_normal_sf(z)
            )

    def survival(self, t):
        return np.exp(self.log_survival(t))

    def cum_hazard(self, t):
        return -self.log_survival(t) + 0.0

    def hazard(self, t):
        return np.exp(self.log_hazard(t))

    def log_density(self, t):
        return self.log_hazard(t) + self.log_survival(t)

    def density(self, t):
        return np.exp(self.log_density(t))

    def median(self):
        if self.tag == EXPONENTIAL:
            return math.log(2.0) / self.params[0]
        if self.tag == WEIBULL:
            return math.log(2.0) ** (1.0 / self.params[1]) / self.params[0]
        if self.tag == LOGLOGISTIC:
            return 1.0 / self.params[0]
        return math.exp(self.params[0])

    def inverse_survival(self, u):
        """Time t with S(t) = u, for u in (0, 1]."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            if self.tag == EXPONENTIAL:
                return -np.log(u) / self.params[0]
            lam_or_mu, shape = self.params
            if self.tag == WEIBULL:
                return (-np.log(u)) ** (1.0 / shape) / lam_or_mu
            if self.tag == LOGLOGISTIC:
                return ((1.0 - u) / u) ** (1.0 / shape) / lam_or_mu
        z = numerics.std_normal_quantile(np.clip(1.0 - u, 1e-300, 1.0 - 1e-16))
        return np.exp(lam_or_mu + shape * z)


def survival(family, t):
    return family.survival(t)


def hazard(family, t):
    return family.hazard(t)


def cum_hazard(family, t):
    return family.cum_hazard(t)


def _validate(t):
    if (np.asarray(t) < 0).any():
        raise InvalidInputError("durations must be non-negative")


def prepare_durations(cohort, tag, resolution=DEFAULT_RESOLUTION_HOURS):
    """Durations and event flags ready for a family's likelihood.

    Families whose density involves log t cannot take t = 0. Uncensored
    zeros become half the time resolution; censored zeros are dropped since
    they contribute log S(0) = 0.
    """
    t = np.asarray(cohort.durations, dtype=float)
    ev = np.asarray(cohort.events, dtype=bool)
    if tag == EXPONENTIAL:
        return t, ev
    zero = t <= 0
    keep = ~(zero & ~ev)
    t = np.where(zero, 0.5 * resolution, t)[keep]
    return t, ev[keep]


def log_likelihood(family, cohort, resolution=DEFAULT_RESOLUTION_HOURS):
    """Censored log-likelihood: sum of log f over events and log S over censorings."""
    if not isinstance(cohort, Cohort):
        cohort = Cohort.from_observations(cohort)
    t, ev = prepare_durations(cohort, family.tag, resolution)
    if t.size == 0:
        return 0.0
    log_s = family.log_survival(t)
    log_h = np.where(ev, family.log_hazard(np.where(ev, t, 1.0)), 0.0)
    return float(np.sum(log_s) + np.sum(log_h))


# ---------------------------------------------------------------------------
# objective in unconstrained parameters: value, gradient, Hessian


def _objective(tag, t, ev):
    e = ev.astype(float)
    log_t = np.log(t) if tag != EXPONENTIAL else None
    n_ev = e.sum()
    total = t.sum()

    if tag == EXPONENTIAL:

        def fun(x):
            a = x[0]
            lam = math.exp(a)
            return (
                n_ev * a - lam * total,
                np.array([n_ev - lam * total]),
                np.array([[-lam * total]]),
            )

        return fun

    if tag in (WEIBULL, LOGLOGISTIC):
        # l = sum e*(b - log t) + G(u),  u = alpha*(log t + a), a = log lam, b = log alpha
        sum_elogt = float(np.dot(e, log_t))

        def fun(x):
            a, b = x
            alpha = math.exp(b)
            u = alpha * (log_t + a)
            if tag == WEIBULL:
                eu = np.exp(u)
                g = e * u - eu
                g1 = e - eu
                g2 = -eu
            else:
                sig = 0.5 * (1.0 + np.tanh(0.5 * u))
                g = e * u - (1.0 + e) * np.logaddexp(0.0, u)
                g1 = e - (1.0 + e) * sig
                g2 = -(1.0 + e) * sig * (1.0 - sig)
            value = n_ev * b - sum_elogt + g.sum()
            ga = alpha * g1.sum()
            gb = n_ev + np.dot(u, g1)
            haa = alpha * alpha * g2.sum()
            hab = alpha * g1.sum() + alpha * np.dot(u, g2)
            hbb = np.dot(u, g1) + np.dot(u * u, g2)
            return value, np.array([ga, gb]), np.array([[haa, hab], [hab, hbb]])

        return fun

    # LogNormal: l = sum e*(-log t - s - c) + G(u), u = (log t - mu)/sigma, s = log sigma
    sum_elogt = float(np.dot(e, log_t))
    c = 1.0 - e

    def fun(x):
        mu, s = x
        sigma = math.exp(s)
        u = (log_t - mu) / sigma
        log_sf = numerics.log_std_normal_sf(u)
        # inverse Mills ratio phi(u) / (1 - Phi(u))
        mills = np.exp(-0.5 * u * u - _HALF_LOG_2PI - log_sf)
        g = e * (-0.5 * u * u) + c * log_sf
        g1 = -e * u - c * mills
        g2 = -e - c * mills * (mills - u)
        value = -sum_elogt - n_ev * (s + _HALF_LOG_2PI) + g.sum()
        gm = -g1.sum() / sigma
        gs = -n_ev - np.dot(u, g1)
        hmm = g2.sum() / sigma**2
        hms = (np.dot(u, g2) + g1.sum()) / sigma
        hss = np.dot(u, g1) + np.dot(u * u, g2)
        return value, np.array([gm, gs]), np.array([[hmm, hms], [hms, hss]])

    return fun


def _to_natural(tag, x):
    if tag == LOGNORMAL:
        return np.array([x[0], math.exp(x[1])])
    return np.exp(x)


def _jacobian(tag, natural):
    # d natural / d unconstrained
    if tag == LOGNORMAL:
        return np.diag([1.0, natural[1]])
    return np.diag(natural)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a maximum-likelihood fit.

    ``ci`` holds per-parameter normal-approximation bounds
    ``theta +/- z * se`` on the natural scale. ``hessian_ok`` is False when
    the observed information at the optimum was not positive definite; the
    covariance is then unreliable.
    """

    family: Family
    log_likelihood: float
    covariance: np.ndarray
    ci: tuple
    churn_count: int
    total_time: float
    n: int
    conf_level: float
    iterations_converged: bool = True
    hessian_ok: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def params(self):
        return self.family.params

    @property
    def se(self):
        return np.sqrt(np.diag(self.covariance))

    def as_dict(self):
        return {
            "family": self.family.tag,
            "params": self.family.as_dict(),
            "se": dict(zip(self.family.names, self.se.tolist())),
            "ci": {k: list(v) for k, v in zip(self.family.names, self.ci)},
            "log_likelihood": self.log_likelihood,
            "d": self.churn_count,
            "R": self.total_time,
            "n": self.n,
        }


def _counts(cohort):
    return int(np.count_nonzero(cohort.events)), float(np.sum(cohort.durations))


def _normal_ci(params, cov, conf_level):
    z = numerics.z_critical(conf_level)
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return tuple((float(p - z * s), float(p + z * s)) for p, s in zip(params, se))


def fit_exponential(cohort, conf_level=0.95):
    """Closed-form exponential fit: rate d/R with variance d/R^2."""
    d, total = _counts(cohort)
    if d == 0 or total <= 0:
        raise DegenerateDataError(
            f"exponential fit needs at least one churn and positive exposure (d={d}, R={total})"
        )
    lam = d / total
    cov = np.array([[d / total**2]])
    fam = Family.exponential(lam)
    return FitResult(
        family=fam,
        log_likelihood=d * math.log(lam) - lam * total,
        covariance=cov,
        ci=_normal_ci(fam.params, cov, conf_level),
        churn_count=d,
        total_time=total,
        n=cohort.size,
        conf_level=conf_level,
    )


def _initial(tag, t, ev, d, total):
    lam0 = d / total
    if tag == EXPONENTIAL:
        return np.array([math.log(lam0)])
    if tag in (WEIBULL, LOGLOGISTIC):
        return np.array([math.log(lam0), 0.0])
    logs = np.log(t[ev])
    sd = float(logs.std()) if logs.size > 1 else 0.0
    return np.array([float(logs.mean()), math.log(sd if sd > 0 else 1.0)])


def fit_mle(family, cohort, conf_level=0.95, resolution=DEFAULT_RESOLUTION_HOURS, tol=1e-8, max_iter=100):
    """Maximum-likelihood fit of a parametric family to a censored cohort.

    Parameters
    ----------
    family : str
        Family name (see :data:`FAMILIES`, case-insensitive).
    cohort : Cohort
    conf_level : float
    resolution : float
        Time resolution in hours; uncensored zero durations are moved to half
        of it for families with a log t term.

    Raises
    ------
    DegenerateDataError
        Fewer churns than parameters, or no exposure.
    ConvergenceError
        Newton-Raphson did not converge.
    """
    tag = family_tag(family)
    k = len(PARAM_NAMES[tag])
    d, total = _counts(cohort)
    if d < k or total <= 0:
        raise DegenerateDataError(f"{tag} fit needs at least {k} churns and positive exposure (d={d})")
    t, ev = prepare_durations(cohort, tag, resolution)
    if tag == LOGNORMAL and np.unique(t[ev]).size < 2 and k > 1:
        raise DegenerateDataError("LogNormal fit needs at least two distinct churn times")
    fun = _objective(tag, t, ev)
    x0 = _initial(tag, t, ev, d, float(t.sum()) if tag != EXPONENTIAL else total)
    x = numerics.newton_raphson(fun, x0, tol=tol, max_iter=max_iter)
    value, _, hess = fun(x)
    info = -hess
    natural = _to_natural(tag, x)
    try:
        np.linalg.cholesky(info)
        hessian_ok = True
    except np.linalg.LinAlgError:
        hessian_ok = False
    try:
        cov_unconstrained = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise NumericalError("observed information is singular at the optimum") from None
    jac = _jacobian(tag, natural)
    cov = jac @ cov_unconstrained @ jac.T
    cov = 0.5 * (cov + cov.T)
    fam = Family(tag, tuple(natural))
    return FitResult(
        family=fam,
        log_likelihood=float(value),
        covariance=cov,
        ci=_normal_ci(fam.params, cov, conf_level),
        churn_count=d,
        total_time=total,
        n=cohort.size,
        conf_level=conf_level,
        hessian_ok=hessian_ok,
        extra={"unconstrained": x, "unconstrained_cov": cov_unconstrained},
    )
