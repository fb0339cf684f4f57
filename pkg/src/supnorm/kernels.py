"""Special-function layer: digamma combinations, Chebyshev and Stirling
inequalities, the hypergeometric resolvent kernel, the difference kernel, the
heat kernel, and the integral transform tying them together.

All kernel integrals share the same endpoint structure: an integrable
1/sqrt(cosh r - cosh rho) singularity at r = rho, removed by the substitution
r = rho + u^2, and an exponentially decaying tail handled by fixed-width
panels with a stop rule.  Integrands are assembled in log space because the
Chebyshev factor grows like e^{k r} while the exponential weights shrink
faster, and the two must cancel before exponentiation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import IntegrationWarning, quad
from scipy.special import digamma as _scipy_digamma
from scipy.special import gammaln

__all__ = [
    "AccuracyError",
    "ConsistencyError",
    "digamma",
    "digamma_combo",
    "r_factor",
    "chebyshev_T2k",
    "GammaRatio",
    "gamma_ratio_bound",
    "resolvent_G",
    "g_k_difference",
    "heat_kernel",
    "resolvent_via_heat",
    "integrated_exponential_lhs",
    "parabolic_sum_bound",
    "faddeev_transfer",
    "CheckResult",
    "run_kernel_checks",
]

_LOG2 = math.log(2.0)
_SERIES_GUARD = 10**6
#: A panel whose contribution stays below this fraction of the running
#: integral for five consecutive panels terminates a tail integration.
_PANEL_TINY = 1e-20
_PANEL_QUIET = 5


class AccuracyError(RuntimeError):
    """A quadrature or series did not reach its accuracy target."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ConsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""

    def __init__(self, message: str, first: float, second: float):
        super().__init__(message)
        self.first = first
        self.second = second


# ---------------------------------------------------------------------------
# Elementary pieces


def digamma(x: float) -> float:
    if x <= 0.0:
        raise ValueError(f"digamma is restricted to positive arguments here, got {x}")
    return float(_scipy_digamma(x))


def digamma_combo(k: int, eps: float) -> float:
    """psi(2k+e) + psi(e) - psi(2k+1+e) - psi(1+e) in closed form.

    Two applications of the recurrence psi(x+1) - psi(x) = 1/x collapse the
    four terms to -2(k+e)/(e(2k+e)); the closed form is cross-checked against
    the four-call evaluation before being returned.
    """
    if k < 1 or eps <= 0.0:
        raise ValueError(f"need k >= 1 and eps > 0, got k={k}, eps={eps}")
    value = -2.0 * (k + eps) / (eps * (2.0 * k + eps))
    direct = (
        digamma(2.0 * k + eps) + digamma(eps) - digamma(2.0 * k + 1.0 + eps) - digamma(1.0 + eps)
    )
    if abs(value - direct) > 1e-9 * abs(value):
        raise ConsistencyError(
            f"digamma combination mismatch at k={k}, eps={eps}", value, direct
        )
    return value


def r_factor(k: int, eps: float) -> float:
    """Spectral normalization 2(k+e) / (e (2k+e)(2k-1+e)(1+e))."""
    if k < 1 or eps <= 0.0:
        raise ValueError(f"need k >= 1 and eps > 0, got k={k}, eps={eps}")
    return 2.0 * (k + eps) / (eps * (2.0 * k + eps) * (2.0 * k - 1.0 + eps) * (1.0 + eps))


def chebyshev_T2k(k: int, x: float) -> float:
    """Chebyshev value T_{2k}(x) = cosh(2k arccosh x) for x >= 1."""
    if x < 1.0:
        raise ValueError(f"Chebyshev argument must be >= 1, got {x}")
    return math.cosh(2.0 * k * math.acosh(x))


@dataclass(frozen=True)
class GammaRatio:
    ratio: float
    bound: float


def gamma_ratio_bound(Z: float) -> GammaRatio:
    """Gamma(Z-1/2)/Gamma(Z) with its effective Stirling bound e^{5/4}/sqrt(Z)."""
    if Z < 1.0:
        raise ValueError(f"Stirling ratio bound requires Z >= 1, got {Z}")
    ratio = math.exp(gammaln(Z - 0.5) - gammaln(Z))
    bound = math.exp(1.25) / math.sqrt(Z)
    if ratio > bound:
        raise ConsistencyError(f"Stirling bound violated at Z={Z}", ratio, bound)
    return GammaRatio(ratio=ratio, bound=bound)


def parabolic_sum_bound(k: int, eps: float) -> float:
    """Closed bound k e^{5/4} / (sqrt(pi) sqrt(k+eps)) for the translation sum."""
    if k < 1 or eps <= 0.0:
        raise ValueError(f"need k >= 1 and eps > 0, got k={k}, eps={eps}")
    return k * math.exp(1.25) / (math.sqrt(math.pi) * math.sqrt(k + eps))


def faddeev_transfer(y0: float, y: float, d1: float, d2: float) -> float:
    """Transfer factor (64/15)^{d2-d1-1} y0^{-2 d1-2} y^{-2 d2+4 d1+4}.

    Multiplying the exponent-(d1+1) sum at height y0 by this factor dominates
    the exponent-d2 sum at height y, provided y >= 2 y0 and d2 >= d1 + 1.
    """
    if not y0 > 0.0:
        raise ValueError(f"need y0 > 0, got {y0}")
    if y < 2.0 * y0:
        raise ValueError(f"need y >= 2*y0, got y={y} against y0={y0}")
    if d2 < d1 + 1.0:
        raise ValueError(f"need d2 >= d1 + 1, got d1={d1}, d2={d2}")
    return (64.0 / 15.0) ** (d2 - d1 - 1.0) * y0 ** (-2.0 * d1 - 2.0) * y ** (
        -2.0 * d2 + 4.0 * d1 + 4.0
    )


# ---------------------------------------------------------------------------
# Log-space building blocks for the kernel integrands


def _logcosh(x: float) -> float:
    x = abs(x)
    if x > 20.0:
        return x - _LOG2 + math.log1p(math.exp(-2.0 * x))
    return math.log(math.cosh(x))


def _logsinh(x: float) -> float:
    if x <= 0.0:
        raise ValueError("logsinh needs a positive argument")
    if x > 20.0:
        return x - _LOG2 + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


def _log_sqrt_gap(rho: float, u: float) -> float:
    # cosh(rho+u^2) - cosh(rho) = 2 sinh(rho + u^2/2) sinh(u^2/2); exact, no
    # cancellation near the endpoint.
    h = 0.5 * u * u
    return 0.5 * (_LOG2 + _logsinh(rho + h) + _logsinh(h))


def _acosh_cosh_ratio(r: float, rho: float) -> float:
    """arccosh(cosh(r/2)/cosh(rho/2)), stable for both r near rho and r huge."""
    rh, ph = 0.5 * r, 0.5 * rho
    if rh <= 350.0:
        return math.acosh(max(math.cosh(rh) / math.cosh(ph), 1.0))
    log_x = _logcosh(rh) - _logcosh(ph)
    if log_x > 40.0:
        return log_x + _LOG2
    return math.acosh(math.exp(log_x))


def _integrate_panels(f, width: float, rel_tol: float, panel_limit: int = 2000):
    """Integrate f over [0, inf) with fixed-width panels and a tail stop rule.

    Returns (value, error_estimate).  Panels stop once _PANEL_QUIET consecutive
    contributions fall below _PANEL_TINY of the running total.
    """
    total = 0.0
    err = 0.0
    quiet = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        for i in range(panel_limit):
            lo = i * width
            hi = lo + width
            eps_abs = max(_PANEL_TINY * abs(total), 1e-300)
            val, est = quad(f, lo, hi, epsabs=eps_abs, epsrel=rel_tol, limit=200)
            total += val
            err += est
            if abs(val) < _PANEL_TINY * max(abs(total), 1e-300):
                quiet += 1
                if quiet >= _PANEL_QUIET:
                    return total, err
            else:
                quiet = 0
    raise AccuracyError("panel integration did not terminate", estimate=total)


# ---------------------------------------------------------------------------
# Resolvent kernel


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    """Gauss series sum for |z| < 1, terminated at 1e-16 relative."""
    term = 1.0
    total = 1.0
    for n in range(_SERIES_GUARD):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) < 1e-16 * abs(total):
            return total
    raise AccuracyError(
        f"hypergeometric series did not converge for z={z}", estimate=total
    )


def resolvent_G(k: int, s: float, sigma: float) -> float:
    """Radial resolvent kernel value at displacement sigma.

    Evaluates sigma^{-s} Gamma(s+k) Gamma(s-k) / (4 pi Gamma(2s)) times the
    Gauss hypergeometric series F(s+k, s-k; 2s; 1/sigma); the prefactor is
    assembled through log-gamma so large s and k do not overflow.
    """
    if sigma <= 1.0:
        raise ValueError(f"resolvent kernel is singular at sigma <= 1, got {sigma}")
    if not s > k:
        raise ValueError(f"need s > k on the real axis, got s={s}, k={k}")
    log_pref = (
        gammaln(s + k)
        + gammaln(s - k)
        - gammaln(2.0 * s)
        - math.log(4.0 * math.pi)
        - s * math.log(sigma)
    )
    return math.exp(log_pref) * _hyp2f1_series(s + k, s - k, 2.0 * s, 1.0 / sigma)


def _difference_quadrature(k: int, s: float, sigma: float, rel_tol: float = 1e-10) -> float:
    """Difference kernel through its direct radial integral representation."""
    rho = 2.0 * math.acosh(math.sqrt(sigma))

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        r = rho + u * u
        log_num = -(s - 0.5) * r + math.log(-math.expm1(-r))
        log_t = _logcosh(2.0 * k * _acosh_cosh_ratio(r, rho))
        return 2.0 * u * math.exp(log_num + log_t - _log_sqrt_gap(rho, u))

    value, _ = _integrate_panels(integrand, width=1.0, rel_tol=rel_tol)
    return value / (2.0 * math.pi * math.sqrt(2.0))


def g_k_difference(k: int, s: float, sigma: float) -> float:
    """Difference of consecutive resolvent values, validated two ways.

    Route (a) subtracts the hypergeometric evaluations at s and s+1; route (b)
    integrates the radial representation directly.  The two must agree to 1e-6
    relative, otherwise a ConsistencyError carrying both values is raised.
    Returns route (a).
    """
    series_value = resolvent_G(k, s, sigma) - resolvent_G(k, s + 1.0, sigma)
    quad_value = _difference_quadrature(k, s, sigma)
    if abs(series_value - quad_value) > 1e-6 * max(abs(series_value), 1e-30):
        raise ConsistencyError(
            f"difference-kernel routes disagree at k={k}, s={s}, sigma={sigma}",
            series_value,
            quad_value,
        )
    return series_value


def integrated_exponential_lhs(k: int, eps: float, rho: float, rel_tol: float = 1e-10) -> float:
    """Radial integral of (e^{-(s-1/2)r} - e^{-(s+1/2)r}) e^{kr} / sqrt-gap at s = k+eps.

    Bounded above by 3 sqrt(2) e^{-eps rho} / eps for 0 < eps < 1.
    """
    if rho <= 0.0:
        raise ValueError("need rho > 0")
    s = k + eps

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        r = rho + u * u
        log_num = -(s - 0.5) * r + math.log(-math.expm1(-r)) + k * r
        return 2.0 * u * math.exp(log_num - _log_sqrt_gap(rho, u))

    value, _ = _integrate_panels(integrand, width=1.0, rel_tol=rel_tol)
    return value


# ---------------------------------------------------------------------------
# Heat kernel and the transform back to the resolvent


def heat_kernel(k: int, t: float, rho: float, rel_target: float = 1e-8) -> float:
    """Radial heat kernel at time t and distance rho.

    sqrt(2) e^{-t/4} (4 pi t)^{-3/2} times the radial integral of
    r e^{-r^2/(4t)} / sqrt(cosh r - cosh rho) weighted by the Chebyshev factor.
    """
    if t <= 0.0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    if rho < 0.0:
        raise ValueError(f"heat kernel needs rho >= 0, got {rho}")

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        r = rho + u * u
        log_num = math.log(r) - r * r / (4.0 * t)
        if rho == 0.0:
            # gap identity still applies with sinh(rho + h) -> sinh(h)
            h = 0.5 * u * u
            log_gap = 0.5 * (_LOG2 + 2.0 * _logsinh(h))
        else:
            log_gap = _log_sqrt_gap(rho, u)
        log_t2k = _logcosh(2.0 * k * _acosh_cosh_ratio(r, rho))
        return 2.0 * u * math.exp(log_num + log_t2k - log_gap)

    raw, err = _integrate_panels(integrand, width=1.0, rel_tol=min(rel_target * 1e-2, 1e-9))
    pref = math.sqrt(2.0) * math.exp(-t / 4.0) / (4.0 * math.pi * t) ** 1.5
    value = pref * raw
    if err > rel_target * max(abs(raw), 1e-300):
        raise AccuracyError(
            f"heat kernel quadrature reached only {err / max(abs(raw), 1e-300):.2e} relative",
            estimate=value,
        )
    return value


def resolvent_via_heat(k: int, s: float, sigma: float, rel_tol: float = 1e-7) -> float:
    """Resolvent value recovered as the time integral of the heat kernel.

    Integrates e^{-(s-1/2)^2 t} e^{t/4} K_k(t; rho) over t > 0 with
    sigma = cosh^2(rho/2); requires s > k for convergence.
    """
    if sigma <= 1.0:
        raise ValueError(f"transform needs sigma > 1, got {sigma}")
    if not s > k:
        raise ValueError(f"transform converges only for s > k, got s={s}, k={k}")
    rho = 2.0 * math.acosh(math.sqrt(sigma))

    def integrand(t: float) -> float:
        if t <= 0.0:
            return 0.0
        return math.exp((-((s - 0.5) ** 2) + 0.25) * t) * heat_kernel(
            k, t, rho, rel_target=1e-7
        )

    # Decay rate of the tail: (s-1/2)^2 - (k-1/2)^2 > 0.
    rate = (s - 0.5) ** 2 - (k - 0.5) ** 2
    width = max(0.25, min(2.0, 3.0 / rate))
    value, _ = _integrate_panels(integrand, width=width, rel_tol=rel_tol)
    return value


# ---------------------------------------------------------------------------
# Property-grid suite (also driven by the CLI kernel-check command)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def run_kernel_checks(
    k_max: int = 12,
    transform_tol: float = 1e-4,
    dual_tol: float = 1e-6,
) -> list[CheckResult]:
    """Run the kernel inequality and consistency grids; returns one result each.

    The grids follow the validity ranges of the underlying statements:
    0 < eps < 1 for the difference-kernel bounds, Z >= 1 for the Stirling
    ratio, x >= 1 for the Chebyshev comparison.
    """
    results: list[CheckResult] = []
    ks = sorted({1, 2, 3, 6} | {min(max(k_max, 1), 50)})

    # Chebyshev growth: T_{2k}(cosh(r/2)) <= e^{k r}.
    worst = -math.inf
    for k in ks:
        for r in [0.0] + [0.25 * i for i in range(1, 41)]:
            lhs = chebyshev_T2k(k, math.cosh(r / 2.0))
            margin = lhs / math.exp(k * r) if r > 0 else lhs
            worst = max(worst, margin)
    results.append(
        _check(
            "chebyshev_exp_bound",
            worst <= 1.0 + 1e-12,
            f"max T/e^(kr) ratio {worst:.6g} over k in {ks}, r in [0,10]",
        )
    )

    # Stirling ratio bound on a logarithmic Z grid.
    zs = [1.0, 1.5, 2.0, 5.0, 10.0, 100.0, 1e4, 1e6]
    ok = True
    worst = 0.0
    for z in zs:
        g = gamma_ratio_bound(z)
        ok = ok and g.ratio <= g.bound
        worst = max(worst, g.ratio / g.bound)
    results.append(
        _check("stirling_ratio_bound", ok, f"max ratio/bound {worst:.6g} on Z grid, n={len(zs)}")
    )

    # Difference-kernel decay bound and dual-evaluation agreement.
    decay_ok = True
    dual_ok = True
    worst_decay = 0.0
    worst_dual = 0.0
    for k in (1, 2, 6):
        for eps in (0.1, 0.5):
            for sigma in (1.5, 2.0, 10.0):
                s = k + eps
                series_value = resolvent_G(k, s, sigma) - resolvent_G(k, s + 1.0, sigma)
                quad_value = _difference_quadrature(k, s, sigma)
                rel = abs(series_value - quad_value) / max(abs(series_value), 1e-30)
                worst_dual = max(worst_dual, rel)
                dual_ok = dual_ok and rel <= dual_tol
                cap = 3.0 / (2.0 * math.pi * eps) * sigma ** -(k + eps)
                worst_decay = max(worst_decay, series_value / cap)
                decay_ok = decay_ok and series_value <= cap * (1.0 + 1e-12)
    results.append(
        _check(
            "difference_kernel_dual_route",
            dual_ok,
            f"max relative gap {worst_dual:.3e} (tolerance {dual_tol:g})",
        )
    )
    results.append(
        _check(
            "difference_kernel_decay_bound",
            decay_ok,
            f"max value/bound {worst_decay:.6g} on the (k, eps, sigma) grid",
        )
    )

    # Integrated exponential bound at s = k + eps.
    ok = True
    worst = 0.0
    for k in (1, 2, 6):
        for eps in (0.1, 0.5, 0.9):
            for sigma in (1.5, 2.0, 10.0):
                rho = 2.0 * math.acosh(math.sqrt(sigma))
                lhs = integrated_exponential_lhs(k, eps, rho)
                cap = 3.0 * math.sqrt(2.0) / eps * math.exp(-eps * rho)
                worst = max(worst, lhs / cap)
                ok = ok and lhs <= cap * (1.0 + 1e-12)
    results.append(
        _check(
            "integrated_exponential_bound",
            ok,
            f"max lhs/bound {worst:.6g} on the (k, eps, sigma) grid",
        )
    )

    # Heat-kernel monotonicity in rho and the transform back to the resolvent.
    mono_ok = True
    for k in (1, 3):
        for t in (0.2, 1.0):
            values = [heat_kernel(k, t, rho) for rho in (0.0, 0.4, 0.9, 1.5)]
            mono_ok = mono_ok and all(a >= b - 1e-14 for a, b in zip(values, values[1:]))
    results.append(
        _check("heat_kernel_monotone", mono_ok, "nonincreasing in rho on the sample grid")
    )

    triples = [(1, 2.0, 2.0), (1, 1.8, 3.5), (2, 3.0, 2.5)]
    ok = True
    worst = 0.0
    for k, s, sigma in triples:
        direct = resolvent_G(k, s, sigma)
        via_heat = resolvent_via_heat(k, s, sigma)
        rel = abs(direct - via_heat) / abs(direct)
        worst = max(worst, rel)
        ok = ok and rel <= transform_tol
    results.append(
        _check(
            "heat_resolvent_transform",
            ok,
            f"max relative gap {worst:.3e} over {len(triples)} triples (tolerance {transform_tol:g})",
        )
    )
    return results
