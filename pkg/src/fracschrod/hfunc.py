r"""Fox H-functions

.. math::

    H^{m,n}_{p,q}(z) = \frac{1}{2\pi i} \int_{\mathcal{L}} \mathcal{H}(s) z^{-s} \, ds,
    \qquad
    \mathcal{H}(s) = \frac{\prod_{j \le m} \Gamma(b_j + \beta_j s)
                           \prod_{i \le n} \Gamma(1 - a_i - \alpha_i s)}
                          {\prod_{i > n} \Gamma(a_i + \alpha_i s)
                           \prod_{j > m} \Gamma(1 - b_j - \beta_j s)}.

Three evaluation routes are provided: trapezoidal quadrature along a
vertical line, the convergent residue series over the left poles (small
``|z|``), and the algebraic asymptotic series over the right poles (large
``|z|``). :func:`eval_auto` dispatches between them.
"""

from __future__ import annotations

import bisect
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from fracschrod.errors import (
    AllCoefficientsZero,
    ContourError,
    ConvergenceError,
    PoleError,
    RegimeError,
)
from fracschrod.special import GammaRatioSpec, gamma_ratio, ln_gamma

COINCIDENCE_TOL = 1e-12
EXP_GUARD = 100.0
"""Safety factor on the exponential remainder before the expansion at infinity is trusted."""


# {{{ parameters


@dataclass(frozen=True)
class HParams:
    """Orders and parameter rows of ``H^{m,n}_{p,q}``.

    ``upper`` holds the ``p`` pairs ``(a_i, alpha_i)`` and ``lower`` the
    ``q`` pairs ``(b_j, beta_j)``.
    """

    m: int
    n: int
    upper: tuple[tuple[float, float], ...]
    lower: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple((float(a), float(w)) for a, w in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(w)) for b, w in self.lower))
        if not 0 <= self.m <= self.q:
            raise ValueError(f"need 0 <= m <= q: m={self.m}, q={self.q}")
        if not 0 <= self.n <= self.p:
            raise ValueError(f"need 0 <= n <= p: n={self.n}, p={self.p}")
        for a, w in (*self.upper, *self.lower):
            if not (w > 0 and math.isfinite(w) and math.isfinite(a)):
                raise ValueError(f"invalid parameter pair ({a}, {w})")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    @cached_property
    def ratio(self) -> GammaRatioSpec:
        num = [(b, w) for b, w in self.lower[: self.m]]
        num += [(1.0 - a, -w) for a, w in self.upper[: self.n]]
        den = [(a, w) for a, w in self.upper[self.n :]]
        den += [(1.0 - b, -w) for b, w in self.lower[self.m :]]
        return GammaRatioSpec.from_lists(num, den)

    @cached_property
    def derived(self) -> HDerived:
        return derived_params(self)


@dataclass(frozen=True)
class HDerived:
    a_star: float
    big_lambda: float
    mu: float
    delta: float


def derived_params(h: HParams) -> HDerived:
    """Classification constants ``a*``, ``Lambda``, ``mu`` and ``delta``."""
    al = [w for _, w in h.upper]
    be = [w for _, w in h.lower]
    a_star = sum(al[: h.n]) - sum(al[h.n :]) + sum(be[: h.m]) - sum(be[h.m :])
    big_lambda = sum(be) - sum(al)
    mu = sum(b for b, _ in h.lower) - sum(a for a, _ in h.upper) + (h.p - h.q) / 2.0
    delta = 1.0
    for w in al:
        delta *= w ** (-w)
    for w in be:
        delta *= w**w
    return HDerived(a_star=a_star, big_lambda=big_lambda, mu=mu, delta=delta)


def mellin_integrand(h: HParams, s):
    """The Gamma ratio ``H(s)``, i.e. the Mellin transform of the H-function.

    Raises :class:`PoleError` naming the family (``b_jl`` or ``a_ik``) when
    ``s`` sits on a pole of a numerator factor.
    """
    try:
        return gamma_ratio(h.ratio, s)
    except PoleError as exc:
        idx = exc.factor
        if idx is not None and idx < h.m:
            b, w = h.lower[idx]
            l_idx = round(-(b + w * exc.location.real))
            name = f"b_{{{idx + 1},{l_idx}}}"
        elif idx is not None:
            i = idx - h.m
            a, w = h.upper[i]
            k_idx = round(w * exc.location.real - 1.0 + a)
            name = f"a_{{{i + 1},{k_idx}}}"
        else:
            name = "unknown"
        raise PoleError(f"H(s) has pole {name} at s = {exc.location}", location=exc.location,
                        factor=idx, pole=name) from None


# }}}


# {{{ poles


@dataclass(frozen=True)
class Pole:
    location: float
    sources: tuple[int, ...]
    order: int
    effective_order: int
    """Pole order after cancelling zeros of the denominator Gammas."""


@dataclass(frozen=True)
class PoleSet:
    left_poles: tuple[Pole, ...]
    right_poles: tuple[Pole, ...]
    window: float

    @property
    def leading_left(self) -> Pole | None:
        live = [p for p in self.left_poles if p.effective_order > 0]
        return live[0] if live else None

    @property
    def leading_right(self) -> Pole | None:
        live = [p for p in self.right_poles if p.effective_order > 0]
        return live[0] if live else None


def _rational(x: float) -> Fraction | None:
    f = Fraction(x).limit_denominator(10**6)
    return f if abs(float(f) - x) < 1e-14 * max(1.0, abs(x)) else None


def _locations(offsets: Sequence[tuple[float, float]], sign: int, window: float):
    """Pole locations ``sign * (c + l) / w`` for ``l = 0, 1, ...`` inside the window.

    Returns ``(exact, float)`` pairs; ``exact`` is a Fraction when both ``c``
    and ``w`` are rational.
    """
    out = []
    for src, (c, w) in enumerate(offsets):
        cr, wr = _rational(c), _rational(w)
        lmax = int(math.floor(window * w - sign * c)) + 1 if sign > 0 else int(math.floor(window * w + c)) + 1
        for l in range(0, max(lmax, 0) + 1):
            x = sign * (c + l) / w
            if abs(x) > window:
                if (sign < 0 and x < -window) or (sign > 0 and x > window):
                    break
                continue
            exact = sign * (cr + l) / wr if cr is not None and wr is not None else None
            out.append((exact, x, src))
    return out


def _merge(entries, den_zero_locs, descending: bool) -> tuple[Pole, ...]:
    groups: list[list] = []
    for exact, x, src in sorted(entries, key=lambda e: e[1], reverse=descending):
        if groups:
            gex, gx = groups[-1][0], groups[-1][1]
            same = (gex == exact) if (gex is not None and exact is not None) else abs(gx - x) < COINCIDENCE_TOL
            if same:
                groups[-1][2].append(src)
                continue
        groups.append([exact, x, [src]])

    exact_zeros = Counter(e for e, _ in den_zero_locs if e is not None)
    inexact = sorted(x for e, x in den_zero_locs if e is None)
    everything = sorted(x for _, x in den_zero_locs)

    def near(arr, x):
        return bisect.bisect_right(arr, x + COINCIDENCE_TOL) - bisect.bisect_left(arr, x - COINCIDENCE_TOL)

    out = []
    for exact, x, srcs in groups:
        if exact is not None:
            zeros = exact_zeros[exact] + near(inexact, x)
        else:
            zeros = near(everything, x)
        order = len(srcs)
        out.append(Pole(location=x, sources=tuple(srcs), order=order, effective_order=max(order - zeros, 0)))
    return tuple(out)


def poles(h: HParams, window: float) -> PoleSet:
    """Left poles ``-(b_j + l)/beta_j`` and right poles ``(1 - a_i + k)/alpha_i``.

    Coincident locations are merged and the multiplicity recorded as the
    order; ``effective_order`` also subtracts zeros of the reciprocal
    Gammas in the denominator.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    left = _locations([(b, w) for b, w in h.lower[: h.m]], -1, window)
    right = _locations([(1.0 - a, w) for a, w in h.upper[: h.n]], +1, window)

    # zeros of 1/Gamma(a_i + alpha_i s) (i > n) and 1/Gamma(1 - b_j - beta_j s) (j > m)
    big = window + 1.0
    zeros = [(e, x) for e, x, _ in _locations([(a, w) for a, w in h.upper[h.n :]], -1, big)]
    zeros += [(e, x) for e, x, _ in _locations([(1.0 - b, w) for b, w in h.lower[h.m :]], +1, big)]

    return PoleSet(
        left_poles=_merge(left, zeros, descending=True),
        right_poles=_merge(right, zeros, descending=False),
        window=window,
    )


def residue_numeric(h: HParams, z: complex, pole: float, radius: float = 1e-3, points: int = 64) -> complex:
    """Residue of ``H(s) z^{-s}`` at ``pole`` by a trapezoid rule on a small circle."""
    theta = 2.0 * math.pi * np.arange(points) / points
    e = np.exp(1j * theta)
    s = pole + radius * e
    f = mellin_integrand(h, s) * np.exp(-s * np.log(complex(z)))
    return complex(radius * np.mean(f * e))


def _nearest_gap(locs: list[float], x: float) -> float:
    d = [abs(y - x) for y in locs if abs(y - x) > 1e-9]
    return min(d) if d else 1.0


def left_residue_coefficient(h: HParams, pole: Pole) -> complex:
    """Closed-form ``h*`` for a simple left pole (multiplying ``z^{-s_p}``).

    For the factor ``Gamma(b_j + beta_j s)`` with pole index ``l`` the
    residue is ``(-1)^l / (l! beta_j)`` times the remaining Gamma ratio.
    """
    if pole.order != 1:
        raise ValueError("closed form only for raw simple poles")
    j = pole.sources[0]
    b, w = h.lower[j]
    l_idx = int(round(-(b + w * pole.location)))
    rest = list(h.lower[: h.m])
    del rest[j]
    num = [(bb, ww) for bb, ww in rest] + [(1.0 - a, -ww) for a, ww in h.upper[: h.n]]
    den = [(a, ww) for a, ww in h.upper[h.n :]] + [(1.0 - bb, -ww) for bb, ww in h.lower[h.m :]]
    val = gamma_ratio(GammaRatioSpec.from_lists(num, den), pole.location)
    return (-1) ** l_idx / (math.factorial(l_idx) * w) * val


def right_residue_coefficient(h: HParams, pole: Pole) -> complex:
    """Closed-form coefficient of ``z^{-s_k}`` at a simple right pole.

    This is ``-Res[H(s); s_k]``; for ``Gamma(1 - a_i - alpha_i s)`` with
    index ``k`` it equals ``(-1)^k / (k! alpha_i)`` times the remaining ratio.
    """
    if pole.order != 1:
        raise ValueError("closed form only for raw simple poles")
    i = pole.sources[0]
    a, w = h.upper[i]
    k_idx = int(round(w * pole.location - 1.0 + a))
    rest = list(h.upper[: h.n])
    del rest[i]
    num = [(b, ww) for b, ww in h.lower[: h.m]] + [(1.0 - aa, -ww) for aa, ww in rest]
    den = [(aa, ww) for aa, ww in h.upper[h.n :]] + [(1.0 - b, -ww) for b, ww in h.lower[h.m :]]
    val = gamma_ratio(GammaRatioSpec.from_lists(num, den), pole.location)
    if k_idx > 170:
        return (-1) ** k_idx * val * math.exp(-math.lgamma(k_idx + 1.0)) / w
    return (-1) ** k_idx / (math.factorial(k_idx) * w) * val


# }}}


# {{{ contour


@dataclass(frozen=True)
class ContourConfig:
    tol: float = 1e-12
    c: float | None = None
    """Abscissa of the integration line; chosen automatically when None."""
    placement: str = "saddle"
    """``"saddle"`` or ``"midpoint"`` of the pole gap when ``c`` is None."""
    max_half_length: float = 4000.0


@dataclass(frozen=True)
class HResult:
    value: complex
    error: float
    method: str
    info: dict = field(default_factory=dict, compare=False)

    def __complex__(self) -> complex:
        return self.value


@lru_cache(maxsize=256)
def pole_gap(h: HParams) -> tuple[float, float]:
    """Open interval of ``Re s`` separating the live left and right poles."""
    ps = poles(h, window=64.0)
    left = ps.leading_left
    right = ps.leading_right
    lo = left.location if left is not None else -math.inf
    hi = right.location if right is not None else math.inf
    return lo, hi


def _choose_abscissa(h: HParams, z: complex, cfg: ContourConfig) -> float:
    lo, hi = pole_gap(h)
    if lo >= hi:
        raise ContourError(
            f"no vertical line separates left poles (max {lo}) from right poles (min {hi})",
            hypothesis="left and right pole families must be separable",
        )
    if cfg.c is not None:
        if not lo < cfg.c < hi:
            raise ContourError(f"abscissa {cfg.c} is not inside the pole gap ({lo}, {hi})")
        return cfg.c

    if math.isfinite(lo) and math.isfinite(hi) and cfg.placement == "midpoint":
        return 0.5 * (lo + hi)

    # minimise |H(c)| |z|^{-c} over the gap, staying clear of the poles
    lo_f = lo if math.isfinite(lo) else (hi - 40.0)
    hi_f = hi if math.isfinite(hi) else (lo_f + 40.0)
    width = hi_f - lo_f
    margin = min(0.25, 0.2 * width)
    # the irrational offset keeps candidates off cancelled poles at rational points
    cand = np.linspace(lo_f + margin, hi_f - margin, 81) + 1e-3 * math.sqrt(2.0) * (width - 2 * margin) / 80
    cand = cand[cand < hi_f - 0.5 * margin]
    with np.errstate(all="ignore"):
        try:
            vals = np.real(np.log(np.asarray(mellin_integrand(h, cand), dtype=complex)))
        except PoleError:
            # a candidate landed on a cancelled pole; evaluate one by one
            vals = np.full(cand.shape, np.inf)
            for i, x in enumerate(cand):
                try:
                    vals[i] = np.real(np.log(complex(mellin_integrand(h, x))))
                except PoleError:
                    pass
    vals = vals - cand * math.log(abs(z))
    vals[~np.isfinite(vals)] = np.inf
    return float(cand[int(np.argmin(vals))])


def eval_contour(h: HParams, z: complex, cfg: ContourConfig | None = None) -> HResult:
    """Mellin-Barnes integral along ``Re s = c`` by the trapezoidal rule.

    The integrand is analytic in the strip between the nearest poles, so
    the trapezoid error decays like ``exp(-2 pi d / h)``; the step is chosen
    from the pole distance ``d`` and checked against the rule with twice
    the step. By Stirling, ``|H(c + iy) z^{-c-iy}|`` decays like
    ``|y|^P exp(-(a* pi/2 - |arg z|) |y|)``; the half-length is doubled until
    the integrand at the cut-off is below the tolerance.
    """
    cfg = cfg or ContourConfig()
    z = complex(z)
    if z == 0:
        raise RegimeError("z != 0 required", hypothesis="z != 0 required")
    d = h.derived
    rate = d.a_star * math.pi / 2.0 - abs(np.angle(z))
    if rate <= 0:
        raise RegimeError(
            f"|arg z| = {abs(np.angle(z)):.6g} exceeds a* pi / 2 = {d.a_star * math.pi / 2:.6g}",
            hypothesis="|arg z| < a* pi / 2",
        )

    c = _choose_abscissa(h, z, cfg)
    lo, hi = pole_gap(h)
    dist = min(c - lo, hi - c, 1.0)
    logz = np.log(z)
    step = 2.0 * math.pi * dist / (40.0 + dist * abs(logz.real) + 2.0 * math.log1p(abs(c)))

    def integrand(y):
        s = c + 1j * y
        return mellin_integrand(h, s) * np.exp(-s * logz)

    half = 40.0 / rate
    while True:
        n = int(math.ceil(half / step))
        y = step * np.arange(-n, n + 1)
        f = integrand(y)
        total = step * np.sum(f) / (2.0 * math.pi)
        tail = (abs(f[0]) + abs(f[-1])) / rate / (2.0 * math.pi)
        if tail <= cfg.tol * max(abs(total), 1e-300) or tail < 1e-300:
            break
        if half >= cfg.max_half_length:
            raise ConvergenceError(f"contour tail {tail:.3e} did not converge (rate {rate:.3e})")
        half *= 2.0

    coarse = 2.0 * step * np.sum(f[n % 2 :: 2]) / (2.0 * math.pi)
    diff = abs(total - coarse)
    scale = max(abs(total), 1e-300)
    err = diff * diff / scale + tail + 1e-16 * step * np.sum(np.abs(f)) / (2.0 * math.pi)
    return HResult(complex(total), float(err), "contour", {"c": c, "step": step, "half_length": half})


# }}}


# {{{ series


def series_small_z(h: HParams, z: complex, max_terms: int = 400, tol: float = 1e-16) -> HResult:
    """Residue series over the left poles (convergent when ``Lambda > 0``).

    Simple poles use the closed-form coefficients; poles of higher
    effective order use numerical residues on a small circle, which carry
    the ``z^{s}(log z)^{N-1}`` structure automatically.
    """
    z = complex(z)
    if z == 0:
        raise RegimeError("z != 0 required", hypothesis="z != 0 required")
    d = h.derived
    if not d.big_lambda > 0:
        raise RegimeError(f"Lambda = {d.big_lambda} <= 0: left residue series diverges",
                          hypothesis="Lambda > 0")

    window = 8.0
    logz = np.log(z)
    total = 0j
    used = 0
    small_run = 0
    last_mag = math.inf
    history = []
    while used < max_terms:
        ps = poles(h, window).left_poles
        live = [p for p in ps if p.effective_order > 0]
        pending = live[used:]
        if not pending:
            window *= 2.0
            if window > 1e5:
                break
            continue
        all_locs = [p.location for p in ps]
        for p in pending:
            if p.order == 1:
                term = left_residue_coefficient(h, p) * np.exp(-p.location * logz)
            else:
                rad = min(1e-3, 0.25 * _nearest_gap(all_locs, p.location))
                term = residue_numeric(h, z, p.location, radius=rad)
            total += term
            used += 1
            mag = abs(term)
            history.append(mag)
            if mag <= tol * abs(total):
                small_run += 1
            else:
                small_run = 0
            last_mag = mag
            if small_run >= 3 or used >= max_terms:
                break
        if small_run >= 3:
            break
        window *= 2.0

    if small_run < 3:
        raise ConvergenceError(f"left residue series not converged after {used} terms (last {last_mag:.3e})")
    peak = max(history) if history else 0.0
    # rounding in the partial sums grows with the largest term (cancellation)
    err = last_mag + 2.2e-16 * peak * math.sqrt(used)
    return HResult(total, float(err), "series_small", {"terms": used, "peak_term": peak})


def series_large_z(h: HParams, z: complex, max_terms: int = 200) -> HResult:
    """Algebraic asymptotic expansion over the right poles, optimally truncated.

    Coefficients hitting a reciprocal-Gamma zero are exact zeros. When
    every coefficient vanishes the function decays faster than any power
    and :class:`AllCoefficientsZero` is raised.
    """
    z = complex(z)
    if z == 0:
        raise RegimeError("z != 0 required", hypothesis="z != 0 required")
    d = h.derived
    if d.big_lambda > 0 and not (d.a_star > 0 and abs(np.angle(z)) < d.a_star * math.pi / 2):
        raise RegimeError(
            "expansion at infinity needs Lambda <= 0, or a* > 0 with |arg z| < a* pi / 2",
            hypothesis="Lambda <= 0 or (a* > 0 and |arg z| < a* pi/2)",
        )

    ps = poles(h, window=float(max_terms))
    live = [p for p in ps.right_poles if p.effective_order > 0]
    if not live:
        raise AllCoefficientsZero("every coefficient of the expansion at infinity vanishes")

    logz = np.log(z)
    total = 0j
    prev = math.inf
    err = math.inf
    used = 0
    nonzero = 0
    for p in live[:max_terms]:
        if p.order != 1 or p.effective_order != 1:
            raise RegimeError(f"right pole at {p.location} has order {p.order}: not supported",
                              hypothesis="simple right poles")
        coef = right_residue_coefficient(h, p)
        if coef == 0:
            continue
        term = coef * np.exp(-p.location * logz)
        mag = abs(term)
        if mag > prev:
            err = prev
            break
        total += term
        prev = mag
        used += 1
        nonzero += 1
        if mag < 1e-17 * abs(total):
            err = mag
            break
    else:
        err = prev
    if nonzero == 0:
        raise AllCoefficientsZero("every coefficient of the expansion at infinity vanishes")
    return HResult(total, float(err), "series_large", {"terms": used})


def exp_decay_bound(h: HParams, z: complex, eps: float = 1e-3) -> float:
    r"""Envelope of ``H^{q,0}_{p,q}(z)`` at infinity (without the constant).

    .. math::

        |z|^{(\Re\mu + 1/2)/\Lambda}
        \exp\left\{\Lambda (|z|/\delta)^{1/\Lambda}
        \max\left(\cos\frac{a_1^*\pi + \arg z}{\Lambda},
                  \cos\frac{a_1^*\pi - \arg z}{\Lambda}\right)\right\}
    """
    z = complex(z)
    if h.n != 0 or h.m != h.q:
        raise RegimeError("exponential bound needs the H^{q,0}_{p,q} form", hypothesis="n = 0 and m = q")
    d = h.derived
    if not (d.big_lambda > 0 and d.a_star > 0):
        raise RegimeError("exponential bound needs Lambda > 0 and a* > 0", hypothesis="Lambda > 0, a* > 0")
    arg = np.angle(z)
    if abs(arg) > d.big_lambda * math.pi / 2.0 - eps:
        raise RegimeError("|arg z| must not exceed Lambda pi / 2 - eps", hypothesis="|arg z| <= Lambda pi/2 - eps")
    a1 = sum(w for _, w in h.lower[: h.m]) - sum(w for _, w in h.upper[h.n :])
    lam = d.big_lambda
    cos_max = max(math.cos((a1 * math.pi + arg) / lam), math.cos((a1 * math.pi - arg) / lam))
    r = abs(z)
    return float(r ** ((d.mu + 0.5) / lam) * math.exp(lam * (r / d.delta) ** (1.0 / lam) * cos_max))


def exponential_remainder(h: HParams, z: complex) -> float:
    """Size of the exponential part left out by :func:`series_large_z`.

    When ``Lambda > 0`` the algebraic expansion is accompanied by terms of
    order ``exp(Lambda (|z|/delta)^{1/Lambda} cos((a_1* pi +- arg z)/Lambda))``
    that are only exponentially small; this returns the same envelope as
    :func:`exp_decay_bound` with ``a_1* = sum_{j<=m} beta_j - sum_{i>n} alpha_i``
    but without requiring the ``n = 0`` form. It is a heuristic guard (the
    constant is not known), so callers should keep a safety margin.
    """
    d = h.derived
    if d.big_lambda <= 0:
        return 0.0
    z = complex(z)
    arg = np.angle(z)
    a1 = sum(w for _, w in h.lower[: h.m]) - sum(w for _, w in h.upper[h.n :])
    lam = d.big_lambda
    cos_max = max(math.cos((a1 * math.pi + arg) / lam), math.cos((a1 * math.pi - arg) / lam))
    r = abs(z)
    expo = lam * (r / d.delta) ** (1.0 / lam) * cos_max + (d.mu + 0.5) / lam * math.log(r)
    return math.exp(min(expo, 700.0))


# }}}


# {{{ dispatch


@dataclass(frozen=True)
class AutoConfig:
    z_lo: float = 0.5
    z_hi: float = 10.0
    tol: float = 1e-10
    contour: ContourConfig = ContourConfig()


def eval_auto(h: HParams, z: complex, cfg: AutoConfig | None = None) -> HResult:
    """Evaluate with the residue series for ``|z| <= z_lo``, the contour in
    between, and the expansion at infinity for ``|z| >= z_hi`` when its
    optimal-truncation error plus the exponential remainder is below ``tol``
    (otherwise the contour)."""
    cfg = cfg or AutoConfig()
    z = complex(z)
    if z == 0:
        raise RegimeError("z != 0 required", hypothesis="z != 0 required")
    r = abs(z)
    d = h.derived
    if r <= cfg.z_lo and d.big_lambda > 0:
        try:
            res = series_small_z(h, z)
            if res.error <= cfg.tol * max(abs(res.value), 1e-300):
                return res
        except ConvergenceError:
            pass
    if r >= cfg.z_hi:
        try:
            res = series_large_z(h, z)
            err = res.error + EXP_GUARD * exponential_remainder(h, z)
            if err <= cfg.tol * abs(res.value):
                return HResult(res.value, err, res.method, res.info)
        except (AllCoefficientsZero, RegimeError):
            pass
    try:
        return eval_contour(h, z, cfg.contour)
    except RegimeError as exc:
        raise RegimeError(f"no valid evaluation regime for z = {z}: {exc}", hypothesis=exc.hypothesis) from exc


def eval_many(h: HParams, zs, cfg: AutoConfig | None = None) -> np.ndarray:
    return np.array([eval_auto(h, z, cfg).value for z in np.ravel(zs)], dtype=complex).reshape(np.shape(zs))


# }}}


def ln_gamma_ratio_real(h: HParams, s: float) -> float:
    """``log |H(s)|`` at real ``s``; used for contour placement diagnostics."""
    return float(np.real(np.log(complex(mellin_integrand(h, s)))))


__all__ = [
    "AutoConfig",
    "ContourConfig",
    "HDerived",
    "HParams",
    "HResult",
    "Pole",
    "PoleSet",
    "derived_params",
    "eval_auto",
    "eval_contour",
    "eval_many",
    "exp_decay_bound",
    "exponential_remainder",
    "left_residue_coefficient",
    "ln_gamma",
    "mellin_integrand",
    "pole_gap",
    "poles",
    "residue_numeric",
    "right_residue_coefficient",
    "series_large_z",
    "series_small_z",
]
