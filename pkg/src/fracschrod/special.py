"""Complex special functions: log-Gamma, Gamma ratios and Mittag-Leffler."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from fracschrod.errors import AccuracyError, PoleError

POLE_TOL = 1e-12

# Lanczos coefficients for g = 7, n = 9
_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _near_pole(z: np.ndarray) -> np.ndarray:
    re = z.real
    return (np.abs(z.imag) < POLE_TOL) & (re < 0.5) & (np.abs(re - np.round(re)) < POLE_TOL)


def _lanczos_lngamma(z: np.ndarray) -> np.ndarray:
    # valid for Re z >= 0.5
    zm = z - 1.0
    acc = np.full(z.shape, _LANCZOS_COEF[0], dtype=complex)
    for k in range(1, _LANCZOS_COEF.size):
        acc = acc + _LANCZOS_COEF[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(acc)


def ln_gamma(z):
    """Principal branch of ``log Gamma(z)`` for complex (array) ``z``.

    Arguments with ``Re z < 0.5`` are shifted right with the recurrence
    ``lnG(z) = lnG(z + N) - sum log(z + k)``; summing principal logarithms
    keeps the result on the branch that is continuous off the negative axis.

    Raises
    ------
    PoleError
        If any argument lies within ``1e-12`` of a non-positive integer.
    """
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    bad = _near_pole(z_arr)
    if np.any(bad):
        raise PoleError(f"Gamma pole at argument {z_arr[bad][0]}", location=complex(z_arr[bad][0]))

    shift = np.where(z_arr.real < 0.5, np.ceil(0.5 - z_arr.real), 0.0).astype(int)
    out = _lanczos_lngamma(z_arr + shift)
    for k in range(int(shift.max(initial=0))):
        mask = shift > k
        out[mask] -= np.log(z_arr[mask] + k)

    return complex(out[0]) if scalar else out


def rgamma_real(x):
    """``1/Gamma(x)`` for real ``x``; exact zeros at the poles of Gamma."""
    from scipy.special import rgamma

    return rgamma(x)


@dataclass(frozen=True)
class GammaRatioSpec:
    """Ratio ``prod Gamma(c + w s) / prod Gamma(c + w s)`` of affine Gamma factors.

    Each factor is a pair ``(c, w)``: a complex offset and a real slope.
    """

    numerator_args: tuple[tuple[complex, float], ...]
    denominator_args: tuple[tuple[complex, float], ...] = ()

    def __post_init__(self) -> None:
        for c, w in (*self.numerator_args, *self.denominator_args):
            if not (np.isfinite(w) and np.isfinite(complex(c))):
                raise ValueError(f"non-finite affine factor ({c}, {w})")
            if isinstance(w, complex):
                raise ValueError("affine slopes must be real")

    @classmethod
    def from_lists(cls, numerator: Sequence, denominator: Sequence = ()) -> GammaRatioSpec:
        return cls(
            tuple((complex(c), float(w)) for c, w in numerator),
            tuple((complex(c), float(w)) for c, w in denominator),
        )


def gamma_ratio(spec: GammaRatioSpec, s):
    """Evaluate the Gamma ratio at (array) ``s`` through summed log-Gammas.

    A denominator factor sitting on a Gamma pole makes the ratio exactly
    zero. A numerator factor on a pole raises :class:`PoleError` carrying
    the factor index.
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    scalar = np.ndim(s) == 0
    log_val = np.zeros(s_arr.shape, dtype=complex)
    zero = np.zeros(s_arr.shape, dtype=bool)

    for idx, (c, w) in enumerate(spec.numerator_args):
        arg = c + w * s_arr
        bad = _near_pole(arg)
        if np.any(bad):
            raise PoleError(
                f"numerator factor {idx} Gamma({c} + {w} s) has a pole at s = {s_arr[bad][0]}",
                location=complex(s_arr[bad][0]),
                factor=idx,
            )
        log_val += ln_gamma(arg)

    for c, w in spec.denominator_args:
        arg = c + w * s_arr
        bad = _near_pole(arg)
        zero |= bad
        safe = np.where(bad, 1.0, arg)
        log_val -= ln_gamma(safe)

    out = np.where(zero, 0.0, np.exp(log_val))
    return complex(out[0]) if scalar else out


def mellin_rotated_reciprocal(alpha: float, theta: float, s):
    """Mellin transform of ``t -> 1/((exp(i theta) t)**alpha + 1)``.

    Equals ``exp(-i theta s) Gamma(s/alpha) Gamma(1 - s/alpha) / alpha``,
    continued analytically to every ``s`` that is not a multiple of ``alpha``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if not -math.pi < theta < math.pi:
        raise ValueError("theta must lie in (-pi, pi)")
    s = np.asarray(s, dtype=complex)
    spec = GammaRatioSpec(((0.0, 1.0 / alpha), (1.0, -1.0 / alpha)))
    return np.exp(-1j * theta * s) * gamma_ratio(spec, s) / alpha


# {{{ Mittag-Leffler


@dataclass(frozen=True)
class MLParams:
    """Indices of the two-parameter Mittag-Leffler function ``E_{alpha, beta}``."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 2.0 and math.isfinite(self.alpha)):
            raise ValueError(f"alpha must lie in (0, 2]: got {self.alpha}")
        if not (self.beta > 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be positive: got {self.beta}")

    def __call__(self, z, tol: float = 1e-10):
        return mittag_leffler(z, self.alpha, self.beta, tol=tol)


TAYLOR_RADIUS = 1.0
ASYMPTOTIC_RADIUS = 15.0


def _ml_taylor(z: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    # |z| <= 1: stop once 1/Gamma(alpha k + beta) < 1e-17
    kmax = int(math.ceil(max(19.5 - beta, 0.0) / alpha)) + 2
    k = np.arange(kmax + 1)
    coef = rgamma_real(alpha * k + beta)
    out = np.zeros(z.shape, dtype=complex)
    for kk in range(kmax, -1, -1):
        out = out * z + coef[kk]
    return out


def _principal_poles(z: complex, alpha: float) -> list[complex]:
    """Roots of ``s**alpha = z`` on the principal sheet ``|arg s| < pi``."""
    if z == 0:
        return []
    rho = abs(z) ** (1.0 / alpha)
    phi = np.angle(z)
    out = []
    kmax = int(math.ceil(alpha / 2.0)) + 1
    for k in range(-kmax, kmax + 1):
        ang = (phi + 2.0 * math.pi * k) / alpha
        if -math.pi < ang <= math.pi:
            out.append(rho * complex(math.cos(ang), math.sin(ang)))
    return out


def _rational_residues(z: complex, alpha: float, beta: float) -> complex | None:
    # integer alpha with alpha - beta a non-negative integer: the Laplace
    # transform s**(alpha-beta)/(s**alpha - z) is rational, so E is a finite
    # residue sum over all alpha-th roots of z
    if alpha != round(alpha) or (alpha - beta) != round(alpha - beta) or alpha - beta < 0:
        return None
    m = int(round(alpha))
    root = complex(z) ** (1.0 / m)
    total = 0j
    for k in range(m):
        sk = root * complex(math.cos(2 * math.pi * k / m), math.sin(2 * math.pi * k / m))
        total += sk ** (1.0 - beta) * np.exp(sk)
    return total / m


def _ml_asymptotic(z: complex, alpha: float, beta: float) -> tuple[complex, float]:
    """Exponential plus algebraic expansion with optimal truncation.

    Returns the value and an error estimate combining the smallest
    algebraic term with the size of exponentials near the Stokes lines.
    """
    phi = np.angle(z)
    rho = abs(z) ** (1.0 / alpha)
    expo = 0j
    stokes = 0.0
    kmax = int(math.ceil(alpha / 2.0)) + 1
    for k in range(-kmax, kmax + 1):
        ang = phi + 2.0 * math.pi * k
        sk_ang = ang / alpha
        sk = rho * complex(math.cos(sk_ang), math.sin(sk_ang))
        if abs(ang) <= alpha * math.pi:
            expo += sk ** (1.0 - beta) * np.exp(sk)
        # exponentials switch on smoothly across |arg z| = alpha pi; when
        # they are not negligible there the split expansion is unreliable
        if abs(abs(ang) - alpha * math.pi) < 0.5 * alpha * math.pi:
            stokes = max(stokes, abs(sk ** (1.0 - beta)) * math.exp(min(sk.real, 700.0)) / alpha)
    expo /= alpha

    # truncate on the smooth envelope Gamma(1 + alpha k - beta) / (pi |z|^k),
    # which bounds |1/Gamma(beta - alpha k)| and is blind to accidental zeros
    alg = 0j
    logz = math.log(abs(z))
    zinv = 1.0 / z
    zp = 1.0 + 0j
    prev_env = math.inf
    err = 0.0
    for k in range(1, 2000):
        x = alpha * k - beta
        env = (math.lgamma(1.0 + x) if x > -1.0 else 0.0) - math.log(math.pi) - k * logz
        env = math.exp(min(env, 700.0))
        if x > 0 and env > prev_env:
            err = prev_env
            break
        zp *= zinv
        alg -= zp * rgamma_real(beta - alpha * k)
        prev_env = env if x > 0 else math.inf
        if x > 0 and env < 1e-18 * max(abs(alg), 1e-300):
            err = env
            break
    else:
        err = prev_env
    return expo + alg, err + stokes


def _ml_contour(z: complex, alpha: float, beta: float, tol: float) -> tuple[complex, float]:
    """Laplace inversion along the parabola ``s = mu (1 + i u)**2``.

    Principal-sheet poles of ``s**(alpha - beta)/(s**alpha - z)`` lying to
    the right of the parabola contribute explicit residues. ``mu`` is chosen
    to keep every pole away from the real ``u`` axis, which controls the
    trapezoid error ``exp(-2 pi d / h)``.
    """
    poles = _principal_poles(z, alpha)
    sq = [np.sqrt(p) for p in poles]

    best_mu, best_score, d = 1.0, -math.inf, 1.0
    for mu in np.geomspace(0.25, 6.0, 29):
        dist = 1.0
        for r in sq:
            dist = min(dist, abs(1.0 - r.real / math.sqrt(mu)))
        # nodes scale like umax * (36 + mu (2d + d^2)) / d; round-off like exp(mu)
        umax = math.sqrt(1.0 + 48.0 / mu)
        cost = umax * (38.0 + mu * (2.0 * dist + dist * dist)) / max(dist, 1e-3)
        score = -math.log(cost) - 0.15 * mu
        if score > best_score:
            best_mu, best_score, d = mu, score, max(dist, 1e-3)
    mu = best_mu
    umax = math.sqrt(1.0 + 48.0 / mu)

    def trapezoid(h: float) -> complex:
        n = int(math.ceil(umax / h))
        u = h * np.arange(-n, n + 1)
        w = 1.0 + 1j * u
        s = mu * w * w
        f = np.exp(s) * s ** (alpha - beta) / (s**alpha - z)
        return complex(h * mu / math.pi * np.sum(f * w))

    h = 2.0 * math.pi * d / (38.0 + mu * (2.0 * d + d * d))
    fine = trapezoid(h)
    coarse = trapezoid(2.0 * h)

    res = 0j
    for p, r in zip(poles, sq):
        if r.real > math.sqrt(mu):
            res += p ** (1.0 - beta) * np.exp(p) / alpha
    val = fine + res
    scale = max(abs(val), 1e-300)
    # halving h squares the geometric error factor
    diff = abs(fine - coarse)
    err = diff * diff / scale + math.exp(mu) * 1e-16 * 4.0
    return val, err


def mittag_leffler(z, alpha: float, beta: float = 1.0, tol: float = 1e-10):
    r"""Two-parameter Mittag-Leffler function

    .. math::

        E_{\alpha, \beta}(z) = \sum_{k \ge 0} \frac{z^k}{\Gamma(\alpha k + \beta)}.

    Taylor series for ``|z| <= 1``, the exponential/algebraic asymptotic
    expansion for ``|z| >= 15`` whenever its error estimate is below
    ``tol``, and Laplace inversion on a parabolic contour otherwise.

    Raises
    ------
    AccuracyError
        If the internal error estimate of the chosen method exceeds ``tol``
        (relative, with an absolute floor of ``tol * 1e-3``).
    """
    MLParams(alpha, beta)
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    out = np.empty(z_arr.shape, dtype=complex)

    small = np.abs(z_arr) <= TAYLOR_RADIUS
    out[small] = _ml_taylor(z_arr[small], alpha, beta)

    for idx in np.flatnonzero(~small):
        zi = complex(z_arr.flat[idx])
        exact = _rational_residues(zi, alpha, beta)
        if exact is not None:
            out.flat[idx] = exact
            continue
        if abs(zi) >= ASYMPTOTIC_RADIUS:
            val, err = _ml_asymptotic(zi, alpha, beta)
            if err <= 0.1 * tol * max(abs(val), 1e-3):
                out.flat[idx] = val
                continue
        val, err = _ml_contour(zi, alpha, beta, tol)
        if err > tol * max(abs(val), 1e-3):
            raise AccuracyError(
                f"Mittag-Leffler E_{{{alpha},{beta}}}({zi}) error estimate {err:.3e} exceeds {tol:.1e}"
            )
        out.flat[idx] = val

    return complex(out[0]) if scalar else out


# }}}
