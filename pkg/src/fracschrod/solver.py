r"""Pseudo-spectral mild solutions on a periodic box.

The mild form of ``i d_t^alpha u = (-Delta)^{beta/2} u + sign |u|^theta u`` is

.. math::

    u(t) = S(t) u_0 + \int_0^t P(t - \tau)\, \mathrm{sign}\, f(u(\tau))\, d\tau,

with Fourier multipliers ``S^(t) = E_alpha(-i lam t^alpha)`` and
``P^(s) = -i s^{alpha-1} E_{alpha,alpha}(-i lam s^alpha)``, ``lam = |xi|^beta``.
The memory integral is discretised by product integration: the weakly
singular weight is integrated exactly on every time panel against a
piecewise constant (order 1) or piecewise linear (order 2) interpolant of
``f^``, using

.. math::

    \int_0^s \sigma^{\alpha-1} E_{\alpha,\alpha}(c \sigma^\alpha) d\sigma = s^\alpha E_{\alpha,\alpha+1}(c s^\alpha), \qquad
    \int_0^s \sigma^{\alpha} E_{\alpha,\alpha+1}(c \sigma^\alpha) d\sigma = s^{\alpha+1} E_{\alpha,\alpha+2}(c s^\alpha).
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from fracschrod import io
from fracschrod.errors import ConvergenceError, NonContractionError, ValidityError
from fracschrod.estimates import (INF, Triplet, critical_index, existence_time, is_admissible,
                                  lp_norm_grid, space_time_norms_values)
from fracschrod.kernels import KernelSpec
from fracschrod.special import mittag_leffler

BOX_TOL = 1e-12


# {{{ grids and fields


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-L, L)^dim``."""

    dim: int
    points: int
    L: float

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.points < 16 or self.points & (self.points - 1):
            raise ValueError(f"points per axis must be a power of two >= 16, got {self.points}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.dim

    @property
    def spacing(self) -> float:
        return 2.0 * self.L / self.points

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    def axis(self) -> np.ndarray:
        return -self.L + self.spacing * np.arange(self.points)

    def coords(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis()] * self.dim), indexing="ij")

    def frequencies(self) -> np.ndarray:
        """Angular frequencies in FFT order; spacing ``pi / L``."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    def freq_norm(self) -> np.ndarray:
        k = np.meshgrid(*([self.frequencies()] * self.dim), indexing="ij")
        return np.sqrt(sum(c**2 for c in k))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "points": self.points, "L": self.L}


@dataclass(frozen=True)
class ComplexField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)

    def norm(self, p: float) -> float:
        return lp_norm_grid(self.values, self.grid.cell_volume, p)


def gaussian(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0, k0: float = 0.0) -> ComplexField:
    """``amplitude * exp(-|x|^2 / (2 width^2) + i k0 x_1)``."""
    x = grid.coords()
    r2 = sum(c**2 for c in x)
    return ComplexField(grid, amplitude * np.exp(-r2 / (2 * width**2) + 1j * k0 * x[0]))


def _check_box(u0: ComplexField) -> None:
    v = np.abs(u0.values)
    peak = v.max()
    if peak == 0:
        return
    edge = max(np.abs(np.take(u0.values, [0, -1], axis=a)).max() for a in range(v.ndim))
    if edge > BOX_TOL * peak:
        warnings.warn(f"initial data at the box edge is {edge / peak:.2e} of its peak; "
                      "periodic truncation may be visible", stacklevel=3)


@dataclass(frozen=True)
class SolverConfig:
    """Time horizon, step count and Picard controls.

    ``coupling`` scales the nonlinear term; ``0`` turns the solve into a
    purely linear propagation.
    """

    T: float
    steps: int = 128
    picard_max_iters: int = 30
    picard_tol: float = 1e-12
    memory_quadrature_order: int = 2
    coupling: float = 1.0

    def __post_init__(self) -> None:
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T}")
        if self.steps < 2:
            raise ValueError(f"steps must be at least 2, got {self.steps}")
        if self.picard_max_iters < 1:
            raise ValueError("picard_max_iters must be positive")
        if not self.picard_tol > 0:
            raise ValueError("picard_tol must be positive")
        if self.memory_quadrature_order not in (1, 2):
            raise ValueError("memory_quadrature_order must be 1 or 2")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)


@dataclass(frozen=True)
class Trajectory:
    spec: KernelSpec
    grid: GridSpec
    times: tuple[float, ...]
    fields: tuple[ComplexField, ...]
    picard_history: tuple[float, ...] = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.times) != len(self.fields):
            raise ValueError("fields must be aligned with times")
        if self.times[0] != 0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("times must start at 0 and increase")


# }}}


# {{{ linear propagation and nonlinearity


def fractional_laplacian_symbol(grid: GridSpec, beta: float) -> np.ndarray:
    """``|xi|^beta`` on the grid frequencies (zero at ``xi = 0``)."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return grid.freq_norm() ** beta


def linear_multiplier(spec: KernelSpec, grid: GridSpec, t: float) -> np.ndarray:
    lam = fractional_laplacian_symbol(grid, spec.beta)
    uniq, inv = np.unique(lam, return_inverse=True)
    vals = mittag_leffler(-1j * uniq * t**spec.alpha, spec.alpha, 1.0)
    return vals[inv].reshape(lam.shape)


def evolve_linear(spec: KernelSpec, grid: GridSpec, u0: ComplexField, t: float) -> ComplexField:
    """``S(t) u0`` by the multiplier ``E_alpha(-i |xi|^beta t^alpha)``."""
    if not t >= 0:
        raise ValueError(f"t must be non-negative, got {t}")
    if u0.grid != grid:
        raise ValueError("field grid does not match the solver grid")
    if t == 0:
        return u0
    m = linear_multiplier(spec, grid, t)
    return ComplexField(grid, np.fft.ifftn(m * np.fft.fftn(u0.values)))


def nonlinearity(u: ComplexField, theta: float, sign: float = 1) -> ComplexField:
    """Pointwise ``sign |u|^theta u``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    v = u.values
    return ComplexField(u.grid, sign * np.abs(v) ** theta * v)


# }}}


# {{{ memory integral


class DuhamelOperator:
    """Product-integration weights of the memory integral on a uniform time grid.

    For panel ``m`` counted back from the evaluation time (``s`` in
    ``[(m-1)h, mh]``), ``lo[m]`` multiplies ``f^`` at the older end of the
    panel and ``hi[m]`` at the newer end (order 1 puts all weight on the
    older end).
    """

    def __init__(self, spec: KernelSpec, grid: GridSpec, h: float, steps: int, order: int = 2):
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        if not h > 0 or steps < 1:
            raise ValueError("need h > 0 and at least one step")
        self.spec, self.grid, self.h, self.steps, self.order = spec, grid, h, steps, order
        a = spec.alpha
        lam = fractional_laplacian_symbol(grid, spec.beta)
        uniq, self._inv = np.unique(lam, return_inverse=True)
        s = h * np.arange(steps + 1)
        sa = s**a
        arg = -1j * np.outer(sa, uniq)
        K = sa[:, None] * mittag_leffler(arg, a, a + 1.0)
        I0 = np.diff(K, axis=0)
        if order == 1:
            lo, hi = I0, np.zeros_like(I0)
        else:
            M = s[:, None] * K - (s * sa)[:, None] * mittag_leffler(arg, a, a + 2.0)
            I1 = np.diff(M, axis=0)
            left, right = s[:-1, None], s[1:, None]
            # f = f_new (b - s)/h + f_old (s - a)/h on s in [a, b]
            hi = (right * I0 - I1) / h
            lo = (I1 - left * I0) / h
        pad = np.zeros((1, uniq.size), dtype=complex)
        self._lo = -1j * np.vstack([pad, lo])
        self._hi = -1j * np.vstack([pad, hi])

    def _expand(self, w: np.ndarray) -> np.ndarray:
        return w[:, self._inv].reshape((w.shape[0],) + self.grid.shape)

    def apply_hat(self, f_hat: np.ndarray, upto: int | None = None) -> np.ndarray:
        """Memory integral at every grid time ``0..upto`` from ``f^`` history (Fourier space)."""
        n = self.steps if upto is None else upto
        if f_hat.shape[0] < n + 1:
            raise ValueError(f"history gap: need {n + 1} samples, got {f_hat.shape[0]}")
        lo = self._expand(self._lo[: n + 1])
        hi = self._expand(self._hi[: n + 1])
        out = np.zeros((n + 1,) + self.grid.shape, dtype=complex)
        for j in range(1, n + 1):
            m = np.arange(1, j + 1)
            out[j] = np.einsum("m...,m...->...", lo[m], f_hat[j - m]) + \
                np.einsum("m...,m...->...", hi[m], f_hat[j - m + 1])
        return out


def duhamel_term(spec: KernelSpec, grid: GridSpec, f_history: Sequence[ComplexField], t: float,
                 order: int = 2) -> ComplexField:
    """``int_0^t P(t - tau) f(tau) dtau`` from samples of ``f`` at uniform times covering ``[0, t]``."""
    if not t >= 0:
        raise ValueError("t must be non-negative")
    if len(f_history) < 2:
        if t == 0 and len(f_history) == 1:
            return ComplexField(grid, np.zeros(grid.shape, dtype=complex))
        raise ValueError("history gap: f_history must cover [0, t] with at least two samples")
    if t == 0:
        raise ValueError("history gap: several samples given for t = 0")
    steps = len(f_history) - 1
    op = DuhamelOperator(spec, grid, t / steps, steps, order)
    f_hat = np.stack([np.fft.fftn(f.values) for f in f_history])
    return ComplexField(grid, np.fft.ifftn(op.apply_hat(f_hat)[-1]))


# }}}


# {{{ Picard iteration


def x_distance(values: Sequence[np.ndarray], times, cell: float, triplet: Triplet) -> float:
    """Designated-triplet surrogate of the solution-space norm: ``L^inf L^r + L^q L^p``."""
    n = space_time_norms_values(values, times, cell, triplet)
    return n.sup_r_norm + n.LqLp_norm


def _default_triplet(spec: KernelSpec) -> Triplet:
    r = max(2.0, critical_index(spec))
    return Triplet(INF, r, r)


def solve_picard(spec: KernelSpec, grid: GridSpec, u0: ComplexField, cfg: SolverConfig,
                 triplet: Triplet | None = None) -> Trajectory:
    """Fixed-point iteration ``u <- S(t) u0 + sign coupling G f(u)`` on the full time grid.

    The iteration starts from ``u = 0``, so the first iterate is the linear
    evolution. Distances between successive iterates are measured in the
    designated-triplet norm (default ``(inf, r, r)``).

    Raises
    ------
    NonContractionError
        When the distance grows for three consecutive iterations or the
        iterates leave the floating-point range.
    """
    if u0.grid != grid:
        raise ValueError("field grid does not match the solver grid")
    triplet = triplet or _default_triplet(spec)
    if not is_admissible(spec, triplet):
        raise ValidityError(f"designated triplet {triplet} is not admissible for {spec}")
    _check_box(u0)
    times = cfg.times
    linear = np.stack([evolve_linear(spec, grid, u0, float(t)).values for t in times])
    weight = spec.sign * cfg.coupling
    op = DuhamelOperator(spec, grid, times[1], cfg.steps, cfg.memory_quadrature_order) if weight else None
    cell = grid.cell_volume

    u = np.zeros_like(linear)
    history: list[float] = []
    rises = 0
    converged = False
    for _ in range(cfg.picard_max_iters):
        if weight:
            f = np.abs(u) ** spec.theta * u
            axes = tuple(range(1, grid.dim + 1))
            g = np.fft.fftn(f, axes=axes)
            new = linear + weight * np.fft.ifftn(op.apply_hat(g), axes=axes)
        else:
            new = linear.copy()
        if not np.all(np.isfinite(new)):
            raise NonContractionError("Picard iterates overflowed", history, _suggest_T(spec, u0, cfg, triplet))
        d = x_distance(new - u, times, cell, triplet)
        rises = rises + 1 if history and d > history[-1] else 0
        history.append(d)
        u = new
        if d < cfg.picard_tol:
            converged = True
            break
        if rises >= 3:
            T_s = _suggest_T(spec, u0, cfg, triplet)
            raise NonContractionError(
                f"Picard distances increased for 3 consecutive iterations (T = {cfg.T}); "
                f"shrink T, e.g. to {T_s:.6g}", history, T_s)
    fields = tuple(ComplexField(grid, v) for v in u)
    meta = {
        "triplet": [triplet.q, triplet.p, triplet.r],
        "distance": "sup_t L^r + L^q(L^p) over the designated triplet (stands in for the sup over all admissible triplets)",
        "sign": spec.sign,
        "coupling": cfg.coupling,
        "converged": converged,
        "iterations": len(history),
        "memory_quadrature_order": cfg.memory_quadrature_order,
    }
    return Trajectory(spec, grid, tuple(float(t) for t in times), fields, tuple(history), meta)


def _suggest_T(spec: KernelSpec, u0: ComplexField, cfg: SolverConfig, triplet: Triplet) -> float:
    """Existence-time scaling at the designated ``r`` (unit constant), capped at ``T/2``."""
    half = cfg.T / 2
    try:
        T_est = existence_time(spec, triplet.r, u0.norm(triplet.r))
    except (ValueError, ValidityError):
        return half
    return min(half, T_est)


# }}}


# {{{ scalar oracle


def caputo_ode_oracle(lambda_val: float, alpha: float, u0_mode: complex, times: Sequence[float],
                      steps: int = 4096) -> np.ndarray:
    """Solve ``i D^alpha y = lambda y``, ``y(0) = u0_mode`` by the fractional
    Adams predictor-corrector on a uniform grid of ``steps`` steps over
    ``[0, max(times)]``; values at ``times`` are linearly interpolated.

    Raises
    ------
    ConvergenceError
        When ``lambda h^alpha`` is too large for the predictor to be stable.
    """
    if not lambda_val >= 0:
        raise ValueError("lambda must be non-negative")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    t_arr = np.asarray(times, dtype=float)
    if t_arr.size == 0 or t_arr[0] < 0 or np.any(np.diff(t_arr) <= 0):
        raise ValueError("times must be increasing from 0")
    T = float(t_arr[-1])
    if T == 0:
        return np.full(t_arr.shape, complex(u0_mode))
    h = T / steps
    if steps < 16 or lambda_val * h**alpha > 1.0:
        raise ConvergenceError(f"{steps} steps are insufficient for lambda = {lambda_val} (need lambda h^alpha <= 1)")
    c = -1j * lambda_val
    g1 = h**alpha / math.gamma(alpha + 1)
    g2 = h**alpha / math.gamma(alpha + 2)
    k = np.arange(steps + 2, dtype=float)
    ka, ka1 = k**alpha, k ** (alpha + 1)
    b = ka[1:] - ka[:-1]                          # b[m] = (m+1)^a - m^a
    a_mid = ka1[2:] - 2 * ka1[1:-1] + ka1[:-2]    # a[m] = (m+1)^{a+1} - 2 m^{a+1} + (m-1)^{a+1}, m >= 1
    y = np.empty(steps + 1, dtype=complex)
    f = np.empty(steps + 1, dtype=complex)
    y[0] = u0_mode
    f[0] = c * y[0]
    for n in range(steps):
        # weights on f_j, j = 0..n, for the step to t_{n+1}
        pred = y[0] + g1 * np.dot(b[n::-1], f[: n + 1])
        a0 = n**(alpha + 1) - (n - alpha) * (n + 1) ** alpha
        corr = a0 * f[0]
        if n >= 1:
            corr += np.dot(a_mid[n - 1::-1], f[1 : n + 1])
        y[n + 1] = y[0] + g2 * (c * pred + corr)
        f[n + 1] = c * y[n + 1]
    grid_t = h * np.arange(steps + 1)
    return np.interp(t_arr, grid_t, y.real) + 1j * np.interp(t_arr, grid_t, y.imag)


# }}}


# {{{ export


def write_trajectory(traj: Trajectory, out_dir: str | os.PathLike, stem: str = "trajectory") -> tuple[Path, Path]:
    """Raw little-endian complex128 snapshots plus a JSON sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data = np.stack([f.values for f in traj.fields]).astype("<c16")
    bin_path = out / f"{stem}.bin"
    io.atomic_write_bytes(bin_path, data.tobytes())
    s = traj.spec
    sidecar = {
        "binary": bin_path.name,
        "dtype": "complex128-le",
        "shape": list(data.shape),
        "spec": {"alpha": s.alpha, "beta": s.beta, "dim": s.dim, "theta": s.theta, "sign": s.sign},
        "grid": traj.grid.to_dict(),
        "times": list(traj.times),
        "picard_history": list(traj.picard_history),
        "metadata": traj.metadata,
    }
    json_path = out / f"{stem}.json"
    io.write_json(json_path, sidecar)
    return bin_path, json_path


def read_trajectory(json_path: str | os.PathLike) -> Trajectory:
    json_path = Path(json_path)
    meta = json.loads(json_path.read_text(encoding="utf-8"))
    data = np.fromfile(json_path.parent / meta["binary"], dtype="<c16").reshape(meta["shape"])
    grid = GridSpec(**meta["grid"])
    spec = KernelSpec(**meta["spec"])
    fields = tuple(ComplexField(grid, v) for v in data)
    return Trajectory(spec, grid, tuple(meta["times"]), fields, tuple(meta["picard_history"]), meta["metadata"])


# }}}
