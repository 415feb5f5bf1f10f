"""Acceptance checks with fixed tolerances and runtime budgets.

Each check returns a :class:`CheckResult`; ``run_checks`` drives a subset
and fault injection perturbs a library routine for the duration of a run
so that the harness itself can be tested.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass, field
from typing import Callable
from unittest import mock

import numpy as np

from fracschrod import estimates as E
from fracschrod import hfunc as H
from fracschrod import kernels as K
from fracschrod import solver as S
from fracschrod import special


@dataclass(frozen=True)
class CheckResult:
    name: str
    title: str
    passed: bool
    seconds: float
    budget: float
    metrics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Check:
    name: str
    title: str
    budget: float
    fn: Callable[[], tuple[bool, dict]]

    def run(self) -> CheckResult:
        t0 = time.perf_counter()
        try:
            ok, metrics = self.fn()
        except Exception as exc:  # a crashing check is a failing check
            ok, metrics = False, {"exception": f"{type(exc).__name__}: {exc}"}
        dt = time.perf_counter() - t0
        metrics = dict(metrics, within_budget=dt < self.budget)
        return CheckResult(self.name, self.title, bool(ok and dt < self.budget), dt, self.budget, metrics)


def _rel(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return np.abs(a - b) / np.abs(b)


# {{{ the checks


def check_special() -> tuple[bool, dict]:
    rng = np.random.default_rng(20240101)
    rad = 30.0 * np.sqrt(rng.uniform(0.0, 1.0, 200))
    ang = rng.uniform(-np.pi, np.pi, 200)
    z = rad * np.exp(1j * ang)
    z[:4] = [30.0, -30.0, 30j, -30j]
    exp_err = float(_rel(special.mittag_leffler(z, 1.0, 1.0), np.exp(z)).max())
    x = np.linspace(0.0, 5.0, 201)
    cos_err = float(np.abs(special.mittag_leffler(-(x**2), 2.0, 1.0) - np.cos(x)).max())
    w = rng.uniform(-4.5, 4.5, 100) + 1j * rng.uniform(-4.5, 4.5, 100)
    refl = np.exp(special.ln_gamma(w) + special.ln_gamma(1.0 - w))
    refl_err = float(_rel(refl, np.pi / np.sin(np.pi * w)).max())
    ok = exp_err <= 1e-10 and cos_err <= 1e-10 and refl_err <= 1e-12
    return ok, {"E11_vs_exp": exp_err, "E21_vs_cos": cos_err, "gamma_reflection": refl_err}


def check_hfunc_cross() -> tuple[bool, dict]:
    metrics = {}
    ok = True
    for beta in (2.0, 3.0):
        h = K.s_params(K.KernelSpec(0.5, beta, 1))
        dev = 0.0
        for x in np.geomspace(0.05, 0.5, 8):
            z = 1j * x
            c = H.eval_contour(h, z).value
            dev = max(dev, float(_rel(H.series_small_z(h, z).value, c)))
        metrics[f"small_z_beta{beta:g}"] = dev
        ok &= dev <= 1e-5
    h = K.s_params(K.KernelSpec(0.5, 3.0, 1))
    dev = 0.0
    for x in np.geomspace(10.0, 100.0, 8):
        z = 1j * x
        c = H.eval_contour(h, z).value
        dev = max(dev, float(_rel(H.series_large_z(h, z).value, c)))
    metrics["large_z_beta3"] = dev
    ok &= dev <= 1e-5
    return ok, metrics


RESIDUE_SETS = ((0.5, 2.0, 1), (0.4, 1.7, 1), (0.7, 2.3, 2))


def check_residues() -> tuple[bool, dict]:
    worst = 0.0
    z = 0.7 + 0.2j
    for a, b, n in RESIDUE_SETS:
        spec = K.KernelSpec(a, b, n)
        for h in (K.s_params(spec), K.p_params(spec)):
            for p in H.poles(h, 20.0).left_poles[:5]:
                closed = H.left_residue_coefficient(h, p) * np.exp(-p.location * np.log(z))
                numeric = H.residue_numeric(h, z, p.location)
                scale = max(abs(closed), 1e-300) if closed != 0 else 1.0
                worst = max(worst, abs(closed - numeric) / scale)
    h = K.s_params(K.KernelSpec(0.5, 3.0, 1))
    right = {round(p.location, 9): p for p in H.poles(h, 4.0).right_poles}
    h0 = H.right_residue_coefficient(h, right[0.0])
    h1 = H.right_residue_coefficient(h, right[1.0])
    ok = worst <= 1e-8 and h0 == 0 and abs(h1) > 1e-12
    return ok, {"worst_deviation": worst, "h0": abs(h0), "h1": abs(h1)}


def check_kernel_dual() -> tuple[bool, dict]:
    worst = 0.0
    for a in (0.4, 0.7):
        for b in (1.5, 2.0):
            spec = K.KernelSpec(a, b, 1)
            r = np.geomspace(0.1, 10.0, 7) ** (1.0 / b)
            ref = K.spectral_s_oracle(spec, 1.0, r)
            val = np.array([K.s_kernel(spec, 1.0, float(x)) for x in r])
            worst = max(worst, float(_rel(val, ref).max()))
    return worst <= 1e-4, {"worst_relative_deviation": worst}


DECAY_SPECS = ((0.5, 2.0, 1), (0.7, 3.0, 2))
DECAY_TIMES = tuple(float(t) for t in np.geomspace(0.25, 8.0, 6))


def check_decay() -> tuple[bool, dict]:
    metrics = {}
    worst = 0.0
    for a, b, n in DECAY_SPECS:
        spec = K.KernelSpec(a, b, n)
        for kind in ("S", "P"):
            if kind == "P" and not b > n / 2:
                continue
            for s in (1.0, 2.0, E.INF):
                rep = E.decay_study(spec, s, DECAY_TIMES, kind)
                metrics[f"{kind}({a:g},{b:g},{n})_s{s:g}"] = rep.margin
                worst = max(worst, rep.margin)
    metrics["worst_margin"] = worst
    return worst <= 0.05, metrics


def check_weak_norm() -> tuple[bool, dict]:
    spec = K.KernelSpec(0.5, 1.0, 2)
    scaled = [E.weak_ls_norm(spec, t) * t**spec.alpha for t in (0.5, 1.0, 2.0)]
    spread = (max(scaled) - min(scaled)) / min(scaled)
    return spread < 0.2, {"scaled_norms": scaled, "spread": spread}


TRIPLET_SPECS = ((0.5, 2.0, 1), (0.7, 3.0, 2), (0.6, 1.0, 2))


def check_triplets() -> tuple[bool, dict]:
    rng = np.random.default_rng(7)
    worst = 0.0
    violations = 0
    members = 0
    for a, b, n in TRIPLET_SPECS:
        spec = K.KernelSpec(a, b, n)
        for t in E.random_triplets(spec, 1000, rng):
            m = E.is_admissible(spec, t)
            if m:
                members += 1
                worst = max(worst, m.residual)
                if t.p < E.INF and not E.is_generalized_admissible(spec, t):
                    violations += 1
    hand = bool(E.is_admissible(K.KernelSpec(0.5, 2.0, 1), E.Triplet(16.0, 4.0, 2.0)))
    ok = worst < 1e-12 and violations == 0 and hand and members > 0
    return ok, {"members": members, "worst_residual": worst, "inclusion_violations": violations,
                "hand_member_accepted": hand}


def check_linear_oracle() -> tuple[bool, dict]:
    grid = S.GridSpec(1, 16, math.pi)   # integer frequencies
    x = grid.axis()
    worst = 0.0
    for a in (0.4, 0.5, 0.8):
        spec = K.KernelSpec(a, 2.0, 1)
        for lam in (0.0, 1.0, 4.0, 16.0):
            k = int(round(math.sqrt(lam)))
            u0 = S.ComplexField(grid, np.exp(1j * k * x))
            mode = S.evolve_linear(spec, grid, u0, 1.0).values[0] / u0.values[0]
            ref = S.caputo_ode_oracle(lam, a, 1.0, [0.0, 1.0], steps=4096)[-1]
            worst = max(worst, abs(mode - ref))
    return worst <= 1e-5, {"worst_deviation": worst}


def check_picard() -> tuple[bool, dict]:
    spec = K.KernelSpec(0.5, 2.0, 1, theta=2.0)
    grid = S.GridSpec(1, 256, 20.0)
    u0 = S.gaussian(grid, 1e-3, 1.0)
    traj = S.solve_picard(spec, grid, u0, S.SolverConfig(T=0.5, steps=128, picard_max_iters=8))
    hist = list(traj.picard_history)
    ratios = [b / a for a, b in zip(hist, hist[1:])]
    converged = traj.metadata["converged"] and len(hist) <= 8
    lin = S.solve_picard(spec, grid, u0, S.SolverConfig(T=0.5, steps=128, coupling=0.0))
    lin_hist = list(lin.picard_history)
    exact = len(lin_hist) == 2 and lin_hist[1] == 0.0
    ok = converged and bool(ratios) and max(ratios) < 0.5 and exact
    return ok, {"history": hist, "max_ratio": max(ratios) if ratios else None,
                "linear_history": lin_hist}


def check_critical_time() -> tuple[bool, dict]:
    spec = K.KernelSpec(0.5, 2.0, 1, theta=2.0)
    r0 = E.critical_index(spec)
    norms = np.geomspace(0.1, 100.0, 10)
    at_r0 = [E.existence_time(spec, r0, float(u)) for u in norms]
    above = [E.existence_time(spec, 2.0 * r0, float(u)) for u in norms]
    flat = len(set(at_r0)) == 1
    decreasing = all(b < a for a, b in zip(above, above[1:]))
    return flat and decreasing, {"T_at_r0": at_r0[0], "T_above_r0": above}


# }}}


CHECKS: tuple[Check, ...] = (
    Check("special_identities", "Mittag-Leffler and Gamma identities", 5.0, check_special),
    Check("hfunc_cross_method", "H-function contour vs series", 60.0, check_hfunc_cross),
    Check("residue_coefficients", "closed-form vs numerical residues", 30.0, check_residues),
    Check("kernel_dual", "H-function kernel vs spectral oracle", 300.0, check_kernel_dual),
    Check("decay_exponents", "L^s decay slopes of S and P", 300.0, check_decay),
    Check("weak_norm", "weak-norm envelope t^-alpha", 120.0, check_weak_norm),
    Check("triplet_algebra", "admissible triplet audits", 5.0, check_triplets),
    Check("linear_oracle", "Mittag-Leffler multiplier vs Caputo ODE", 60.0, check_linear_oracle),
    Check("picard_contraction", "Picard contraction and linear fixed point", 120.0, check_picard),
    Check("critical_existence_time", "existence time at and above r0", 1.0, check_critical_time),
)


def check_names() -> list[str]:
    return [c.name for c in CHECKS]


# {{{ fault injection


def _perturbed_ml(orig):
    def ml(z, alpha, beta=1.0, tol=1e-10):
        return orig(z, alpha, beta, tol) * (1.0 + 1e-6)
    return ml


def _perturbed_contour(orig):
    def contour(h, z, cfg=None):
        res = orig(h, z, cfg)
        return H.HResult(res.value * (1.0 + 1e-3), res.error, res.method, res.info)
    return contour


FAULTS = {
    "ml_tolerance": ("Mittag-Leffler values perturbed by 1e-6 relative",
                     [(special, "mittag_leffler", _perturbed_ml), (K, "mittag_leffler", _perturbed_ml),
                      (S, "mittag_leffler", _perturbed_ml)]),
    "contour_bias": ("contour integral biased by 1e-3 relative",
                     [(H, "eval_contour", _perturbed_contour)]),
}


@contextlib.contextmanager
def inject_fault(name: str | None):
    if name is None:
        yield
        return
    if name not in FAULTS:
        raise KeyError(f"unknown fault {name!r}; known: {', '.join(sorted(FAULTS))}")
    with contextlib.ExitStack() as stack:
        for module, attr, wrap in FAULTS[name][1]:
            stack.enter_context(mock.patch.object(module, attr, wrap(getattr(module, attr))))
        yield


# }}}


def run_checks(names: list[str] | None = None, fault: str | None = None) -> list[CheckResult]:
    selected = [c for c in CHECKS if names is None or c.name in names]
    if names is not None:
        unknown = set(names) - {c.name for c in CHECKS}
        if unknown:
            raise KeyError(f"unknown checks: {', '.join(sorted(unknown))}")
    with inject_fault(fault):
        return [c.run() for c in selected]
