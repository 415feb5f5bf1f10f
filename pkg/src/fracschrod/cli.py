"""Command-line interface.

Every subcommand reads an optional INI file (``--config``) and writes its
artifacts into ``--out``. Exit codes: 0 success, 1 validation failure,
2 invalid input or violated precondition, 3 numerical non-convergence.

Example config::

    [spec]
    alpha = 0.5
    beta = 2
    dim = 1

    [decay]
    kernel = S
    s = 1, 2, inf
    times = 0.25, 0.5, 1, 2, 4, 8
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_NONCONVERGENCE = 0, 1, 2, 3
COMMANDS = ("hfunc", "kernel", "decay", "triplet", "solve", "validate")

DEFAULTS: dict[str, dict[str, str]] = {
    "spec": {"alpha": "0.5", "beta": "2", "dim": "1", "theta": "2", "sign": "1"},
    "hfunc": {"kernel": "S", "z": "", "method": "auto"},
    "kernel": {"which": "S", "t": "1", "r": "0.5, 1, 2"},
    "decay": {"kernel": "S", "s": "1, 2, inf", "times": "0.25, 0.5, 1, 2, 4, 8", "method": "loggrid"},
    "triplet": {"p": "4", "r": "2", "q": ""},
    "solve": {"t": "0.5", "steps": "128", "picard_max_iters": "30", "picard_tol": "1e-12",
              "memory_quadrature_order": "2", "coupling": "1"},
    "grid": {"dim": "", "points": "256", "l": "20"},
    "initial": {"amplitude": "1e-3", "width": "1", "k0": "0"},
    "designated_triplet": {"q": "inf", "p": "", "r": ""},
}

SECTIONS = {
    "hfunc": ("spec", "hfunc"),
    "kernel": ("spec", "kernel"),
    "decay": ("spec", "decay"),
    "triplet": ("spec", "triplet"),
    "solve": ("spec", "solve", "grid", "initial", "designated_triplet"),
    "validate": (),
}


class InputError(Exception):
    """Invalid configuration or arguments (exit code 2)."""


# {{{ config


def _norm_value(v: str) -> str:
    """Canonical text for a config value: numbers in 17-digit form, lists comma-separated."""
    parts = [p.strip() for p in v.split(",")] if v.strip() else []
    out = []
    for p in parts:
        try:
            x = float(p)
        except ValueError:
            out.append(p)
            continue
        out.append("inf" if x == math.inf else "-inf" if x == -math.inf else f"{x:.17g}")
    return ", ".join(out)


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    """Section name to ``{key: normalized value}``, defaults filled in."""

    @classmethod
    def from_text(cls, command: str, text: str = "") -> RunConfig:
        if command not in COMMANDS:
            raise InputError(f"unknown command {command!r}")
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise InputError(f"cannot parse config: {exc}") from exc
        # sections of other commands may share one file; unknown names are typos
        stray = [sec for sec in cp.sections() if sec not in DEFAULTS]
        if stray:
            raise InputError(f"unknown config sections: {', '.join(stray)}")
        options = {}
        for sec in SECTIONS[command]:
            vals = dict(DEFAULTS[sec])
            if cp.has_section(sec):
                for k, v in cp.items(sec):
                    if k not in vals:
                        raise InputError(f"unknown key {k!r} in section [{sec}]")
                    vals[k] = v
            options[sec] = {k: _norm_value(v) for k, v in vals.items()}
        return cls(command, options)

    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        for sec in sorted(self.options):
            cp[sec] = dict(sorted(self.options[sec].items()))
        from io import StringIO
        buf = StringIO()
        cp.write(buf)
        return buf.getvalue()

    def get(self, sec: str, key: str) -> str:
        return self.options[sec][key]

    def num(self, sec: str, key: str) -> float:
        v = self.get(sec, key)
        try:
            return float(v)
        except ValueError:
            raise InputError(f"[{sec}] {key} must be a number, got {v!r}") from None

    def integer(self, sec: str, key: str) -> int:
        x = self.num(sec, key)
        if x != int(x):
            raise InputError(f"[{sec}] {key} must be an integer, got {x}")
        return int(x)

    def nums(self, sec: str, key: str) -> list[float]:
        v = self.get(sec, key)
        try:
            return [float(p) for p in v.split(",")] if v else []
        except ValueError:
            raise InputError(f"[{sec}] {key} must be a list of numbers, got {v!r}") from None

    def complexes(self, sec: str, key: str) -> list[complex]:
        v = self.get(sec, key)
        try:
            return [complex(p.strip().replace(" ", "").replace("i", "j")) for p in v.split(",")] if v else []
        except ValueError:
            raise InputError(f"[{sec}] {key} must be a list of complex numbers, got {v!r}") from None


def load_config(command: str, path: str | None) -> RunConfig:
    if path is None:
        return RunConfig.from_text(command)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_text(command, text)


def _spec(cfg: RunConfig):
    from fracschrod.kernels import KernelSpec
    return KernelSpec(cfg.num("spec", "alpha"), cfg.num("spec", "beta"), cfg.integer("spec", "dim"),
                      cfg.num("spec", "theta"), cfg.integer("spec", "sign"))


# }}}


# {{{ commands


def cmd_hfunc(cfg: RunConfig, out: Path) -> int:
    from fracschrod import hfunc, io, kernels
    from fracschrod.errors import RegimeError

    spec = _spec(cfg)
    which = cfg.get("hfunc", "kernel")
    table = {"S": kernels.s_params, "P": kernels.p_params}
    if which in table:
        h = table[which](spec)
    elif which in ("S1", "S2", "P1", "P2"):
        h = kernels.split_params(spec)[which]
    else:
        raise InputError(f"[hfunc] kernel must be one of S, P, S1, S2, P1, P2, got {which!r}")
    methods = {"auto": hfunc.eval_auto, "contour": hfunc.eval_contour,
               "series_small": hfunc.series_small_z, "series_large": hfunc.series_large_z}
    method = cfg.get("hfunc", "method")
    if method not in methods:
        raise InputError(f"[hfunc] method must be one of {', '.join(methods)}, got {method!r}")
    rows = []
    for z in cfg.complexes("hfunc", "z"):
        if z == 0:
            raise RegimeError("z ≠ 0 required", hypothesis="z ≠ 0 required")
        res = methods[method](h, z)
        rows.append([z.real, z.imag, res.value.real, res.value.imag, res.method, res.error])
    io.write_csv(out / "hfunc.csv", ["z_re", "z_im", "re_H", "im_H", "method", "error_estimate"], rows)
    return EXIT_OK


def cmd_kernel(cfg: RunConfig, out: Path) -> int:
    from fracschrod import io, kernels

    spec = _spec(cfg)
    which = cfg.get("kernel", "which")
    t = cfg.num("kernel", "t")
    fns = {"S": kernels.s_kernel, "P": kernels.p_kernel}
    split = {"S1": (0, 0), "S2": (0, 1), "P1": (1, 0), "P2": (1, 1)}
    if which not in fns and which not in split:
        raise InputError(f"[kernel] which must be one of S, P, S1, S2, P1, P2, got {which!r}")
    rows = []
    for r in cfg.nums("kernel", "r"):
        if which in fns:
            v = fns[which](spec, t, r)
        else:
            i, j = split[which]
            v = kernels.split_kernels(spec, t, r)[i][j]
        rows.append([t, r, kernels.z_mod(t, r, spec.alpha, spec.beta), v.real, v.imag, abs(v)])
    io.write_csv(out / "kernel.csv", ["t", "r", "z_mod", "re", "im", "abs"], rows)
    return EXIT_OK


DECAY_THRESHOLD = 0.05


def cmd_decay(cfg: RunConfig, out: Path) -> int:
    from fracschrod import estimates, io

    spec = _spec(cfg)
    kind = cfg.get("decay", "kernel")
    if kind not in ("S", "P"):
        raise InputError(f"[decay] kernel must be S or P, got {kind!r}")
    method = cfg.get("decay", "method")
    if method not in ("loggrid", "adaptive"):
        raise InputError(f"[decay] method must be loggrid or adaptive, got {method!r}")
    times = cfg.nums("decay", "times")
    s_list = cfg.nums("decay", "s")
    if not s_list:
        raise InputError("[decay] s must list at least one exponent")
    for s in s_list:
        estimates._s_range(spec, s, kind)
    reports = [estimates.decay_study(spec, s, times, kind, method) for s in s_list]
    rows = [row for rep in reports for row in rep.rows()]
    io.write_csv(out / "decay.csv", ["s", "t", "measured", "predicted_exponent", "fitted_exponent", "margin"], rows)
    summary = {
        "kernel": kind,
        "spec": _spec_dict(spec),
        "threshold": DECAY_THRESHOLD,
        "studies": [{"s": r.s_exponent, "fitted_exponent": r.fitted_exponent,
                     "predicted_exponent": r.predicted_exponent, "margin": r.margin,
                     "pass": r.margin <= DECAY_THRESHOLD} for r in reports],
    }
    summary["all_pass"] = all(s["pass"] for s in summary["studies"])
    io.write_json(out / "decay_summary.json", summary)
    return EXIT_OK if summary["all_pass"] else EXIT_VALIDATION


def _spec_dict(spec) -> dict:
    return {"alpha": spec.alpha, "beta": spec.beta, "dim": spec.dim, "theta": spec.theta, "sign": spec.sign}


def cmd_triplet(cfg: RunConfig, out: Path) -> int:
    from fracschrod import estimates as E
    from fracschrod import io

    spec = _spec(cfg)
    p, r = cfg.num("triplet", "p"), cfg.num("triplet", "r")
    t = E.Triplet(cfg.num("triplet", "q"), p, r) if cfg.get("triplet", "q") else E.Triplet.from_relation(spec, p, r)
    m = E.is_admissible(spec, t)
    g = E.is_generalized_admissible(spec, t)
    ep = E.estimate_params(spec, t)
    report = {
        "spec": _spec_dict(spec),
        "triplet": {"q": t.q, "p": t.p, "r": t.r},
        "relation_residual": m.residual,
        "admissible": {"member": m.member, "case": m.case},
        "generalized_admissible": {"member": g.member, "case": g.case},
        "critical_index": ep.r0,
        "gamma_interp": ep.gamma_interp,
        "chi": ep.chi,
    }
    try:
        report["smoothing_exponent"], report["smoothing_case"] = E.smoothing_exponent(spec, r, p)
    except E.ValidityError as exc:
        report["smoothing_exponent"], report["smoothing_case"] = None, str(exc)
    io.write_json(out / "triplet.json", report)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    from fracschrod import estimates as E
    from fracschrod import io, solver

    spec = _spec(cfg)
    dim = cfg.integer("grid", "dim") if cfg.get("grid", "dim") else spec.dim
    if dim != spec.dim:
        raise InputError(f"[grid] dim = {dim} differs from [spec] dim = {spec.dim}")
    grid = solver.GridSpec(dim, cfg.integer("grid", "points"), cfg.num("grid", "l"))
    sc = solver.SolverConfig(T=cfg.num("solve", "t"), steps=cfg.integer("solve", "steps"),
                             picard_max_iters=cfg.integer("solve", "picard_max_iters"),
                             picard_tol=cfg.num("solve", "picard_tol"),
                             memory_quadrature_order=cfg.integer("solve", "memory_quadrature_order"),
                             coupling=cfg.num("solve", "coupling"))
    u0 = solver.gaussian(grid, cfg.num("initial", "amplitude"), cfg.num("initial", "width"),
                         cfg.num("initial", "k0"))
    trip = None
    if cfg.get("designated_triplet", "r"):
        r = cfg.num("designated_triplet", "r")
        p = cfg.num("designated_triplet", "p") if cfg.get("designated_triplet", "p") else r
        trip = E.Triplet(cfg.num("designated_triplet", "q"), p, r)
    traj = solver.solve_picard(spec, grid, u0, sc, trip)
    solver.write_trajectory(traj, out)
    q, p, r = traj.metadata["triplet"]
    trip = E.Triplet(q, p, r)
    norms = E.space_time_norms(traj, trip)
    try:
        t_pred = E.existence_time(spec, r, u0.norm(r))
    except E.ValidityError as exc:
        t_pred = str(exc)
    report = {
        "spec": _spec_dict(spec),
        "grid": grid.to_dict(),
        "T": sc.T,
        "steps": sc.steps,
        "existence_time_prediction": t_pred,
        "picard_history": list(traj.picard_history),
        "converged": traj.metadata["converged"],
        "designated_triplet": {"q": q, "p": p, "r": r},
        "space_time_norms": {"sup_Lr": norms.sup_r_norm, "LqLp": norms.LqLp_norm,
                             "weighted_Cq": norms.weighted_Cq_norm},
        "u0_Lr_norm": u0.norm(r),
    }
    io.write_json(out / "solve_report.json", report)
    if not traj.metadata["converged"]:
        print(f"Picard iteration did not reach tol {sc.picard_tol} in {sc.picard_max_iters} iterations",
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_validate(args, out: Path) -> int:
    from fracschrod import acceptance, io

    if args.list:
        for c in acceptance.CHECKS:
            print(f"{c.name}\t{c.title}")
        return EXIT_OK
    if args.inject_fault is not None and args.inject_fault not in acceptance.FAULTS:
        raise InputError(f"unknown fault {args.inject_fault!r}; known: {', '.join(sorted(acceptance.FAULTS))}")
    names = args.check or None
    if names:
        unknown = set(names) - set(acceptance.check_names())
        if unknown:
            raise InputError(f"unknown checks: {', '.join(sorted(unknown))}")
    results = acceptance.run_checks(names, args.inject_fault)
    payload = {
        "fault": args.inject_fault,
        "all_pass": all(r.passed for r in results),
        "failed": [r.name for r in results if not r.passed],
        "checks": [{"name": r.name, "title": r.title, "passed": r.passed, "seconds": r.seconds,
                    "budget_seconds": r.budget, "metrics": r.metrics} for r in results],
    }
    io.write_json(out / "validate.json", payload)
    sys.stdout.write(io.json_text({"all_pass": payload["all_pass"], "failed": payload["failed"]}))
    for r in results:
        if not r.passed:
            print(f"FAIL {r.name}: {r.metrics}", file=sys.stderr)
    return EXIT_OK if payload["all_pass"] else EXIT_VALIDATION


# }}}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI file with [spec] and per-command sections")
    common.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    common.add_argument("--threads", metavar="N", type=int, default=None,
                        help="thread count for BLAS/FFT backends")
    parser = argparse.ArgumentParser(prog="fracschrod", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("hfunc", parents=[common], help="evaluate an H-function at a list of points")
    sub.add_parser("kernel", parents=[common], help="tabulate a fundamental solution")
    sub.add_parser("decay", parents=[common], help="fit L^s decay exponents of S or P")
    sub.add_parser("triplet", parents=[common], help="classify an exponent triplet")
    sub.add_parser("solve", parents=[common], help="compute a mild solution by Picard iteration")
    v = sub.add_parser("validate", parents=[common], help="run the acceptance checks")
    v.add_argument("--list", action="store_true", help="list checks without running them")
    v.add_argument("--check", action="append", metavar="NAME", help="run only this check (repeatable)")
    v.add_argument("--inject-fault", metavar="NAME", default=None, help="perturb a routine to test the harness")
    return parser


def _set_threads(n: int | None) -> None:
    if n is None:
        return
    if n < 1:
        raise InputError(f"--threads must be positive, got {n}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(n)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    from fracschrod.errors import FracSchrodError, RegimeError

    try:
        _set_threads(args.threads)
        out = Path(args.out)
        if args.command == "validate":
            return cmd_validate(args, out)
        cfg = load_config(args.command, args.config)
        handler = {"hfunc": cmd_hfunc, "kernel": cmd_kernel, "decay": cmd_decay,
                   "triplet": cmd_triplet, "solve": cmd_solve}[args.command]
        return handler(cfg, out)
    except (InputError, RegimeError) as exc:
        msg = getattr(exc, "hypothesis", None) or str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except ArithmeticError as exc:
        suggestion = getattr(exc, "suggested_T", None)
        extra = f" (suggested T: {suggestion:.6g})" if suggestion is not None else ""
        print(f"non-convergence: {exc}{extra}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, FracSchrodError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
