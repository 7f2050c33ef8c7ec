"""Command-line front end.

Every subcommand resolves its configuration from three layers (built-in
defaults, an optional ``--config`` JSON file, explicit flags; later layers
win), validates it, runs, and writes ``<command>.csv``/``.json``/``.svg`` into
``--out``.  Outputs embed the resolved configuration; the output directory,
config path and worker count are left out of the echo because they do not
affect results.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(non-convergence), 4 property violation, 5 fit refused.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import kernelbound as kb
from . import linalg
from . import operator as opr
from . import pseudospectra as ps
from .fitting import FitRefusedError
from .quadrature import QuadratureError
from .serialization import atomic_write, write_csv, write_json
from .svg import PALETTE, Figure, padded_limits

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_PROPERTY = 4
EXIT_FIT_REFUSED = 5

COMMANDS = ("spectrum", "eigenfunctions", "pseudospectrum", "curve", "kernel-check", "perturb")
FORMATS = ("csv", "json", "svg")
NOT_ECHOED = ("out", "config", "workers", "format")

COMMON_DEFAULTS = {"c_re": 1.0, "c_im": 5.0, "format": "all", "out": ".", "seed": 0, "workers": 1}

DEFAULTS = {
    "spectrum": {"N": 200, "L": 6.0, "count": 20},
    "eigenfunctions": {"N": 200, "L": 6.0, "n_list": [1, 5, 10, 20]},
    "pseudospectrum": {
        "N": 200,
        "L": 6.0,
        "window": [0.0, 110.0, -10.0, 100.0],
        "grid": [56, 56],
        "levels": [10.0**-k for k in range(1, 13)],
    },
    "curve": {
        "N": 400,
        "L": 12.0,
        "b": 1.0,
        "p": 1.0 / 3.0,
        "eta_min": 1.0,
        "eta_max": None,
        "samples": 40,
        "spacing": "log",
        "tail_fraction": 0.5,
        "selftest": False,
    },
    "kernel-check": {
        "c_im": 6.0,
        "a": 0.5,
        "a0": 0.5,
        "mu": 0.0,
        "h_list": [float(h) for h in np.logspace(-4, -1, 12)],
        "lemma1_samples": 100_000,
        "theorem2_samples": 10_000,
    },
    "perturb": {"N": 100, "L": 6.0, "eps": 1e-2, "trials": 100, "seed": 42},
}

#: mu beyond this is outside the small-mu regime the bounds describe
SMALL_MU = 0.01


class ConfigError(ValueError):
    pass


class PropertyViolation(RuntimeError):
    pass


# --------------------------------------------------------------------------
# configuration


def _float_list(text, name):
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        vals = [v for v in str(text).split(",") if v.strip()]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError):
        raise ConfigError(f"--{name.replace('_', '-')} expects comma-separated numbers, got {text!r}") from None


def _int(v, name):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be an integer, got {v!r}") from None
    if not f.is_integer():
        raise ConfigError(f"{name} must be an integer, got {v!r}")
    return int(f)


def _num(v, name):
    try:
        f = float(v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number, got {v!r}") from None
    if not math.isfinite(f):
        raise ConfigError(f"{name} must be finite, got {v!r}")
    return f


def resolve_config(command: str, file_cfg: dict, flags: dict) -> dict:
    """Merge defaults, file and flags, then coerce and validate every field."""
    cfg = {**COMMON_DEFAULTS, **DEFAULTS[command], **file_cfg, **flags}
    known = set(COMMON_DEFAULTS) | set(DEFAULTS[command]) | {"config"}
    unknown = sorted(set(file_cfg) - known)
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {', '.join(unknown)}")

    cfg["c_re"] = _num(cfg["c_re"], "c_re")
    cfg["c_im"] = _num(cfg["c_im"], "c_im")
    cfg["seed"] = _int(cfg["seed"], "seed")
    cfg["workers"] = _int(cfg["workers"], "workers")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    fmt = cfg["format"]
    fmts = FORMATS if fmt == "all" else tuple(f.strip() for f in str(fmt).split(","))
    if not fmts or any(f not in FORMATS for f in fmts):
        raise ConfigError(f"format must be 'all' or a comma list from {FORMATS}, got {fmt!r}")
    cfg["format"] = ",".join(f for f in FORMATS if f in fmts) if fmt != "all" else "all"

    if command == "kernel-check":
        if not cfg["c_im"] > 0:
            raise ConfigError("kernel-check needs Im(c) > 0")
        for key in ("a", "a0", "mu"):
            cfg[key] = _num(cfg[key], key)
        if not 0 < cfg["a"] <= cfg["a0"]:
            raise ConfigError("need 0 < a <= a0")
        if cfg["mu"] < 0:
            raise ConfigError("mu must be nonnegative")
        cfg["h_list"] = _float_list(cfg["h_list"], "h_list")
        if not cfg["h_list"] or any(not (h > 0 and math.isfinite(h)) for h in cfg["h_list"]):
            raise ConfigError("h-list entries must be positive and finite")
        cfg["lemma1_samples"] = _int(cfg["lemma1_samples"], "lemma1_samples")
        cfg["theorem2_samples"] = _int(cfg["theorem2_samples"], "theorem2_samples")
        return cfg

    if not cfg["c_re"] > 0:
        raise ConfigError(f"Re(c) must be positive, got {cfg['c_re']!r}")
    cfg["N"] = _int(cfg["N"], "N")
    cfg["L"] = _num(cfg["L"], "L")
    if cfg["N"] < 2:
        raise ConfigError("N must be >= 2")
    if not cfg["L"] > 0:
        raise ConfigError("L must be positive")

    if command == "spectrum":
        cfg["count"] = _int(cfg["count"], "count")
        if not 1 <= cfg["count"] <= cfg["N"] - 1:
            raise ConfigError("count must lie in [1, N-1]")
    elif command == "eigenfunctions":
        cfg["n_list"] = [_int(v, "n_list") for v in _float_list(cfg["n_list"], "n_list")]
        if not cfg["n_list"] or min(cfg["n_list"]) < 0:
            raise ConfigError("n-list must be nonnegative integers")
    elif command == "pseudospectrum":
        w = _float_list(cfg["window"], "window")
        g = [_int(v, "grid") for v in _float_list(cfg["grid"], "grid")]
        if len(w) != 4 or len(g) != 2:
            raise ConfigError("--window needs re0,re1,im0,im1 and --grid needs nx,ny")
        try:
            ps.ComplexWindow(*w, *g)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        cfg["window"], cfg["grid"] = w, g
        lv = _float_list(cfg["levels"], "levels")
        if not lv or any(not (e > 0 and math.isfinite(e)) for e in lv):
            raise ConfigError("levels must be positive and finite")
        cfg["levels"] = sorted(lv, reverse=True)
    elif command == "curve":
        for key in ("b", "p", "eta_min", "tail_fraction"):
            cfg[key] = _num(cfg[key], key)
        if not cfg["b"] > 0:
            raise ConfigError("b must be positive")
        if not cfg["eta_min"] > 0:
            raise ConfigError("eta-min must be positive")
        if cfg["eta_max"] is not None:
            cfg["eta_max"] = _num(cfg["eta_max"], "eta_max")
            if not cfg["eta_max"] > cfg["eta_min"]:
                raise ConfigError("eta-max must exceed eta-min")
        cfg["samples"] = _int(cfg["samples"], "samples")
        if cfg["samples"] < 2:
            raise ConfigError("samples must be >= 2")
        if cfg["spacing"] not in ("log", "linear"):
            raise ConfigError("spacing must be 'log' or 'linear'")
        if not 0 < cfg["tail_fraction"] <= 1:
            raise ConfigError("tail-fraction must lie in (0, 1]")
        cfg["selftest"] = bool(cfg["selftest"])
    elif command == "perturb":
        cfg["eps"] = _num(cfg["eps"], "eps")
        cfg["trials"] = _int(cfg["trials"], "trials")
        if not cfg["eps"] > 0:
            raise ConfigError("eps must be positive")
        if cfg["trials"] < 1:
            raise ConfigError("trials must be >= 1")
    return cfg


def echo(cfg: dict) -> dict:
    return {k: v for k, v in sorted(cfg.items()) if k not in NOT_ECHOED}


class Outputs:
    """Writes only the formats requested by ``--format``."""

    def __init__(self, command: str, cfg: dict):
        self.stem = command.replace("-", "_")
        self.dir = Path(cfg["out"])
        self.formats = FORMATS if cfg["format"] == "all" else tuple(cfg["format"].split(","))
        self.config = echo(cfg)
        self.written: list[Path] = []

    def csv(self, columns, rows):
        if "csv" in self.formats:
            self.written.append(write_csv(self.dir / f"{self.stem}.csv", self.stem, self.config, columns, rows))

    def json(self, doc):
        if "json" in self.formats:
            full = {"command": self.stem, "config": self.config, **doc}
            self.written.append(write_json(self.dir / f"{self.stem}.json", self.stem, full))

    def svg(self, fig: Figure):
        if "svg" in self.formats:
            text = fig.render({"schema": f"pseudospec.{self.stem}/1", "config": self.config})
            self.written.append(atomic_write(self.dir / f"{self.stem}.svg", text))


def _operator(cfg):
    return opr.discretize(complex(cfg["c_re"], cfg["c_im"]), cfg["N"], cfg["L"])


# --------------------------------------------------------------------------
# subcommands


def cmd_spectrum(cfg, out: Outputs) -> int:
    op = _operator(cfg)
    spec = opr.compute_spectrum(op)
    count = cfg["count"]
    lam = spec.eigenvalues[:count]
    idx, rel = opr.match_exact(op.params, spec.eigenvalues, count)
    half_arg = np.angle(op.c) / 2
    arg_err = np.abs(np.angle(lam) - half_arg)
    rows = [
        (k, lam[k].real, lam[k].imag, spec.residuals[k], idx[k], rel[k], arg_err[k], spec.converged[k])
        for k in range(count)
    ]
    out.csv(["index", "re", "im", "backward_error", "n_exact", "rel_error", "arg_error", "converged"], rows)
    summary = {
        "count": count,
        "max_rel_error": float(rel.max()),
        "max_arg_error": float(arg_err.max()),
        "all_rel_below_1e-6": bool(np.all(rel < 1e-6)),
        "trusted_modulus": spec.trusted_modulus,
        "n_converged": int(np.count_nonzero(spec.converged)),
    }
    out.json(summary)
    exact = np.array([opr.exact_eigenvalue(op.params, n) for n in range(count)])
    pts = np.concatenate([lam, exact, [0]])
    fig = Figure(padded_limits(pts.real), padded_limits(pts.imag), "Eigenvalues", "Re z", "Im z")
    ray = np.array([0, exact[-1] * 1.05])
    fig.polyline(ray.real, ray.imag, "#999", dash="4 3")
    fig.scatter(exact.real, exact.imag, PALETTE[1], r=4, marker="cross")
    fig.scatter(lam.real, lam.imag, PALETTE[0])
    fig.legend([("computed", PALETTE[0]), ("c^(1/2)(2n+1)", PALETTE[1])])
    out.svg(fig)
    print(f"spectrum: {count} eigenvalues, max relative error {summary['max_rel_error']:.3e}")
    return EXIT_OK


def cmd_eigenfunctions(cfg, out: Outputs) -> int:
    op = _operator(cfg)
    x = np.concatenate([[op.L], op.interior_points, [-op.L]])
    rows, residuals = [], {}
    fig = Figure((-op.L, op.L), (-1.1, 1.1), "Eigenfunctions (real part)", "x", "Re psi")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", opr.UnderResolvedWarning)
        for k, n in enumerate(cfg["n_list"]):
            lam = opr.exact_eigenvalue(op.params, n)
            v = opr.eigenvector(op, lam)
            exact = opr.exact_eigenfunction(op.params, n, x)
            peak = int(np.argmax(np.abs(v)))
            exact = exact / exact[peak] if exact[peak] != 0 else exact
            residuals[str(n)] = opr.eigenfunction_residual(op, n)
            rows.extend((n, xi, vi.real, vi.imag, ei.real, ei.imag) for xi, vi, ei in zip(x, v, exact))
            fig.polyline(x, v.real, PALETTE[k % len(PALETTE)])
    out.csv(["n", "x", "re_computed", "im_computed", "re_exact", "im_exact"], rows)
    out.json({"residuals": residuals, "warnings": [str(w.message) for w in caught]})
    fig.legend([(f"n={n}", PALETTE[k % len(PALETTE)]) for k, n in enumerate(cfg["n_list"])])
    out.svg(fig)
    print("eigenfunctions: residuals " + ", ".join(f"n={n}: {r:.3e}" for n, r in residuals.items()))
    return EXIT_OK


def cmd_pseudospectrum(cfg, out: Outputs) -> int:
    op = _operator(cfg)
    win = ps.ComplexWindow(*cfg["window"], *cfg["grid"])
    field = ps.compute_field(op, win, workers=cfg["workers"])
    lam = opr.compute_spectrum(op).eigenvalues
    Z = win.points()
    dist = np.min(np.abs(Z[..., None] - lam[None, None, :]), axis=-1)
    disk_ok = bool(np.all(field.sigma_min <= dist + 1e-10))
    nesting_ok = field.nesting_holds(cfg["levels"])
    lines = ps.contours(field, cfg["levels"])
    rows = [(Z[i, j].real, Z[i, j].imag, field.sigma_min[i, j]) for i in range(win.nx) for j in range(win.ny)]
    out.csv(["re", "im", "sigma_min"], rows)
    inside = (lam.real >= win.re_min) & (lam.real <= win.re_max) & (lam.imag >= win.im_min) & (lam.imag <= win.im_max)
    out.json(
        {
            "sigma_min_range": [float(field.sigma_min.min()), float(field.sigma_min.max())],
            "nesting_holds": nesting_ok,
            "disk_bound_holds": disk_ok,
            "polylines_per_level": {repr(e): len(ls) for e, ls in zip(cfg["levels"], lines)},
            "eigenvalues_in_window": lam[inside],
        }
    )
    fig = Figure((win.re_min, win.re_max), (win.im_min, win.im_max), "Pseudospectra", "Re z", "Im z")
    legend = []
    for k, (eps, ls) in enumerate(zip(cfg["levels"], lines)):
        color = PALETTE[k % len(PALETTE)]
        for line in ls:
            fig.polyline(line.real, line.imag, color)
        legend.append((f"{eps:.0e}", color))
    fig.scatter(lam[inside].real, lam[inside].imag, "#000", r=2)
    fig.legend(legend)
    out.svg(fig)
    print(f"pseudospectrum: {win.nx}x{win.ny} grid, min sigma_min {field.sigma_min.min():.3e}")
    if not (disk_ok and nesting_ok):
        print("error: nesting or disk bound violated", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


def _curve_selftest(cfg, out: Outputs) -> int:
    c = complex(cfg["c_re"], cfg["c_im"])
    eta = ps.eta_samples((cfg["eta_min"], cfg["eta_max"] or 1e4), cfg["samples"], cfg["spacing"])
    z = ps.curve_points(cfg["b"], c, cfg["p"], eta)
    trace = ps.synthetic_trace(cfg["b"], cfg["p"], c, eta, np.abs(z) ** (-1.0 / 3.0))
    fit = ps.fit_exponent(trace, cfg["tail_fraction"])
    ok = abs(fit.slope + 1.0 / 3.0) <= 1e-10
    out.json({"selftest": True, "slope": fit.slope, "expected": -1.0 / 3.0, "passed": ok})
    print(f"curve selftest: slope {fit.slope!r}")
    return EXIT_OK if ok else EXIT_PROPERTY


def cmd_curve(cfg, out: Outputs) -> int:
    if cfg["selftest"]:
        return _curve_selftest(cfg, out)
    op = _operator(cfg)
    eta_max = cfg["eta_max"]
    if eta_max is None:
        eta_max = ps.eta_at_modulus(cfg["b"], op.c, cfg["p"], opr.trusted_modulus(op.params, op.N))
        if eta_max <= cfg["eta_min"]:
            raise ConfigError("trust radius is reached before eta-min; pass --eta-max")
        out.config["eta_max"] = eta_max
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ps.TrustRegionWarning)
        trace = ps.trace_curve(op, cfg["b"], cfg["p"], (cfg["eta_min"], eta_max), cfg["samples"], cfg["spacing"])
    rows = [
        (e, z.real, z.imag, s, r, rr, st)
        for e, z, s, r, rr, st in zip(
            trace.eta, trace.z, trace.sigma_min, trace.resolvent_norms, trace.reference_norms, trace.stable
        )
    ]
    out.csv(["eta", "re_z", "im_z", "sigma_min", "resolvent_norm", "reference_norm", "stable"], rows)
    stable_norms = trace.resolvent_norms[trace.stable]
    last = stable_norms[-10:]
    doc = {
        "eta_max": eta_max,
        "n_stable": trace.n_stable,
        "trust_radius": trace.trust_radius,
        "max_stable_norm": float(stable_norms.max()) if stable_norms.size else None,
        "final_stable_increasing": bool(last.size >= 2 and np.all(np.diff(last) > 0)),
        "warnings": [str(w.message) for w in caught],
    }
    fig_pts = np.abs(trace.z)
    fig = Figure(
        padded_limits(np.log10(fig_pts)),
        padded_limits(np.log10(trace.resolvent_norms[np.isfinite(trace.resolvent_norms)])),
        f"Resolvent norm along z = b eta + c eta^{cfg['p']:.4g}",
        "log10 |z|",
        "log10 resolvent norm",
    )
    fig.polyline(np.log10(fig_pts), np.log10(trace.resolvent_norms), PALETTE[0])
    fig.scatter(np.log10(fig_pts[trace.stable]), np.log10(stable_norms), PALETTE[0], r=2.5)
    fig.scatter(np.log10(fig_pts[~trace.stable]), np.log10(trace.resolvent_norms[~trace.stable]), PALETTE[1], r=3, marker="cross")
    code = EXIT_OK
    try:
        fit = ps.fit_exponent(trace, cfg["tail_fraction"])
        doc["fit"] = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
            "n_points": fit.n_points,
            "window": list(fit.window),
        }
        lx = np.log10(np.array(fit.window))
        fig.polyline(lx, (fit.slope * lx * math.log(10) + fit.intercept) / math.log(10), PALETTE[2], dash="5 3")
        print(f"curve: slope {fit.slope:.4f} over {fit.n_points} stable tail samples")
    except FitRefusedError as exc:
        doc["fit"] = None
        doc["fit_refused"] = str(exc)
        print(f"curve: fit refused ({exc})", file=sys.stderr)
        code = EXIT_FIT_REFUSED
    out.json(doc)
    fig.legend([("stable", PALETTE[0]), ("unstable", PALETTE[1]), ("tail fit", PALETTE[2])])
    out.svg(fig)
    return code


def _lemma3_checks():
    res = {}
    i0 = kb.airy_tail_integral(0.0, 1.0)
    res["I(0,1)"] = i0
    res["I(0,1)_rel_error"] = abs(i0 - kb.GAMMA_4_3) / kb.GAMMA_4_3
    pos = {str(x): x * x * kb.airy_tail_integral(x, 1.0) for x in (5.0, 10.0, 20.0)}
    neg = {str(x): x * x * kb.airy_tail_integral(x, 1.0) for x in (-5.0, -10.0, -20.0)}
    res["x2I_positive"] = pos
    res["x2I_negative"] = neg
    ratio = neg["-10.0"] / neg["-20.0"]
    res["negative_ratio_10_20"] = ratio
    failures = []
    if res["I(0,1)_rel_error"] > 1e-6:
        failures.append(f"I(0,1) = {i0!r} differs from Gamma(4/3) = {kb.GAMMA_4_3!r}")
    failures += [f"x={x}: x^2 I(x) = {v!r} > 1" for x, v in pos.items() if v > 1.0]
    if not 0.5 <= ratio <= 2.0:
        failures.append(f"x^2 I(x) ratio between x=-10 and x=-20 is {ratio!r}")
    return res, failures


def cmd_kernel_check(cfg, out: Outputs) -> int:
    c = complex(cfg["c_re"], cfg["c_im"])
    h = sorted(cfg["h_list"], reverse=True)
    mu = cfg["mu"]
    doc: dict = {"warnings": []}
    code = EXIT_OK
    params = [kb.SemiclassicalParams(hh, mu, c, cfg["a"], cfg["a0"]) for hh in h]
    bounds = None
    if mu != 0:
        msg = "mu != 0: the h^(-2/3) power-law fit needs mu = 0; fit skipped"
        if mu > SMALL_MU:
            msg = f"mu = {mu!r} is outside the small-mu regime (mu <= {SMALL_MU}); fit skipped"
        doc["warnings"].append(msg)
        doc["fit"] = None
        print(f"warning: {msg}", file=sys.stderr)
    else:
        try:
            report = kb.scaling_fit(h, c, cfg["a"], cfg["a0"], mu)
            bounds = report.schur_bounds
            slope = report.fitted_slope
            ok = abs(slope + 2.0 / 3.0) <= 0.05
            doc["fit"] = {"slope": slope, "intercept": report.fit.intercept, "residual": report.fit.residual, "passed": ok}
            print(f"kernel-check: slope {slope:.4f} (expected -2/3 +- 0.05)")
            if not ok:
                code = EXIT_PROPERTY
        except FitRefusedError as exc:
            doc["fit"] = None
            doc["fit_refused"] = str(exc)
            print(f"kernel-check: fit refused ({exc})", file=sys.stderr)
            code = EXIT_FIT_REFUSED
    if bounds is None:
        bounds = [kb.schur_bound(pp) for pp in params]
    rows = [(hh, b.S1, b.S2, b.error1, b.error2, b.rel_error) for hh, b in zip(h, bounds)]
    out.csv(["h", "S1", "S2", "error1", "error2", "rel_error"], rows)

    bad1 = kb.lemma1_sweep(cfg["lemma1_samples"], seed=cfg["seed"])
    doc["lemma1"] = {"samples": cfg["lemma1_samples"], "violations": len(bad1)}
    for s, t, e in bad1:
        print(f"lemma1 counterexample: s={s!r} t={t!r} eps={e!r}", file=sys.stderr)
    t2 = kb.theorem2_search(c.imag, cfg["theorem2_samples"], seed=cfg["seed"], a0=cfg["a0"])
    doc["theorem2"] = {
        "samples": t2.samples,
        "found": t2.found,
        "lambda": t2.lambda_const,
        "C": t2.C_const,
        "tried": [{"lambda": lam, "C": C, "violations": v} for lam, C, v in t2.tried],
    }
    if not t2.found:
        print(f"theorem2: no (lambda, C) pair on the grid is valid; best had {t2.violations} violations", file=sys.stderr)
    lemma3, failures = _lemma3_checks()
    doc["lemma3"] = lemma3
    for f in failures:
        print(f"lemma3 failure: {f}", file=sys.stderr)
    if len(bad1) or not t2.found or failures:
        code = EXIT_PROPERTY
    out.json(doc)
    S1 = np.array([b.S1 for b in bounds])
    lh = np.log10(h)
    fig = Figure(padded_limits(lh), padded_limits(np.log10(S1[np.isfinite(S1)])), "Schur bound S1", "log10 h", "log10 S1")
    fig.polyline(lh, np.log10(S1), PALETTE[0])
    fig.scatter(lh, np.log10(S1), PALETTE[0])
    ref = np.log10(S1[0]) - 2.0 / 3.0 * (lh - lh[0])
    fig.polyline(lh, ref, "#999", dash="4 3")
    fig.legend([("S1", PALETTE[0]), ("slope -2/3", "#999")])
    out.svg(fig)
    return code


def cmd_perturb(cfg, out: Outputs) -> int:
    op = _operator(cfg)
    report = ps.perturbation_check(op, cfg["eps"], cfg["trials"], cfg["seed"], strict=False)
    rows = [
        (t, k, mu.real, mu.imag) for t in range(report.trials) for k, mu in enumerate(report.eigenvalues[t])
    ]
    out.csv(["trial", "index", "re", "im"], rows)
    out.json(
        {"eps": report.eps, "trials": report.trials, "seed": report.seed, "max_ratio": report.max_ratio,
         "passed": report.passed, "ratios": report.ratios}
    )  # fmt: skip
    lam = opr.compute_spectrum(op).eigenvalues
    shown = lam[np.abs(lam) <= opr.trusted_modulus(op.params, op.N)]
    pert = report.eigenvalues.ravel()
    pert = pert[np.abs(pert) <= opr.trusted_modulus(op.params, op.N)]
    pts = np.concatenate([shown, pert])
    fig = Figure(padded_limits(pts.real), padded_limits(pts.imag), f"Eigenvalues of H + E, ||E|| = {cfg['eps']:g}", "Re z", "Im z")
    fig.scatter(pert.real, pert.imag, PALETTE[1], r=1)
    fig.scatter(shown.real, shown.imag, "#000", r=2.5)
    fig.legend([("perturbed", PALETTE[1]), ("unperturbed", "#000")])
    out.svg(fig)
    print(f"perturb: max sigma_min/eps = {report.max_ratio:.6f} over {report.trials} trials")
    if not report.passed:
        print(f"error: containment violated (max ratio {report.max_ratio!r})", file=sys.stderr)
        return EXIT_PROPERTY
    return EXIT_OK


HANDLERS = {
    "spectrum": cmd_spectrum,
    "eigenfunctions": cmd_eigenfunctions,
    "pseudospectrum": cmd_pseudospectrum,
    "curve": cmd_curve,
    "kernel-check": cmd_kernel_check,
    "perturb": cmd_perturb,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pseudospec", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS
    for name in COMMANDS:
        p = sub.add_parser(name, argument_default=S)
        p.add_argument("--config", help="JSON file with keys mirroring the flags (flags win)")
        p.add_argument("--c-re", dest="c_re", type=float, help="Re(c)")
        p.add_argument("--c-im", dest="c_im", type=float, help="Im(c)")
        p.add_argument("--format", help="csv, json, svg (comma list) or all")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--workers", type=int, help="processes for the pseudospectrum grid")
        if name != "kernel-check":
            p.add_argument("--N", type=int, help="number of Chebyshev intervals")
            p.add_argument("--L", type=float, help="half-width of the truncated domain")
        if name == "spectrum":
            p.add_argument("--count", type=int, help="eigenvalues to report")
        if name == "eigenfunctions":
            p.add_argument("--n-list", dest="n_list", help="comma list of eigenfunction indices")
        if name == "pseudospectrum":
            p.add_argument("--window", help="re0,re1,im0,im1")
            p.add_argument("--grid", help="nx,ny")
            p.add_argument("--levels", help="comma list of eps levels")
        if name == "curve":
            p.add_argument("--b", type=float)
            p.add_argument("--p", type=float)
            p.add_argument("--eta-min", dest="eta_min", type=float)
            p.add_argument("--eta-max", dest="eta_max", type=float)
            p.add_argument("--samples", type=int)
            p.add_argument("--spacing", choices=("log", "linear"))
            p.add_argument("--tail-fraction", dest="tail_fraction", type=float)
            p.add_argument("--selftest", action="store_true", help="fit synthetic |z|^(-1/3) data")
        if name == "kernel-check":
            p.add_argument("--h-list", dest="h_list", help="comma list of h values")
            p.add_argument("--mu", type=float)
            p.add_argument("--a", type=float)
            p.add_argument("--a0", type=float)
        if name == "perturb":
            p.add_argument("--eps", type=float)
            p.add_argument("--trials", type=int)
    return parser


def _load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    try:
        file_cfg = _load_config_file(args["config"]) if "config" in args else {}
        cfg = resolve_config(command, file_cfg, args)
        return HANDLERS[command](cfg, Outputs(command, cfg))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FitRefusedError as exc:
        print(f"fit refused: {exc}", file=sys.stderr)
        return EXIT_FIT_REFUSED
    except (ps.ContainmentViolation, PropertyViolation) as exc:
        print(f"property violation: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except (linalg.LinalgError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
