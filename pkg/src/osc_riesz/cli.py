"""Command-line runner for the verification suites.

Every suite produces a report

    {"suite", "tool", "version", "params", "grid", "cases", "summary"}

where each case is ``{"inputs", "observed", "bound_or_oracle", "ratio",
"tolerance", "pass"}`` with ``ratio = observed / bound_or_oracle`` and
``pass = ratio <= tolerance``.  The summary holds the overall pass flag,
the worst ratio and ``runtime_ms``.  ``runtime_ms`` is 0 unless
``--timing`` is given, so that repeated runs give byte-identical reports.

Exit status: 0 if every case passes, 1 otherwise, 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from . import __version__
from . import kernel_lab as kl
from . import measure as ms
from . import spectral_ops as so
from . import specfun as sf
from . import spherical as sph

TOOL = "osc-riesz"

SUITES = {
    "specfun": "Laguerre orthonormality, ladder identity and Schlafli Bessel representation",
    "measure": "ball measures, A_p scale invariance, maximal operator and Rubio de Francia weights",
    "heat": "closed-form Laguerre heat kernel against its spectral series",
    "pairing": "twisted Riesz kernel paired with disjoint bumps against the spectral pairing",
    "cz-growth": "per-j growth constants of the twisted kernels are uniform in j",
    "cz-smooth": "per-j smoothness constants of the twisted kernels are uniform in j",
    "lemmas": "calibrated lemma sweeps, elementary inequalities and the angular L2 bound",
    "riesz-demo": "spherical channel assembly of the oscillator Riesz transform against the Hermite route",
    "ap-weight": "A_p constants of power weights and mixed-norm ratio statistics for Rf",
}


def list_suites() -> str:
    """One line per suite: name and what it checks."""
    width = max(len(k) for k in SUITES)
    return "\n".join(f"{k:<{width}} : {v}" for k, v in SUITES.items())


# ---------------------------------------------------------------------------
# report plumbing


def _case(inputs, observed, bound, tolerance=1.0, details=None) -> dict:
    observed = float(observed)
    bound = float(bound)
    ratio = observed / bound if bound != 0 else (0.0 if observed == 0 else math.inf)
    out = {
        "inputs": inputs,
        "observed": observed,
        "bound_or_oracle": bound,
        "ratio": ratio,
        "tolerance": float(tolerance),
        "pass": bool(np.isfinite(ratio) and ratio <= tolerance),
    }
    if details:
        out["details"] = details
    return out


def _error_case(inputs, exc) -> dict:
    return {
        "inputs": inputs,
        "observed": math.nan,
        "bound_or_oracle": math.nan,
        "ratio": math.inf,
        "tolerance": 1.0,
        "pass": False,
        "details": {"error": f"{type(exc).__name__}: {exc}"},
    }


def _jsonable(v):
    """Recursively convert numpy scalars and non-finite floats for strict JSON."""
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


@dataclass
class Pool:
    """Ordered map over independent cells; a failing cell becomes a failing case."""

    threads: int
    _ex: ThreadPoolExecutor | None = field(default=None, repr=False)

    def __enter__(self):
        if self.threads > 1:
            self._ex = ThreadPoolExecutor(max_workers=self.threads)
        return self

    def __exit__(self, *exc):
        if self._ex is not None:
            self._ex.shutdown()

    def map(self, fn: Callable, items) -> list:
        items = list(items)
        if self._ex is None:
            return [fn(x) for x in items]
        return list(self._ex.map(fn, items))

    def cells(self, fn: Callable, items, describe: Callable) -> list[dict]:
        """Run ``fn(item) -> list of cases`` for every item, flattening in order."""

        def guarded(item):
            try:
                return fn(item)
            except (ArithmeticError, ValueError, FloatingPointError) as exc:
                return [_error_case(describe(item), exc)]

        return [c for chunk in self.map(guarded, items) for c in chunk]


def _alphas(args, default):
    return [args.alpha] if args.alpha is not None else list(default)


def _as(args, name, default):
    v = getattr(args, name)
    return default if v is None else v


# ---------------------------------------------------------------------------
# suites


def suite_specfun(args, pool):
    alphas = _alphas(args, (-0.5, 0.0, 0.5, 3.7, 12.0))
    K_orth, K_ladder = 40, 30
    x_ladder = np.linspace(0.05, 6.0, int(120 * args.grid_scale))
    z_vals = (0.1, 1.0, 10.0, 50.0)

    def orth(alpha):
        # exact in u = x^2: int ell_j ell_k x^{2a+1} dx = 1/2 int (.) u^a e^{-u} e^{u} du
        u, w = special.roots_genlaguerre(K_orth + 2, alpha)
        tab = sf.laguerre_fn_table(K_orth, alpha, np.sqrt(u)) * np.exp(0.5 * u)
        gram = 0.5 * (tab * w) @ tab.T
        err = float(np.max(np.abs(gram - np.eye(K_orth + 1))))
        return [_case({"check": "orthonormality", "alpha": alpha, "K": K_orth}, err, 1e-8)]

    def ladder(alpha):
        # left side from scipy's Laguerre polynomials and the explicit normalization
        # c_k = sqrt(2 k! / Gamma(k + a + 1)); right side from the recurrence table
        u = x_ladder**2
        lower = sf.laguerre_fn_table(K_ladder - 1, alpha + 1.0, x_ladder)
        worst_pt, worst_sup = 0.0, 0.0
        for k in range(1, K_ladder + 1):
            logc = 0.5 * (math.log(2.0) + special.gammaln(k + 1.0) - special.gammaln(k + alpha + 1.0))
            lhs = -2.0 * x_ladder * np.exp(logc - 0.5 * u) * special.eval_genlaguerre(k - 1, alpha + 1.0, u)
            rhs = -2.0 * math.sqrt(k) * x_ladder * lower[k - 1]
            scale = np.max(np.abs(rhs))
            diff = np.abs(lhs - rhs)
            worst_sup = max(worst_sup, float(diff.max() / scale))
            away = np.abs(rhs) > 1e-3 * scale
            worst_pt = max(worst_pt, float(np.max(diff[away] / np.abs(rhs[away]))))
        inp = {"check": "ladder", "alpha": alpha, "k_max": K_ladder, "x": [0.05, 6.0, x_ladder.size]}
        return [
            _case(dict(inp, norm="pointwise, |rhs| > 1e-3 sup"), worst_pt, 1e-8),
            _case(dict(inp, norm="sup"), worst_sup, 1e-8),
        ]

    def schlafli(alpha):
        rule = sf.make_pi_alpha_rule(alpha, N=64)
        out = []
        for z in z_vals:
            # e^{-z} z^a int e^{-zs} Pi_a(ds) = ive(a, z)
            val = math.exp(alpha * math.log(z)) * float(np.sum(rule.weights * np.exp(-z * (rule.nodes + 1.0))))
            ref = float(special.ive(alpha, z))
            out.append(_case({"check": "schlafli", "alpha": alpha, "z": z}, abs(val - ref) / ref, 1e-12))
        return out

    cases = []
    cases += pool.cells(orth, alphas, lambda a: {"check": "orthonormality", "alpha": a})
    cases += pool.cells(ladder, alphas, lambda a: {"check": "ladder", "alpha": a})
    cases += pool.cells(schlafli, alphas, lambda a: {"check": "schlafli", "alpha": a})
    grid = {"alpha": alphas, "K_orthonormality": K_orth, "k_max_ladder": K_ladder,
            "x_ladder": [0.05, 6.0, int(x_ladder.size)], "z_schlafli": list(z_vals)}
    return {"alpha": alphas}, grid, cases


def suite_measure(args, pool):
    alphas = _alphas(args, (-0.5, 0.0, 1.0, 3.0))
    p = _as(args, "p", 2.0)
    delta = _as(args, "delta", 0.5)
    n_grid = int(60 * args.grid_scale)

    def equivalence(alpha):
        # mu(B(x, |x-y|)) / (|x-y| (x+y)^{2a+1}) stays within fixed bounds
        def spread(n):
            xs = np.geomspace(1e-3, 1e3, n)
            X, Y = np.meshgrid(xs, xs, indexing="ij")
            m = X != Y
            r = ms.ball_equivalence_ratio(alpha, X[m], Y[m])
            return float(r.max() / r.min())

        s1, s2 = spread(n_grid), spread(2 * n_grid)
        return [
            _case({"check": "ball_equivalence_refinement", "alpha": alpha}, abs(s2 / s1 - 1.0), 0.05,
                  details={"spread_coarse": s1, "spread_fine": s2}),
        ]

    def weights(alpha):
        w = ms.WeightSpec("power", p, delta)
        lo, hi = w.admissible_power_range(alpha)
        out = []
        if not lo < delta < hi:
            return [_case({"check": "ap_power_weight", "alpha": alpha, "p": p, "delta": delta},
                          0.0, 1.0, details={"admissible": False, "range": [lo, hi]})]
        small = ms.ap_constant(alpha, w, ms.dyadic_intervals(-6, 6, from_zero=True))
        big = ms.ap_constant(alpha, w, ms.dyadic_intervals(-12, 12, from_zero=True))
        scaled = ms.ap_constant(alpha, w.scaled(7.5), ms.dyadic_intervals(-12, 12, from_zero=True))
        inp = {"alpha": alpha, "p": p, "delta": delta}
        out.append(_case(dict(inp, check="ap_scale_invariance"), abs(scaled / big - 1.0), 1e-12))
        out.append(_case(dict(inp, check="ap_monotone_in_family"), small, big,
                         details={"A_p_small_family": small, "A_p_large_family": big}))
        return out

    def maximal(alpha):
        # indicator of [0, 1]; balls with x as an endpoint reach the exact supremum
        f = ms.Tabulated(np.array([1e-6, 1.0, 1.0, 2.0]), np.array([1.0, 1.0, 0.0, 0.0]))
        x = 3.0
        e = 2 * alpha + 2
        # sup over r of mu([0,1]) / mu([x - 2r, x]) with x - 2r <= 0, attained at 2r = x
        exact = (1.0 / e) / (x**e / e)
        radii = np.concatenate([np.geomspace(1e-3, 10.0, 200), [x / 2]])
        val = ms.maximal_fn(alpha, f, x, radii)
        tab = ms.Tabulated(np.geomspace(1e-2, 10.0, 120), np.exp(-np.geomspace(1e-2, 10.0, 120)))
        dom = float(np.min(ms.maximal_on_grid(alpha, tab) - tab.f))
        return [
            _case({"check": "maximal_indicator", "alpha": alpha, "x": x}, abs(val - exact) / exact, 1e-12,
                  details={"value": val, "exact": exact}),
            _case({"check": "maximal_dominates", "alpha": alpha}, max(0.0, -dom), 1e-15),
        ]

    def rdf(alpha):
        grid = np.geomspace(1e-2, 20.0, 160)
        B = ms.maximal_norm_estimate(alpha, p, grid, iters=15, seed=args.seed)
        h = ms.Tabulated(grid, np.exp(-((np.log(grid) - 0.5) ** 2)))
        rh = ms.rubio_de_francia_weight(alpha, p, h, n_terms=12, norm_bound=B)
        a1 = ms.rdf_a1_check(alpha, rh)
        below = float(np.min(rh.values - h.f))
        return [
            _case({"check": "rdf_a1", "alpha": alpha, "p": p, "n_terms": 12}, a1, 1.0 + 1e-12,
                  details={"norm_estimate": B}),
            _case({"check": "rdf_dominates_h", "alpha": alpha}, max(0.0, -below), 1e-15),
        ]

    cases = []
    for fn, name in ((equivalence, "ball_equivalence"), (weights, "ap"), (maximal, "maximal"), (rdf, "rdf")):
        cases += pool.cells(fn, alphas, lambda a, name=name: {"check": name, "alpha": a})
    grid = {"alpha": alphas, "ball_grid": [1e-3, 1e3, n_grid], "p": p, "delta": delta,
            "ap_families": ["dyadic(-6,6)+shifted+unions+from_zero", "dyadic(-12,12)+shifted+unions+from_zero"]}
    return {"alpha": alphas, "p": p, "delta": delta, "seed": args.seed}, grid, cases


def suite_heat(args, pool):
    alphas = _alphas(args, (-0.5, 0.0, 2.5))
    ts = np.geomspace(0.05, 2.0, 5)
    xs = np.geomspace(0.1, 4.0, int(6 * args.grid_scale))
    cells = [(a, float(t)) for a in alphas for t in ts]

    def cell(item):
        alpha, t = item
        out = []
        for x in xs:
            for y in xs:
                ref, K, dps = so.heat_kernel_reference(alpha, t, float(x), float(y))
                val = so.heat_kernel_closed(alpha, t, float(x), float(y)).value
                out.append(_case({"alpha": alpha, "t": t, "x": float(x), "y": float(y)},
                                 abs(val - ref) / abs(ref), 1e-6, details={"K": K, "dps": dps}))
        return out

    cases = pool.cells(cell, cells, lambda it: {"alpha": it[0], "t": it[1]})
    grid = {"alpha": alphas, "t": [float(t) for t in ts], "x": [float(x) for x in xs], "y": [float(x) for x in xs]}
    return {"alpha": alphas}, grid, cases


def suite_pairing(args, pool):
    alpha = args.alpha if args.alpha is not None else 0.0
    a_vals = [args.a] if args.a is not None else [1.0, 1.5]
    js = [j for j in (0, 1, 5, 12) if args.jmax is None or j <= args.jmax]
    cells = [(fc, gc, a, j) for fc, gc in kl.PAIRING_BUMPS for a in a_vals for j in js]

    def cell(item):
        fc, gc, a, j = item
        f, fs = kl.bump(*fc)
        g, gs = kl.bump(*gc)
        tw = so.TwistParams(a, j)
        kern = kl.kernel_pairing("riesz", alpha, tw, f, fs, g, gs, N=40, n=96)
        spec, K, change = so.converged_pairing("riesz", alpha, tw, f, fs, g, gs)
        inp = {"f": list(fc), "g": list(gc), "alpha": alpha, "a": a, "j": j}
        return [_case(inp, abs(kern - spec) / abs(spec), 1e-4,
                      details={"kernel": kern, "spectral": spec, "K": K, "spectral_change": change})]

    cases = pool.cells(cell, cells, lambda it: {"f": list(it[0]), "g": list(it[1]), "a": it[2], "j": it[3]})
    grid = {"bumps": [[list(fc), list(gc)] for fc, gc in kl.PAIRING_BUMPS], "a": a_vals, "j": js,
            "bump": "exp(-1/(1-t^2)), t=(x-center)/half_width", "kernel_quadrature": "Gauss-Legendre 40x40, xi trapezoid n=96",
            "spectral": "K doubled from 2000 to 32000 until relative change <= 1e-7"}
    return {"alpha": alpha, "a": a_vals, "j": js}, grid, cases


def _cz_suite(quantity, args, pool):
    alphas = _alphas(args, (-0.5, 0.0))
    a_vals = [args.a] if args.a is not None else [1.0, 1.5]
    j_max = args.jmax if args.jmax is not None else 40
    tol = args.tol_ratio
    n_x = max(2, int(round(12 * args.grid_scale)))
    if args.exclusion < 0.05:
        grid_pts = kl.near_diagonal_grid(n_x=n_x + 2, exclusion=args.exclusion)
        grid_name = "near_diagonal"
    else:
        grid_pts = kl.default_sweep_grid(n_x=n_x)
        grid_name = "default"
    sweep = kl.cz_growth_sweep if quantity == "growth" else kl.cz_smooth_sweep
    cases, grids = [], []
    for alpha in alphas:
        for a in a_vals:
            inp = {"alpha": alpha, "a": a, "kernel": args.kernel}
            try:
                rep = sweep(alpha, a, j_max, grid=grid_pts, tol_ratio=tol, kind=args.kernel,
                            exclusion=args.exclusion, mapper=pool.map)
            except (ArithmeticError, ValueError) as exc:
                cases.append(_error_case(inp, exc))
                continue
            c = rep.constants
            cmin = float(c.min())
            for (j, cj), am in zip(rep.per_j, rep.details["argmax"]):
                cases.append(_case(dict(inp, j=j), cj, cmin, tolerance=tol, details={"argmax": am}))
            cases.append(_case(dict(inp, check="last_over_first"), c[-1], c[0], tolerance=1.5))
            slope_bound = rep.details["trend_slope_bound"]
            cases.append(_case(dict(inp, check="log_trend_slope"), math.exp(rep.details["trend_slope"]),
                               math.exp(slope_bound), details={"slope": rep.details["trend_slope"],
                                                               "slope_bound": slope_bound}))
            grids.append({"alpha": alpha, "a": a, "per_j": [[j, cj] for j, cj in rep.per_j]})
    if quantity == "smooth":
        fd_js = [j for j in (0, 1, 5, 20, 40) if j <= j_max and (args.kernel == "riesz" or j >= 1)]
        pts = ((0.5, 1.3), (2.0, 1.1), (4.0, 6.0))
        items = [(alpha, a, j, x, y) for alpha in alphas for a in a_vals for j in fd_js for x, y in pts]

        def fd(item):
            alpha, a, j, x, y = item
            ex, ey = kl.gradient_fd_check(args.kernel, alpha, so.TwistParams(a, j), x, y)
            return [_case({"check": "gradient_fd", "alpha": alpha, "a": a, "j": j, "x": x, "y": y},
                          max(ex, ey), 1e-3)]

        cases += pool.cells(fd, items, lambda it: {"check": "gradient_fd", "j": it[2]})
    xs, ys = grid_pts
    grid = {"name": grid_name, "x": [float(v) for v in xs], "y": [float(v) for v in ys],
            "diagonal_exclusion": args.exclusion, "per_j": grids}
    params = {"alpha": alphas, "a": a_vals, "j_max": j_max, "tol_ratio": tol, "kernel": args.kernel,
              "exclusion": args.exclusion, "grid_scale": args.grid_scale}
    return params, grid, cases


def suite_cz_growth(args, pool):
    return _cz_suite("growth", args, pool)


def suite_cz_smooth(args, pool):
    return _cz_suite("smooth", args, pool)


def suite_lemmas(args, pool):
    sweeps = pool.map(lambda f: f(), [kl.lemma_a_sweep, kl.lemma0_sweep, kl.lemma_breve_sweep])
    cases = []
    for sw in sweeps:
        for c in sw.cases:
            inputs = {k: v for k, v in c.items() if k not in ("ratio", "calibrated")}
            inputs["lemma"] = sw.lemma
            cases.append(_case(inputs, c["calibrated"], 1.0, tolerance=1.0 + sw.slack,
                               details={"raw_ratio": c["ratio"]}))
    el = kl.elementary_checks(seed=args.seed)
    for key in ("gammas_worst_ratio", "funcion_h_worst_ratio", "des2_worst_ratio"):
        cases.append(_case({"check": key}, el.details[key], 1.0, tolerance=1.0 + 1e-12))
    cases.append(_case({"check": "des1_identity_max_abs"}, el.details["des1_identity_max_abs"], 1e-10))
    cases.append(_case({"check": "des1_violations"}, el.details["des1_violations"], 1.0, tolerance=0.0))
    # L2 bound of (alpha + a j) T^{alpha + a j}: stable within a factor 2 over j
    alpha = args.alpha if args.alpha is not None else 0.0
    a_vals = [args.a] if args.a is not None else [1.0, 1.5]
    j_max = args.jmax if args.jmax is not None else 40
    l2 = {}
    for a in a_vals:
        js = list(range(1, j_max + 1))
        norms = pool.map(lambda j: so.angular_l2_norm(alpha + a * j), js)
        nmin = min(norms)
        l2[str(a)] = [[j, v] for j, v in zip(js, norms)]
        for j, v in zip(js, norms):
            cases.append(_case({"check": "angular_l2_norm", "alpha": alpha, "a": a, "j": j}, v, nmin, tolerance=2.0))
    grid = {
        "anchors": {sw.lemma: sw.anchors for sw in sweeps},
        "calibration_constants": {sw.lemma: sw.constants for sw in sweeps},
        "slack": kl.CALIBRATION_SLACK,
        "angular_l2": l2,
    }
    return {"alpha": alpha, "a": a_vals, "j_max": j_max, "seed": args.seed}, grid, cases


def _sample_points(n, count, seed):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.2, 4.0, count)
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return r[:, None] * v


def suite_riesz_demo(args, pool):
    n = args.n if args.n is not None else 2
    if n not in (2, 3):
        raise UsageError("riesz-demo supports n = 2 or 3")
    D = 12 if n == 2 else 6
    f = sph.random_band_limited(n, D, args.seed)
    dec = sph.decompose(f, n, D, sph.radial_rule_for_band(n, D))
    out = sph.oscillator_riesz(dec, K=D)
    x = _sample_points(n, 200, args.seed + 1)
    chan = out.magnitude(x)
    oracle = sph.hermite_oracle_riesz(f, x)
    cases = [
        _case({"x": [float(v) for v in pt]}, abs(c - o) / o, 1e-6, details={"spherical": float(c), "hermite": float(o)})
        for pt, c, o in zip(x, chan, oracle)
    ]
    grid = {"n": n, "degree": D, "points": 200, "point_radius": [0.2, 4.0],
            "rng": "numpy default_rng (PCG64); coefficients seed, points seed + 1"}
    return {"n": n, "seed": args.seed, "degree": D}, grid, cases


def suite_ap_weight(args, pool):
    n = args.n if args.n is not None else 2
    if n not in (2, 3):
        raise UsageError("ap-weight supports n = 2 or 3")
    alpha = n / 2 - 1
    ps = [args.p] if args.p is not None else [1.5, 2.0, 3.0]
    deltas = [args.delta] if args.delta is not None else [-0.5, 0.0, 1.0]
    n_samples = 50
    D = 12 if n == 2 else 6
    base = sph.uniform_radial_rule(r_max=10.0, panels=40, N=16)
    rule = sph.radial_rule_for_band(n, D, base=base)

    def sample(i):
        f = sph.random_band_limited(n, D, args.seed + i)
        dec = sph.decompose(f, n, D, rule)
        out = sph.oscillator_riesz(dec, K=D)
        m = rule.w > 0
        e_rf = np.zeros(rule.r.size)
        e_rf[m] = out.sphere_l2(rule.r[m]) ** 2
        return dec, e_rf

    samples = pool.map(sample, range(n_samples))
    cases, dist = [], {}
    for p in ps:
        for delta in deltas:
            w = ms.WeightSpec("power", p, delta)
            lo, hi = w.admissible_power_range(alpha)
            admissible = lo < delta < hi
            ap = None
            if admissible:
                ap = ms.ap_constant(alpha, w, ms.dyadic_intervals(-12, 12, from_zero=True))
            ratios = np.array([sph.mixed_norm(d, p, w, energy=e) / sph.mixed_norm(d, p, w) for d, e in samples])
            med = float(np.median(ratios))
            q = np.quantile(ratios, [0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0])
            key = f"p={p},delta={delta}"
            dist[key] = [float(v) for v in ratios]
            cases.append(_case({"p": p, "delta": delta, "alpha": alpha}, float(ratios.max()), med, tolerance=10.0,
                               details={"admissible": admissible, "admissible_range": [lo, hi], "A_p_lower_bound": ap,
                                        "quantiles_0_10_25_50_75_90_100": [float(v) for v in q]}))
    grid = {"n": n, "degree": D, "samples": n_samples, "seeds": [args.seed, args.seed + n_samples - 1],
            "radial_rule": "composite Gauss-Legendre on [0, 10], 40 panels x 16", "ratios": dist}
    return {"n": n, "p": ps, "delta": deltas, "seed": args.seed}, grid, cases


SUITE_FNS = {
    "specfun": suite_specfun,
    "measure": suite_measure,
    "heat": suite_heat,
    "pairing": suite_pairing,
    "cz-growth": suite_cz_growth,
    "cz-smooth": suite_cz_smooth,
    "lemmas": suite_lemmas,
    "riesz-demo": suite_riesz_demo,
    "ap-weight": suite_ap_weight,
}


# ---------------------------------------------------------------------------
# entry points


class UsageError(Exception):
    pass


def resolve_threads(flag: int | None) -> int:
    """--threads, else OSC_RIESZ_THREADS, else the CPU count."""
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("OSC_RIESZ_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"OSC_RIESZ_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


def run(args) -> dict:
    """Execute one suite and return its report."""
    start = time.perf_counter()
    with Pool(resolve_threads(args.threads)) as pool:
        params, grid, cases = SUITE_FNS[args.suite](args, pool)
    elapsed = int(round(1000 * (time.perf_counter() - start)))
    ratios = [c["ratio"] for c in cases]
    summary = {
        "pass": bool(cases) and all(c["pass"] for c in cases),
        "worst_ratio": max(ratios) if ratios else math.nan,
        "cases": len(cases),
        "failed": sum(not c["pass"] for c in cases),
        "runtime_ms": elapsed if args.timing else 0,
    }
    report = {
        "suite": args.suite,
        "tool": TOOL,
        "version": __version__,
        "params": dict(params, seed=args.seed),
        "grid": grid,
        "cases": cases,
        "summary": summary,
    }
    return _jsonable(report)


def to_json(report: dict) -> str:
    return json.dumps(report, indent=1, sort_keys=True, allow_nan=False) + "\n"


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["suite", "index", "inputs", "observed", "bound_or_oracle", "ratio", "tolerance", "pass"])
    for i, c in enumerate(report["cases"]):
        wr.writerow([report["suite"], i, json.dumps(c["inputs"], sort_keys=True), repr(c["observed"]),
                     repr(c["bound_or_oracle"]), repr(c["ratio"]), repr(c["tolerance"]), c["pass"]])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog=TOOL,
        description="Run a numerical verification suite for the oscillator Riesz transform and write a report.",
        epilog="Exit status: 0 all cases pass, 1 some case fails, 2 usage error.",
    )
    ap.add_argument("--suite", choices=list(SUITES), help="suite to run")
    ap.add_argument("--list", action="store_true", help="list the suites and exit")
    ap.add_argument("--alpha", type=float, help="Laguerre order (> -1/2 where kernels are involved); default per suite")
    ap.add_argument("--a", type=float, help="twist exponent a >= 1; default {1, 1.5}")
    ap.add_argument("--jmax", type=int, help="largest twist index j (default 40)")
    ap.add_argument("--p", type=float, help="Lebesgue exponent p > 1")
    ap.add_argument("--delta", type=float, help="power-weight exponent")
    ap.add_argument("--n", type=int, help="space dimension for riesz-demo and ap-weight (2 or 3)")
    ap.add_argument("--seed", type=int, default=7, help="RNG seed (default 7)")
    ap.add_argument("--grid-scale", type=float, default=1.0, help="multiplies the default grid sizes (default 1)")
    ap.add_argument("--tol-ratio", type=float, default=3.0, help="max/min tolerance for CZ sweeps (default 3)")
    ap.add_argument("--kernel", choices=["riesz", "angular"], default="riesz", help="kernel for CZ sweeps")
    ap.add_argument("--exclusion", type=float, default=0.05,
                    help="relative diagonal exclusion for CZ sweeps; below 0.05 a near-diagonal grid is used")
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--threads", type=int, help="worker threads (default OSC_RIESZ_THREADS or CPU count)")
    ap.add_argument("--timing", action="store_true", help="record wall time in summary.runtime_ms")
    return ap


def _validate(ap, args):
    if args.alpha is not None and args.alpha < -0.5:
        ap.error("--alpha must be >= -0.5")
    if args.a is not None and args.a < 1:
        ap.error("--a must be >= 1")
    if args.jmax is not None and not 0 <= args.jmax <= 200:
        ap.error("--jmax must lie in [0, 200]")
    if args.p is not None and not args.p > 1:
        ap.error("--p must exceed 1")
    if args.n is not None and args.n not in (2, 3):
        ap.error("--n must be 2 or 3")
    if not args.grid_scale > 0:
        ap.error("--grid-scale must be positive")
    if not args.tol_ratio >= 1:
        ap.error("--tol-ratio must be >= 1")
    if not 0 < args.exclusion < 1:
        ap.error("--exclusion must lie in (0, 1)")
    if args.threads is not None and args.threads < 1:
        ap.error("--threads must be >= 1")
    if args.suite == "cz-smooth" or args.suite == "cz-growth":
        if args.kernel == "angular" and args.jmax == 0:
            ap.error("the angular kernel needs --jmax >= 1")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.list:
        print(list_suites())
        return 0
    if args.suite is None:
        ap.error("--suite is required (see --list)")
    _validate(ap, args)
    try:
        report = run(args)
    except UsageError as exc:
        ap.error(str(exc))
    text = to_json(report) if args.format == "json" else to_csv(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    s = report["summary"]
    print(f"{args.suite}: {'PASS' if s['pass'] else 'FAIL'} ({s['failed']}/{s['cases']} failed, "
          f"worst ratio {s['worst_ratio']})", file=sys.stderr)
    return 0 if s["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
