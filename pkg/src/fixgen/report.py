"""Experiment configs, stage runners and report files.

A config is one JSON document.  Stages present in it are run in a fixed
order; every random draw is seeded from ``seed``.  ``report.json`` holds the
verdicts and parameter trails (no timings, so reruns compare byte for
byte); timings go to ``timing.json``.
"""
from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import jsonschema
import numpy as np

from .bodies import BODY_KINDS, body_from_json
from .constructions import (boundary_fixed_point_perturbation, build_boundary_drift, build_drift_perturbation,
                            build_fixed_point_perturbation, _jsonable)
from .dynamics import km_fixed_point, km_orbit, picard_orbit
from .errors import ConfigError, FixgenError
from .geometry import Subspace
from .lur import contraction_profile, convexity_modulus, iterate_to_fixed_point
from .maps import MAP_KINDS, map_from_json, random_composed_map
from .metric import DEFAULT_TERMS, ThetaSequence
from .somewhat_bounded import SBCertificate, check_covering, verify_certificate

STAGES = ("certify", "perturb_fix", "perturb_drift", "boundary_drift", "orbit", "lur", "demo_01law")

_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_body = {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": list(BODY_KINDS)}}}
_map = {"type": "object", "required": ["kind"], "properties": {"kind": {"enum": list(MAP_KINDS)}}}
_subspace = {"oneOf": [
    {"type": "array", "items": _vector},
    {"type": "object", "required": ["axes"], "properties": {"axes": {"type": "array", "items": {"type": "integer"}}}},
]}
_cert = {
    "type": "object",
    "required": ["x0", "subspace", "alpha", "beta"],
    "properties": {"x0": _vector, "subspace": _subspace,
                   "alpha": {"type": "number", "exclusiveMinimum": 0},
                   "beta": {"type": "number", "exclusiveMinimum": 0}},
}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 0}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "theta_terms": {"type": "integer", "minimum": 1},
        "body": _body,
        "certificate": _cert,
        "map": _map,
        "certify": {"type": "object", "additionalProperties": False, "properties": {
            "samples": _count, "lambda": {"type": "array", "items": _pos}, "covering_samples": _count}},
        "perturb_fix": {"type": "object", "additionalProperties": False, "required": ["eps"], "properties": {
            "eps": _pos, "invariance_samples": _count, "lipschitz_pairs": _count}},
        "perturb_drift": {"type": "object", "additionalProperties": False, "required": ["eps", "r"], "properties": {
            "eps": _pos, "r": _pos, "lipschitz_pairs": _count}},
        "boundary_drift": {"type": "object", "additionalProperties": False, "required": ["delta"], "properties": {
            "delta": _pos, "p": {"type": "integer", "minimum": 1}, "tol": _pos}},
        "orbit": {"type": "object", "additionalProperties": False, "required": ["x0", "steps"], "properties": {
            "x0": _vector, "steps": _count, "scheme": {"enum": ["picard", "km"]}}},
        "lur": {"type": "object", "additionalProperties": False, "properties": {
            "starts": {"type": "integer", "minimum": 1}, "start_radius": _pos, "tol": _pos,
            "k_budget": {"type": "integer", "minimum": 1}, "perturb": {"type": "boolean"},
            "eps": _pos, "delta": _pos}},
        "demo_01law": {"type": "object", "additionalProperties": False,
                       "required": ["certified", "unbounded"], "properties": {
            "certified": {"type": "object", "required": ["body", "certificate"],
                          "properties": {"body": _body, "certificate": _cert}},
            "unbounded": {"type": "object", "required": ["body"], "properties": {"body": _body}},
            "seeds": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "radii": {"type": "array", "items": _pos},
            "eps": _pos, "invariance_samples": _count}},
    },
}

_NEEDS = {
    "certify": ("body", "certificate"),
    "perturb_fix": ("body", "certificate", "map"),
    "perturb_drift": ("body", "map"),
    "boundary_drift": ("body", "certificate", "map"),
    "orbit": ("body", "map"),
    "lur": ("body", "map"),
}


def _pointer(path) -> str:
    return "".join("/" + str(p) for p in path)


def validate_config(config: dict) -> dict:
    """Schema check; raises ``ConfigError`` carrying a JSON pointer."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: (len(e.absolute_path), str(e.absolute_path)),
                    reverse=True)
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _pointer(err.absolute_path))
    for stage, keys in _NEEDS.items():
        if stage in config:
            for k in keys:
                if k not in config:
                    raise ConfigError(f"stage {stage!r} needs {k!r}", "/" + k)
    return config


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            config = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return validate_config(config)


def _body(spec, dim, pointer):
    try:
        body = body_from_json(spec, dim)
    except (FixgenError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), pointer) from exc
    if body.dim != dim:
        raise ConfigError(f"body has dimension {body.dim}, config says {dim}", pointer)
    return body


def _cert(spec, dim, pointer):
    try:
        return SBCertificate.from_json(spec, dim)
    except (FixgenError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), pointer) from exc


class Context:
    """Objects shared by the stages of one run."""

    def __init__(self, config: dict):
        self.config = config
        self.dim = config["dim"]
        self.seed = config.get("seed", 0)
        self.theta_terms = config.get("theta_terms", DEFAULT_TERMS)
        self.body = _body(config["body"], self.dim, "/body") if "body" in config else None
        self.cert = _cert(config["certificate"], self.dim, "/certificate") if "certificate" in config else None
        self._map_spec = config.get("map")
        self.theta = ThetaSequence(self.body) if self.body is not None else None

    def fresh_map(self):
        """A new map object per stage, so sampled anchor logs never leak
        between stages."""
        try:
            return map_from_json(self._map_spec, self.body)
        except (FixgenError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "/map") from exc


# ---------------------------------------------------------------------------
# stages; each returns (summary dict, {csv name: (header, rows)}, passed)


def stage_certify(ctx: Context, opts: dict):
    v = verify_certificate(ctx.body, ctx.cert, opts.get("samples", 2000), ctx.seed)
    out = {"certificate": v.to_json(), "covering": []}
    tables = {}
    passed = v.passed
    for lam in opts.get("lambda", [1.0]):
        cv = check_covering(ctx.body, ctx.cert, lam, opts.get("covering_samples", 10_000), ctx.seed)
        out["covering"].append({"lambda": lam, "params": cv.params.to_json(), **cv.to_json()})
        passed &= cv.passed
        tab = cv.table
        rows = [(i, d, p, int(rd)) for i, (d, p, rd) in
                enumerate(zip(tab["distance"], tab["projection_norm"], tab["radial"]))]
        tables[f"covering_lambda_{lam:g}"] = (["i", "distance", "projection_norm", "radial"], rows)
    return out, tables, passed


def _check_rows(rep):
    return (["name", "measured", "bound", "relation", "pass"],
            [(c.name, c.measured, c.bound, c.relation, int(c.passed)) for c in rep.checks])


def stage_perturb_fix(ctx: Context, opts: dict):
    rep = build_fixed_point_perturbation(ctx.fresh_map(), opts["eps"], ctx.cert, ctx.theta, ctx.body,
                                         rng_seed=ctx.seed, invariance_samples=opts.get("invariance_samples", 1000),
                                         theta_terms=ctx.theta_terms, lipschitz_pairs=opts.get("lipschitz_pairs", 0))
    out = rep.to_json()
    if rep.extras.get("fixed_point") is not None:
        out["fixed_point"] = rep.extras["fixed_point"].tolist()
    return out, {"perturb_fix_checks": _check_rows(rep)}, rep.passed


def stage_perturb_drift(ctx: Context, opts: dict):
    rep = build_drift_perturbation(ctx.fresh_map(), opts["eps"], opts["r"], ctx.theta, ctx.body,
                                   theta_terms=ctx.theta_terms, rng_seed=ctx.seed,
                                   lipschitz_pairs=opts.get("lipschitz_pairs", 0))
    return rep.to_json(), {"perturb_drift_checks": _check_rows(rep)}, rep.passed


def stage_boundary_drift(ctx: Context, opts: dict):
    rep = build_boundary_drift(ctx.fresh_map(), opts["delta"], opts.get("p", 1), ctx.theta, ctx.body, ctx.cert,
                               boundary_tol=opts.get("tol", 1e-3), theta_terms=ctx.theta_terms, rng_seed=ctx.seed)
    return rep.to_json(), {"boundary_drift_checks": _check_rows(rep)}, rep.passed


def _trace_rows(trace):
    d = trace.points.shape[1]
    header = ["k"] + [f"x{i + 1}" for i in range(d)] + ["residual", "boundary_distance"]
    return header, [(k, *p.tolist(), r, b) for k, p, r, b in trace.rows()]


def stage_orbit(ctx: Context, opts: dict):
    f = ctx.fresh_map()
    x0 = np.asarray(opts["x0"], dtype=float)
    if x0.shape != (ctx.dim,):
        raise ConfigError(f"start point has length {x0.shape[0]}, expected {ctx.dim}", "/orbit/x0")
    scheme = opts.get("scheme", "picard")
    run = picard_orbit if scheme == "picard" else km_orbit
    tr = run(f, x0, opts["steps"])
    res = tr.residuals
    out = {"scheme": scheme, "steps": opts["steps"], "final_point": tr.points[-1].tolist(),
           "final_residual": float(res[-1]), "final_boundary_distance": float(tr.boundary_distances[-1])}
    # residuals of both schemes are non-increasing for nonexpansive maps
    out["residuals_monotone"] = bool(np.all(np.diff(res) <= 1e-9))
    return out, {"orbit": _trace_rows(tr)}, out["residuals_monotone"]


def stage_lur(ctx: Context, opts: dict):
    f = ctx.fresh_map()
    body = ctx.body
    params = {}
    if opts.get("perturb", False):
        if ctx.cert is None:
            raise ConfigError("perturbation before the milestone chain needs a certificate", "/lur/perturb")
        fix, drift = boundary_fixed_point_perturbation(f, opts.get("eps", 0.25), opts.get("delta", 0.1), ctx.cert,
                                                       ctx.theta, body, rng_seed=ctx.seed)
        f = drift.perturbed
        params["perturbation"] = {"fixed_point_stage": fix.passed, "drift_stage": drift.passed}
    rng = np.random.default_rng(ctx.seed)
    starts = body.sample(rng, opts.get("starts", 10), opts.get("start_radius", 3.0))
    fixed = []
    for x in starts:
        km = km_fixed_point(f, x, tol=1e-12)
        if not km.found:
            km = km_fixed_point(f, x, tol=1e-9)
        fixed.append(km.point)
    if any(p is None for p in fixed):
        out = {"pass": False, "reason": "no fixed point found by KM", **params}
        return out, {}, False
    F = np.array(fixed)
    x_fix = F[0]
    spread = float(np.linalg.norm(F - x_fix, axis=1).max())
    profile = contraction_profile(convexity_modulus(body), x_fix)
    rows, worst, ok = [], 0.0, True
    for s, x in enumerate(starts):
        ch = iterate_to_fixed_point(f, x, x_fix, profile, tol=opts.get("tol", 1e-6),
                                    k_budget=opts.get("k_budget", 10_000))
        for i, m in enumerate(ch.chain):
            rows.append((s, i, m.k, m.r, m.r_k, m.alpha, m.alpha_gap, m.factor))
            worst = max(worst, m.factor - m.alpha)
            ok &= m.monotone and m.alpha_gap > 0.0
    bd = float(body.boundary_distance(x_fix))
    passed = ok and worst <= 0.0 and spread <= 1e-5 and bd <= 1e-5
    out = {"pass": passed, "fixed_point": x_fix.tolist(), "start_spread": spread, "boundary_distance": bd,
           "worst_factor_excess": worst, "modulus": profile.modulus.method, **params}
    return out, {"lur_chain": (["start", "milestone", "k", "r", "r_k", "alpha", "alpha_gap", "factor"], rows)}, passed


def run_demo_01law(config: dict):
    """Fixed-point perturbations of random maps on a certified body next to
    drift perturbations on a body with unbounded directions."""
    dim = config["dim"]
    opts = config["demo_01law"]
    seed = config.get("seed", 0)
    terms = config.get("theta_terms", DEFAULT_TERMS)
    cb = _body(opts["certified"]["body"], dim, "/demo_01law/certified/body")
    cert = _cert(opts["certified"]["certificate"], dim, "/demo_01law/certified/certificate")
    ub = _body(opts["unbounded"]["body"], dim, "/demo_01law/unbounded/body")
    if ub.unbounded_direction(Subspace([], dim=dim)) is None:
        raise ConfigError("body offers no unbounded direction", "/demo_01law/unbounded/body")
    seeds = opts.get("seeds", list(range(20)))
    radii = opts.get("radii", [1.0, 2.0, 4.0])
    eps = opts.get("eps", 0.25)
    th_c, th_u = ThetaSequence(cb), ThetaSequence(ub)
    rows, fixed_ok, excl_ok = [], 0, 0
    for s in seeds:
        f = random_composed_map(np.random.default_rng(s), cb)
        rep = build_fixed_point_perturbation(f, eps, cert, th_c, cb, rng_seed=s, theta_terms=terms,
                                             invariance_samples=opts.get("invariance_samples", 200))
        found = rep.check("km_residual").passed
        fixed_ok += found
        rows.append((s, "certified", "", int(found), rep.distance.upper))
        all_r = True
        for r in radii:
            u = random_composed_map(np.random.default_rng(s), ub)
            dr = build_drift_perturbation(u, eps, r, th_u, ub, theta_terms=terms, rng_seed=s)
            got = dr.check("exclusion_margin").passed
            all_r &= got
            rows.append((s, "unbounded", r, int(got), dr.distance.upper))
        excl_ok += all_r
    n = len(seeds)
    out = {"seeds": n, "fixed_points_found": fixed_ok, "exclusions_issued": excl_ok, "radii": radii,
           "pass": fixed_ok == n and excl_ok == n}
    return out, {"demo_01law": (["seed", "body", "r", "success", "distance_upper"], rows)}, out["pass"]


RUNNERS = {
    "certify": stage_certify,
    "perturb_fix": stage_perturb_fix,
    "perturb_drift": stage_perturb_drift,
    "boundary_drift": stage_boundary_drift,
    "orbit": stage_orbit,
    "lur": stage_lur,
}


def run_suite(config: dict, stages=None):
    """Run the requested stages (default: all present in the config).

    Returns ``(report, tables, timings)``; ``report["pass"]`` is the
    conjunction of the stage verdicts.
    """
    config = validate_config(config)
    wanted = [s for s in STAGES if s in config] if stages is None else list(stages)
    for s in wanted:
        if s not in config:
            raise ConfigError(f"config has no {s!r} section", "/" + s)
    ctx = Context(config) if any(s != "demo_01law" for s in wanted) else None
    report = {"dim": config["dim"], "seed": config.get("seed", 0),
              "theta_terms": config.get("theta_terms", DEFAULT_TERMS), "stages": {}}
    tables, timings = {}, {}
    passed = True
    for s in wanted:
        t0 = time.perf_counter()
        try:
            if s == "demo_01law":
                out, tab, ok = run_demo_01law(config)
            else:
                out, tab, ok = RUNNERS[s](ctx, config[s])
        except ConfigError:
            raise
        except FixgenError as exc:
            out, tab, ok = {"pass": False, "error": type(exc).__name__, "message": str(exc)}, {}, False
        timings[s] = time.perf_counter() - t0
        out = _jsonable(out)
        out["pass"] = bool(ok)
        report["stages"][s] = out
        tables.update(tab)
        passed &= bool(ok)
    report["pass"] = passed
    return report, tables, timings


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _finite(obj):
    # JSON has no infinities; render them as strings
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def dumps_report(report) -> str:
    return json.dumps(_finite(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_outputs(out_dir, report, tables, timings):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(dumps_report(report))
    for name, (header, rows) in tables.items():
        write_csv(out / f"{name}.csv", header, rows)
    (out / "timing.json").write_text(json.dumps({k: round(v, 6) for k, v in timings.items()}, sort_keys=True,
                                                indent=2) + "\n")
