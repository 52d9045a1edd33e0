"""Command line front end: ``intermittency <group> <action> [options]``.

Output is JSON (``schema_version`` 1, sorted keys) or CSV for tabular
results, written to stdout or ``--out``.  Options may also come from a JSON
file given by ``--config``; precedence is flags > file > defaults.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
failure.  Errors go to stderr as ``ERROR <code>: <message>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import diagrams as dg
from . import exponents as ex
from . import hls
from . import kernels as kn
from . import moments as mo
from . import noise as nz
from . import smallball as sb
from .errors import IntermittencyError, UsageError, VerificationFailure

SCHEMA_VERSION = 1


class CliUsage(UsageError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsage(message)


# option helpers: every option defaults to SUPPRESS so the config file can fill gaps

def _opt(p, *flags, default=None, **kw):
    dest = kw.get("dest") or flags[0].lstrip("-").replace("-", "_")
    p._defaults_map = getattr(p, "_defaults_map", {})
    p._defaults_map[dest] = default
    if default is not None and "help" in kw:
        kw["help"] += f" (default: {default})"
    p.add_argument(*flags, default=argparse.SUPPRESS, **kw)


def _common(p, seed_required=False, csv_ok=False):
    _opt(p, "--output", default="json", choices=["json", "csv"] if csv_ok else ["json"],
         help="output format")
    _opt(p, "--out", default=None, help="write to this file instead of stdout")
    _opt(p, "--config", default=None, help="JSON file with option values")
    _opt(p, "--threads", default=1, type=int, help="worker threads for sampling and grids")
    _opt(p, "--seed", default=None, type=int,
         help="64-bit seed" + (" (required)" if seed_required else ""))
    p.set_defaults(_seed_required=seed_required)


def _kernel_opts(p, default_kernel):
    _opt(p, "--kernel", default=default_kernel,
         help="heat|she, alpha-heat, wave|swe, frac|sfd; a trailing digit sets d (heat2)")
    _opt(p, "--d", default=None, type=int, help="dimension (overrides the digit in --kernel)")
    _opt(p, "--alpha", default=None, type=float, help="space order alpha")
    _opt(p, "--beta", default=None, type=float, help="time order beta")


def _noise_opts(p, default_noise="white-riesz"):
    _opt(p, "--noise", default=default_noise,
         help="white-white, white-riesz, power-riesz, white-product, power-product")
    _opt(p, "--lambda", dest="lam", default=None, type=float, help="Riesz exponent lambda")
    _opt(p, "--lambdas", default=None, help="comma separated product exponents")
    _opt(p, "--gamma", default=None, type=float, help="time exponent gamma in (0,1)")
    _opt(p, "--H", dest="H", default=None, type=float, help="Hurst index, gamma = 2 - 2H")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="intermittency", description=__doc__.splitlines()[0])
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    # exponents
    g = groups.add_parser("exponents", help="exact exponent algebra").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("table", help="lower/upper moment exponents for the four kernel families; "
                     "JSON rows {kernel, a, b, hbar, lam, gamma, t_exp_*, p_exp_*} with exact and decimal values")
    _opt(p, "--lambda", dest="lam", default=None, help="spatial exponent (rational, e.g. 1/2)")
    _opt(p, "--H", dest="H", default=None, help="Hurst index (rational)")
    _opt(p, "--alpha", default="3/2", help="alpha for alpha-SHE and SFD")
    _opt(p, "--beta", default="4/5", help="beta for SFD")
    _common(p, csv_ok=True)
    p = g.add_parser("check", help="does hbar = 2a - lambda/b make the bounds coincide; exit 1 if not")
    for f in ("--a", "--b", "--lambda", "--gamma"):
        _opt(p, f, dest="lam" if f == "--lambda" else None, default=None, help="rational value")
    _opt(p, "--hbar", default=None, help="HLS exponent to test (default 2a - lambda/b)")
    _common(p)

    # diagrams
    g = groups.add_parser("diagrams", help="admissible diagram combinatorics").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("count", help="number of admissible diagrams; prints an integer")
    p.add_argument("rows", help="row sizes, e.g. 4,4")
    _common(p)
    p = g.add_parser("enumerate", help="list the diagrams as JSON edge lists")
    p.add_argument("rows", help="row sizes, e.g. 2,2,2")
    _common(p)
    p = g.add_parser("constrained", help="count of upper-to-lower diagrams on p rows of m_p")
    _opt(p, "--p", default=None, type=int, help="even number of rows")
    _opt(p, "--mp", default=None, type=int, help="vertices per row")
    _common(p)

    # kernels
    g = groups.add_parser("kernels", help="Green's function values and masses").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("density", help="G_t at radii; CSV columns r,density")
    _kernel_opts(p, "heat")
    _opt(p, "--t", default=1.0, type=float, help="time")
    _opt(p, "--r", default="0,0.5,1,2", help="comma separated radii")
    _common(p, csv_ok=True)
    p = g.add_parser("mass", help="total mass: closed form and quadrature")
    _kernel_opts(p, "heat")
    _opt(p, "--t", default=1.0, type=float, help="time")
    _common(p)
    p = g.add_parser("ball", help="mass of B_eps(x) for the kernel started at distance rho")
    _kernel_opts(p, "heat")
    _opt(p, "--t", default=1.0, type=float, help="time")
    _opt(p, "--rho", default=0.0, type=float, help="distance |y - x|")
    _opt(p, "--eps", default=0.5, type=float, help="ball radius")
    _common(p)

    # small ball
    g = groups.add_parser("smallball", help="small-ball nondegeneracy").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("verify", help="check mass/t^a >= threshold on t = s eps^b; exit 1 on failure")
    _kernel_opts(p, "heat1")
    _opt(p, "--a", default=None, type=float, help="time exponent a")
    _opt(p, "--b", default=None, type=float, help="scale exponent b")
    _opt(p, "--eps", default="0.05,0.1357,0.3684,1", help="comma separated radii")
    _opt(p, "--y-samples", default=16, type=int, help="radii |y-x| per eps")
    _opt(p, "--threshold", default=0.1, type=float, help="required worst ratio")
    _common(p)
    p = g.add_parser("claim", help="exponential lower claim on a delta grid; exit 1 on failure")
    _opt(p, "--nu", default=None, type=float, help="exponent nu")
    _opt(p, "--c", default=None, type=float, help="constant c (default: sufficient constant)")
    _opt(p, "--dmin", default=1e-2, type=float, help="smallest delta")
    _opt(p, "--dmax", default=1e2, type=float, help="largest delta")
    _opt(p, "--n", default=50, type=int, help="grid points")
    _common(p, csv_ok=True)

    # hls
    g = groups.add_parser("hls", help="HLS mass and the exponent hbar").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("fit", help="fit hbar from the spectral mass on a log t grid (HlsReport JSON)")
    _kernel_opts(p, "she")
    _noise_opts(p)
    _opt(p, "--tmin", default=1e-3, type=float, help="smallest t")
    _opt(p, "--tmax", default=1e-1, type=float, help="largest t")
    _opt(p, "--n", default=12, type=int, help="number of t values")
    _opt(p, "--tol", default=0.05, type=float, help="allowed |fitted - closed form|")
    _common(p, csv_ok=True)
    p = g.add_parser("mass", help="spectral mass at one t")
    _kernel_opts(p, "she")
    _noise_opts(p)
    _opt(p, "--t", default=0.01, type=float, help="time")
    _common(p)

    # moments
    g = groups.add_parser("moments", help="moment estimates").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = g.add_parser("estimate", help="truncated E[u^p]: JSON {value, std_error, tail_bound, ...}")
    _kernel_opts(p, "heat")
    _noise_opts(p, "white-white")
    _opt(p, "--p", default=2, type=int, help="moment order")
    _opt(p, "--t", default=None, help="time, or comma separated times (CSV rows)")
    _opt(p, "--nmax", default=3, type=int, help="chaos cap per row")
    _opt(p, "--samples", default=100000, type=int, help="samples per diagram")
    _opt(p, "--initial", default=1.0, type=float, help="constant initial value")
    _common(p, seed_required=True, csv_ok=True)
    p = g.add_parser("phi", help="Phi_n(t), the n-th chaos term of E[u^2]")
    _kernel_opts(p, "heat")
    _noise_opts(p, "white-white")
    _opt(p, "--n", default=1, type=int, help="chaos order")
    _opt(p, "--t", default=None, type=float, help="time")
    _opt(p, "--samples", default=1000000, type=int, help="samples")
    _common(p, seed_required=True)
    p = g.add_parser("fd", help="finite-difference oracle for the 1-d heat equation with white noise")
    _opt(p, "--t", default=0.25, type=float, help="time")
    _opt(p, "--dx", default=1.0 / 128, type=float, help="grid step")
    _opt(p, "--paths", default=10000, type=int, help="number of paths")
    _common(p, seed_required=True)
    p = g.add_parser("lower-bound", help="lower-bound plan: restricted integral and optimized exponents")
    _opt(p, "--p", default=2, type=int, help="even moment order")
    _opt(p, "--m", default=1, type=int, help="half the number of vertices")
    _opt(p, "--eps", default=1.0, type=float, help="ball radius")
    _opt(p, "--t", default=1.0, type=float, help="time")
    _opt(p, "--a", default=None, help="small-ball exponent a")
    _opt(p, "--b", default=None, help="small-ball exponent b")
    _opt(p, "--lambda", dest="lam", default=None, help="spatial exponent")
    _opt(p, "--gamma", default="1", help="time exponent")
    _opt(p, "--samples", default=100000, type=int, help="samples")
    _common(p, seed_required=True)
    return root


# parsing of kernel and noise names

_KERNEL_ALIASES = {"heat": "heat", "she": "heat", "alpha-heat": "alpha-heat", "alpha-she": "alpha-heat",
                   "wave": "wave", "swe": "wave", "frac": "frac", "sfd": "frac"}


def parse_kernel(name: str, d=None, alpha=None, beta=None) -> kn.KernelSpec:
    base, digit = name.lower(), None
    if base and base[-1].isdigit():
        base, digit = base[:-1], int(base[-1])
    if base not in _KERNEL_ALIASES:
        raise CliUsage(f"unknown kernel {name!r}")
    dim = d if d is not None else (digit or 1)
    kind = _KERNEL_ALIASES[base]
    if kind == "heat":
        return kn.Heat(dim)
    if kind == "wave":
        return kn.Wave(dim)
    if alpha is None:
        raise CliUsage(f"kernel {name} needs --alpha")
    if kind == "alpha-heat":
        return kn.AlphaHeat(dim, alpha)
    if beta is None:
        raise CliUsage(f"kernel {name} needs --beta")
    return kn.FracDiff(dim, alpha, beta)


def parse_noise(kind: str, d: int, lam=None, lambdas=None, gamma=None, H=None) -> nz.NoiseSpec:
    if gamma is None and H is not None:
        gamma = 2.0 - 2.0 * H
    tname, _, sname = kind.partition("-")
    if tname == "white":
        time = nz.WhiteInTime()
    elif tname == "power":
        if gamma is None:
            raise CliUsage("power-law time covariance needs --gamma or --H")
        time = nz.PowerLaw(gamma)
    else:
        raise CliUsage(f"unknown noise {kind!r}")
    if sname == "white":
        if d != 1:
            raise CliUsage("spatial white noise is one dimensional")
        space = nz.DeltaD1()
    elif sname == "riesz":
        if lam is None:
            raise CliUsage("Riesz covariance needs --lambda")
        space = nz.Riesz(lam, d)
    elif sname == "product":
        if lambdas is None:
            raise CliUsage("product covariance needs --lambdas")
        space = nz.ProductRL(tuple(float(v) for v in str(lambdas).split(",")))
    else:
        raise CliUsage(f"unknown noise {kind!r}")
    return nz.NoiseSpec(time, space)


def _floats(s) -> list:
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    try:
        return [float(v) for v in str(s).split(",") if v.strip()]
    except ValueError as exc:
        raise CliUsage(f"cannot read numbers from {s!r}") from exc


def _ints(s) -> list:
    try:
        return [int(v) for v in str(s).split(",") if v.strip()]
    except ValueError as exc:
        raise CliUsage(f"cannot read integers from {s!r}") from exc


def _need(cfg, *names):
    for n in names:
        if cfg.get(n) is None:
            raise CliUsage(f"missing required option --{n.replace('_', '-')}")


def _frac_json(v):
    return {"exact": str(v), "decimal": float(v)}


# actions

def _exponents_table(c):
    _need(c, "lam", "H")
    rows = ex.table(c["lam"], c["H"], alpha=c["alpha"], beta=c["beta"])
    out = {"lambda": str(ex.as_fraction(c["lam"])), "H": str(ex.as_fraction(c["H"])),
           "rows": [r.to_json() for r in rows]}
    cols = ["kernel", "a", "b", "hbar", "lam", "gamma", "t_exp_lower", "p_exp_lower",
            "t_exp_upper", "p_exp_upper"]
    table = [[r.kernel] + [str(getattr(r, k)) for k in cols[1:]] + [r.matched] for r in rows]
    return out, (cols + ["matched"], table), 0


def _exponents_check(c):
    _need(c, "a", "b", "lam", "gamma")
    lo = ex.lower_exponents(c["a"], c["b"], c["lam"], c["gamma"])
    h = ex.matched_hbar(c["a"], c["b"], c["lam"]) if c.get("hbar") is None else ex.as_fraction(c["hbar"])
    ok = ex.matching_check(c["a"], c["b"], c["lam"], c["gamma"], h)
    out = {"hbar": _frac_json(h), "lower": [_frac_json(v) for v in lo], "matched": ok}
    if h > -1:
        out["upper"] = [_frac_json(v) for v in ex.upper_exponents(h, c["gamma"])]
    return out, None, 0 if ok else 1


def _diagrams_count(c):
    n = dg.count_admissible(_ints(c["rows"]))
    return n, None, 0


def _diagrams_enumerate(c):
    ds = [d.to_json() for d in dg.enumerate_admissible(_ints(c["rows"]))]
    return {"rows": _ints(c["rows"]), "count": len(ds), "diagrams": ds}, None, 0


def _diagrams_constrained(c):
    _need(c, "p", "mp")
    n = sum(1 for _ in dg.enumerate_constrained(c["p"], c["mp"]))
    m = c["p"] * c["mp"] // 2
    return {"p": c["p"], "m_p": c["mp"], "m": m, "count": n, "m_factorial": math.factorial(m)}, \
        None, 0 if n == math.factorial(m) else 1


def _kernel_from(c):
    return parse_kernel(c["kernel"], c.get("d"), c.get("alpha"), c.get("beta"))


def _kernels_density(c):
    spec = _kernel_from(c)
    rs = _floats(c["r"])
    vals = [float(kn.radial_density(spec, c["t"], r)) for r in rs]
    out = {"kernel": kn.kernel_to_json(spec), "t": c["t"], "r": rs, "density": vals}
    return out, (["r", "density"], list(zip(rs, vals))), 0


def _kernels_mass(c):
    spec = _kernel_from(c)
    out = {"kernel": kn.kernel_to_json(spec), "t": c["t"], "closed_form": kn.total_mass(spec, c["t"])}
    if not (isinstance(spec, kn.Wave) and spec.d == 3):
        out["quadrature"] = kn.total_mass_quadrature(spec, c["t"])
    return out, None, 0


def _kernels_ball(c):
    spec = _kernel_from(c)
    x = (c["rho"],) + (0.0,) * (spec.d - 1)
    m = kn.ball_mass(spec, kn.BallMassQuery(c["t"], (0.0,) * spec.d, x, c["eps"]))
    return {"kernel": kn.kernel_to_json(spec), "t": c["t"], "rho": c["rho"], "eps": c["eps"],
            "mass": m}, None, 0


def _smallball_verify(c):
    _need(c, "a", "b")
    spec = _kernel_from(c)
    try:
        rep = sb.verify_small_ball(spec, c["a"], c["b"], _floats(c["eps"]), c["y_samples"],
                                   c["threshold"])
    except VerificationFailure as err:
        rep = getattr(err, "report", None)
        if rep is None:
            raise
        out = rep.to_json()
        out["passed"] = False
        out["error"] = str(err)
        return out, None, 1
    return rep.to_json(), None, 0 if rep.passed else 1


def _smallball_claim(c):
    _need(c, "nu")
    grid = np.logspace(math.log10(c["dmin"]), math.log10(c["dmax"]), c["n"])
    ok, rows = sb.exp_lower_claim_check(c["nu"], grid, c.get("c"))
    out = {"nu": c["nu"], "passed": ok, "min_margin": min(r["margin"] for r in rows), "rows": rows}
    table = [[r["delta"], r["c"], r["lhs"], r["rhs"], r["margin"]] for r in rows]
    return out, (["delta", "c", "lhs", "rhs", "margin"], table), 0 if ok else 1


def _noise_from(c, spec):
    return parse_noise(c["noise"], spec.d, c.get("lam"), c.get("lambdas"), c.get("gamma"), c.get("H"))


def _hls_fit(c):
    spec = _kernel_from(c)
    noise = _noise_from(c, spec)
    tg = np.logspace(math.log10(c["tmin"]), math.log10(c["tmax"]), c["n"])
    rep = hls.fit_hbar(spec, noise, tg)
    out = rep.to_json()
    out["passed"] = rep.abs_gap <= c["tol"]
    return out, (["t", "mass"], list(zip(rep.t_grid, rep.values))), 0 if out["passed"] else 1


def _hls_mass(c):
    spec = _kernel_from(c)
    noise = _noise_from(c, spec)
    res = hls.hls_mass_spectral(spec, noise, c["t"], detail=True)
    return {"kernel": kn.kernel_to_json(spec), "noise": nz.noise_to_json(noise), "t": c["t"],
            "value": res.value, "argmax_eta": res.argmax_eta}, None, 0


def _moments_estimate(c):
    _need(c, "t")
    spec = _kernel_from(c)
    noise = _noise_from(c, spec)
    ts = _floats(c["t"])
    rows, results = [], []
    for t in ts:
        ck = mo.ChaosKernelSpec(spec, 0, t, initial_value=c["initial"])
        est = mo.pth_moment_truncated(c["p"], ck, noise, c["nmax"], c["samples"], c["seed"],
                                      c["threads"])
        js = est.to_json()
        js["t"] = t
        results.append(js)
        rows.append([t, est.value, est.std_error, est.extra.get("tail_bound")])
    out = results[0] if len(ts) == 1 else {"results": results}
    out.update({"p": c["p"], "nmax": c["nmax"], "kernel": kn.kernel_to_json(spec),
                "noise": nz.noise_to_json(noise)})
    return out, (["t", "value", "std_error", "tail_bound"], rows), 0


def _moments_phi(c):
    _need(c, "t")
    spec = _kernel_from(c)
    noise = _noise_from(c, spec)
    est = mo.phi_n(mo.ChaosKernelSpec(spec, c["n"], c["t"]), noise, c["samples"], c["seed"],
                   c["threads"])
    out = est.to_json()
    out.update({"n": c["n"], "t": c["t"]})
    return out, None, 0


def _moments_fd(c):
    res = mo.fd_oracle_she(c["t"], c["dx"], n_paths=c["paths"], seed=c["seed"], threads=c["threads"])
    out = res.to_json()
    out["exact_discrete_second_moment"] = mo.fd_exact_second_moment(c["t"], c["dx"])
    return out, None, 0


def _moments_lower_bound(c):
    _need(c, "a", "b", "lam")
    plan = mo.LowerBoundPlan(c["p"], c["m"], c["eps"], c["t"])
    a, b, lam, gamma = (ex.as_fraction(c[k]) for k in ("a", "b", "lam", "gamma"))
    lb = mo.lower_bound_value(plan, float(a), float(b), float(lam), float(gamma))
    mc = mo.restricted_integral_mc(plan, c["samples"], c["seed"], c["threads"])
    lo = ex.lower_exponents(a, b, lam, gamma)
    te, pe = mo.optimized_exponents(a, b, lam, gamma)
    ok = (te, pe) == lo
    out = {"plan": {"p": plan.p, "m": plan.m, "m_p": plan.m_p, "eps": plan.eps, "t": plan.t,
                    "L": plan.L},
           "log_summand": lb.log_value, "m0": lb.m0, "eps_tp": lb.eps_tp,
           "t_exponent": _frac_json(te), "p_exponent": _frac_json(pe), "matches_exponents": ok,
           "restricted_integral": mc.to_json()}
    return out, None, 0 if ok else 1


ACTIONS = {
    ("exponents", "table"): _exponents_table, ("exponents", "check"): _exponents_check,
    ("diagrams", "count"): _diagrams_count, ("diagrams", "enumerate"): _diagrams_enumerate,
    ("diagrams", "constrained"): _diagrams_constrained,
    ("kernels", "density"): _kernels_density, ("kernels", "mass"): _kernels_mass,
    ("kernels", "ball"): _kernels_ball,
    ("smallball", "verify"): _smallball_verify, ("smallball", "claim"): _smallball_claim,
    ("hls", "fit"): _hls_fit, ("hls", "mass"): _hls_mass,
    ("moments", "estimate"): _moments_estimate, ("moments", "phi"): _moments_phi,
    ("moments", "fd"): _moments_fd, ("moments", "lower-bound"): _moments_lower_bound,
}


def _subparser(root, group, action):
    gp = next(a for a in root._actions if isinstance(a, argparse._SubParsersAction)).choices[group]
    sp = next(a for a in gp._actions if isinstance(a, argparse._SubParsersAction))
    return sp.choices[action]


def resolve_config(argv) -> dict:
    """Merge defaults, the optional JSON config file and the given flags."""
    root = build_parser()
    ns = vars(root.parse_args(argv))
    sub = _subparser(root, ns["group"], ns["action"])
    cfg = dict(getattr(sub, "_defaults_map", {}))
    if ns.get("config"):
        try:
            with open(ns["config"]) as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise CliUsage(f"cannot read config file: {exc}") from exc
        for k, v in data.items():
            k = k.replace("-", "_")
            if k == "lambda":
                k = "lam"
            if k not in cfg:
                raise CliUsage(f"unknown option {k!r} in config file")
            cfg[k] = v
    cfg.update(ns)
    if cfg.get("_seed_required") and cfg.get("seed") is None:
        raise CliUsage(f"{ns['group']} {ns['action']} needs --seed")
    if cfg.get("seed") is not None and not 0 <= int(cfg["seed"]) < 2 ** 64:
        raise CliUsage("seed must be a 64-bit unsigned integer")
    if cfg.get("threads", 1) < 1:
        raise CliUsage("--threads must be positive")
    return cfg


def _jsonable(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def render(result, table, fmt: str) -> str:
    if fmt == "csv" and table is not None:
        cols, rows = table
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()
    if isinstance(result, int) and not isinstance(result, bool):
        return f"{result}\n"
    body = dict(result)
    body.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(body, sort_keys=True, default=_jsonable, indent=1) + "\n"


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = resolve_config(argv)
        result, table, code = ACTIONS[(cfg["group"], cfg["action"])](cfg)
        text = render(result, table, cfg["output"])
        if cfg.get("out"):
            with open(cfg["out"], "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return code
    except IntermittencyError as err:
        print(f"ERROR {err.exit_code}: {type(err).__name__}: {err}", file=sys.stderr)
        return err.exit_code
    except SystemExit as ex_:  # --help
        return int(ex_.code or 0)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
