"""Command-line front end.

Exit codes: 0 success (bistable for ``witness``), 1 analytic failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

import numpy as np

from .massaction import ModelParams, RateError, RateVector, conservation_substitute, eps_slots
from .network import format_network, network_to_dict, sequestration_extension
from .region import RegionError, canonical_rates, check_bistability, check_mss, sample_region
from .sim import integrate
from .stability import classify_state
from .steady import NewtonError, ContinuationError, make_state, newton_refine, three_states
from .massaction import sequestration_jacobian, sequestration_rhs
from .witness import find_witness, sweep

SCHEMA = "seqnet/1"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ parsing


def _numbers(text: str) -> list[Fraction]:
    """Comma or whitespace separated decimals / fractions, read exactly."""
    parts = [p for p in text.replace(",", " ").split() if p]
    if not parts:
        raise UsageError("empty number list")
    try:
        return [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse number list {text!r}: {exc}") from None


def _number(text: str) -> Fraction:
    vals = _numbers(text)
    if len(vals) != 1:
        raise UsageError(f"expected one number, got {text!r}")
    return vals[0]


def _read_file(path: str) -> list[Fraction]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    text = text.strip()
    if text.startswith("[") or text.startswith("{"):
        data = json.loads(text)
        if isinstance(data, dict):
            data = data.get("r_exact") or data.get("r") or data.get("rates")
        return [Fraction(str(v)) for v in data]
    return _numbers(" ".join(ln.split("#")[0] for ln in text.splitlines()))


def _params(args, bistable: bool = False) -> ModelParams:
    try:
        p = ModelParams(args.m, args.n)
        if bistable:
            p.require_bistable_family()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return p


def _core(args, params: ModelParams):
    """Core rates (r1..rn, r_{n+2}) from --rates/--rn2, or None."""
    if args.rates is None:
        if args.rn2 is not None:
            raise UsageError("--rn2 needs --rates")
        return None
    vals = _numbers(args.rates)
    n = params.n
    if len(vals) == n + 1 and args.rn2 is None:
        core = vals
    elif len(vals) == n and args.rn2 is not None:
        core = vals + [_number(args.rn2)]
    else:
        raise UsageError(f"--rates needs r1..r{n} with --rn2, or r1..r{n},r{n + 2}")
    if any(v <= 0 for v in core):
        raise UsageError("core rates must be positive")
    return core


def _full_rates(args, params: ModelParams) -> tuple[list, list | None, Fraction | None]:
    """(r_1..r_3n, core or None, eps or None) from whichever source was given."""
    n = params.n
    if getattr(args, "full_rates", None) or getattr(args, "rates_file", None):
        vals = _numbers(args.full_rates) if args.full_rates else _read_file(args.rates_file)
        if len(vals) != 3 * n:
            raise UsageError(f"expected 3n = {3 * n} rates, got {len(vals)}")
        if any(v <= 0 for v in vals):
            raise UsageError("all rates must be positive")
        slots = {vals[j - 1] for j in eps_slots(n)}
        core = vals[:n] + [vals[n + 1]]
        eps = slots.pop() if len(slots) == 1 else None
        if eps is not None:
            try:
                derived = conservation_substitute(params, vals[: 2 * n]).values
            except RateError:
                derived = None
            if derived is None or list(derived) != vals:
                eps = None
        return vals, (core if eps is not None else None), eps
    core = _core(args, params)
    if core is None:
        core = canonical_rates(params.require_bistable_family(), "bistability")
    if args.eps is None:
        raise UsageError("--eps is required with --rates")
    eps = _number(args.eps)
    if eps <= 0:
        raise UsageError("--eps must be positive")
    front = core[:n] + [eps] * n
    front[n + 1] = core[n]
    try:
        r = conservation_substitute(params, front)
    except RateError as exc:
        raise UsageError(str(exc)) from None
    return list(r.values), core, eps


def _state(text: str, n: int) -> list[float]:
    x = [float(v) for v in _numbers(text)]
    if len(x) != n:
        raise UsageError(f"state needs {n} coordinates, got {len(x)}")
    if any(not v > 0 for v in x):
        raise UsageError("state coordinates must be positive")
    return x


def _emit(args, payload: dict, text: str) -> None:
    out = json.dumps(payload, indent=2) + "\n" if args.format == "json" else text
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _fmt_x(x) -> str:
    return "(" + ", ".join(f"{v:.6g}" for v in x) + ")"


# ------------------------------------------------------------------ commands


def cmd_gen(args) -> int:
    params = _params(args)
    net = sequestration_extension(params.m, params.n)
    _emit(args, network_to_dict(net), format_network(net))
    return 0


def cmd_witness(args) -> int:
    params = _params(args, bistable=True)
    core = _core(args, params)
    mode = "user" if core is not None else args.mode
    kw = {}
    if args.eps is not None:
        kw["eps0"] = _number(args.eps)
        if kw["eps0"] <= 0:
            raise UsageError("--eps must be positive")
    try:
        res = find_witness(params, mode=mode, core=core, seed=args.seed, max_rounds=args.max_rounds, **kw)
    except RegionError as exc:
        payload = {"schema": SCHEMA, "bistable": False, "error": str(exc), "region": exc.check.to_dict()}
        _emit(args, payload, f"not bistable: {exc}\n")
        return 1
    lines = [f"K~_{{{params.m},{params.n}}}  theorem: {res.theorem}"]
    if res.bistable:
        lines.append(f"bistable at eps = {res.eps:g}; stable states {res.stable_indices}")
        for k, (s, rep) in enumerate(zip(res.states, res.reports), start=1):
            lines.append(f"  x^({k}) [{s.branch}] {_fmt_x(s.x)}  detJ = {s.det_J:.6g}  {rep.verdict}")
        if args.full_rates_out:
            lines.append("  r = " + ",".join(str(v) for v in res.r))
    else:
        lines.append(f"no witness: {res.message}")
        lines.append("  trace: " + ", ".join(f"{e:g}:{'ok' if ok else 'fail'}" for e, ok in res.trace))
    _emit(args, res.to_dict(), "\n".join(lines) + "\n")
    return 0 if res.bistable else 1


def _region_checks(params: ModelParams, core) -> dict:
    if core is None:
        return {}
    return {
        "multistationarity": check_mss(params, core),
        "bistability": check_bistability(params, core),
        "bistability-alt": check_bistability(params, core, alt=True),
    }


def cmd_analyze(args) -> int:
    params = _params(args)
    r, core, eps = _full_rates(args, params)
    rf = [float(v) for v in r]
    states = []
    if args.state:
        for text in args.state:
            x0 = _state(text, params.n)
            try:
                x, _ = newton_refine(
                    lambda v: sequestration_rhs(params, rf, v),
                    lambda v: sequestration_jacobian(params, rf, v),
                    x0,
                )
            except NewtonError as exc:
                states.append((None, f"seed {_fmt_x(x0)}: {exc}"))
                continue
            states.append((make_state(params, r, x, "seed", float(eps or 0)), None))
    elif core is not None and params.m >= 2 and params.n % 2 == 1 and params.n >= 3:
        try:
            for s in three_states(params, core, float(eps)):
                states.append((s, None))
        except (ContinuationError, NewtonError) as exc:
            states.append((None, f"continuation failed: {exc}"))
    else:
        x, _ = newton_refine(
            lambda v: sequestration_rhs(params, rf, v),
            lambda v: sequestration_jacobian(params, rf, v),
            np.ones(params.n),
        )
        states.append((make_state(params, r, x, "seed", float(eps or 0)), None))
    checks = {}
    if core is not None and params.m >= 2 and params.n % 2 == 1 and params.n >= 3:
        checks = _region_checks(params, core)
    exact = all(isinstance(v, Fraction) for v in r)
    out_states, errors, lines = [], [], []
    lines.append(f"K~_{{{params.m},{params.n}}}" + (f"  eps = {float(eps):g}" if eps else ""))
    for name, chk in checks.items():
        failed = ", ".join(rec.label for rec in chk.failed()) or "none"
        lines.append(f"  {name}: {'holds' if chk.all_satisfied else 'fails'} (failed: {failed})")
    for k, (s, err) in enumerate(states, start=1):
        if s is None:
            errors.append(err)
            lines.append(f"  {err}")
            continue
        rep = classify_state(params, r, s.x, exact=exact)
        out_states.append({"state": s.to_dict(), "report": rep.to_dict()})
        lines.append(
            f"  x^({k}) [{s.branch}] {_fmt_x(s.x)}  residual {s.residual_norm:.2e}  "
            f"detJ {s.det_J:.6g}  {rep.verdict}"
        )
    stable = [k for k, e in enumerate(out_states, start=1) if e["report"]["verdict"] in ("certified-stable", "eigen-stable")]
    lines.append(f"  stable: {stable}")
    payload = {
        "schema": SCHEMA,
        "m": params.m,
        "n": params.n,
        "r": [float(v) for v in r],
        "r_exact": [str(v) for v in r],
        "eps": None if eps is None else float(eps),
        "region": {k: v.to_dict() for k, v in checks.items()},
        "states": out_states,
        "stable": stable,
        "errors": errors,
    }
    _emit(args, payload, "\n".join(lines) + "\n")
    return 1 if errors and not out_states else 0


def cmd_region_check(args) -> int:
    params = _params(args, bistable=True)
    core = _core(args, params)
    if core is None:
        if args.seed is not None:
            core = sample_region(params, args.seed)
        else:
            core = canonical_rates(params, "bistability")
    if args.theorem == "multistationarity":
        chk = check_mss(params, core)
    else:
        chk = check_bistability(params, core, alt=args.theorem == "bistability-alt")
    lines = [f"{chk.theorem}: {'holds' if chk.all_satisfied else 'fails'}"]
    for rec in chk.records:
        mark = "ok  " if rec.satisfied else "FAIL"
        lines.append(f"  {mark} {rec.label:<12} {rec.formula}: {float(rec.lhs):.6g} {rec.relation} {float(rec.rhs):.6g}")
    _emit(args, chk.to_dict(), "\n".join(lines) + "\n")
    return 0 if chk.all_satisfied else 1


def cmd_simulate(args) -> int:
    params = _params(args)
    r, core, eps = _full_rates(args, params)
    x0 = _state(args.x0, params.n)
    if args.t_max < 0:
        raise UsageError("--t-max must be >= 0")
    targets = []
    if core is not None and params.m >= 2 and params.n % 2 == 1 and params.n >= 3:
        try:
            targets = [s.x for s in three_states(params, core, float(eps))]
        except (ContinuationError, NewtonError):
            targets = []
    rf = [float(v) for v in r]
    try:
        tr = integrate(params, rf, x0, t_max=args.t_max, targets=targets, method=args.method)
    except (ValueError, RuntimeError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return 1
    if args.out:
        tr.to_csv(args.out)
    else:
        sys.stdout.write(tr.to_csv())
    if tr.terminal == "converged" and tr.target is not None:
        verdict = f"converged to x^({tr.target + 1})"
    else:
        verdict = f"{tr.terminal} at t = {tr.times[-1]:g}; x = {_fmt_x(tr.final)}"
    print(verdict, file=sys.stderr)
    return 1 if tr.terminal == "left-domain" else 0


def _int_range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def cmd_sweep(args) -> int:
    try:
        ms = _int_range(args.m_range)
        ns = _int_range(args.n_range)
    except ValueError:
        raise UsageError("bad --m-range / --n-range") from None
    seeds = _int_range(args.seeds) if args.seeds else [0]
    cells = sweep([(m, n) for m in ms for n in ns], modes=args.modes.split(","), seeds=seeds, workers=args.workers)
    lines = []
    for c in cells:
        status = "bistable" if c["bistable"] else f"no ({c['error']})"
        lines.append(f"m={c['m']} n={c['n']} {c['mode']}" + (f" seed={c['seed']}" if c["seed"] is not None else "") + f": {status}")
    _emit(args, {"schema": SCHEMA, "cells": cells}, "\n".join(lines) + "\n")
    return 0 if all(c["bistable"] for c in cells) else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seqnet", description="Sequestration network bistability toolkit")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("-m", type=int, required=True, help="production factor")
        p.add_argument("-n", type=int, required=True, help="number of species")
        p.add_argument("--format", choices=("text", "json"), default="text")
        if out:
            p.add_argument("--out", help="write output to this file")

    def rate_opts(p, full=True):
        p.add_argument("--rates", help="r1..rn (with --rn2) or r1..rn,r(n+2); decimals or fractions")
        p.add_argument("--rn2", help="r(n+2)")
        p.add_argument("--eps", help="common value of the epsilon slots")
        if full:
            p.add_argument("--full-rates", help="all 3n rates r1..r3n")
            p.add_argument("--rates-file", help="file with the 3n rates (text or JSON)")

    p = sub.add_parser("gen", help="print the fully open extension network")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("witness", help="search for a bistability witness")
    common(p)
    rate_opts(p, full=False)
    p.add_argument("--mode", choices=("canonical", "alt", "sampled"), default="canonical")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-rounds", type=int, default=12)
    p.add_argument("--show-rates", dest="full_rates_out", action="store_true", help="print the 3n rates")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("analyze", help="steady states, region checks and stability for given rates")
    common(p)
    rate_opts(p)
    p.add_argument("--state", action="append", help="Newton seed x1,...,xn (repeatable)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="integrate the mass-action ODE, CSV trajectory")
    common(p)
    rate_opts(p)
    p.add_argument("--x0", required=True, help="initial state x1,...,xn")
    p.add_argument("--t-max", type=float, default=1e4)
    p.add_argument("--method", choices=("auto", "dopri5", "stiff"), default="auto")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region-check", help="evaluate the parameter-region inequalities")
    common(p)
    rate_opts(p, full=False)
    p.add_argument("--seed", type=int, help="check a sampled point instead of the canonical one")
    p.add_argument(
        "--theorem",
        choices=("bistability", "bistability-alt", "multistationarity"),
        default="bistability",
    )
    p.set_defaults(func=cmd_region_check)

    p = sub.add_parser("sweep", help="witness search over a grid of (m, n)")
    p.add_argument("--m-range", default="2-3")
    p.add_argument("--n-range", default="3,5")
    p.add_argument("--modes", default="canonical")
    p.add_argument("--seeds", help="seeds for sampled mode, e.g. 0-4")
    p.add_argument("--workers", type=int, help="thread pool size (capped by SEQNET_THREADS)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"seqnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
