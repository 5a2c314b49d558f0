"""Reproducible experiment runner.

Every subcommand resolves its parameters from defaults, then an optional
key=value config file, then command-line flags (flags win), writes its
outputs into --out, and drops a manifest.json echoing the resolved
configuration next to them.  Outputs are write-once: an existing file of
the same name aborts the run.  CSV uses '.' decimals and 17 significant
digits; JSON mirrors the field names used throughout the package
(z_n, beta_n, M_N, alpha_star, p_lower, p_upper).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, analysis, basis as basis_mod, quadrature, series, specfun, verify

_FMT = "{:.17g}"


def _fmt(x):
    return _FMT.format(float(x))


def _parse_sequence(spec, dim):
    parts = spec.split(":")
    kind = parts[0]
    if kind == "powerlaw":
        if len(parts) != 3:
            raise SystemExit("powerlaw spec is powerlaw:a:alpha")
        return series.PowerLaw(float(parts[1]), float(parts[2]))
    if kind == "invzero":
        d = int(parts[1]) if len(parts) > 1 else dim
        scale = float(parts[2]) if len(parts) > 2 else math.sqrt(2.0)
        return series.InverseZero(d, scale)
    if kind == "sparse":
        if len(parts) != 2:
            raise SystemExit("sparse spec is sparse:file.json")
        with open(parts[1], encoding="utf-8") as fh:
            data = json.load(fh)
        return series.Sparse(tuple(data["indices"]), tuple(data["amplitudes"]))
    if kind == "explicit":
        if len(parts) != 2:
            raise SystemExit("explicit spec is explicit:file.json")
        with open(parts[1], encoding="utf-8") as fh:
            data = json.load(fh)
        return series.Explicit(tuple(data))
    raise SystemExit(f"unknown sequence spec {spec!r}")


def _parse_ladder(text):
    rungs = tuple(int(tok) for tok in text.split(",") if tok.strip())
    if len(rungs) < 2:
        raise SystemExit("ladder needs at least two rungs, e.g. 64,128,256,512,1024")
    return rungs


def _open_new(path):
    if os.path.exists(path):
        raise SystemExit(f"refusing to overwrite existing output {path}")
    return open(path, "w", encoding="utf-8", newline="")


def _write_json(path, payload):
    with _open_new(path) as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_manifest(out_dir, command, config, outputs):
    payload = {
        "command": command,
        "version": __version__,
        "master_seed": config.get("master_seed"),
        "config": config,
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    _write_json(os.path.join(out_dir, "manifest.json"), payload)


def _resolved(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _family(args):
    if args.seq_family == "constant":
        return analysis.ConstantModulusFamily()
    return analysis.RadialFamily(args.dim, args.points_per_panel)


def _build_basis_grid(dim, n_max, points_per_panel):
    nu = specfun.order_for_dimension(dim)
    zeros = specfun.bessel_zeros(nu, n_max)
    freq = max(float(zeros.zeros[-1]), math.pi)
    grid = quadrature.build_grid(dim, freq, points_per_panel)
    return basis_mod.build_radial_basis(dim, n_max, grid), grid


def cmd_basis(args):
    os.makedirs(args.out, exist_ok=True)
    b, grid = _build_basis_grid(args.dim, args.nmax, args.points_per_panel)
    p_list = args.p or [2.0]
    rows = basis_mod.basis_norm_rows(b, grid, p_list)
    path = os.path.join(args.out, "basis.csv")
    with _open_new(path) as fh:
        header = ["n", "z_n", "beta_n", "sup_norm"] + [f"lp_norm@{_fmt(p)}" for p in p_list]
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(f"{int(row[0])}," + ",".join(_fmt(v) for v in row[1:]) + "\n")
    config = _resolved(args, ("dim", "nmax", "points_per_panel", "master_seed")) | {
        "p": list(p_list)
    }
    _write_manifest(args.out, "basis", config, [path])
    return 0


def cmd_norms(args):
    os.makedirs(args.out, exist_ok=True)
    b, grid = _build_basis_grid(args.dim, args.nmax, args.points_per_panel)
    p_list = args.p or [2.0, 4.0, 6.0]
    path = os.path.join(args.out, "norms.csv")
    with _open_new(path) as fh:
        fh.write("n," + ",".join(f"lp_norm@{_fmt(p)}" for p in p_list) + "\n")
        for n in range(1, args.nmax + 1):
            vals = [basis_mod.lp_norm_of_e(b, n, p, grid) for p in p_list]
            fh.write(f"{n}," + ",".join(_fmt(v) for v in vals) + "\n")
    config = _resolved(args, ("dim", "nmax", "points_per_panel", "master_seed")) | {
        "p": list(p_list)
    }
    _write_manifest(args.out, "norms", config, [path])
    return 0


def cmd_sample(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    b, grid = _build_basis_grid(args.dim, args.nmax, args.points_per_panel)
    draw = series.draw_series(c, b, args.nmax, grid, args.master_seed)
    path = os.path.join(args.out, "field.csv")
    with _open_new(path) as fh:
        fh.write("r,re,im\n")
        for r, v in zip(grid.nodes, draw.field_values):
            fh.write(f"{_fmt(r)},{_fmt(v.real)},{_fmt(v.imag)}\n")
    config = _resolved(
        args, ("dim", "nmax", "points_per_panel", "master_seed", "seq")
    ) | {"sequence": c.describe(), "grid_nodes": grid.n_nodes}
    _write_manifest(args.out, "sample", config, [path])
    return 0


def cmd_expected_norm(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    b, grid = _build_basis_grid(args.dim, args.nmax, args.points_per_panel)
    det = analysis.expected_lp_pth_power(c, b, args.nmax, args.p_value, grid)
    payload = {"M_N": det, "N": args.nmax, "p": args.p_value, "d": args.dim}
    if args.seeds:
        mc, se = analysis.mc_lp_pth_power(
            c, b, args.nmax, args.p_value, grid, args.seeds, args.master_seed
        )
        payload |= {"mc_mean": mc, "mc_standard_error": se, "seeds": args.seeds}
    path = os.path.join(args.out, "expected_norm.json")
    _write_json(path, payload)
    config = _resolved(
        args, ("dim", "nmax", "points_per_panel", "master_seed", "seq", "seeds")
    ) | {"p": args.p_value, "sequence": c.describe()}
    _write_manifest(args.out, "expected-norm", config, [path])
    return 0


def cmd_classify(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    fam = _family(args)
    verdict = analysis.classify_divergence(c, fam, args.p_value, rungs=args.ladder)
    path = os.path.join(args.out, "classify.json")
    _write_json(
        path,
        {
            "p": verdict.p,
            "verdict": verdict.verdict,
            "fitted_growth_exponent": verdict.fitted_growth_exponent,
            "ladder": [{"N": int(n), "M_N": m} for n, m in verdict.ladder],
            "pair_slopes": list(verdict.pair_slopes),
            "slope_ratios": list(verdict.slope_ratios),
        },
    )
    config = _resolved(
        args, ("dim", "points_per_panel", "master_seed", "seq", "seq_family")
    ) | {"p": args.p_value, "ladder": list(args.ladder), "sequence": c.describe()}
    _write_manifest(args.out, "classify", config, [path])
    return 0


def cmd_pcr(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    fam = _family(args)
    p_lo, p_hi = args.p_range
    bracket = analysis.bracket_pcr(
        c, fam, p_min=p_lo, p_max=p_hi, tol=args.tol, rungs=args.ladder
    )
    path = os.path.join(args.out, "pcr.json")
    _write_json(
        path,
        {
            "p_lower": bracket.lower,
            "p_upper": None if math.isinf(bracket.upper) else bracket.upper,
            "p_upper_infinite": math.isinf(bracket.upper),
            "theorem_lower": None
            if math.isinf(bracket.theorem_lower)
            else bracket.theorem_lower,
            "theorem_upper": None
            if math.isinf(bracket.theorem_upper)
            else bracket.theorem_upper,
            "probes": [{"p": p, "verdict": v} for p, v in bracket.probes],
        },
    )
    config = _resolved(
        args, ("dim", "points_per_panel", "master_seed", "seq", "seq_family", "tol")
    ) | {"p_range": list(args.p_range), "ladder": list(args.ladder), "sequence": c.describe()}
    _write_manifest(args.out, "pcr", config, [path])
    return 0


def cmd_alpha_star(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    a = analysis.alpha_star(c, args.dim, rungs=args.ladder)
    bound = analysis.divergence_exponent_bound(a, args.dim)
    path = os.path.join(args.out, "alpha_star.json")
    _write_json(
        path,
        {
            "alpha_star": a,
            "divergence_exponent_bound": None if math.isinf(bound) else bound,
            "bound_infinite": math.isinf(bound),
            "d": args.dim,
        },
    )
    config = _resolved(args, ("dim", "master_seed", "seq")) | {
        "ladder": list(args.ladder),
        "sequence": c.describe(),
    }
    _write_manifest(args.out, "alpha-star", config, [path])
    return 0


def cmd_adversarial(args):
    os.makedirs(args.out, exist_ok=True)
    fam = _family(args)
    try:
        seq = analysis.construct_diverging_sequence(
            fam, args.p_value, args.targets, n_cap=args.ncap
        )
        payload = {
            "found": True,
            "indices": list(seq.indices),
            "amplitudes": list(seq.amplitudes),
        }
        status = 0
    except analysis.NoSuchSequenceError as err:
        payload = {"found": False, "reason": str(err)}
        status = 0
    path = os.path.join(args.out, "adversarial.json")
    _write_json(path, payload)
    config = _resolved(
        args, ("dim", "master_seed", "seq_family", "targets", "ncap")
    ) | {"p": args.p_value}
    _write_manifest(args.out, "adversarial", config, [path])
    return status


def cmd_fernique(args):
    os.makedirs(args.out, exist_ok=True)
    c = _parse_sequence(args.seq, args.dim)
    b, grid = _build_basis_grid(args.dim, args.nmax, args.points_per_panel)
    eps = [float(tok) for tok in args.eps_ladder.split(",") if tok.strip()]
    rows = analysis.fernique_probe(
        c, b, args.p_value, args.nmax, eps, args.seeds, grid, args.master_seed
    )
    path = os.path.join(args.out, "fernique.csv")
    with _open_new(path) as fh:
        fh.write("eps,mean_exp\n")
        for e, v in rows:
            fh.write(f"{_fmt(e)},{'inf' if math.isinf(v) else _fmt(v)}\n")
    config = _resolved(
        args, ("dim", "nmax", "points_per_panel", "master_seed", "seq", "seeds")
    ) | {"p": args.p_value, "eps_ladder": eps, "sequence": c.describe()}
    _write_manifest(args.out, "fernique", config, [path])
    return 0


def cmd_gibbs(args):
    os.makedirs(args.out, exist_ok=True)
    outputs = []
    stats = {}
    for tag, n in (("N", args.nmax), ("2N", 2 * args.nmax)):
        w = analysis.sample_gibbs_weights(
            n, args.seeds, args.master_seed, args.points_per_panel
        )
        hist, edges = np.histogram(w, bins=50, range=(0.0, 1.0))
        path = os.path.join(args.out, f"gibbs_hist_{n}.csv")
        with _open_new(path) as fh:
            fh.write("bin_lo,bin_hi,count\n")
            for lo, hi, cnt in zip(edges[:-1], edges[1:], hist):
                fh.write(f"{_fmt(lo)},{_fmt(hi)},{int(cnt)}\n")
        outputs.append(path)
        stats[tag] = {
            "n_modes": n,
            "mean": float(np.mean(w)),
            "standard_error": float(np.std(w) / math.sqrt(len(w))),
            "min": float(np.min(w)),
            "max": float(np.max(w)),
        }
    se_diff = math.hypot(stats["N"]["standard_error"], stats["2N"]["standard_error"])
    stats["stability_z"] = abs(stats["2N"]["mean"] - stats["N"]["mean"]) / se_diff
    path = os.path.join(args.out, "gibbs_stability.json")
    _write_json(path, stats)
    outputs.append(path)
    config = _resolved(args, ("nmax", "points_per_panel", "master_seed", "seeds"))
    _write_manifest(args.out, "gibbs", config, outputs)
    return 0


def cmd_verify(args):
    ids = args.checks.split(",") if args.checks else None
    if ids is not None:
        unknown = set(ids) - set(verify.check_ids())
        if unknown:
            raise SystemExit(f"unknown check ids: {sorted(unknown)}")
    results = verify.run_checks(ids, args.master_seed)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.check_id} ({r.runtime_s:.2f}s) {r.expected}")
    outputs = []
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report_path = os.path.join(args.out, "verify_report.json")
        _write_json(report_path, verify.report_dict(results, args.master_seed))
        timing_path = os.path.join(args.out, "verify_timings.json")
        _write_json(timing_path, verify.timings_dict(results))
        outputs = [report_path, timing_path]
        config = _resolved(args, ("master_seed", "checks"))
        _write_manifest(args.out, "verify", config, outputs)
    failed = [r.check_id for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return 1
    print("all checks passed")
    return 0


def _load_config(path):
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SystemExit(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            overrides[key.strip().replace("-", "_")] = value.strip()
    return overrides


_CONFIG_TYPES = {
    "dim": int,
    "nmax": int,
    "points_per_panel": int,
    "master_seed": int,
    "seeds": int,
    "targets": int,
    "ncap": int,
    "p_value": float,
    "tol": float,
    "seq": str,
    "seq_family": str,
    "eps_ladder": str,
    "checks": str,
    "out": str,
    "workers": int,
    "ladder": _parse_ladder,
    "p_range": lambda s: tuple(float(t) for t in s.split(",")),
    "p": lambda s: [float(t) for t in s.split(",")],
}


def _apply_config(args, explicit_keys):
    """Config file fills every value not explicitly given on the command line."""
    if not args.config:
        return
    overrides = _load_config(args.config)
    for key, raw in overrides.items():
        if key not in _CONFIG_TYPES:
            raise SystemExit(f"unknown config key {key!r}")
        if not hasattr(args, key) or key in explicit_keys:
            continue
        setattr(args, key, _CONFIG_TYPES[key](raw))


def _add_common(sp, dim=True, nmax=None, seq=None, seeds=None):
    sp.add_argument("--config", default=None, help="key=value config file")
    sp.add_argument("--out", default=None, required=False)
    sp.add_argument("--master-seed", dest="master_seed", type=int, default=20260101)
    sp.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    sp.add_argument(
        "--points-per-panel", dest="points_per_panel", type=int, default=10
    )
    if dim:
        sp.add_argument("--dim", type=int, default=2)
    if nmax is not None:
        sp.add_argument("--nmax", type=int, default=nmax)
    if seq is not None:
        sp.add_argument("--seq", default=seq, help="powerlaw:a:alpha | invzero | sparse:f | explicit:f")
    if seeds is not None:
        sp.add_argument("--seeds", type=int, default=seeds)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lpseries",
        description="Random-series Lp laboratory over radial Bessel eigenbases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("basis", help="tabulate zeros, normalizers and norms")
    _add_common(sp, nmax=64)
    sp.add_argument("--p", type=float, action="append")
    sp.set_defaults(fn=cmd_basis)

    sp = sub.add_parser("norms", help="Lp norms of the modes")
    _add_common(sp, nmax=64)
    sp.add_argument("--p", type=float, action="append")
    sp.set_defaults(fn=cmd_norms)

    sp = sub.add_parser("sample", help="draw one truncated series realization")
    _add_common(sp, nmax=64, seq="powerlaw:1:1")
    sp.set_defaults(fn=cmd_sample)

    sp = sub.add_parser("expected-norm", help="deterministic E||F||_p^p")
    _add_common(sp, nmax=64, seq="powerlaw:1:1", seeds=0)
    sp.add_argument("--p", dest="p_value", type=float, default=4.0)
    sp.set_defaults(fn=cmd_expected_norm)

    sp = sub.add_parser("classify", help="convergence verdict at one exponent")
    _add_common(sp, seq="powerlaw:1:1")
    sp.add_argument("--p", dest="p_value", type=float, default=4.0)
    sp.add_argument("--ladder", type=_parse_ladder, default=analysis.DEFAULT_LADDER)
    sp.add_argument(
        "--family",
        dest="seq_family",
        choices=("radial", "constant"),
        default="radial",
    )
    sp.set_defaults(fn=cmd_classify)

    sp = sub.add_parser("pcr", help="bracket the critical exponent")
    _add_common(sp, seq="powerlaw:1:1")
    sp.add_argument(
        "--p-range",
        dest="p_range",
        type=lambda s: tuple(float(t) for t in s.split(",")),
        default=(2.0, 20.0),
    )
    sp.add_argument("--tol", type=float, default=0.25)
    sp.add_argument("--ladder", type=_parse_ladder, default=analysis.DEFAULT_LADDER)
    sp.add_argument(
        "--family",
        dest="seq_family",
        choices=("radial", "constant"),
        default="radial",
    )
    sp.set_defaults(fn=cmd_pcr)

    sp = sub.add_parser("alpha-star", help="growth exponent of weighted sums")
    _add_common(sp, seq="powerlaw:1:1")
    sp.add_argument("--ladder", type=_parse_ladder, default=analysis.DEFAULT_LADDER)
    sp.set_defaults(fn=cmd_alpha_star)

    sp = sub.add_parser("adversarial", help="sparse sequence with exploding norms")
    _add_common(sp)
    sp.add_argument("--p", dest="p_value", type=float, default=6.0)
    sp.add_argument("--targets", type=int, default=4)
    sp.add_argument("--ncap", type=int, default=1 << 20)
    sp.add_argument(
        "--family",
        dest="seq_family",
        choices=("radial", "constant"),
        default="radial",
    )
    sp.set_defaults(fn=cmd_adversarial)

    sp = sub.add_parser("fernique", help="empirical exponential moments")
    _add_common(sp, nmax=100, seq="powerlaw:1:1", seeds=2000)
    sp.add_argument("--p", dest="p_value", type=float, default=4.0)
    sp.add_argument(
        "--eps-ladder", dest="eps_ladder", default="0,0.0005,0.001,0.002"
    )
    sp.set_defaults(fn=cmd_fernique)

    sp = sub.add_parser("gibbs", help="Gibbs weight samples and N-stability")
    _add_common(sp, dim=False, nmax=128, seeds=10_000)
    sp.set_defaults(fn=cmd_gibbs)

    sp = sub.add_parser("verify", help="run the acceptance checks")
    _add_common(sp, dim=False)
    sp.add_argument("--checks", default=None, help="comma-separated check ids")
    sp.set_defaults(fn=cmd_verify)

    return parser


def _explicit_keys(parser, args, argv):
    """Re-parse with suppressed defaults to see which flags were given."""
    sub = parser._subparsers._group_actions[0].choices[args.command]
    saved = [(action, action.default) for action in sub._actions]
    for action in sub._actions:
        action.default = argparse.SUPPRESS
    try:
        bare = parser.parse_args(argv)
    finally:
        for action, default in saved:
            action.default = default
    return {k for k in vars(bare) if k not in ("command", "fn")}


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, _explicit_keys(parser, args, argv))
    if args.fn is not cmd_verify and not args.out:
        raise SystemExit("--out is required")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
