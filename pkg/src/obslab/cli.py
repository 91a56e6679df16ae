"""Config-driven command-line front-end.

Each subcommand builds a field, runs one experiment family, echoes a
summary line per sweep point, and writes a JSON report plus CSV tables
into the output directory (flag --out, else the OBSLAB_OUT environment
variable, else the working directory). Options may come from an INI
config file; explicit flags win over config values. Exit codes: 0
success, 1 a mathematical check failed, 2 usage or config error, 3
numerical failure in an eigensolver.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import construct, covering, evolution, fields, geometry, reports, spectral


def _parse_floats(text: str) -> list[float]:
    return [float(tok) for tok in text.replace(",", " ").split()]


def _merged(args, section: configparser.SectionProxy | None, key: str, cast, default):
    """Flag value if given, else config value, else default."""
    flag = getattr(args, key.replace("-", "_"), None)
    if flag is not None:
        return flag
    if section is not None and key in section:
        raw = section[key]
        return cast(raw)
    return default


def _load_sections(args):
    if not getattr(args, "config", None):
        return None, None
    path = Path(args.config)
    if not path.exists():
        raise ValueError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)
    cmd_section = cp[args.command] if cp.has_section(args.command) else None
    return cp, cmd_section


def _build_field(args, cp, *, default_dim: int, default_grid: int):
    """Field from config [field] section with flag overrides on top."""
    opts: dict[str, str] = {}
    if cp is not None and cp.has_section("field"):
        opts.update(dict(cp["field"]))
    for key in ("family", "dim", "grid", "period", "origin", "mollify", "value",
                "delta", "beta", "intervals_x", "intervals_y", "grid_file"):
        flag = getattr(args, f"field_{key}", None)
        if flag is not None:
            opts[key] = str(flag)
    opts.setdefault("family", "constant")
    opts.setdefault("dim", str(default_dim))
    opts.setdefault("grid", str(default_grid))
    opts.setdefault("period", "1.0")
    if "grid_file" in opts and args.config:
        p = Path(opts["grid_file"])
        if not p.is_absolute():
            opts["grid_file"] = str(Path(args.config).parent / p)
    merged = configparser.ConfigParser()
    merged["field"] = opts
    return fields.field_from_config(merged)


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("OBSLAB_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _add_field_flags(p: argparse.ArgumentParser):
    p.add_argument("--field-family", dest="field_family", help="built-in family name")
    p.add_argument("--field-dim", dest="field_dim", type=int)
    p.add_argument("--field-grid", dest="field_grid", type=int)
    p.add_argument("--field-period", dest="field_period", type=float)
    p.add_argument("--field-origin", dest="field_origin")
    p.add_argument("--field-mollify", dest="field_mollify", type=float)
    p.add_argument("--field-value", dest="field_value", type=float)
    p.add_argument("--field-delta", dest="field_delta", type=float)
    p.add_argument("--field-beta", dest="field_beta", type=float)
    p.add_argument("--intervals-x", dest="field_intervals_x")
    p.add_argument("--intervals-y", dest="field_intervals_y")
    p.add_argument("--grid-file", dest="field_grid_file")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI config file; flags override its values")
    p.add_argument("--out", help="output directory (default $OBSLAB_OUT or .)")
    p.add_argument("--seed", type=int, default=None)
    _add_field_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obslab",
        description="Numerical laboratory for geometric control, uncertainty "
                    "principles, and Schrödinger observability on the torus.",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("certify", help="measure every entry of an effective covering")
    _add_common(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--lambdas")
    p.add_argument("--gamma", type=float)
    p.add_argument("--fail-fast", action="store_true", default=None)
    p.add_argument("--n-offsets", type=int)
    p.add_argument("--samples-per-unit", type=float)

    p = sub.add_parser("cover", help="build and verify an effective covering")
    _add_common(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--gamma", type=float)

    p = sub.add_parser("uncertainty", help="uncertainty constants on frequency masks")
    _add_common(p)
    p.add_argument("--mask", choices=["ball", "annulus", "sector", "annulus_sector", "rectangle"])
    p.add_argument("--weight", choices=["sqrt", "full"])
    p.add_argument("--lambdas", help="annulus center sweep")
    p.add_argument("--zetas", help="rectangle corner sweep")
    p.add_argument("--mask-delta", dest="mask_delta", type=float)
    p.add_argument("--mask-beta", dest="mask_beta", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--angle", type=float)
    p.add_argument("--eps0", type=float)

    p = sub.add_parser("resolvent", help="resolvent constant sweep M(lambda)")
    _add_common(p)
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambdas")
    p.add_argument("--m", type=float)
    p.add_argument("--lam0", type=float, help="calibration scale when --m is absent")
    p.add_argument("--fit", action="store_true", default=None, help="add log-log slope")

    p = sub.add_parser("observe", help="observability Gramian cost sweep")
    _add_common(p)
    p.add_argument("--beta", type=float)
    p.add_argument("--cutoff", type=float)
    p.add_argument("--T-list", dest="T_list")
    p.add_argument("--n-nodes", type=int)
    p.add_argument("--miller", help="M,m,eps for a predicted-cost comparison")
    p.add_argument("--envelope-eps", dest="envelope_eps", type=float,
                   help="fit log kappa against T^(2-4/eps)")

    p = sub.add_parser("construct-demo", help="smooth minorant of a random ball system")
    _add_common(p)
    p.add_argument("--W", type=float, help="circle circumference")
    p.add_argument("--M", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n-balls", dest="n_balls", type=int)

    p = sub.add_parser("list-families", help="catalog of built-in field families")
    p.add_argument("--config", help=argparse.SUPPRESS)
    return parser


def cmd_certify(args) -> int:
    cp, sec = _load_sections(args)
    field = _build_field(args, cp, default_dim=2, default_grid=256)
    rho = _merged(args, sec, "rho", float, 0.5)
    lambdas = _merged(args, sec, "lambdas", _parse_floats, [2560000.0])
    if isinstance(lambdas, str):
        lambdas = _parse_floats(lambdas)
    gamma = _merged(args, sec, "gamma", float, 0.25)
    fail_fast = bool(_merged(args, sec, "fail-fast", lambda s: s.lower() == "true", False))
    n_offsets = int(_merged(args, sec, "n-offsets", int, 32))
    spu = float(_merged(args, sec, "samples-per-unit", float, 64.0))
    report = covering.comb_gcc_certify(field, rho, lambdas, gamma=gamma, fail_fast=fail_fast,
                                       n_offsets=n_offsets, samples_per_unit=spu)
    for rec in report.per_lambda:
        print(f"[certify] lam={rec['lam']:g} entries={rec['n_entries']} "
              f"measured={rec['n_measured']} pass={rec['all_pass']}")
    config = {"rho": rho, "lambdas": lambdas, "gamma": gamma, "fail_fast": fail_fast,
              "n_offsets": n_offsets, "samples_per_unit": spu, "field": field.describe()}
    out = _out_dir(args)
    payload = {"passed": report.passed, "per_lambda": report.per_lambda}
    reports.write_json(out / "certify_report.json", reports.report_envelope("certify", config, payload))
    rows = []
    for rec in report.per_lambda:
        for e in rec["entries"]:
            rows.append([rec["lam"], e["angle"], e["p"], e["q"], e["T"], e["kind"],
                         e["M"], e["L"], e["eps"], e["floor"], e["measured"], e["pass"]])
    reports.write_csv(out / "certify_entries.csv",
                      ["lam", "angle", "p", "q", "T", "kind", "M", "L", "eps", "floor", "measured", "pass"],
                      rows)
    return 0 if report.passed else 1


def cmd_cover(args) -> int:
    cp, sec = _load_sections(args)
    field = _build_field(args, cp, default_dim=2, default_grid=256)
    rho = _merged(args, sec, "rho", float, 1.0)
    lam = _merged(args, sec, "lam", float, 160000.0)
    gamma = _merged(args, sec, "gamma", float, 0.25)
    builder = covering.default_covering_builder(field, rho, gamma)
    cov = builder(lam)
    ver = covering.verify_covering(cov)
    print(f"[cover] lam={lam:g} entries={ver.n_entries} covers={ver.covers} "
          f"budget_ok={ver.budget_ok} worst_margin={ver.worst_margin:.6g}")
    config = {"rho": rho, "lam": lam, "gamma": gamma, "field": field.describe()}
    payload = {
        "covering": covering.covering_to_dict(cov),
        "verification": {"covers": ver.covers, "budget_ok": ver.budget_ok,
                         "n_entries": ver.n_entries, "worst_margin": ver.worst_margin,
                         "gaps": ver.gaps, "ok": ver.ok},
    }
    out = _out_dir(args)
    reports.write_json(out / "cover_report.json", reports.report_envelope("cover", config, payload))
    return 0 if ver.ok else 1


def cmd_uncertainty(args) -> int:
    cp, sec = _load_sections(args)
    field = _build_field(args, cp, default_dim=1, default_grid=512)
    kind = _merged(args, sec, "mask", str, "annulus")
    weight = _merged(args, sec, "weight", str, "sqrt")
    mask_delta = float(_merged(args, sec, "mask-delta", float, 2.0))
    mask_beta = float(_merged(args, sec, "mask-beta", float, 0.0))
    sigma = _merged(args, sec, "sigma", float, None)
    radius = _merged(args, sec, "radius", float, None)
    angle = _merged(args, sec, "angle", float, 0.0)
    eps0 = _merged(args, sec, "eps0", float, 0.25)
    lambdas = _merged(args, sec, "lambdas", _parse_floats, None)
    if isinstance(lambdas, str):
        lambdas = _parse_floats(lambdas)
    zetas = _merged(args, sec, "zetas", _parse_floats, None)
    if isinstance(zetas, str):
        zetas = _parse_floats(zetas)

    def one_mask(**params):
        return spectral.build_mask(field.grid, field.dim, field.period, kind, **params)

    runs = []
    if kind == "rectangle":
        if sigma is None:
            raise ValueError("rectangle masks need --sigma")
        for z in (zetas if zetas is not None else [0.0]):
            runs.append(one_mask(zeta=z, sigma=sigma))
    elif kind == "ball":
        if radius is None:
            raise ValueError("ball masks need --radius")
        runs.append(one_mask(radius=radius))
    else:
        base = {}
        if kind in ("sector", "annulus_sector"):
            base.update(angle=angle, eps0=eps0)
        if kind in ("annulus", "annulus_sector"):
            for lam in (lambdas if lambdas is not None else [32.0]):
                runs.append(one_mask(lam=lam, delta=mask_delta, beta=mask_beta, **base))
        else:
            runs.append(one_mask(**base))
    reps = []
    for mask in runs:
        rep = spectral.uncertainty_constant(field, mask, weight=weight)
        reps.append(rep)
        label = mask.params.get("lam", mask.params.get("zeta", mask.params.get("radius", "")))
        print(f"[uncertainty] {kind}={label} rank={rep.rank} c={rep.c:.6g} C={rep.value:.6g}")
    config = {"mask": kind, "weight": weight, "mask_delta": mask_delta, "mask_beta": mask_beta,
              "sigma": sigma, "radius": radius, "angle": angle, "eps0": eps0,
              "lambdas": lambdas, "zetas": zetas, "field": field.describe()}
    out = _out_dir(args)
    payload = {"reports": [r.to_dict() for r in reps]}
    reports.write_json(out / "uncertainty_report.json",
                       reports.report_envelope("uncertainty", config, payload))
    reports.write_csv(out / "uncertainty_sweep.csv", reports.SPECTRAL_SWEEP_HEADER,
                      reports.spectral_sweep_rows(reps))
    return 0


def cmd_resolvent(args) -> int:
    cp, sec = _load_sections(args)
    field = _build_field(args, cp, default_dim=1, default_grid=512)
    gamma = float(_merged(args, sec, "gamma", float, 1.5))
    lambdas = _merged(args, sec, "lambdas", _parse_floats, [64.0, 125.0, 253.0, 512.0])
    if isinstance(lambdas, str):
        lambdas = _parse_floats(lambdas)
    m = _merged(args, sec, "m", float, None)
    lam0 = float(_merged(args, sec, "lam0", float, 16.0))
    if m is None:
        m = spectral.calibrate_m(field, gamma, lam0)
    fit = bool(_merged(args, sec, "fit", lambda s: s.lower() == "true", False))
    reps = spectral.resolvent_sweep(field, gamma, lambdas, m)
    for rep in reps:
        print(f"[resolvent] lam={rep.extra['lam']:g} M={rep.value:.6g} "
              f"kernel_dim={rep.extra['kernel_dim']}")
    config = {"gamma": gamma, "lambdas": lambdas, "m": m, "lam0": lam0,
              "field": field.describe()}
    payload = {"reports": [r.to_dict() for r in reps]}
    if fit:
        vals = [r.value for r in reps]
        if any(lam <= 0 for lam in lambdas):
            payload["fit"] = {"slope": None,
                              "reason": "fit needs positive lambdas"}
        elif all(math.isfinite(v) and v > 0 for v in vals):
            slope, intercept = np.polyfit(np.log(lambdas), np.log(vals), 1)
            payload["fit"] = {"slope": float(slope), "intercept": float(intercept)}
        else:
            payload["fit"] = {"slope": None, "reason": "non-finite M in sweep"}
    out = _out_dir(args)
    reports.write_json(out / "resolvent_report.json",
                       reports.report_envelope("resolvent", config, payload))
    reports.write_csv(out / "resolvent_sweep.csv", reports.SPECTRAL_SWEEP_HEADER,
                      reports.spectral_sweep_rows(reps))
    return 0


def cmd_observe(args) -> int:
    cp, sec = _load_sections(args)
    field = _build_field(args, cp, default_dim=1, default_grid=512)
    beta = float(_merged(args, sec, "beta", float, 1.0))
    K = float(_merged(args, sec, "cutoff", float, 16.0))
    T_list = _merged(args, sec, "T-list", _parse_floats, [0.1, 0.2, 0.4, 0.8])
    if isinstance(T_list, str):
        T_list = _parse_floats(T_list)
    n_nodes = _merged(args, sec, "n-nodes", int, None)
    miller = _merged(args, sec, "miller", str, None)
    envelope_eps = _merged(args, sec, "envelope-eps", float, None)
    reps = evolution.cost_curve(field, beta, T_list, K, n_nodes=n_nodes)
    rows = []
    for rep in reps:
        print(f"[observe] T={rep.T:g} lam_min={rep.lam_min:.6g} kappa={rep.kappa:.6g} "
              f"nodes={rep.n_nodes}")
        rows.append([rep.T, rep.K, rep.n_nodes, rep.lam_min, rep.kappa])
    payload = {"reports": [r.to_dict() for r in reps]}
    status = 0
    if miller is not None:
        M_res, m_res, eps = _parse_floats(miller)
        comparison = []
        for rep in reps:
            pred = evolution.miller_cost(M_res, m_res, rep.T, eps)
            comparison.append({"T": rep.T, "kappa_direct": rep.kappa, "kappa_pred": pred,
                               "ratio": None if pred is None else rep.kappa / pred})
        ratios = [c["ratio"] for c in comparison if c["ratio"] is not None]
        payload["miller"] = {"M": M_res, "m": m_res, "eps": eps, "label": "shape",
                             "C_eps": 1.0, "comparison": comparison,
                             "fitted_c": max(ratios) if ratios else None}
    if envelope_eps is not None:
        fit = evolution.arb_time_shape_check(field, envelope_eps, T_list, K, beta=beta)
        payload["envelope"] = fit
        if not fit["passed"]:
            status = 1
    config = {"beta": beta, "cutoff": K, "T_list": T_list, "n_nodes": n_nodes,
              "miller": miller, "envelope_eps": envelope_eps, "field": field.describe()}
    out = _out_dir(args)
    reports.write_json(out / "observe_report.json",
                       reports.report_envelope("observe", config, payload))
    reports.write_csv(out / "observe_sweep.csv",
                      ["T", "K", "n_nodes", "lam_min", "kappa"], rows)
    return status


def random_ball_system(rng: np.random.Generator, W: float, delta: float, n_balls: int) -> construct.BallSystem:
    """Jittered-lattice centers with spacing at least 2*delta."""
    pitch = W / n_balls
    if pitch < 2.0 * delta:
        raise ValueError(f"{n_balls} balls of radius {delta} cannot be disjoint on circumference {W}")
    jitter = 0.5 * (pitch - 2.0 * delta)
    centers = pitch * np.arange(n_balls) + rng.uniform(-jitter, jitter, size=n_balls)
    return construct.BallSystem(centers, delta, W)


def cmd_construct_demo(args) -> int:
    cp, sec = _load_sections(args)
    W = float(_merged(args, sec, "W", float, 40.0))
    M = float(_merged(args, sec, "M", float, 1.0))
    rho = _merged(args, sec, "rho", float, None)
    delta = float(_merged(args, sec, "delta", float, 0.01))
    n_balls = int(_merged(args, sec, "n-balls", int, 400))
    seed = args.seed if args.seed is not None else 0
    rng = np.random.default_rng(seed)
    Y = random_ball_system(rng, W, delta, n_balls)
    wmin, wat = Y.window_min_measure(M)
    if rho is None:
        rho = 0.8 * wmin / M
    sm = construct.smooth_minorant(Y, M, rho)
    member = Y.contains(sm.x)
    outside = float(np.max(sm.values[~member])) if np.any(~member) else 0.0
    density = construct.sliding_window_min(sm.values, sm.step, 2.0 * M)
    fd = construct.derivative_bounds(sm)
    checks = {
        "support_exact": outside == 0.0,
        "eta_at_least_quarter_rho": sm.eta >= rho / 4.0,
        "density_2M": density >= 0.99 * rho / 8.0,
        "derivative_bounds": all(d["ok"] for d in fd.values()),
    }
    passed = all(checks.values())
    print(f"[construct-demo] balls={n_balls} cells={len(sm.t_scales)} eta={sm.eta:.6g} "
          f"density={density:.6g} passed={passed}")
    config = {"W": W, "M": M, "rho": rho, "delta": delta, "n_balls": n_balls, "seed": seed}
    payload = {
        "checks": checks, "passed": passed, "eta": sm.eta, "rho": rho,
        "window_min_measure": wmin, "window_argmin": wat,
        "density_2M": density, "max_outside_support": outside,
        "n_cells": len(sm.t_scales),
        "gap_range": [sm.partition.min_gap, sm.partition.max_gap],
        "t_range": [float(sm.t_scales.min()), float(sm.t_scales.max())],
        "derivative_bounds": fd,
    }
    out = _out_dir(args)
    reports.write_json(out / "construct_report.json",
                       reports.report_envelope("construct-demo", config, payload))
    stride = max(1, len(sm.x) // 2000)
    reports.write_csv(out / "construct_profile.csv", ["x", "a"],
                      [[float(x), float(v)] for x, v in zip(sm.x[::stride], sm.values[::stride])])
    return 0 if passed else 1


def cmd_list_families(args) -> int:
    catalog = fields.family_catalog()
    for name, info in sorted(catalog.items()):
        params = ", ".join(info["params"]) if info["params"] else "none"
        print(f"{name}: {info['doc']} (dims: {info['dims']}; parameters: {params})")
    print("custom-grid: raw grid file, binary header "
          "(magic OGRD, version, dim, grid, period, origin as little-endian "
          "uint32/double) followed by row-major little-endian float64 values.")
    return 0


COMMANDS = {
    "certify": cmd_certify,
    "cover": cmd_cover,
    "uncertainty": cmd_uncertainty,
    "resolvent": cmd_resolvent,
    "observe": cmd_observe,
    "construct-demo": cmd_construct_demo,
    "list-families": cmd_list_families,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 2
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        where = f" (config: {args.config})" if getattr(args, "config", None) else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
