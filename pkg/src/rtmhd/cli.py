"""Batch front end: parse a config, dispatch one command, write artifacts.

Exit codes: 0 success, 2 configuration error, 3 computation error, 4 I/O
error.  On failure a machine-readable JSON object {"error", "message"} is
printed to stdout.  All artifacts are deterministic functions of the
effective configuration (random seeds are listed in the config).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import dispersion, modes, verify
from .config import RunConfig, load_config
from .errors import ConfigError, RtmhdError
from .forms import assemble_forms
from .growth import growth_rate
from .profiles import Frequency, Grid1D, MagneticConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3
EXIT_IO = 4


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=1, sort_keys=True)
        f.write("\n")


def _parse_xi(text: str) -> Frequency:
    try:
        a, b = text.split(",")
        return Frequency(float(a), float(b))
    except ValueError as exc:
        raise ConfigError(f"--xi expects 'a,b', got {text!r}") from exc


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    raw = cfg.to_dict()
    if args.M is not None:
        raw["mag"]["magnitude"] = args.M
    if args.n is not None:
        raw["grid"]["n"] = args.n
    if args.Lz is not None:
        raw["grid"]["half_length"] = args.Lz
    if args.radius is not None:
        raw["sweep"]["radius"] = args.radius
    out = os.environ.get("RTMHD_OUT")
    if args.out is not None:
        out = args.out
    if out is not None:
        raw["output_dir"] = out
    from .config import config_from_dict

    return config_from_dict(raw)


def _target_xi(args) -> Frequency:
    if args.xi is None:
        raise ConfigError("this command requires --xi a,b")
    xi = _parse_xi(args.xi)
    if xi.is_zero():
        raise ConfigError("--xi must be nonzero")
    return xi


def cmd_profile(cfg: RunConfig, args) -> int:
    grid = cfg.grid
    xs = np.concatenate(([-grid.half_length], grid.points(), [grid.half_length]))
    rho = cfg.profile.rho(xs)
    drho = cfg.profile.drho(xs)
    lines = ["x3,rho,drho"]
    for x, r, d in zip(xs, rho, drho):
        lines.append(f"{_fmt(x)},{_fmt(r)},{_fmt(d)}")
    path = os.path.join(cfg.output_dir, "profile.csv")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    from .profiles import profile_metrics

    _write_json(
        os.path.join(cfg.output_dir, "profile_metrics.json"),
        profile_metrics(cfg.profile),
    )
    print(f"total_jump={_fmt(cfg.profile.total_jump)}")
    return EXIT_OK


def cmd_critical(cfg: RunConfig, args) -> int:
    result = dispersion.critical_number_auto(
        cfg.profile, lz0=cfg.grid.half_length, n0=cfg.grid.n, g=cfg.params.g
    )
    with open(os.path.join(cfg.output_dir, "critical_trace.csv"), "w") as f:
        f.write(dispersion.trace_to_csv(result))
    payload = {
        "kind": "infinite" if result.is_infinite else "finite",
        "value": result.value,
    }
    _write_json(os.path.join(cfg.output_dir, "critical.json"), payload)
    print("M_c=INF" if result.is_infinite else f"M_c={_fmt(result.value)}")
    for lz, v in result.trace:
        print(f"  Lz={_fmt(lz)} value={_fmt(v)}")
    return EXIT_OK


def cmd_freq_thresholds(cfg: RunConfig, args) -> int:
    from .profiles import Orientation

    if cfg.mag.orientation is Orientation.HORIZONTAL:
        radius = cfg.radius
        kmax = int(math.floor(radius * cfg.params.L))
        lines = ["xi1,xi2,S"]
        L = cfg.params.L
        for i in range(1, kmax + 1):
            for j in range(0, kmax + 1):
                xi = Frequency.lattice(i, j, L)
                if xi.norm > radius:
                    continue
                try:
                    s_val = dispersion.critical_freq_horizontal(
                        cfg.profile, cfg.grid, xi, cfg.mag.magnitude, g=cfg.params.g
                    )
                    lines.append(f"{_fmt(xi.xi1)},{_fmt(xi.xi2)},{_fmt(s_val)}")
                except RtmhdError:
                    lines.append(f"{_fmt(xi.xi1)},{_fmt(xi.xi2)},")
        path = os.path.join(cfg.output_dir, "thresholds.csv")
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")
        print(f"wrote {path}")
    else:
        xi_vc = dispersion.critical_freq_vertical(
            cfg.profile, cfg.grid, cfg.mag.magnitude, g=cfg.params.g
        )
        _write_json(
            os.path.join(cfg.output_dir, "thresholds.json"),
            {"xi_vc": xi_vc, "M": cfg.mag.magnitude},
        )
        print(f"xi_vc={_fmt(xi_vc)}")
    return EXIT_OK


def cmd_growth(cfg: RunConfig, args) -> int:
    xi = _target_xi(args)
    forms = assemble_forms(cfg.profile, cfg.grid, xi, cfg.mag, cfg.params)
    result = growth_rate(forms)
    if result is None:
        _write_json(
            os.path.join(cfg.output_dir, "growth.json"),
            {"xi": [xi.xi1, xi.xi2], "growing": False},
        )
        print("no growing mode")
        return EXIT_OK
    payload = {
        "xi": [xi.xi1, xi.xi2],
        "growing": True,
        "lambda": result.lam,
        "s_star": result.s_star,
        "alpha": result.alpha_at_s,
        "bracket_width": result.bracket_width,
        "s_frontier": result.s_frontier,
    }
    _write_json(os.path.join(cfg.output_dir, "growth.json"), payload)
    print(f"lambda={_fmt(result.lam)}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    table = dispersion.lattice_sweep(
        cfg.profile, cfg.grid, cfg.mag, cfg.params, cfg.radius
    )
    with open(os.path.join(cfg.output_dir, "dispersion.csv"), "w") as f:
        f.write(dispersion.table_to_csv(table))
    top = dispersion.sup_rate(table)
    payload = {
        "Lambda": top.lam_max,
        "Lambda_star": top.lam_star,
        "xi1": [top.xi_pair[0].xi1, top.xi_pair[0].xi2],
        "on_boundary": top.on_boundary,
        "radius": cfg.radius,
    }
    _write_json(os.path.join(cfg.output_dir, "sweep_summary.json"), payload)
    if top.on_boundary:
        print("warning: maximum sits on the sweep boundary; increase the radius")
    print(f"Lambda={_fmt(top.lam_max)}")
    print(f"xi1={_fmt(top.xi_pair[0].xi1)},{_fmt(top.xi_pair[0].xi2)}")
    return EXIT_OK


def _build_mode_at(
    cfg: RunConfig, xi: Frequency, mode_tol: float | None = None
) -> modes.NormalMode:
    forms = assemble_forms(cfg.profile, cfg.grid, xi, cfg.mag, cfg.params)
    result = growth_rate(forms)
    if result is None:
        raise RtmhdError(f"xi = ({xi.xi1:g}, {xi.xi2:g}) admits no growing mode")
    kwargs = {} if mode_tol is None else {"mode_tol": mode_tol}
    return modes.build_mode(
        result, cfg.mag, cfg.params, cfg.profile, cfg.grid, **kwargs
    )


def cmd_mode(cfg: RunConfig, args) -> int:
    xi = _target_xi(args)
    mode = _build_mode_at(cfg, xi)
    stem = os.path.join(cfg.output_dir, "mode")
    modes.export_mode(mode, cfg.profile, cfg.params, stem)
    print(f"lambda={_fmt(mode.lam)}")
    for name in ("eq1", "eq2", "eq3", "div"):
        print(f"residual_{name}={mode.residuals[name]:.3e}")
    return EXIT_OK


def _read_members_csv(path: str) -> dict[Frequency, float]:
    members: dict[Frequency, float] = {}
    with open(path) as f:
        next(f)
        for line in f:
            x1, x2, member, lam = line.strip().split(",")
            if member == "1" and lam:
                members[Frequency(float(x1), float(x2))] = float(lam)
    return members


def cmd_verify(cfg: RunConfig, args) -> int:
    summary_path = os.path.join(cfg.output_dir, "sweep_summary.json")
    table_path = os.path.join(cfg.output_dir, "dispersion.csv")
    if os.path.exists(summary_path) and os.path.exists(table_path):
        with open(summary_path) as f:
            summary = json.load(f)
        xi1 = Frequency(*summary["xi1"])
        lam_cap = float(summary["Lambda"])
        members = _read_members_csv(table_path)
    else:
        table = dispersion.lattice_sweep(
            cfg.profile, cfg.grid, cfg.mag, cfg.params, cfg.radius
        )
        top = dispersion.sup_rate(table)
        xi1 = top.xi_pair[0]
        lam_cap = top.lam_max
        members = {Frequency(e.xi1, e.xi2): e.lam for e in table.entries if e.member}

    # loose residual gate: the time integration is the actual check here
    mode = _build_mode_at(cfg, xi1, mode_tol=1e-2)
    lam = mode.lam
    dt = cfg.verify_dt if cfg.verify_dt is not None else 0.01 / lam
    T = cfg.verify_T if cfg.verify_T is not None else 3.0 / lam
    init = verify.eigenmode_state(mode, cfg.profile, cfg.params)
    est, states = verify.run_rate(init, cfg.profile, cfg.mag, cfg.params, dt, T)
    rel_err = abs(est.rate - lam) / lam
    with open(os.path.join(cfg.output_dir, "timeseries.csv"), "w") as f:
        f.write(verify.series_to_csv(states))
    _write_json(
        os.path.join(cfg.output_dir, "verify.json"),
        {
            "xi": [xi1.xi1, xi1.xi2],
            "lambda_pred": lam,
            "lambda_meas": est.rate,
            "rel_err": rel_err,
            "fit_residual": est.fit_residual,
            "dt": dt,
            "T": T,
        },
    )
    print(f"lambda_pred={_fmt(lam)}")
    print(f"lambda_meas={_fmt(est.rate)}")
    print(f"rel_err={rel_err:.3e}")

    # sharpness: random data at the strongest member frequencies must stay
    # below the per-frequency rates and the sweep maximum
    ranked = sorted(
        members.items(), key=lambda kv: (-kv[1], kv[0].norm, kv[0].xi1, kv[0].xi2)
    )[:8]
    worst = verify.sharpness_test(
        cfg.profile, cfg.mag, cfg.params, cfg.grid, lam_cap,
        seeds=list(cfg.seeds), xi_rates=dict(ranked),
    )
    _write_json(
        os.path.join(cfg.output_dir, "sharpness.json"),
        {
            "Lambda": lam_cap,
            "max_measured_rate": worst,
            "ratio": worst / lam_cap,
            "seeds": list(cfg.seeds),
            "frequencies": [[x.xi1, x.xi2] for x, _ in ranked],
        },
    )
    print(f"sharpness_max={_fmt(worst)}")
    return EXIT_OK


_COMMANDS = {
    "profile": cmd_profile,
    "critical": cmd_critical,
    "freq-thresholds": cmd_freq_thresholds,
    "growth": cmd_growth,
    "sweep": cmd_sweep,
    "mode": cmd_mode,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rtmhd",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("config", help="path to a JSON run configuration")
    parser.add_argument("--xi", help="target frequency 'a,b' (growth/mode)")
    parser.add_argument("--M", type=float, help="override field magnitude")
    parser.add_argument("--n", type=int, help="override grid point count")
    parser.add_argument("--Lz", type=float, help="override grid half length")
    parser.add_argument("--radius", type=float, help="override sweep radius")
    parser.add_argument("--out", help="override output directory (or env RTMHD_OUT)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = _apply_overrides(cfg, args)
        os.makedirs(cfg.output_dir, exist_ok=True)
        _write_json(
            os.path.join(cfg.output_dir, "effective_config.json"), cfg.to_dict()
        )
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}))
        return EXIT_CONFIG
    except RtmhdError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_COMPUTE
    except OSError as exc:
        print(json.dumps({"error": "io", "message": str(exc)}))
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
