"""Command-line front end.

Subcommands: keyrate, sweep, optimize-tps, noise, max-distance, compare,
oracle-check.  Runs are described by a flat sectioned key=value config file
(see ``CONFIG_SCHEMA``) or by one of the frozen figure presets; results go
to stdout and optionally to CSV / JSON / gnuplot files.

Exit codes: 0 success, 1 usage or config error, 2 valid run whose outcome
is negative (no positive key, or a failed oracle check).
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import sys

from . import analysis, protocols, sources
from ._backend import BACKEND
from .errors import ConfigError

RATE_COLUMNS = ("parameter", "k_ps", "p_success", "mutual_info", "holevo", "t_ps_used", "clamped")
NOISE_COLUMNS = ("parameter", "eps_star")
CLAMP_FLOOR = 1e-300


# --------------------------------------------------------------------------
# config files
# --------------------------------------------------------------------------

def _opt_float(raw: str, keyword: str):
    return raw if raw == keyword else float(raw)


CONFIG_SCHEMA = {
    "protocol": {
        "mode": (str, "two-way", ("two-way", "one-way")),
        "t_a": (float, 0.5, None),
        "beta": (float, None, None),  # required
        "mu": (lambda r: _opt_float(r, "optimal"), "optimal", None),
        "conditioning": (
            str,
            protocols.HETERODYNE_SPLIT,
            (protocols.HETERODYNE_SPLIT, protocols.MODE_LEVEL),
        ),
    },
    "source": {
        "v_alice": (float, None, None),  # required
        "v_bob": (float, "same", None),
    },
    "subtraction": {
        "k_alice": (int, 0, None),
        "t_ps_alice": (lambda r: _opt_float(r, "optimize"), 1.0, None),
        "k_bob": (int, 0, None),
        "t_ps_bob": (lambda r: _opt_float(r, "optimize"), 1.0, None),
    },
    "channel": {
        "distance_km": (float, 0.0, None),
        "eps": (float, 0.0, None),
        "eps_forward": (float, "unset", None),
        "eps_backward": (float, "unset", None),
    },
    "sweep": {
        "axis": (str, "distance-km", ("distance-km", "eps", "t_ps-alice", "t_ps-bob")),
        "start": (float, None, None),
        "stop": (float, None, None),
        "points": (int, None, None),
    },
    "search": {
        "cutoff": (float, 1e-8, None),
        "tol": (float, 1e-5, None),
        "resolution_km": (float, 0.1, None),
    },
    "output": {
        "format": (str, "csv", ("csv", "json", "gnuplot")),
        "path": (str, "", None),
    },
}

REQUIRED_KEYS = (("protocol", "beta"), ("source", "v_alice"))


def parse_config_text(text: str) -> dict:
    """Parse a sectioned key=value file into typed values.

    Unknown sections or keys, duplicate keys, and malformed values are all
    rejected with the offending key and line number.
    """
    values = {sec: dict() for sec in CONFIG_SCHEMA}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in CONFIG_SCHEMA:
                raise ConfigError(
                    f"unknown section [{section}] at line {lineno}",
                    key=section,
                    line=lineno,
                )
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value at line {lineno}", line=lineno)
        if section is None:
            raise ConfigError(f"key outside any section at line {lineno}", line=lineno)
        key, _, rawval = (part.strip() for part in line.partition("="))
        if key not in CONFIG_SCHEMA[section]:
            raise ConfigError(
                f"unknown key '{key}' in section [{section}] at line {lineno}",
                key=key,
                line=lineno,
            )
        if key in values[section]:
            raise ConfigError(f"duplicate key '{key}' at line {lineno}", key=key, line=lineno)
        caster = CONFIG_SCHEMA[section][key][0]
        try:
            value = caster(rawval)
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"bad value for '{key}' at line {lineno}: {rawval!r}",
                key=key,
                line=lineno,
            ) from exc
        choices = CONFIG_SCHEMA[section][key][2]
        if choices is not None and value not in choices:
            raise ConfigError(
                f"'{key}' must be one of {choices} at line {lineno}, got {value!r}",
                key=key,
                line=lineno,
            )
        values[section][key] = value
    return values


def finalize_config(values: dict) -> dict:
    """Fill defaults and check required keys; returns section->key->value."""
    out = {}
    for section, keys in CONFIG_SCHEMA.items():
        out[section] = {}
        for key, (_, default, _choices) in keys.items():
            out[section][key] = values.get(section, {}).get(key, default)
    for section, key in REQUIRED_KEYS:
        if out[section][key] is None:
            raise ConfigError(f"missing required key '{key}' in section [{section}]", key=key)
    if out["source"]["v_bob"] == "same":
        out["source"]["v_bob"] = out["source"]["v_alice"]
    if out["channel"]["eps_forward"] == "unset":
        out["channel"]["eps_forward"] = out["channel"]["eps"]
    if out["channel"]["eps_backward"] == "unset":
        out["channel"]["eps_backward"] = out["channel"]["eps"]
    return out


def load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fp:
        return finalize_config(parse_config_text(fp.read()))


def apply_overrides(values: dict, assignments) -> list[str]:
    """Apply --set section.key=value pairs; returns the overridden keys."""
    touched = []
    for item in assignments:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, _, rawval = item.partition("=")
        section, _, key = dotted.strip().partition(".")
        rawval = rawval.strip()
        if section not in CONFIG_SCHEMA or key not in CONFIG_SCHEMA[section]:
            raise ConfigError(f"unknown config key '{dotted.strip()}'", key=key)
        caster, _default, choices = CONFIG_SCHEMA[section][key]
        try:
            value = caster(rawval)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for '{dotted.strip()}': {rawval!r}", key=key) from exc
        if choices is not None and value not in choices:
            raise ConfigError(f"'{key}' must be one of {choices}, got {value!r}", key=key)
        values[section][key] = value
        touched.append(f"{section}.{key}")
    return touched


def _protocol_config(cfg: dict, distance_km: float | None = None) -> protocols.ProtocolConfig:
    """Two-way ProtocolConfig at the configured (or given) distance."""
    sub_a = cfg["subtraction"]["t_ps_alice"]
    sub_b = cfg["subtraction"]["t_ps_bob"]
    l_km = cfg["channel"]["distance_km"] if distance_km is None else distance_km
    return protocols.ProtocolConfig(
        alice_src=sources.SourceSpec(cfg["source"]["v_alice"]),
        bob_src=sources.SourceSpec(cfg["source"]["v_bob"]),
        alice_sub=sources.SubtractionSpec(
            cfg["subtraction"]["k_alice"], 0.9 if sub_a == "optimize" else sub_a
        ),
        bob_sub=sources.SubtractionSpec(
            cfg["subtraction"]["k_bob"], 0.9 if sub_b == "optimize" else sub_b
        ),
        t_a=cfg["protocol"]["t_a"],
        forward=analysis.distance_to_channel(l_km, cfg["channel"]["eps_forward"]),
        backward=analysis.distance_to_channel(l_km, cfg["channel"]["eps_backward"]),
        beta=cfg["protocol"]["beta"],
        mu_policy=cfg["protocol"]["mu"],
        conditioning=cfg["protocol"]["conditioning"],
    )


def _wants_optimize(cfg: dict) -> bool:
    return "optimize" in (cfg["subtraction"]["t_ps_alice"], cfg["subtraction"]["t_ps_bob"])


# --------------------------------------------------------------------------
# curve container and emitters
# --------------------------------------------------------------------------

@dataclasses.dataclass
class Curve:
    label: str
    axis: str
    columns: tuple
    rows: list  # list of row lists, floats
    metadata: dict


def _fmt(value: float) -> str:
    return repr(float(value))


def rate_curve(sweep: analysis.SweepResult, label: str) -> Curve:
    # t_ps_used reports the subtracting side's transmittance (alice's when
    # both sides subtract; bob's full value then lives in the JSON points)
    bob_only = (
        sweep.metadata.get("k_alice", 0) == 0 and sweep.metadata.get("k_bob", 0) > 0
    )
    rows = []
    for pt in sweep.points:
        k_ps = pt.report.k_ps
        clamped = 1.0 if 0.0 < abs(k_ps) < CLAMP_FLOOR else 0.0
        if clamped:
            k_ps = 0.0
        t_used = pt.t_ps_bob if bob_only else pt.t_ps_alice
        rows.append(
            [pt.value, k_ps, pt.report.p_success, pt.report.mutual_info,
             pt.report.holevo, t_used, clamped]
        )
    return Curve(label, sweep.axis, RATE_COLUMNS, rows, dict(sweep.metadata))


def noise_curve(label: str, distances, eps_values, metadata: dict) -> Curve:
    rows = [[l_km, e] for l_km, e in zip(distances, eps_values)]
    return Curve(label, "distance-km", NOISE_COLUMNS, rows, metadata)


def emit_csv(curves: list[Curve], fp) -> None:
    columns = curves[0].columns
    fp.write("curve," + ",".join(columns) + "\n")
    for curve in curves:
        for row in curve.rows:
            fp.write(curve.label + "," + ",".join(_fmt(v) for v in row) + "\n")


def emit_gnuplot(curves: list[Curve], fp) -> None:
    for i, curve in enumerate(curves):
        if i:
            fp.write("\n\n")
        fp.write(f"# curve: {curve.label}\n")
        fp.write("# columns: " + " ".join(curve.columns) + "\n")
        for row in curve.rows:
            fp.write(" ".join(_fmt(v) for v in row) + "\n")


def emit_json(curves: list[Curve], fp, extra_metadata: dict | None = None) -> None:
    payload = {
        "metadata": {"backend": BACKEND, **(extra_metadata or {})},
        "curves": [
            {
                "label": c.label,
                "axis": c.axis,
                "columns": list(c.columns),
                "metadata": c.metadata,
                "rows": c.rows,
            }
            for c in curves
        ],
    }
    json.dump(payload, fp, indent=1)
    fp.write("\n")


def sweep_to_dict(sweep: analysis.SweepResult) -> dict:
    """Loss-free JSON form of a SweepResult (bit-exact round trip)."""
    return {
        "axis": sweep.axis,
        "metadata": sweep.metadata,
        "points": [
            {
                "value": pt.value,
                "t_ps_alice": pt.t_ps_alice,
                "t_ps_bob": pt.t_ps_bob,
                "report": pt.report.as_dict(),
            }
            for pt in sweep.points
        ],
    }


def sweep_from_dict(d: dict) -> analysis.SweepResult:
    points = tuple(
        analysis.SweepPoint(
            value=p["value"],
            report=protocols.KeyRateReport.from_dict(p["report"]),
            t_ps_alice=p["t_ps_alice"],
            t_ps_bob=p["t_ps_bob"],
        )
        for p in d["points"]
    )
    return analysis.SweepResult(axis=d["axis"], points=points, metadata=d["metadata"])


def _write_output(curves, fmt, path, extra_metadata=None):
    if not path:
        return
    with open(path, "w", encoding="utf-8") as fp:
        if fmt == "csv":
            emit_csv(curves, fp)
        elif fmt == "gnuplot":
            emit_gnuplot(curves, fp)
        else:
            emit_json(curves, fp, extra_metadata)


# --------------------------------------------------------------------------
# figure presets (frozen)
# --------------------------------------------------------------------------

_BASE = {
    "v": 40.0,
    "eps": 0.01,
    "beta": 0.95,
    "t_a": 0.5,
}
_RATE_GRID = tuple(float(l) for l in range(0, 331, 10))
_NOISE_GRID = tuple(float(l) for l in range(10, 151, 10))

# curve specs: (label, family, k) with family one of
#   two-way schemes 'none'/'alice'/'bob'/'both' and one-way 'oneway'
PRESETS = {
    "fig3c": ("rate", (("alice-k1", "alice", 1), ("alice-k2", "alice", 2), ("alice-k3", "alice", 3))),
    "fig3d": ("noise", (("alice-k1", "alice", 1), ("alice-k2", "alice", 2), ("alice-k3", "alice", 3))),
    "fig4a": (
        "rate",
        (("alice-k1", "alice", 1), ("original", "none", 0),
         ("oneway-k1", "oneway", 1), ("oneway-gg02", "oneway", 0)),
    ),
    "fig4b": (
        "noise",
        (("alice-k1", "alice", 1), ("original", "none", 0),
         ("oneway-k1", "oneway", 1), ("oneway-gg02", "oneway", 0)),
    ),
    "fig5a": ("rate", (("bob-k1", "bob", 1), ("bob-k2", "bob", 2), ("bob-k3", "bob", 3))),
    "fig5b": ("noise", (("bob-k1", "bob", 1), ("bob-k2", "bob", 2), ("bob-k3", "bob", 3))),
    "fig6a": ("rate", (("bob-k1", "bob", 1), ("original", "none", 0), ("oneway-k1", "oneway", 1))),
    "fig6b": ("noise", (("bob-k1", "bob", 1), ("original", "none", 0))),
    "fig7a": (
        "rate",
        (("both-k1", "both", 1), ("alice-k1", "alice", 1),
         ("original", "none", 0), ("oneway-k1", "oneway", 1)),
    ),
    "fig7b": (
        "noise",
        (("both-k1", "both", 1), ("alice-k1", "alice", 1),
         ("original", "none", 0), ("oneway-k1", "oneway", 1)),
    ),
}


def _preset_base_config() -> dict:
    """Raw (unfinalized) config values shared by every figure preset."""
    values = {sec: dict() for sec in CONFIG_SCHEMA}
    values["protocol"] = {"beta": _BASE["beta"], "t_a": _BASE["t_a"]}
    values["source"] = {"v_alice": _BASE["v"]}
    values["channel"] = {"eps": _BASE["eps"]}
    values["subtraction"] = {"t_ps_alice": "optimize", "t_ps_bob": "optimize"}
    return values


def _scheme_protocol_config(cfg: dict, family: str, k: int) -> protocols.ProtocolConfig:
    base = _protocol_config(cfg)
    off = sources.SubtractionSpec.disabled()
    sub = sources.SubtractionSpec(k, 0.9) if k else off
    if family == "none":
        return base.replace(alice_sub=off, bob_sub=off)
    if family == "alice":
        return base.replace(alice_sub=sub, bob_sub=off)
    if family == "bob":
        return base.replace(alice_sub=off, bob_sub=sub)
    if family == "both":
        return base.replace(alice_sub=sub, bob_sub=sub)
    raise ValueError(f"unknown scheme family {family!r}")


def _run_preset_curve(cfg, kind, label, family, k, grid, tol):
    reopt = _wants_optimize(cfg)
    if family == "oneway":
        src = sources.SourceSpec(cfg["source"]["v_alice"])
        sub = sources.SubtractionSpec(k, 0.9) if k else sources.SubtractionSpec.disabled()
        eps = cfg["channel"]["eps_forward"]
        beta = cfg["protocol"]["beta"]
        if kind == "rate":
            sweep = analysis.sweep_one_way_distance(src, sub, eps, beta, grid, reopt, label)
            return rate_curve_one_way(sweep, label)
        eps_stars = [
            _nan_if_none(
                analysis.one_way_tolerable_excess_noise(src, sub, l_km, beta, tol, reopt)
            )
            for l_km in grid
        ]
        return noise_curve(label, grid, eps_stars, {"protocol": "one-way", "k": k})

    pcfg = _scheme_protocol_config(cfg, family, k)
    if kind == "rate":
        sweep = analysis.sweep_distance(pcfg, grid, reopt, label)
        return rate_curve(sweep, label)
    eps_stars = [
        _nan_if_none(analysis.tolerable_excess_noise(pcfg, l_km, tol, reopt))
        for l_km in grid
    ]
    return noise_curve(label, grid, eps_stars, {"scheme": family, "k": k})


def rate_curve_one_way(sweep: analysis.SweepResult, label: str) -> Curve:
    rows = []
    for pt in sweep.points:
        k_ps = pt.report.k_ps
        clamped = 1.0 if 0.0 < abs(k_ps) < CLAMP_FLOOR else 0.0
        if clamped:
            k_ps = 0.0
        rows.append(
            [pt.value, k_ps, pt.report.p_success, pt.report.mutual_info,
             pt.report.holevo, pt.t_ps_alice, clamped]
        )
    return Curve(label, sweep.axis, RATE_COLUMNS, rows, dict(sweep.metadata))


def _nan_if_none(value):
    return float("nan") if value is None else value


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def _print_report(report: protocols.KeyRateReport, header: str, extra=""):
    print(header)
    if extra:
        print(extra)
    print(f"  P_success    = {report.p_success:.12g}")
    print(f"  I(B:A)       = {report.mutual_info:.12g} bits")
    print(f"  S(E:B)       = {report.holevo:.12g} bits")
    print(f"  eig (uncond) = {[round(x, 9) for x in report.eig_unconditional]}")
    print(f"  eig (cond)   = {[round(x, 9) for x in report.eig_conditional]}")
    print(f"  K_S          = {report.k_s:.12g} bits/use")
    print(f"  K_PS         = {report.k_ps:.12g} bits/use")


def cmd_keyrate(cfg: dict, args) -> int:
    l_km = cfg["channel"]["distance_km"]
    if cfg["protocol"]["mode"] == "one-way":
        src = sources.SourceSpec(cfg["source"]["v_alice"])
        tps = cfg["subtraction"]["t_ps_alice"]
        sub = sources.SubtractionSpec(
            cfg["subtraction"]["k_alice"], 0.9 if tps == "optimize" else tps
        )
        ch = analysis.distance_to_channel(l_km, cfg["channel"]["eps_forward"])
        beta = cfg["protocol"]["beta"]
        if tps == "optimize" and sub.k >= 1:
            t_star, report = analysis.optimize_one_way_tps(src, sub, ch, beta)
            extra = f"  t_ps (opt)   = {t_star:.6f}"
        else:
            t_star = sub.t_ps
            report = protocols.one_way_key_rate(src, sub, ch, beta)
            extra = ""
        _print_report(report, f"one-way key rate at {l_km} km", extra)
        used = {"t_ps_alice": t_star, "t_ps_bob": 1.0}
    else:
        pcfg = _protocol_config(cfg)
        report, tpa, tpb = analysis.best_rate(pcfg, _wants_optimize(cfg))
        _print_report(
            report,
            f"two-way key rate at {l_km} km",
            f"  t_ps used    = alice {tpa:.6f}, bob {tpb:.6f}",
        )
        used = {"t_ps_alice": tpa, "t_ps_bob": tpb}
    if args.out:
        payload = {"metadata": {"backend": BACKEND, "distance_km": l_km, **used},
                   "report": report.as_dict()}
        with open(args.out, "w", encoding="utf-8") as fp:
            json.dump(payload, fp, indent=1)
            fp.write("\n")
    return 0 if report.k_ps > 0.0 else 2


def cmd_sweep(cfg: dict, args) -> int:
    tol = cfg["search"]["tol"]
    if args.preset:
        kind, curve_specs = PRESETS[args.preset]
        grid = _RATE_GRID if kind == "rate" else _NOISE_GRID

        def run(spec):
            label, family, k = spec
            return _run_preset_curve(cfg, kind, label, family, k, grid, tol)

        if args.threads > 1:
            with concurrent.futures.ThreadPoolExecutor(args.threads) as pool:
                curves = list(pool.map(run, curve_specs))
        else:
            curves = [run(spec) for spec in curve_specs]
        meta = {"preset": args.preset, "overrides": args.overridden}
    else:
        sweep_cfg = cfg["sweep"]
        for key in ("start", "stop", "points"):
            if sweep_cfg[key] is None:
                raise ConfigError(f"missing required key '{key}' in section [sweep]", key=key)
        if sweep_cfg["points"] < 1:
            raise ConfigError("sweep needs at least one point", key="points")
        if sweep_cfg["axis"] != "distance-km":
            raise ConfigError("only distance-km sweeps are supported without a preset", key="axis")
        step = (sweep_cfg["stop"] - sweep_cfg["start"]) / max(sweep_cfg["points"] - 1, 1)
        grid = [sweep_cfg["start"] + i * step for i in range(sweep_cfg["points"])]
        pcfg = _protocol_config(cfg)
        sweep = analysis.sweep_distance(pcfg, grid, _wants_optimize(cfg), "sweep")
        curves = [rate_curve(sweep, "sweep")]
        meta = {"overrides": args.overridden}

    for curve in curves:
        print(f"curve {curve.label}: {len(curve.rows)} points")
    _write_output(curves, args.format or cfg["output"]["format"],
                  args.out or cfg["output"]["path"], meta)
    return 0


def cmd_optimize_tps(cfg: dict, args) -> int:
    pcfg = _protocol_config(cfg)
    sides = []
    if pcfg.alice_sub.k >= 1:
        sides.append(analysis.ALICE)
    if pcfg.bob_sub.k >= 1:
        sides.append(analysis.BOB)
    if not sides:
        print("no subtracting side (k_alice = k_bob = 0); nothing to optimize")
        return 1
    side = analysis.BOTH if len(sides) == 2 else sides[0]
    result = analysis.optimize_tps(pcfg, side)
    if side == analysis.BOTH:
        res_a, res_b = result
        print(f"optimal t_ps: alice {res_a.t_ps:.6f}, bob {res_b.t_ps:.6f}")
        report, positive = res_a.report, res_a.positive
    else:
        print(f"optimal t_ps ({side}): {result.t_ps:.6f}")
        report, positive = result.report, result.positive
    if not positive:
        print("no positive rate anywhere on the grid")
    _print_report(report, f"rate at optimum ({cfg['channel']['distance_km']} km)")
    return 0 if report.k_ps > 0.0 else 2


def cmd_noise(cfg: dict, args) -> int:
    l_km = cfg["channel"]["distance_km"]
    tol = cfg["search"]["tol"]
    if cfg["protocol"]["mode"] == "one-way":
        src = sources.SourceSpec(cfg["source"]["v_alice"])
        tps = cfg["subtraction"]["t_ps_alice"]
        sub = sources.SubtractionSpec(
            cfg["subtraction"]["k_alice"], 0.9 if tps == "optimize" else tps
        )
        eps_star = analysis.one_way_tolerable_excess_noise(
            src, sub, l_km, cfg["protocol"]["beta"], tol, tps == "optimize"
        )
    else:
        eps_star = analysis.tolerable_excess_noise(
            _protocol_config(cfg), l_km, tol, _wants_optimize(cfg)
        )
    if eps_star is None:
        print(f"no positive rate at {l_km} km even with zero excess noise")
        return 2
    print(f"tolerable excess noise at {l_km} km: {eps_star:.6f}")
    return 0


def cmd_max_distance(cfg: dict, args) -> int:
    cutoff = cfg["search"]["cutoff"]
    res = cfg["search"]["resolution_km"]
    if cfg["protocol"]["mode"] == "one-way":
        src = sources.SourceSpec(cfg["source"]["v_alice"])
        tps = cfg["subtraction"]["t_ps_alice"]
        sub = sources.SubtractionSpec(
            cfg["subtraction"]["k_alice"], 0.9 if tps == "optimize" else tps
        )
        dist = analysis.one_way_max_distance(
            src, sub, cfg["channel"]["eps_forward"], cfg["protocol"]["beta"],
            cutoff, res, tps == "optimize",
        )
    else:
        dist = analysis.max_distance(_protocol_config(cfg), cutoff, res, _wants_optimize(cfg))
    print(f"max distance at cutoff {cutoff:g}: {dist:.1f} km")
    return 0


def cmd_compare(cfg: dict, args) -> int:
    sweep_cfg = cfg["sweep"]
    if sweep_cfg["start"] is None or sweep_cfg["stop"] is None or sweep_cfg["points"] is None:
        grid = list(_RATE_GRID)
    else:
        step = (sweep_cfg["stop"] - sweep_cfg["start"]) / max(sweep_cfg["points"] - 1, 1)
        grid = [sweep_cfg["start"] + i * step for i in range(sweep_cfg["points"])]
    k = max(cfg["subtraction"]["k_alice"], 1)
    results = analysis.compare_schemes(_protocol_config(cfg), grid, k, _wants_optimize(cfg))
    curves = [rate_curve(results[scheme], scheme) for scheme in analysis.SCHEMES]
    for curve in curves:
        best = max(row[1] for row in curve.rows)
        print(f"scheme {curve.label}: best rate {best:.6g}")
    _write_output(curves, args.format or cfg["output"]["format"],
                  args.out or cfg["output"]["path"], {"k": k})
    return 0


ORACLE_GRID_V = (5.0, 20.0, 40.0)
ORACLE_GRID_T = (0.5, 0.8, 0.95, 1.0)
ORACLE_GRID_K = (0, 1, 2, 3)


def run_oracle_check(tol_fock=1e-8, tol_integral=1e-4, inject_fault=False, quiet=False):
    """Closed form vs Fock oracle vs integral oracle over the full grid.

    Returns (passed, failures); each failure names the grid cell and the
    worst elementwise deviation.
    """
    failures = []
    for v in ORACLE_GRID_V:
        src = sources.SourceSpec(v)
        for t_ps in ORACLE_GRID_T:
            for k in ORACLE_GRID_K:
                sub = sources.SubtractionSpec(k, t_ps)
                closed = sources.subtracted_covariance(src, sub)
                c_elem = closed.c + (1e-3 if inject_fault else 0.0)
                fock = sources.fock_oracle_covariance(src, sub)
                dev_fock = max(
                    abs(fock.v1 - closed.v1), abs(fock.c - c_elem), abs(fock.v2 - closed.v2)
                )
                integ = sources.integral_oracle_covariance(src, sub)
                dev_int = max(
                    abs(integ.v1 - closed.v1), abs(integ.c - c_elem), abs(integ.v2 - closed.v2)
                )
                cell = f"(v={v:g}, t_ps={t_ps:g}, k={k})"
                if dev_fock > tol_fock:
                    failures.append(f"{cell}: fock deviation {dev_fock:.3e} > {tol_fock:g}")
                if dev_int > tol_integral:
                    failures.append(f"{cell}: integral deviation {dev_int:.3e} > {tol_integral:g}")
    if not quiet:
        for failure in failures:
            print("FAIL " + failure)
        n_cells = len(ORACLE_GRID_V) * len(ORACLE_GRID_T) * len(ORACLE_GRID_K)
        print(f"oracle check: {n_cells} cells, {len(failures)} failure(s)")
    return not failures, failures


def cmd_oracle_check(args) -> int:
    passed, _ = run_oracle_check(args.tol_fock, args.tol_integral, args.inject_fault)
    print("PASS" if passed else "FAIL")
    return 0 if passed else 2


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twqkd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, needs_config=True):
        sp.add_argument("--config", help="path to a run-config file")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value")
        sp.add_argument("--allow-override", action="store_true",
                        help="permit --set/--config on top of a frozen preset")
        sp.add_argument("--out", default="", help="output file path")
        sp.add_argument("--format", choices=("csv", "json", "gnuplot"), default="",
                        help="output file format")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")

    for name in ("keyrate", "optimize-tps", "noise", "max-distance", "compare"):
        add_common(sub.add_parser(name))
    sweep_parser = sub.add_parser("sweep")
    add_common(sweep_parser)
    sweep_parser.add_argument("--preset", choices=sorted(PRESETS), default="",
                              help="frozen figure-reproduction preset")

    oracle = sub.add_parser("oracle-check")
    oracle.add_argument("--tol-fock", type=float, default=1e-8)
    oracle.add_argument("--tol-integral", type=float, default=1e-4)
    oracle.add_argument("--inject-fault", action="store_true",
                        help="self-test hook: perturb the closed form by 1e-3")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "oracle-check":
        return cmd_oracle_check(args)

    try:
        preset = getattr(args, "preset", "")
        if preset:
            if (args.config or args.set) and not args.allow_override:
                raise ConfigError(
                    "presets are frozen; pass --allow-override to change their parameters"
                )
            values = _preset_base_config()
            overridden = []
            if args.config:
                with open(args.config, encoding="utf-8") as fp:
                    file_values = parse_config_text(fp.read())
                for section, keys in file_values.items():
                    for key, value in keys.items():
                        values[section][key] = value
                        overridden.append(f"{section}.{key}")
            overridden += apply_overrides(values, args.set)
            cfg = finalize_config(values)
            args.overridden = overridden
        else:
            if args.config:
                with open(args.config, encoding="utf-8") as fp:
                    values = parse_config_text(fp.read())
            else:
                values = {sec: dict() for sec in CONFIG_SCHEMA}
            args.overridden = apply_overrides(values, args.set)
            cfg = finalize_config(values)

        if args.command == "keyrate":
            return cmd_keyrate(cfg, args)
        if args.command == "sweep":
            if not preset and not args.config:
                raise ConfigError("sweep needs --preset or --config")
            return cmd_sweep(cfg, args)
        if args.command == "optimize-tps":
            return cmd_optimize_tps(cfg, args)
        if args.command == "noise":
            return cmd_noise(cfg, args)
        if args.command == "max-distance":
            return cmd_max_distance(cfg, args)
        if args.command == "compare":
            return cmd_compare(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
