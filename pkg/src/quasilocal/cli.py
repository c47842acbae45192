"""Batch scenario runner: radial | embed | energy | sweep | geometry | loop.

Artifacts are deterministic: identical configs give byte-identical CSV and
JSON, and SVG plots carry no timestamps.  Every artifact embeds the fully
resolved config (a ``# config:`` comment line in CSV, a ``config`` key in
JSON, a <desc> element in SVG).  Exit codes: 0 success, 2 config error,
3 numerical failure; failures print a machine-readable error JSON to
stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfg
from .embedding import SurfaceSpec, build_sources, radius_range, solve_embedding
from .energy import (
    LoopSpec,
    loop_integral,
    rho_bracket,
    surface_energy,
    sweep_energy,
)
from .errors import ConfigError, QuasilocalError
from .geometry import PerturbationProfiles, axial_preset, fit_powers, surface_geometry
from .radial import (
    AnchorBoundary,
    AsymptoticBoundary,
    AxialMode,
    BackgroundParams,
    PolarMode,
    SurfaceAnchorBoundary,
    a_profile,
    integrate_wave,
    inverse_tortoise,
    potential,
    tortoise,
)
from .sphere import HarmonicField, SphereGrid, analyze, evaluate
from .svgplot import line_plot

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


# ----------------------------------------------------------------------
# config -> domain objects
# ----------------------------------------------------------------------


def _background(conf) -> BackgroundParams:
    return BackgroundParams(m=conf["background"]["m"])


def _mode(conf):
    m = conf["mode"]
    if m["kind"] == "axial":
        return AxialMode(
            ell=m["ell"],
            sigma=m["sigma"],
            mu_sq=m.get("mu_sq"),
            amplitude=m.get("amplitude", 1.0),
        )
    return PolarMode(n=m["n"], sigma=m["sigma"], amplitude=m.get("amplitude", 1.0))


def _boundary(conf):
    b = conf["mode"]["boundary"]
    if b["type"] == "anchor":
        return AnchorBoundary(z=b["z"], dz=b["dz"], r=b.get("r"), r_star=b.get("r_star"))
    if b["type"] == "surface_anchor":
        return SurfaceAnchorBoundary(z=b["z"], dz=b["dz"], offset=b.get("offset", 0.0))
    return AsymptoticBoundary(
        amplitude=b.get("amplitude", 1.0),
        phase=b.get("phase", 0.0),
        r_star_start=b.get("r_star_start"),
        v_threshold=b.get("v_threshold"),
    )


def _listify(v):
    return [float(x) for x in (v if isinstance(v, list) else [v])]


def _surface(conf):
    s = conf["surface"]
    t_values = _listify(s["t"])
    d_values = _listify(s["d"])
    template = SurfaceSpec(
        t=t_values[0],
        d=d_values[0],
        theta_d=s["theta_d"],
        phi_d=s["phi_d"],
        substitution=s["substitution"],
    )
    return t_values, d_values, template


# ----------------------------------------------------------------------
# artifact writers
# ----------------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows, config_doc) -> None:
    lines = ["# config: " + cfg.canonical_json(config_doc)]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict, config_doc) -> None:
    doc = {"config": config_doc, **payload}
    path.write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def _radial_solution(conf, bg, mode, d_values):
    """Integrate the wave over the scenario's radial coverage."""
    num = conf["numerics"]
    bnd = _boundary(conf)
    if isinstance(bnd, SurfaceAnchorBoundary):
        bnd = bnd.resolve(d_values[0])
    if "radial_range" in num:
        r_range = tuple(num["radial_range"])
    else:
        lo = min(d_values) - 1.5
        hi = max(d_values) + 1.5
        if isinstance(bnd, AnchorBoundary):
            anchor_r = bnd.r if bnd.r is not None else inverse_tortoise(bnd.r_star, bg)
            lo, hi = min(lo, anchor_r), max(hi, anchor_r)
        lo = max(lo, bg.horizon * 1.05 + 1e-6)
        r_range = (lo, hi)
    return integrate_wave(bg, mode, bnd, r_range, tol=num["tolerance"])


def run_radial(conf, out: Path, jobs: int) -> list[Path]:
    bg, mode = _background(conf), _mode(conf)
    _, d_values, _ = _surface(conf)
    sol = _radial_solution(conf, bg, mode, d_values)
    n = conf["numerics"]["radial_samples"]
    r = np.linspace(sol.r_min * (1 + 1e-12), sol.r_max * (1 - 1e-12), n)
    states = sol.eval_rstar(tortoise(r, bg))
    v = potential(r, bg, mode)
    if sol.kind == "axial":
        prof = a_profile(sol)
        a, ap, app = prof.a(r), prof.a_prime(r), prof.a_double_prime(r)
    else:
        a = ap = app = np.full_like(r, np.nan)
    rows = [
        (
            float(r[i]),
            float(tortoise(r[i], bg)),
            float(states[0, i]),
            float(states[1, i]),
            float(v[i]),
            float(a[i]),
            float(ap[i]),
            float(app[i]),
        )
        for i in range(len(r))
    ]
    csv_path = out / "radial.csv"
    _write_csv(
        csv_path,
        ["r", "r_star", "z", "dz_drstar", "v", "a", "a_prime", "a_double_prime"],
        rows,
        conf,
    )
    json_path = out / "radial.json"
    _write_json(
        json_path,
        {
            "kind": sol.kind,
            "r_min": sol.r_min,
            "r_max": sol.r_max,
            "samples": len(r),
            "residual_max": sol.residual_max(),
            "asymptotic_truncation": sol.asymptotic_truncation,
        },
        conf,
    )
    return [csv_path, json_path]


def _pipeline_to_embedding(conf, spec):
    bg, mode = _background(conf), _mode(conf)
    num = conf["numerics"]
    bnd = _boundary(conf)
    if isinstance(bnd, SurfaceAnchorBoundary):
        bnd = bnd.resolve(spec.d)
    lo, hi = radius_range(spec)
    r_lo, r_hi = lo - 0.5, hi + 0.5
    if isinstance(bnd, AnchorBoundary):
        anchor_r = bnd.r if bnd.r is not None else inverse_tortoise(bnd.r_star, bg)
        r_lo, r_hi = min(r_lo, anchor_r), max(r_hi, anchor_r)
    unit_mode = dataclasses.replace(mode, amplitude=1.0)
    sol = integrate_wave(bg, unit_mode, bnd, (r_lo, r_hi), tol=num["tolerance"])
    prof = a_profile(sol)
    grid = SphereGrid.for_band_limit(num["l_max"])
    s_tau, s_n = build_sources(prof, spec, grid)
    return bg, mode, prof, grid, s_tau, s_n


def run_embed(conf, out: Path, jobs: int) -> list[Path]:
    t_values, d_values, template = _surface(conf)
    spec = dataclasses.replace(template, t=t_values[0], d=d_values[0])
    _bg, _mode_obj, _prof, _grid, s_tau, s_n = _pipeline_to_embedding(conf, spec)
    emb = solve_embedding(s_tau, s_n)
    paths = []
    for name, h in (("embed_tau", emb.tau), ("embed_n", emb.n_field)):
        rows = [
            (l, m, float(h.coeffs[l, h.l_max + m]))
            for l in range(h.l_max + 1)
            for m in range(-l, l + 1)
        ]
        p = out / f"{name}.csv"
        _write_csv(p, ["l", "m", "coefficient"], rows, conf)
        paths.append(p)
    jp = out / "embed.json"
    _write_json(
        jp,
        {
            "kernel_residual_tau": {str(k): v for k, v in emb.kernel_residual_tau.items()},
            "kernel_residual_n": emb.kernel_residual_n,
            "l_max": emb.l_max,
            "t": spec.t,
            "d": spec.d,
        },
        conf,
    )
    paths.append(jp)
    return paths


def run_energy(conf, out: Path, jobs: int) -> list[Path]:
    bg, mode = _background(conf), _mode(conf)
    t_values, d_values, template = _surface(conf)
    num = conf["numerics"]
    rows, e1s, e2s = [], [], []
    for d in d_values:
        spec = dataclasses.replace(template, d=d)
        res = surface_energy(
            bg,
            mode,
            _boundary(conf),
            spec,
            t_values,
            l_max=num["l_max"],
            tol=num["tolerance"],
            c_factor=num.get("c_factor"),
        )
        e1s.append(res.coefficients.e1)
        e2s.append(res.coefficients.e2)
        for i, t in enumerate(t_values):
            rows.append((t, d, float(res.e[i]), float(res.dedt[i])))
    rows.sort(key=lambda r: (r[0], r[1]))
    csv_path = out / "energy.csv"
    _write_csv(csv_path, ["t", "d", "e", "dedt"], rows, conf)
    json_path = out / "energy.json"
    _write_json(
        json_path,
        {"d_values": d_values, "t_values": t_values, "e1": e1s, "e2": e2s},
        conf,
    )
    paths = [csv_path, json_path]
    if conf["outputs"]["svg"] and len(t_values) > 1:
        svg = out / "energy_e_vs_t.svg"
        series = []
        for j, d in enumerate(d_values):
            series.append([r[2] for r in rows if r[1] == d])
        line_plot(
            svg,
            t_values,
            series,
            labels=[f"d={d:g}" for d in d_values],
            title="E(t)",
            xlabel="t",
            ylabel="E",
            desc=cfg.canonical_json(conf),
        )
        paths.append(svg)
    return paths


def run_sweep(conf, out: Path, jobs: int) -> list[Path]:
    bg, mode = _background(conf), _mode(conf)
    t_values, d_values, template = _surface(conf)
    num = conf["numerics"]
    report = sweep_energy(
        bg,
        mode,
        _boundary(conf),
        template,
        d_values,
        t_values,
        l_max=num["l_max"],
        tol=num["tolerance"],
        c_factor=num.get("c_factor"),
        jobs=jobs,
    )
    csv_path = out / "sweep.csv"
    _write_csv(csv_path, ["t", "d", "e", "dedt"], list(report.rows()), conf)
    fits = [
        {
            "t": float(t),
            "c1": f.c1,
            "c2": f.c2,
            "c3": f.c3,
            "residual": f.residual,
            "condition": f.condition,
        }
        for t, f in zip(report.t_values, report.fits)
    ]
    json_path = out / "sweep.json"
    _write_json(
        json_path,
        {
            "d_values": [float(d) for d in report.d_values],
            "t_values": [float(t) for t in report.t_values],
            "e1": [float(v) for v in report.e1],
            "e2": [float(v) for v in report.e2],
            "kernel_residual_tau": [float(v) for v in report.kernel_residual_tau],
            "kernel_residual_n": [float(v) for v in report.kernel_residual_n],
            "fits": fits,
        },
        conf,
    )
    paths = [csv_path, json_path]
    if conf["outputs"]["svg"]:
        svg = out / "sweep_falloff.svg"
        scaled = np.abs(report.e[0] * report.d_values**2)
        line_plot(
            svg,
            report.d_values,
            [scaled],
            labels=[f"t={report.t_values[0]:g}"],
            title="|E d^2| vs d",
            xlabel="d",
            ylabel="|E d^2|",
            logx=True,
            desc=cfg.canonical_json(conf),
        )
        paths.append(svg)
    return paths


def run_geometry(conf, out: Path, jobs: int) -> list[Path]:
    bg, mode = _background(conf), _mode(conf)
    t_values, d_values, template = _surface(conf)
    num, geo_conf = conf["numerics"], conf["geometry"]
    if geo_conf["perturbation"] == "none":
        pert = PerturbationProfiles.none()
    else:
        if mode.kind != "axial":
            raise ConfigError("axial_preset perturbation requires an axial mode")
        bnd = _boundary(conf)
        if isinstance(bnd, SurfaceAnchorBoundary):
            bnd = bnd.resolve(d_values[0])
        lo = min(d_values) - 1.6
        hi = max(d_values) + 1.6
        if isinstance(bnd, AnchorBoundary):
            anchor_r = bnd.r if bnd.r is not None else inverse_tortoise(bnd.r_star, bg)
            lo, hi = min(lo, anchor_r), max(hi, anchor_r)
        sol = integrate_wave(bg, mode, bnd, (lo, hi), tol=num["tolerance"])
        pert = axial_preset(bg, mode, sol, epsilon=num["epsilon"])
    reports = []
    for d in d_values:
        spec = dataclasses.replace(template, t=t_values[0], d=d)
        reports.append(
            surface_geometry(
                spec,
                bg,
                pert,
                resolution=num["geometry_resolution"],
                gauss_bonnet_tol=geo_conf["gauss_bonnet_tol"],
            )
        )
    first = reports[0]
    rows = [
        (
            float(first.theta_s[j]),
            float(first.phi_s[k]),
            float(first.gauss[j, k]),
            float(first.mean_norm[j, k]),
            float(first.hawking_line[j, k]),
        )
        for j in range(first.n_theta)
        for k in range(first.n_phi)
    ]
    csv_path = out / "geometry.csv"
    _write_csv(csv_path, ["theta", "phi", "k_gauss", "h_norm", "hawking_line"], rows, conf)
    payload = {
        "d_values": d_values,
        "area": [r.area for r in reports],
        "gauss_bonnet": [r.gauss_bonnet for r in reports],
        "hawking_integral": [r.hawking_integral for r in reports],
        "flags": sorted({f for r in reports for f in r.flags}),
        "resolution": first.n_theta,
    }
    if len(d_values) >= 4:
        powers = (0, 1, 2, 3) if len(d_values) >= 5 else (0, 1, 2)
        coeffs, resid, cond = fit_powers(
            zip(d_values, [r.hawking_integral for r in reports]), powers
        )
        payload["hawking_fit"] = {
            "powers": list(powers),
            "coefficients": coeffs,
            "residual": resid,
            "condition": cond,
        }
    json_path = out / "geometry.json"
    _write_json(json_path, payload, conf)
    return [csv_path, json_path]


def run_loop(conf, out: Path, jobs: int) -> list[Path]:
    loop_conf = conf["loop"]
    if loop_conf["kind"] == "equator":
        loop = LoopSpec.equator(loop_conf["n_samples"])
    else:
        loop = LoopSpec.circle(loop_conf["theta0"], loop_conf["n_samples"])
    field_name = loop_conf["field"]
    if field_name == "constant":
        h = HarmonicField.zeros(4)
        h.coeffs[0, 4] = math.sqrt(4.0 * math.pi)
    else:
        t_values, d_values, template = _surface(conf)
        spec = dataclasses.replace(template, t=t_values[0], d=d_values[0])
        _bg, _m, _prof, grid, s_tau, s_n = _pipeline_to_embedding(conf, spec)
        if field_name == "source_tau":
            h = analyze(s_tau)
        elif field_name == "source_n":
            h = analyze(s_n)
        else:
            emb = solve_embedding(s_tau, s_n)
            wgrid = SphereGrid.for_band_limit(2 * emb.l_max)
            h = analyze(rho_bracket(emb, wgrid, spec.d))
    total = loop_integral(h, loop)
    vals = evaluate(h, loop.theta, loop.phi)
    rows = [
        (float(loop.s[i]), float(loop.theta[i]), float(loop.phi[i]), float(vals[i]))
        for i in range(loop.n_samples)
    ]
    csv_path = out / "loop.csv"
    _write_csv(csv_path, ["s", "theta", "phi", "integrand"], rows, conf)
    json_path = out / "loop.json"
    _write_json(
        json_path,
        {
            "total": total,
            "arc_length": loop.arc_length(),
            "field": field_name,
            "n_samples": loop.n_samples,
        },
        conf,
    )
    return [csv_path, json_path]


_RUNNERS = {
    "radial": run_radial,
    "embed": run_embed,
    "energy": run_energy,
    "sweep": run_sweep,
    "geometry": run_geometry,
    "loop": run_loop,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasilocal",
        description="Quasi-local energy pipeline for perturbed black-hole spacetimes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="scenario JSON path")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (dotted path, JSON value)",
        )
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--jobs", type=int, default=1, help="sweep parallelism")
    args = parser.parse_args(argv)

    def fail(exc, category, code):
        payload = {
            "error": {
                "type": type(exc).__name__,
                "message": str(exc),
                "category": category,
            }
        }
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return code

    try:
        conf = cfg.load_config(args.config, args.overrides)
    except ConfigError as exc:
        return fail(exc, "config", EXIT_CONFIG)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = _RUNNERS[args.command](conf, out, max(1, args.jobs))
    except ConfigError as exc:
        return fail(exc, "config", EXIT_CONFIG)
    except QuasilocalError as exc:
        return fail(exc, "numerical", EXIT_NUMERICAL)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return fail(exc, "numerical", EXIT_NUMERICAL)
    for p in written:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
