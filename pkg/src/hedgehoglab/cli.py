"""Batch front end.

One command per invocation; the configuration is a JSON file whose numeric
fields are strings, so angle precision survives parsing.  Exit status families:
0 ok, 2 configuration, 3 precondition, 4 numerical, 5 inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import conefield, render
from .arithmetic import RotationAngle, brjuno_sum, continued_fraction_expand, parse_angle
from .compacta import fill_to_full
from .errors import EXIT_CODES, ConfigError, HedgehogLabError
from .germs import (Germ, PolyMap, classify, henon_germ, normalize_fixed_point,
                    quadratic1d_germ, semiparabolic_multiplicity, with_classification)
from .hedgehog import hedgehog_approximate, scan_periodic_points
from .manifolds import center_manifold_jet, strong_stable_disc
from .petals import local_attracting_petals, maximal_petals, petal_cycle

COMMANDS = ("classify", "brjuno", "cones", "manifolds", "petals", "hedgehog", "render")


@dataclass
class RunConfig:
    command: str
    angle_spec: str
    germ_spec: dict
    ball: float = 0.25
    ball_outer: float = 0.3
    resolution: int = 1024
    orbit_cap: int = 100_000
    indices: tuple = (1, 2, 3)
    out_dir: str = "out"
    threads: int = 0
    angle_digits: int = 80
    brjuno_terms: int = 60
    divergence_bound: float = 1e6
    mu_bar: float = 0.3
    lambda_lower: float = 0.8
    cone_tangent: float = 0.18
    grid_density: int = 10
    jet_degree: int = 8
    raw: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not (self.ball < self.ball_outer):
            raise ConfigError("ball must be smaller than ball_outer")
        if not (256 <= self.resolution <= 8192
                and (self.resolution & (self.resolution - 1)) == 0):
            raise ConfigError("resolution must be a power of two in [256, 8192]")
        if self.orbit_cap < 100:
            raise ConfigError("orbit_cap too small")
        return self


def parse_config(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")

    def num(key, default, cast=float):
        v = raw.get(key, default)
        try:
            return cast(v)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"field {key!r}: cannot parse {v!r}") from e

    cfg = RunConfig(
        command=str(raw.get("command", "classify")),
        angle_spec=str(raw.get("angle", "golden")),
        germ_spec=raw.get("germ", {"kind": "quadratic1d"}),
        ball=num("ball", "0.25"),
        ball_outer=num("ball_outer", "0.3"),
        resolution=num("resolution", "1024", int),
        orbit_cap=num("orbit_cap", "100000", int),
        indices=tuple(int(v) for v in raw.get("indices", ["1", "2", "3"])),
        out_dir=str(raw.get("out", "out")),
        threads=num("threads", "0", int),
        angle_digits=num("angle_digits", "80", int),
        brjuno_terms=num("brjuno_terms", "60", int),
        divergence_bound=num("divergence_bound", "1e6"),
        mu_bar=num("mu_bar", "0.3"),
        lambda_lower=num("lambda_lower", "0.8"),
        cone_tangent=num("cone_tangent", "0.18"),
        grid_density=num("grid_density", "10", int),
        jet_degree=num("jet_degree", "8", int),
        raw=raw,
    )
    return cfg.validate()


def serialize_config(cfg: RunConfig) -> str:
    d = {
        "command": cfg.command,
        "angle": cfg.angle_spec,
        "germ": cfg.germ_spec,
        "ball": render.fnum(cfg.ball),
        "ball_outer": render.fnum(cfg.ball_outer),
        "resolution": str(cfg.resolution),
        "orbit_cap": str(cfg.orbit_cap),
        "indices": [str(v) for v in cfg.indices],
        "out": cfg.out_dir,
        "threads": str(cfg.threads),
        "angle_digits": str(cfg.angle_digits),
        "brjuno_terms": str(cfg.brjuno_terms),
        "divergence_bound": render.fnum(cfg.divergence_bound),
        "mu_bar": render.fnum(cfg.mu_bar),
        "lambda_lower": render.fnum(cfg.lambda_lower),
        "cone_tangent": render.fnum(cfg.cone_tangent),
        "grid_density": str(cfg.grid_density),
        "jet_degree": str(cfg.jet_degree),
    }
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


def build_germ(cfg: RunConfig, angle: RotationAngle):
    spec = cfg.germ_spec
    kind = spec.get("kind", "quadratic1d")
    if kind == "quadratic1d":
        return quadratic1d_germ(angle, domain_radius=cfg.ball_outer * 1.5)
    if kind == "henon":
        mu = complex(str(spec.get("mu", "0.1")))
        return henon_germ(angle, mu, domain_radius=cfg.ball_outer * 1.5)
    if kind == "poly1d":
        import cmath
        import math as m
        lam = cmath.exp(2j * m.pi * angle.value)
        coeffs = [0j, lam] + [complex(str(c)) for c in spec.get("higher", ["1"])]
        fwd = PolyMap.one_dim(coeffs)
        return normalize_fixed_point(fwd, 0j, declared_angle=angle,
                                     domain_radius=cfg.ball_outer * 1.5)
    raise ConfigError(f"unknown germ kind {kind!r}")


def classified_germ(cfg: RunConfig):
    angle = parse_angle(cfg.angle_spec, cfg.angle_digits)
    g, fp = build_germ(cfg, angle)
    if angle.exact:
        cls = classify(fp, None)
    else:
        report = brjuno_sum(angle, cfg.brjuno_terms, cfg.divergence_bound)
        cls = classify(fp, report)
    return g, with_classification(fp, cls)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_classify(cfg, out):
    g, fp = classified_germ(cfg)
    payload = {
        "command": "classify",
        "eigenvalue_neutral": fp.eigenvalue_neutral,
        "eigenvalue_dissipative": fp.eigenvalue_dissipative,
        "angle": cfg.angle_spec,
        "classification": str(fp.classification),
        "dimension": g.dim,
    }
    render.write_json_report(out / "report.json", payload)
    return 0


def _cmd_brjuno(cfg, out):
    angle = parse_angle(cfg.angle_spec, cfg.angle_digits)
    cfe = continued_fraction_expand(angle, min(cfg.brjuno_terms, 64)) \
        if angle.exact else None
    if angle.exact:
        payload = {"command": "brjuno", "verdict": "rational",
                   "partial_sums": [], "convergents": list(cfe.convergents)}
        render.write_json_report(out / "report.json", payload)
        return 0
    rep = brjuno_sum(angle, cfg.brjuno_terms, cfg.divergence_bound)
    payload = {
        "command": "brjuno",
        "verdict": rep.verdict,
        "partial_sums": list(rep.partial_sums),
        "divergence_bound_hit": rep.divergence_bound_hit,
        "increments_tail": list(rep.increments[-10:]),
    }
    render.write_json_report(out / "report.json", payload)
    return 0 if rep.verdict != "undecided" else EXIT_CODES["inconclusive"]


def _cmd_cones(cfg, out):
    import math as m
    g, fp = classified_germ(cfg)
    spec = conefield.ConeFieldSpec(m.atan(cfg.cone_tangent))
    cert = conefield.certify(g, spec, cfg.ball_outer, cfg.grid_density,
                             cfg.mu_bar, cfg.lambda_lower)
    (out / "certificate.json").write_text(cert.to_json() + "\n", encoding="utf-8")
    render.write_json_report(out / "report.json",
                             {"command": "cones", "passed": cert.passed,
                              "margins": cert.margins})
    return 0 if cert.passed else EXIT_CODES["numerical"]


def _cmd_manifolds(cfg, out):
    g, fp = classified_germ(cfg)
    if g.dim != 2:
        raise ConfigError("manifold jets need a 2-D germ")
    cj = center_manifold_jet(g, cfg.jet_degree)
    sj = strong_stable_disc(g, cfg.jet_degree)
    render.write_jet_csv(out / "center_jet.csv", cj)
    render.write_jet_csv(out / "stable_jet.csv", sj)
    render.write_json_report(out / "report.json", {
        "command": "manifolds",
        "center": {"degree": cj.degree, "validity_radius": cj.validity_radius,
                   "residual": cj.residual},
        "stable": {"degree": sj.degree, "validity_radius": sj.validity_radius,
                   "residual": sj.residual},
    })
    return 0


def _petal_family(cfg):
    g, fp = classified_germ(cfg)
    if not fp.classification.is_parabolic:
        raise ConfigError("petals command needs a rational angle")
    nf = semiparabolic_multiplicity(g, fp,
                                    jet_degree=max(cfg.jet_degree,
                                                   fp.classification.q + 2))
    fam = maximal_petals(g, nf, cfg.ball, resolution=cfg.resolution,
                         orbit_cap=cfg.orbit_cap)
    return g, fp, fam


def _cmd_petals(cfg, out):
    from .petals import petal_touches_boundary
    g, fp, fam = _petal_family(cfg)
    perm, rot = petal_cycle(g, fam)
    contact = petal_touches_boundary(fam, cfg.ball)
    for comp in fam.components:
        render.write_point_cloud_csv(out / f"component_{comp.index}.csv",
                                     comp.compact.boundary_points)
    render.write_json_report(out / "report.json", {
        "command": "petals",
        "components": len(fam.components),
        "areas_cells": [c.compact.count() for c in fam.components],
        "centroids": [c.centroid for c in fam.components],
        "boundary_contact": contact,
        "permutation": list(perm),
        "rotation_number": rot,
        "report": fam.extras.get("report"),
    })
    render.render_svg(out / "render.svg", cfg.ball,
                      [(c.compact, f"petal-{c.index}") for c in fam.components],
                      title="maximal invariant petals")
    return 0


def _cmd_hedgehog(cfg, out):
    g, fp = classified_germ(cfg)
    run = hedgehog_approximate(g, fp, cfg.ball, cfg.indices,
                               resolution=cfg.resolution, orbit_cap=cfg.orbit_cap)
    filled = fill_to_full(run.limit_candidate)
    for s in run.stages:
        render.write_point_cloud_csv(out / f"stage_{s.n}.csv", s.compact.boundary_points)
    render.write_json_report(out / "report.json", {
        "command": "hedgehog",
        "indices": list(run.convergent_indices),
        "stages": [{"n": s.n, "p": s.p, "q": s.q,
                    "contains_zero": s.contains_zero, "connected": s.connected,
                    "invariance_pass": s.invariance.passed,
                    "invariance_worst_cells": s.invariance.worst_offset_cells,
                    "boundary_contact": s.boundary_contact,
                    "scan_interference": s.scan.semi_neutral_interference}
                   for s in run.stages],
        "hausdorff_gaps": list(run.hausdorff_gaps),
        "report": run.report,
        "filled_cells": filled.count(),
    })
    layers = [(s.compact, f"stage-{s.n}") for s in run.stages]
    layers.append((run.limit_candidate, "limit"))
    render.render_svg(out / "render.svg", cfg.ball, layers, title="hedgehog stages")
    ok = all(s.flags_pass for s in run.stages)
    return 0 if ok else EXIT_CODES["inconclusive"]


def _cmd_render(cfg, out):
    # re-render from previously written CSV artifacts
    src = Path(cfg.out_dir)
    clouds = sorted(src.glob("component_*.csv")) + sorted(src.glob("stage_*.csv"))
    if not clouds:
        raise HedgehogLabError("no point-cloud artifacts found",
                               **{"dir": str(src)}) from None
    from .compacta import CompactSetApprox
    layers = []
    for path in clouds:
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        pts = rows[:, 0] + 1j * rows[:, 1] if rows.size else np.zeros(0, complex)
        layers.append((CompactSetApprox.from_points(pts, "render", cfg.ball * 1.05,
                                                    min(cfg.resolution, 1024)),
                       path.stem))
    render.render_svg(out / "render.svg", cfg.ball, layers, title="re-render")
    return 0


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.threads > 0:
        import numba
        numba.set_num_threads(cfg.threads)
    handlers = {
        "classify": _cmd_classify,
        "brjuno": _cmd_brjuno,
        "cones": _cmd_cones,
        "manifolds": _cmd_manifolds,
        "petals": _cmd_petals,
        "hedgehog": _cmd_hedgehog,
        "render": _cmd_render,
    }
    try:
        return handlers[cfg.command](cfg, out)
    except HedgehogLabError as e:
        render.write_json_report(out / "report.json", {
            "command": cfg.command, "error": e.code, "message": str(e),
            "details": {k: str(v) for k, v in sorted(e.details.items())},
        })
        return EXIT_CODES[e.exit_family]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hedgehoglab",
                                 description="petal and hedgehog computations "
                                             "for neutral fixed points")
    ap.add_argument("--config", required=True, help="path to the JSON run configuration")
    ap.add_argument("--command", help="override the config's command")
    ap.add_argument("--out", help="override the output directory")
    ap.add_argument("--threads", type=int, help="worker threads for orbit kernels")
    ap.add_argument("--resolution", type=int, help="override grid resolution")
    args = ap.parse_args(argv)
    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
        if args.command:
            cfg.command = args.command
        if args.out:
            cfg.out_dir = args.out
        if args.threads:
            cfg.threads = args.threads
        if args.resolution:
            cfg.resolution = args.resolution
        cfg.validate()
    except (OSError, ConfigError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CODES["config"]
    status = run(cfg)
    if status != 0:
        print(f"{cfg.command}: finished with status {status}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
