"""``catsurf`` command line.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import comparison, corpus, fileio, polyhedral, smoothing, triangulation
from .fileio import InputError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

GB_TOL = 1e-9
REGION_TOL = 1e-8
CAT_TOL = 1e-9


@dataclass
class RunReport:
    command: str
    input_digest: str | None = None
    checks: list[dict] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def add(self, name: str, passed: bool, value=None, tolerance=None, **extra) -> None:
        self.checks.append({"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance, **extra})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        # wall time is left out so reports are reproducible byte for byte
        return {"command": self.command, "input_digest": self.input_digest, "passed": self.passed,
                "checks": self.checks, **self.data}

    def text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'} ({self.wall_time:.2f} s)"]
        for c in self.checks:
            val = "" if c["value"] is None else f" value={c['value']!r}"
            tol = "" if c["tolerance"] is None else f" tol={c['tolerance']!r}"
            lines.append(f"  [{'ok' if c['passed'] else 'FAIL'}] {c['name']}{val}{tol}")
        return "\n".join(lines)


# ----------------------------------------------------------------------
# check


def cmd_check(args) -> RunReport:
    surface = fileio.read_surface(args.surface)
    rep = RunReport("check", fileio.digest(args.surface))
    run_gb = args.gauss_bonnet or not (args.cat_faces or args.kappa is not None)
    curv = polyhedral.curvature_report(surface)
    rep.data["curvature"] = curv.to_dict()
    if run_gb:
        total = curv.total_omega + curv.face_curvature
        rep.add("gauss_bonnet", abs(curv.gauss_bonnet_defect) <= GB_TOL, curv.gauss_bonnet_defect, GB_TOL,
                total=total, expected=2 * math.pi * surface.chi)
        worst, count = 0.0, 0
        # single faces and vertex stars, where those are disks
        candidates = [[i] for i in range(len(surface.faces))]
        candidates += [surface.vertex_faces[v] for v in surface.vertices]
        for faces in candidates:
            try:
                region = polyhedral.PolygonRegion.from_faces(surface, faces)
            except ValueError:
                continue
            worst = max(worst, abs(polyhedral.gauss_bonnet_region(surface, region)["defect"]))
            count += 1
        rep.add("gauss_bonnet_regions", worst <= REGION_TOL, worst, REGION_TOL, regions=count)
    if args.kappa is not None or args.cat_faces:
        kappa = surface.kappa_max if args.kappa is None else args.kappa
        faces_ok = surface.kappa_max <= kappa
        rep.add("face_curvature_bound", faces_ok, surface.kappa_max, kappa)
        below = sorted(v for v, a in curv.cone_angle.items() if a < 2 * math.pi - polyhedral.SMOOTH_TOL)
        rep.add("cone_angles_at_least_2pi", not below, min(curv.cone_angle.values()), 2 * math.pi,
                offending_vertices=below)
        if args.cat_faces:
            worst, arg = -math.inf, None
            for i, f in enumerate(surface.faces):
                tri = comparison.AbstractTriangle.from_sides(f.kappa, *f.lengths)
                try:
                    v = comparison.cat_test(tri, kappa, grid_n=args.grid_n).max_violation
                except comparison.InadmissibleTriangle:
                    v, arg = math.inf, i
                if v > worst:
                    worst, arg = v, i
            rep.add("cat_faces", worst <= CAT_TOL, worst, CAT_TOL, worst_face=arg)
    return rep


# ----------------------------------------------------------------------
# smooth


def cmd_smooth(args) -> RunReport:
    surface = fileio.read_surface(args.surface)
    rep = RunReport("smooth", fileio.digest(args.surface))
    try:
        mode = smoothing.resolve_mode(args.mode)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    try:
        plan = smoothing.plan_surface_smoothing(surface, args.epsilon, mode, grid_n=args.grid_n)
    except smoothing.SmoothingError as exc:
        rep.add("plan", False, str(exc))
        return rep
    total_area = math.fsum(v["cap_area"] for v in plan["vertices"])
    total_budget = math.fsum(v["budget"] for v in plan["vertices"])
    rep.add("all_certified", plan["all_certified"], None, None,
            failed=[v["vertex"] for v in plan["vertices"] if not v["certified"]])
    rep.add("cap_area_within_budget", total_area <= total_budget, total_area, total_budget)
    rep.add("sum_r_below_half_epsilon", plan["sum_r"] < args.epsilon / 2, plan["sum_r"], args.epsilon / 2)
    rep.data["vertices"] = len(plan["vertices"])
    if args.out_plan:
        fileio.write_json(args.out_plan, plan)
    if args.out_profiles_dir:
        out = Path(args.out_profiles_dir)
        for v in plan["vertices"]:
            cone = smoothing.ConeMetric(v["alpha"], v["kappa"], v["R_i"])
            prof = smoothing.profile(cone, smoothing.SmoothingParams(v["delta_i"], mode), grid_n=args.profile_n)
            rows = zip(prof.r, prof.lam, prof.K)
            fileio.write_atomic(out / f"vertex_{v['vertex']}.csv", fileio.csv_text(["r", "lambda", "K"], rows))
            if args.svg:
                fileio.write_atomic(out / f"vertex_{v['vertex']}.svg",
                                    fileio.profile_svg(prof.r, prof.lam, prof.K, v["kappa"], v["delta_i"]))
    return rep


# ----------------------------------------------------------------------
# refine


def cmd_refine(args) -> RunReport:
    surface = fileio.read_surface(args.surface)
    rep = RunReport("refine", fileio.digest(args.surface))
    if args.levels < 0:
        raise InputError("--levels must be >= 0")
    if args.distance is not None:
        for v in args.distance:
            if v not in surface.vertex_faces:
                raise InputError(f"unknown vertex {v}")
    if len(surface.faces) * 4**args.levels > args.max_faces:
        raise InputError(f"{args.levels} levels would give {len(surface.faces) * 4**args.levels} faces "
                         f"(cap {args.max_faces})")
    before = polyhedral.curvature_report(surface)
    levels = [surface]
    for _ in range(args.levels):
        levels.append(polyhedral.refine_midpoint(levels[-1], max_faces=args.max_faces))
    final = levels[-1]
    after = polyhedral.curvature_report(final)
    d_omega = abs(after.total_omega - before.total_omega)
    d_face = abs(after.face_curvature - before.face_curvature)
    rep.add("omega_conserved", d_omega <= 1e-8, d_omega, 1e-8)
    rep.add("face_curvature_conserved", d_face <= 1e-8, d_face, 1e-8)
    rep.data["faces"] = len(final.faces)
    if args.distance is not None:
        u, v = args.distance
        dist = [polyhedral.edge_graph_distance(s, u, v) for s in levels]
        gaps = [abs(a - b) for a, b in zip(dist[:-1], dist[1:])]
        rep.data["distance"] = {"u": u, "v": v, "levels": dist, "gaps": gaps}
        rise = max([b - a for a, b in zip(dist[:-1], dist[1:])], default=0.0)
        rep.add("distance_non_increasing", rise <= 1e-12, rise, 1e-12)
        if args.distance_csv:
            fileio.write_atomic(args.distance_csv, fileio.csv_text(
                ["level", "distance", "gap"], [(k, d, gaps[k - 1] if k else "") for k, d in enumerate(dist)]))
    if args.out:
        fileio.write_json(args.out, fileio.surface_json(final, derived=args.derived))
    return rep


# ----------------------------------------------------------------------
# triangulate


def cmd_triangulate(args) -> RunReport:
    parent, family = fileio.read_scene(args.scene, kappa=args.kappa)
    rep = RunReport("triangulate", fileio.digest(args.scene))
    try:
        out = triangulation.ve_refine(parent, family)
    except triangulation.TriangulationError as exc:
        rep.add("scene", False, str(exc))
        return rep
    tris = [out.triangle_points(i) for i in range(len(out.triangles))]
    area = math.fsum(triangulation.planar.area(t) for t in tris)
    defect = abs(area - parent.area) / parent.area
    rep.add("tiling_area", defect <= 1e-9, defect, 1e-9)
    rep.add("parent_certificate_replays", out.replay_parent())
    rep.add("family_certificates_replay", all(out.replay_family(m) for m in range(len(family))))
    if args.recognise:
        res = triangulation.is_vertex_edge(parent, tris)
        rep.add("parent_is_vertex_edge", res.result is True, res.result)
    rep.data["triangles"] = len(out.triangles)
    if rep.passed:
        if args.out:
            fileio.write_json(args.out, out.to_dict())
        if args.svg:
            fileio.write_atomic(args.svg, fileio.refinement_svg(out.points, out.triangles, out.owner, family))
    return rep


# ----------------------------------------------------------------------
# gen

SCENES = ("scene-two-triangles", "scene-random")


def _two_triangle_scene(kappa: float):
    scale = 1.0 if kappa >= 0 else 0.9 / math.sqrt(-kappa)
    P = triangulation.ChartPolygon.from_points([s * scale for s in (-0.6 - 0.4j, 0.7 - 0.45j, 0.05 + 0.65j)], kappa)
    A = triangulation.ChartPolygon.from_points([s * scale for s in (-0.3 - 0.25j, -0.05 - 0.3j, -0.12 + 0.0j)], kappa)
    B = triangulation.ChartPolygon.from_points([s * scale for s in (0.1 - 0.1j, 0.35 - 0.3j, 0.2 + 0.2j)], kappa)
    return P, [A, B]


def cmd_gen(args) -> RunReport:
    rep = RunReport("gen")
    if args.name in SCENES:
        if args.name == "scene-two-triangles":
            P, F = _two_triangle_scene(args.kappa)
        else:
            P, F = triangulation.random_scene(np.random.default_rng(args.seed), args.kappa)
        payload = fileio.scene_json(P, F)
    else:
        kw = {"seed": args.seed} if args.name == "random-convex" else {}
        payload = fileio.surface_json(corpus.corpus_surface(args.name, **kw), derived=args.derived)
    text = fileio.dumps(payload)
    if args.out:
        fileio.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    rep.add("generated", True, args.name)
    return rep


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catsurf", description="Polyhedral CAT(kappa) surface toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="print the report as JSON")
        p.add_argument("--report", help="also write the JSON report to this file")

    p = sub.add_parser("check", help="curvature, Gauss-Bonnet and CAT checks of a surface")
    p.add_argument("surface")
    p.add_argument("--kappa", type=float, help="curvature bound to test against")
    p.add_argument("--gauss-bonnet", action="store_true")
    p.add_argument("--cat-faces", action="store_true", help="sampled CAT test of every face")
    p.add_argument("--grid-n", type=int, default=32)
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("smooth", help="certified smoothing plan for the cone vertices")
    p.add_argument("surface")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mode", default="flat")
    p.add_argument("--grid-n", type=int, default=2000)
    p.add_argument("--out-plan")
    p.add_argument("--out-profiles-dir")
    p.add_argument("--profile-n", type=int, default=400)
    p.add_argument("--svg", action="store_true", help="write an SVG next to each profile CSV")
    common(p)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("refine", help="midpoint refinement with optional distance table")
    p.add_argument("surface")
    p.add_argument("--levels", type=int, default=1)
    p.add_argument("--distance", type=int, nargs=2, metavar=("U", "V"))
    p.add_argument("--distance-csv")
    p.add_argument("--max-faces", type=int, default=polyhedral.DEFAULT_MAX_FACES)
    p.add_argument("--out")
    p.add_argument("--derived", action="store_true", help="include chi and omega blocks")
    common(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("triangulate", help="vertex-edge refinement of a scene")
    p.add_argument("scene")
    p.add_argument("--kappa", type=float, help="override the scene's curvature")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.add_argument("--recognise", action="store_true", help="also run the vertex-edge recogniser")
    common(p)
    p.set_defaults(func=cmd_triangulate)

    p = sub.add_parser("gen", help="write a bundled surface or scene")
    p.add_argument("name", choices=sorted(corpus.CORPUS) + list(SCENES))
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kappa", type=float, default=0.0, help="curvature of generated scenes")
    p.add_argument("--derived", action="store_true")
    common(p)
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    t0 = time.perf_counter()
    try:
        rep = args.func(args)
    except InputError as exc:
        print(f"catsurf {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep.wall_time = time.perf_counter() - t0
    if args.report:
        fileio.write_json(args.report, rep.to_dict())
    if args.command != "gen" or args.out:
        if args.json:
            sys.stdout.write(fileio.dumps(rep.to_dict()))
        else:
            print(rep.text())
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
