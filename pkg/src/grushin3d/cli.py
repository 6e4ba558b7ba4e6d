"""Command-line front end.

Subcommands: geometry, transform-check, rearrange, sobolev, solve,
pohozaev.  Every run emits a RunReport as JSON (stdout, and --output FILE
when given); table-like results are additionally written as CSV.  Exit
codes: 0 success (all checks passed), 1 a check failed, 2 usage error,
3 input-file error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .errors import ComputationError, DomainError, GridFormatError
from .geometry import (
    QuadratureConfig,
    isoperimetric_quotient,
    reference_quotient,
    sector_perimeter,
    weighted_perimeter,
    weighted_volume,
    _as_alpha,
)
from .grids import load_grid, save_grid
from .report import RunReport, write_csv

USAGE_EXIT, INPUT_EXIT, NUMERICAL_EXIT = 2, 3, 4


def _shape_from_args(args):
    from .shapes import make_shape

    params = {}
    if args.shape in ("ball", "ball-sector"):
        if args.radius is not None:
            params["radius"] = args.radius
    if args.shape == "ball" and args.center is not None:
        params["center"] = tuple(args.center)
    if args.shape == "ellipsoid":
        if args.semiaxes is not None:
            params["semiaxes"] = tuple(args.semiaxes)
        if args.center is not None:
            params["center"] = tuple(args.center)
    if args.shape == "cylinder":
        if args.radius is not None:
            params["radius"] = args.radius
        if args.halfheight is not None:
            params["half_height"] = args.halfheight
        if args.center is not None:
            params["center"] = tuple(args.center)
    if args.shape == "box":
        if args.half_widths is not None:
            params["half_widths"] = tuple(args.half_widths)
        if args.center is not None:
            params["center"] = tuple(args.center)
    if args.shape == "ball-sector":
        params["alpha"] = args.alpha
        params["j"] = args.sector
    return make_shape(args.shape, **params)


def _quad_cfg(args) -> QuadratureConfig:
    return QuadratureConfig(
        volume_resolution=args.resolution,
        surface_resolution=args.surface_resolution,
        refine_depth=args.refine_depth,
        threads=args.threads,
    )


def cmd_geometry(args) -> RunReport:
    ap = _as_alpha(args.alpha)
    shape = _shape_from_args(args)
    cfg = _quad_cfg(args)
    rep = RunReport("geometry", vars(args).copy(), version=__version__)
    rep.resolutions = {
        "volume_resolution": cfg.volume_resolution,
        "surface_resolution": cfg.surface_resolution,
        "refine_depth": cfg.refine_depth,
    }
    vol = weighted_volume(shape, ap, cfg)
    per = weighted_perimeter(shape, ap, cfg)
    rep.results["weighted_volume"] = vol
    rep.results["weighted_perimeter"] = per
    for j in range(1, ap.num_sectors + 1):
        rep.results[f"sector_perimeter_{j}"] = sector_perimeter(shape, ap, j, cfg)
    q = isoperimetric_quotient(shape, ap, cfg)
    q_ref = reference_quotient(ap)
    deficit = q - q_ref
    rep.results["isoperimetric_quotient"] = q
    rep.results["reference_quotient"] = q_ref
    rep.results["isoperimetric_deficit"] = deficit
    rep.add_check("deficit_nonnegative", deficit, -0.01 * q_ref, ">=")
    return rep


def cmd_transform_check(args) -> RunReport:
    from .shapes import ball, ball_sector
    from .transform import pushforward_perimeter_check, pushforward_volume_check

    ap = _as_alpha(args.alpha)
    cfg = _quad_cfg(args)
    if args.shape == "ball-sector":
        shape = ball_sector(ap, j=1)
    elif args.shape == "small-ball":
        width = ap.sector_width
        d = 1.0
        ctr = (d * np.cos(width / 2), d * np.sin(width / 2), 0.0)
        shape = ball(0.35 * d * np.sin(width / 2), center=ctr)
    else:
        raise DomainError(f"transform-check shape must be ball-sector or small-ball, got {args.shape!r}")
    rep = RunReport("transform-check", vars(args).copy(), version=__version__)
    rep.resolutions = {"volume_resolution": cfg.volume_resolution, "surface_resolution": cfg.surface_resolution}
    volchk = pushforward_volume_check(shape, ap, cfg)
    rep.results["volume_weighted"] = volchk.weighted
    rep.results["volume_euclidean"] = volchk.euclidean
    rep.results["volume_rel_gap"] = volchk.rel_gap
    rep.add_check("volume_pushforward_gap", volchk.rel_gap, 1e-3, "<=")
    perchk = pushforward_perimeter_check(shape, ap, cfg)
    rep.results["perimeter_weighted"] = perchk.weighted
    rep.results["perimeter_euclidean"] = perchk.euclidean
    rep.results["perimeter_rel_gap"] = perchk.rel_gap
    rep.add_check("perimeter_pushforward_gap", perchk.rel_gap, 1e-2, "<=")
    return rep


def cmd_rearrange(args) -> RunReport:
    from .rearrangement import (
        distribution_function,
        grushin_energy,
        polya_szego_gap,
        rearrange,
        weighted_lq_norm,
    )

    ap = _as_alpha(args.alpha)
    grid = load_grid(args.input)
    if np.any(grid.values < 0):
        raise GridFormatError("rearrangement input must be nonnegative")
    rep = RunReport("rearrange", vars(args).copy(), version=__version__)
    rep.resolutions = {"dims": list(grid.dims), "levels": args.levels}
    profile = rearrange(grid, ap, args.levels)
    top = float(grid.values.max(initial=0.0))
    rep.results["max_input"] = top
    rep.results["max_profile"] = profile.max_value if top > 0 else 0.0
    rep.add_check("max_preserved", abs(rep.results["max_profile"] - top), 0.0, "<=")

    dist = distribution_function(grid, ap, args.levels)
    support = float(dist.measures[0]) if len(dist.measures) else 0.0
    gap = float(np.max(np.abs(dist.measures - profile.measure_above(dist.levels)))) if top > 0 else 0.0
    rep.results["support_measure"] = support
    rep.results["equimeasurability_gap"] = gap
    rep.add_check("equimeasurability", gap, 0.01 * max(support, 1e-300), "<=")

    for q in (2, 4, 6):
        n_u = weighted_lq_norm(grid, q, ap)
        n_p = weighted_lq_norm(profile, q, ap) if top > 0 else 0.0
        rep.results[f"l{q}_norm_input"] = n_u
        rep.results[f"l{q}_norm_profile"] = n_p
        if n_u > 0:
            rep.add_check(f"l{q}_norm_preserved", abs(n_p - n_u) / n_u, 0.01, "<=")

    e_u = grushin_energy(grid, ap)
    e_p = profile.dirichlet_energy() if top > 0 else 0.0
    gap_e = e_u - e_p
    rep.results["energy_input"] = e_u
    rep.results["energy_profile"] = e_p
    rep.results["polya_szego_gap"] = gap_e
    rep.add_check("polya_szego", gap_e, -0.02 * max(e_u, 1e-300), ">=")
    assert abs(polya_szego_gap(grid, ap, args.levels) - gap_e) <= 1e-12 * max(abs(gap_e), 1.0)

    if args.profile_csv:
        s, v = profile.nodes() if top > 0 else (np.zeros(1), np.zeros(1))
        write_csv(args.profile_csv, ["r", "phi"], list(zip(map(float, s), map(float, v))))
        rep.results["profile_csv_rows"] = float(len(s))
    return rep


def cmd_sobolev(args) -> RunReport:
    from .sobolev import (
        minimize_rayleigh,
        sobolev_lower_bound,
        sobolev_lower_bound_alt,
        talenti_constant_general,
        talenti_radial_constant,
    )

    rep = RunReport("sobolev", vars(args).copy(), version=__version__)
    rep.resolutions = {"rayleigh_resolution": args.resolution}
    D = talenti_radial_constant()
    rep.results["talenti_closed_form"] = D
    quad_vals = [
        talenti_constant_general(2.0, 3.0, a=a_, b=b_) for a_ in (0.5, 1.0, 2.0) for b_ in (0.5, 1.0, 2.0)
    ]
    spread = max(quad_vals) - min(quad_vals)
    rep.results["talenti_quadrature_mean"] = float(np.mean(quad_vals))
    rep.results["talenti_quadrature_spread"] = spread
    rep.add_check("talenti_family_spread", spread, 1e-5, "<=")
    rep.add_check("talenti_matches_closed_form", abs(quad_vals[4] - D), 1e-9, "<=")

    rows = []
    for alpha in args.alphas:
        ap = _as_alpha(alpha)
        L = sobolev_lower_bound(ap)
        Lp = sobolev_lower_bound_alt(ap)
        key = f"alpha_{alpha:g}"
        rep.results[f"{key}_n"] = float(ap.sector_count)
        rep.results[f"{key}_lower_bound"] = L
        rep.results[f"{key}_lower_bound_alt"] = Lp
        ray = float("nan")
        if args.minimize:
            ray = minimize_rayleigh(ap, resolution=args.resolution).estimate
            rep.results[f"{key}_rayleigh_min"] = ray
            rep.add_check(f"{key}_rayleigh_above_bound", ray, L * 0.97, ">=")
        rows.append([float(alpha), ap.sector_count, D, L, Lp, ray])
    if args.csv:
        write_csv(args.csv, ["alpha", "n_alpha", "D", "L_derived", "L_alt", "rayleigh_min"], rows)
    return rep


def cmd_solve(args) -> RunReport:
    from .solver import Domain, SolverConfig, power_nonlinearity, solve_ground_state

    ap = _as_alpha(args.alpha)
    cfg = SolverConfig(outer_tol=args.tol)
    if args.config:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise GridFormatError(f"solver config: {exc}") from exc
        known = {f.name for f in SolverConfig.__dataclass_fields__.values()}
        bad = set(overrides) - known
        if bad:
            raise DomainError(f"unknown solver config keys: {sorted(bad)}")
        if "initial_center" in overrides and overrides["initial_center"] is not None:
            overrides["initial_center"] = tuple(overrides["initial_center"])
        cfg = SolverConfig(**{**{f: getattr(cfg, f) for f in known}, **overrides})
    domain = Domain.cube(args.half_width, args.grid)
    nl = power_nonlinearity(args.q, ap)
    rep = RunReport("solve", vars(args).copy(), version=__version__)
    rep.resolutions = {"grid": args.grid}
    sol = solve_ground_state(domain, nl, ap, cfg)
    unorm = float(np.sqrt(np.sum(sol.u.values**2) * domain.cell_volume))
    rep.results["energy"] = sol.energy
    rep.results["weak_residual"] = sol.gradient_norm
    rep.results["nehari_residual"] = sol.nehari_residual
    rep.results["solution_l2_norm"] = unorm
    rep.results["solution_max"] = float(np.max(np.abs(sol.u.values)))
    rep.results["mountain_pass_level"] = sol.mountain_pass_level
    rep.results["iterations"] = float(sol.iterations)
    rep.add_check("weak_residual", sol.gradient_norm, cfg.outer_tol, "<=")
    rep.add_check("nontrivial", unorm, 1e-8, ">=")
    rep.add_check("positive_energy", sol.energy, 0.0, ">=")
    if args.solution_out:
        save_grid(sol.u, args.solution_out)
    return rep


def cmd_pohozaev(args) -> RunReport:
    from .pohozaev import (
        nonexistence_classify,
        pohozaev_coefficient,
        pohozaev_residual,
    )
    from .solver import Domain, SolverConfig, power_nonlinearity, solve_ground_state

    ap = _as_alpha(args.alpha)
    rep = RunReport("pohozaev", vars(args).copy(), version=__version__)
    coef = pohozaev_coefficient(args.p, ap)
    rep.results["coefficient"] = coef
    regime = nonexistence_classify(args.p)
    rep.results["classification"] = regime
    if args.solve:
        if regime != "subcritical":
            raise DomainError("identity runs need a subcritical power p < 5")
        domain = Domain.cube(args.half_width, args.grid)
        nl = power_nonlinearity(args.p + 1.0, ap)
        sol = solve_ground_state(domain, nl, ap, SolverConfig(outer_tol=args.tol))
        por = pohozaev_residual(sol.u, args.p, domain, ap)
        rep.resolutions = {"grid": args.grid}
        rep.results["lhs"] = por.lhs
        rep.results["rhs"] = por.rhs
        rep.results["identity_residual"] = por.residual
        rep.results["star_shaped_min"] = por.star_shaped.min_value
        rep.add_check("identity_residual", por.residual, 0.10, "<=")
        rep.add_check("star_shaped", por.star_shaped.min_value, -1e-10, ">=")
    return rep


def _add_quad_args(p):
    p.add_argument("--resolution", type=int, default=128, help="voxel cells per axis")
    p.add_argument("--surface-resolution", type=int, default=256, help="patch samples per axis")
    p.add_argument("--refine-depth", type=int, default=3, help="boundary refinement depth")
    p.add_argument("--threads", type=int, default=1, help="worker threads (results identical for any count)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grushin3d",
        description="Weighted isoperimetry, symmetrization, Sobolev constants and the degenerate semilinear solver",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", help="weighted measures and isoperimetric deficit of a corpus shape")
    g.add_argument("--shape", required=True)
    g.add_argument("--alpha", type=float, required=True)
    g.add_argument("--radius", type=float, default=None)
    g.add_argument("--halfheight", type=float, default=None)
    g.add_argument("--semiaxes", type=float, nargs=3, default=None)
    g.add_argument("--half-widths", type=float, nargs=3, default=None)
    g.add_argument("--center", type=float, nargs=3, default=None)
    g.add_argument("--sector", type=int, default=1)
    _add_quad_args(g)
    g.set_defaults(func=cmd_geometry)

    t = sub.add_parser("transform-check", help="flattening-map pushforward identities")
    t.add_argument("--alpha", type=float, required=True)
    t.add_argument("--shape", default="ball-sector", help="ball-sector or small-ball")
    _add_quad_args(t)
    t.set_defaults(func=cmd_transform_check)

    r = sub.add_parser("rearrange", help="weighted decreasing rearrangement of a grid function")
    r.add_argument("--input", required=True, help="grid function file (grushin-grid v1)")
    r.add_argument("--alpha", type=float, required=True)
    r.add_argument("--levels", type=int, default=256)
    r.add_argument("--profile-csv", default=None)
    r.set_defaults(func=cmd_rearrange)

    s = sub.add_parser("sobolev", help="radial constant, lower bounds, Rayleigh minimisation")
    s.add_argument("--alphas", type=float, nargs="+", default=[0.5, 1.0, 2.0])
    s.add_argument("--resolution", type=int, default=96)
    s.add_argument("--minimize", action=argparse.BooleanOptionalAction, default=False)
    s.add_argument("--csv", default=None)
    s.set_defaults(func=cmd_sobolev)

    so = sub.add_parser("solve", help="ground state of the subcritical power problem")
    so.add_argument("--alpha", type=float, required=True)
    so.add_argument("--q", type=float, required=True)
    so.add_argument("--grid", type=int, default=48)
    so.add_argument("--half-width", type=float, default=1.0)
    so.add_argument("--tol", type=float, default=1e-6)
    so.add_argument("--config", default=None, help="JSON file with SolverConfig overrides")
    so.add_argument("--solution-out", default=None)
    so.set_defaults(func=cmd_solve)

    po = sub.add_parser("pohozaev", help="dilation identity coefficient / residual")
    po.add_argument("--p", type=float, required=True)
    po.add_argument("--alpha", type=float, required=True)
    po.add_argument("--solve", action=argparse.BooleanOptionalAction, default=False)
    po.add_argument("--grid", type=int, default=64)
    po.add_argument("--half-width", type=float, default=1.0)
    po.add_argument("--tol", type=float, default=1e-6)
    po.set_defaults(func=cmd_pohozaev)

    for p in (g, t, r, s, so, po):
        p.add_argument("--output", default=None, help="write the JSON report here as well")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        rep = args.func(args)
    except GridFormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return INPUT_EXIT
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except ComputationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT
    rep.wall_time_s = time.perf_counter() - t0
    rep.params.pop("func", None)
    text = rep.to_json()
    print(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    return 0 if rep.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
