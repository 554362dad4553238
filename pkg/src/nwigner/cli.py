"""Command line front end.

Exit codes: 0 ok, 2 configuration, 3 I/O, 4 numeric (e.g. ResolutionTooLow),
5 precondition (e.g. NotCommuting).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import __version__
from .analysis import completeness_rank, covariance_residual, pentagon_fixture, reduce_blocks, symmetry_action
from .charfn import char_grid, char_values, symmetric_lattice
from .errors import ConfigError, NumericError, PreconditionError, WignerError
from .geometry import jnr_boundary, kippenhahn_curve, random_directions, singular_points
from .io import (
    _complex,
    _load_json,
    dump_json,
    provenance,
    read_grid,
    resolve_operators,
    resolve_state,
    write_csv,
    write_grid,
    write_grid_csv,
)
from .moments import charfn_moment, grid_moment, multi_indices, weyl_moment
from .render import render_heatmap
from .wigner import compute_wigner, grid_projection, grid_stats, marginal_exact, marginal_from_charfn, plan_axis, plan_grid

log = logging.getLogger("nwigner")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 2, 3, 4, 5

# option defaults; applied after merging the config file so that flags win
DEFAULTS = {
    "state": "maximally_mixed",
    "epsilon": 0.01,
    "pad": 6.0,
    "seed": 0,
    "out": ".",
    "format": "bin",
    "directions": 64,
    "step": 1e-2,
    "max_order": 2,
    "samples": 200,
    "count": 33,
    "xi_max": 10.0,
    "workers": None,
}


def _parse_resolution(text):
    if text is None:
        return None
    if isinstance(text, (int, list)):
        return text
    parts = [int(p) for p in str(text).split(",")]
    return parts[0] if len(parts) == 1 else parts


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file with option values; explicit flags take precedence")
    p.add_argument("--operators", help="operator-set JSON file or preset (pauli, pauli:xy, spin:3/2:zx, random:4:2:1, pentagon)")
    p.add_argument("--select", help="comma separated operator indices to keep, e.g. 2,0")
    p.add_argument("--state", help="state JSON file or preset (maximally_mixed, basis:K, spin:M, random:SEED)")
    p.add_argument("--epsilon", type=float, help="Gaussian covariance scale")
    p.add_argument("--resolution", help="grid count, or one count per axis: N[,N,...]")
    p.add_argument("--pad", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=["bin", "csv"])
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nwigner", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nwigner {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="regularized Wigner grid")
    _common(p)

    p = sub.add_parser("marginals", help="marginal densities, exact and from the characteristic function")
    _common(p)
    p.add_argument("--directions", type=int, help="number of random directions (0: coordinate axes only)")
    p.add_argument("--grid", help="also compare axis projections of this grid")

    p = sub.add_parser("jnr", help="support points of the joint numerical range")
    _common(p)
    p.add_argument("--directions", type=int)

    p = sub.add_parser("kippenhahn", help="singular set (adaptive curve for operator pairs)")
    _common(p)
    p.add_argument("--directions", type=int, help="random directions when n != 2")
    p.add_argument("--step", type=float, help="spatial resolution of the adaptive curve (n = 2)")

    p = sub.add_parser("charfn", help="characteristic function samples on a symmetric lattice")
    _common(p)
    p.add_argument("--count", type=int, help="points per axis (odd)")
    p.add_argument("--xi-max", type=float)

    p = sub.add_parser("moments", help="Weyl, finite-difference and grid moments")
    _common(p)
    p.add_argument("--max-order", type=int)
    p.add_argument("--grid", help="grid metadata JSON for grid moments")

    p = sub.add_parser("rank", help="informational completeness report")
    _common(p)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("covariance", help="covariance residual for a symmetry unitary")
    _common(p)
    p.add_argument("--unitary", help="JSON {re, im} file, 'exp:K:THETA' (U = exp(i THETA A_K)) or 'clock'")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("reduce", help="split along the eigenspaces of a commuting operator")
    _common(p)
    p.add_argument("--reducer", required=False, help="operator-set JSON whose first operator is B")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("render", help="PNG heatmap of a grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", default=None, help="output PNG path")
    p.add_argument("--slice-axis", type=int)
    p.add_argument("--slice-index", type=int)
    p.add_argument("--integrate-axis", type=int)
    p.add_argument("--upscale", type=int, default=1)
    p.add_argument("--config")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    merged = dict(vars(args))
    if merged.get("config"):
        cfg = _load_json(merged["config"])
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in cfg.items():
            key = key.replace("-", "_")
            if merged.get(key) is None:
                merged[key] = value
    for key, value in DEFAULTS.items():
        if merged.get("command") == "render" and key == "out":
            continue  # the image goes next to the grid unless --out is given
        if key in merged and merged[key] is None:
            merged[key] = value
    if merged.get("epsilon") is not None and not float(merged["epsilon"]) > 0:
        raise ConfigError("epsilon must be positive")
    return argparse.Namespace(**merged)


def _load_problem(args):
    if not getattr(args, "operators", None):
        raise ConfigError("--operators is required")
    tup = resolve_operators(args.operators)
    if getattr(args, "select", None):
        sel = args.select if isinstance(args.select, list) else [int(k) for k in str(args.select).split(",")]
        tup = tup.select(sel)
    state = resolve_state(args.state, tup.dim)
    return tup, state


def _outdir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _params(args, *keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_compute(args):
    tup, state = _load_problem(args)
    spec = plan_grid(tup, args.epsilon, _parse_resolution(getattr(args, "resolution", None)), pad=args.pad)
    grid = compute_wigner(state, tup, spec, workers=args.workers)
    out = _outdir(args)
    prov = provenance(tup, state, command="compute", **_params(args, "operators", "select", "state", "epsilon",
                                                                "resolution", "pad"))
    meta_path, _ = write_grid(out / "grid", grid, prov)
    if args.format == "csv" and grid.n <= 2:
        write_grid_csv(out / "grid.csv", grid)
    stats = grid_stats(grid)
    summary = {"grid": str(meta_path), "shape": list(spec.shape), **stats._asdict(), "imag_residue": grid.imag_residue}
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_marginals(args):
    tup, state = _load_problem(args)
    eps = args.epsilon
    dirs = list(np.eye(tup.n))
    if args.directions:
        dirs += list(random_directions(tup.n, args.directions, args.seed))
    rows, summary = [], []
    for i, xi in enumerate(dirs):
        axis = plan_axis(tup, xi, eps, pad=args.pad)
        exact = marginal_exact(state, tup, xi, eps, axis)
        viafn = marginal_from_charfn(state, tup, xi, eps, axis)
        summary.append({"index": i, "direction": [float(x) for x in xi], "l1": exact.l1_distance(viafn)})
        for t, e, c in zip(axis.points, exact.values, viafn.values):
            rows.append([i, *[float(x) for x in xi], float(t), float(e), float(c)])
    out = _outdir(args)
    header = ["index"] + [f"dir_{k + 1}" for k in range(tup.n)] + ["t", "exact", "charfn"]
    write_csv(out / "marginals.csv", header, rows)
    report = {"directions": summary, "max_l1": max(s["l1"] for s in summary),
              "provenance": provenance(tup, state, command="marginals", **_params(args, "operators", "select", "state",
                                                                                   "epsilon", "directions", "seed"))}
    if getattr(args, "grid", None):
        grid, _ = read_grid(args.grid)
        proj = []
        for k in range(grid.n):
            d = grid_projection(grid, k)
            ref = marginal_exact(state, tup, d.direction, grid.spec.epsilon, d.axis)
            proj.append({"axis": k, "l1": d.l1_distance(ref)})
        report["grid_projections"] = proj
    dump_json(report, out / "marginals.json")
    print(json.dumps({"max_l1": report["max_l1"]}))
    return EXIT_OK


def _curve_rows(entries, n):
    return [[*map(float, e.direction), *map(float, e.point), float(e.eigenvalue), float(e.gap)] for e in entries]


def _curve_header(n):
    return [f"dir_{k + 1}" for k in range(n)] + [f"point_{k + 1}" for k in range(n)] + ["eigenvalue", "gap"]


def cmd_jnr(args):
    tup = _load_problem(args)[0]
    if tup.n == 2:
        theta = 2 * np.pi * np.arange(args.directions) / args.directions
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    else:
        dirs = random_directions(tup.n, args.directions, args.seed)
    approx = jnr_boundary(tup, dirs)
    rows = []
    for s in approx:
        lam = np.linalg.eigvalsh(np.tensordot(s.direction, tup.matrices, axes=1))
        gap = float(lam[-1] - lam[-2]) if len(lam) > 1 else float("inf")
        rows.append([*map(float, s.direction), *map(float, s.point), s.height, gap])
    out = _outdir(args)
    write_csv(out / "jnr.csv", _curve_header(tup.n), rows)
    print(json.dumps({"samples": len(rows), "degenerate": sum(s.degenerate for s in approx)}))
    return EXIT_OK


def cmd_kippenhahn(args):
    tup = _load_problem(args)[0]
    if tup.n == 2:
        sing = kippenhahn_curve(tup, step=args.step)
    else:
        sing = singular_points(tup, random_directions(tup.n, args.directions, args.seed))
    out = _outdir(args)
    write_csv(out / "kippenhahn.csv", _curve_header(tup.n), _curve_rows(sing, tup.n))
    print(json.dumps({"points": len(sing), "skipped_degenerate": sing.skipped}))
    return EXIT_OK


def cmd_charfn(args):
    tup, state = _load_problem(args)
    half = max(0, (args.count - 1) // 2)
    lattice = symmetric_lattice(args.xi_max / max(half, 1), half)
    values = char_grid(state, tup, [lattice] * tup.n, workers=args.workers)
    mesh = np.meshgrid(*([lattice] * tup.n), indexing="ij")
    cols = [m.ravel() for m in mesh] + [values.real.ravel(), values.imag.ravel()]
    out = _outdir(args)
    write_csv(out / "charfn.csv", [f"xi_{k + 1}" for k in range(tup.n)] + ["re", "im"], zip(*cols))
    print(json.dumps({"samples": int(values.size)}))
    return EXIT_OK


def cmd_moments(args):
    tup, state = _load_problem(args)
    grid = read_grid(args.grid)[0] if getattr(args, "grid", None) else None
    rows = []
    for alpha in multi_indices(tup.n, args.max_order):
        row = ["".join(map(str, alpha)), weyl_moment(state, tup, alpha), charfn_moment(state, tup, alpha)]
        row.append(grid_moment(grid, alpha) if grid is not None else "")
        rows.append(row)
    out = _outdir(args)
    write_csv(out / "moments.csv", ["alpha", "weyl", "charfn", "grid"], rows)
    for r in rows:
        print(",".join(str(v) for v in r))
    return EXIT_OK


def cmd_rank(args):
    tup = _load_problem(args)[0]
    report = completeness_rank(tup, count=args.samples, seed=args.seed)
    data = {**report.to_dict(), "provenance": provenance(tup, None, command="rank",
                                                          **_params(args, "operators", "select", "samples", "seed"))}
    out = _outdir(args)
    dump_json(data, out / "rank.json")
    print(json.dumps({"rank": report.rank, "dim2": tup.dim**2, "complete": report.complete}))
    return EXIT_OK


def _unitary(spec, tup):
    if spec is None:
        raise ConfigError("--unitary is required")
    if spec == "clock":
        return pentagon_fixture()[1]
    if spec.startswith("exp:"):
        _, k, theta = spec.split(":")
        return expm(1j * float(theta) * tup.matrices[int(k)])
    return _complex(_load_json(spec))


def cmd_covariance(args):
    tup, state = _load_problem(args)
    action = symmetry_action(_unitary(getattr(args, "unitary", None), tup), tup)
    scale = 2 * np.pi / float(np.max(np.linalg.norm(tup.matrices, ord=2, axis=(1, 2))))
    xis = np.random.default_rng(args.seed).normal(scale=scale, size=(args.samples, tup.n))
    residual = covariance_residual(state, tup, action, xis)
    out = _outdir(args)
    dump_json({"R": action.R.tolist(), "residual": residual, "samples": args.samples,
               "provenance": provenance(tup, state, command="covariance",
                                        **_params(args, "operators", "select", "state", "unitary", "seed"))},
              out / "covariance.json")
    print(json.dumps({"residual": residual}))
    return EXIT_OK


def cmd_reduce(args):
    tup, state = _load_problem(args)
    if not getattr(args, "reducer", None):
        raise ConfigError("--reducer is required")
    b = resolve_operators(args.reducer).matrices[0]
    blocks = reduce_blocks(state, tup, b)
    xis = np.random.default_rng(args.seed).normal(scale=3.0, size=(args.samples, tup.n))
    total = char_values(state, tup, xis)
    residual = float(np.max(np.abs(sum(bl.char_values(xis) for bl in blocks) - total)))
    data = {"blocks": [{"eigenvalue": bl.eigenvalue, "dim": bl.dim, "weight": bl.weight} for bl in blocks],
            "char_residual": residual}
    out = _outdir(args)
    dump_json(data, out / "reduce.json")
    print(json.dumps(data, sort_keys=True))
    return EXIT_OK


def cmd_render(args):
    grid, _ = read_grid(args.grid)
    path = Path(args.out) if args.out else Path(args.grid).with_suffix(".png")
    if path.suffix != ".png":
        path.mkdir(parents=True, exist_ok=True)
        path = path / "grid.png"
    meta = render_heatmap(grid, path, args.slice_axis, args.slice_index, args.integrate_axis, args.upscale)
    print(json.dumps({"image": str(path), "vmax": meta["vmax"]}))
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "marginals": cmd_marginals,
    "jnr": cmd_jnr,
    "kippenhahn": cmd_kippenhahn,
    "charfn": cmd_charfn,
    "moments": cmd_moments,
    "rank": cmd_rank,
    "covariance": cmd_covariance,
    "reduce": cmd_reduce,
    "render": cmd_render,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO
    except NumericError as exc:
        log.error("numeric error: %s", exc)
        return EXIT_NUMERIC
    except (PreconditionError, WignerError) as exc:
        log.error("precondition failed: %s", exc)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
