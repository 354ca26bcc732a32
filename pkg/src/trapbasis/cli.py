"""Command-line orchestration.

Subcommands: validate, approximate, stability, gram, reconstruct,
multirect, spherical, frame.  Each run writes a schema-validated JSON
report, CSV tables, plot-ready two-column data files, and rendered PNG
figures (``--no-figures`` disables rendering) into the output directory.

Exit codes: 0 for certified/pass outcomes, 2 for mathematically honest
negatives (boundary or violated verdicts, search misses, frame-ratio
violations), 1 for configuration or numerical errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .bases import spherical_basis, trapezoid_basis
from .domains import (
    SphericalTrapezoid,
    StepProfile,
    Trapezoid,
    approximate_profile,
    validate_profile,
)
from .errors import AdmissibilityError, SelectionSearchError, TrapBasisError
from .gram import (
    BoxTarget,
    ElementTarget,
    VERDICT_ILL,
    gram_matrix,
    reconstruct,
    restricted_frame_check,
    write_gram_binary,
    write_gram_csv,
)
from .manifest import (
    SCHEMA_VERSION,
    ExperimentManifest,
    load_config,
    perturbation_from_config,
    profile_from_config,
    validate_report,
)
from .multirect import build_multirect_basis, search_interval_basis
from .domains import build_multiinterval
from .stability import VERDICT_CERTIFIED, kadec_check

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

_FLOAT = "%.17g"


class _Parser(argparse.ArgumentParser):
    # usage problems are software errors under the exit-code contract
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_ERROR)


def _write_csv(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    _FLOAT % v if isinstance(v, float) else str(v) for v in row
                )
                + "\n"
            )


def _write_dat(path: Path, columns) -> None:
    data = np.column_stack(columns)
    np.savetxt(path, data, fmt=_FLOAT)


def _emit_report(man: ExperimentManifest, params, results, verdict, exit_code, files):
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": man.kind,
        "seed": man.seed,
        "threads": man.threads,
        "tolerance": man.tolerance,
        "params": params,
        "results": results,
        "verdict": verdict,
        "exit_code": exit_code,
        "files": sorted(str(f.name) for f in files),
    }
    validate_report(payload)
    path = man.out_dir / "report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _tol(man: ExperimentManifest) -> float:
    return man.tolerance if man.tolerance is not None else 1e-9


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def _run_validate(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    grid_size = cfg.get("grid_size", 2048)
    files = []
    try:
        report = validate_profile(profile, grid_size)
        verdict = "admissible" if report.ok else "bounds-violated"
        code = EXIT_OK if report.ok else EXIT_NEGATIVE
    except AdmissibilityError as exc:
        report = exc.report
        verdict = "inadmissible"
        code = EXIT_NEGATIVE
    ys = np.linspace(0.0, 1.0, min(grid_size, 1025))
    fvals = profile(ys)
    samples = man.out_dir / "samples.csv"
    _write_csv(samples, ("y", "f"), zip(ys.tolist(), fvals.tolist()))
    files.append(samples)
    dat = man.out_dir / "profile.dat"
    _write_dat(dat, (ys, fvals))
    files.append(dat)
    if man.figures:
        fig = man.out_dir / "profile.png"
        plots.profile_figure(fig, ys, fvals, title=profile.label)
        files.append(fig)
    results = report.to_dict() if report is not None else {}
    files.append(_emit_report(man, cfg, results, verdict, code, files))
    return code


def _run_approximate(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    orders = cfg.get("orders", [1, 2, 4, 8, 16])
    audit = cfg.get("audit_grid", 10_000)
    rows = []
    per_order = {}
    overlays = []
    ys = np.linspace(0.0, 1.0, 1025)
    files = []
    for order in orders:
        approx = approximate_profile(profile, order, audit_grid_size=audit)
        per_order[str(order)] = approx.to_dict()
        rows.append(
            (
                order,
                approx.partitions,
                approx.sup_inverse_error,
                approx.sup_value_error,
                approx.bound,
            )
        )
        svals = approx.step(ys)
        overlays.append((f"n={order}", svals))
        dat = man.out_dir / f"step_{order}.dat"
        _write_dat(dat, (ys, svals))
        files.append(dat)
    table = man.out_dir / "approximation.csv"
    _write_csv(
        table,
        ("order", "partitions", "sup_inverse_error", "sup_value_error", "bound"),
        rows,
    )
    files.append(table)
    dat = man.out_dir / "profile.dat"
    _write_dat(dat, (ys, profile(ys)))
    files.append(dat)
    if man.figures:
        fig = man.out_dir / "approximation.png"
        plots.profile_figure(
            fig, ys, profile(ys), overlays=overlays[-2:], title=profile.label
        )
        files.append(fig)
    files.append(
        _emit_report(man, cfg, {"orders": per_order}, "certified", EXIT_OK, files)
    )
    return EXIT_OK


def _run_stability(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    perturbation = perturbation_from_config(cfg.get("perturbation"), profile)
    n_max = cfg.get("n_max", 8)
    grid = cfg.get("grid", 1024)
    files = []
    if perturbation is None:
        from .bases import CallablePerturbation

        perturbation = CallablePerturbation(
            fn=lambda n, y: profile(y), label="identity (g_n = f)"
        )
    report = kadec_check(profile, perturbation, n_max, grid)
    table = man.out_dir / "deviations.csv"
    _write_csv(table, ("n", "epsilon", "threshold"), report.csv_rows())
    files.append(table)
    ns = [r.n for r in report.rows]
    eps = [r.epsilon for r in report.rows]
    thr = [r.threshold for r in report.rows]
    dat = man.out_dir / "deviations.dat"
    _write_dat(dat, (np.asarray(ns, dtype=float), np.asarray(eps)))
    files.append(dat)
    if man.figures:
        fig = man.out_dir / "deviations.png"
        plots.deviation_figure(fig, ns, eps, thr)
        files.append(fig)
    code = EXIT_OK if report.verdict == VERDICT_CERTIFIED else EXIT_NEGATIVE
    files.append(_emit_report(man, cfg, report.to_dict(), report.verdict, code, files))
    return code


def _run_gram(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    perturbation = perturbation_from_config(cfg.get("perturbation"), profile)
    weighted = cfg.get("weighted", True)
    truncations = sorted(cfg["truncations"])
    k_window = cfg.get("k_window")
    tol = _tol(man)
    files = []
    sweep = []
    reports = {}
    last = None
    for trunc in truncations:
        kw = trunc if k_window is None else k_window
        family = trapezoid_basis(
            Trapezoid(profile),
            trunc,
            kw,
            perturbation=perturbation,
            weighted=weighted,
        )
        rep = gram_matrix(family, tol=tol)
        reports[str(trunc)] = rep.to_dict()
        sweep.append((trunc, rep.eigen_min, rep.eigen_max, rep.condition_number))
        csv_path = man.out_dir / f"gram_{trunc}.csv"
        write_gram_csv(rep.matrix, csv_path)
        files.append(csv_path)
        bin_path = man.out_dir / f"gram_{trunc}.gram"
        write_gram_binary(rep.matrix, bin_path)
        files.append(bin_path)
        last = rep
    table = man.out_dir / "sweep.csv"
    _write_csv(table, ("truncation", "eigen_min", "eigen_max", "condition"), sweep)
    files.append(table)
    dat = man.out_dir / "sweep.dat"
    _write_dat(
        dat,
        (
            np.asarray([s[0] for s in sweep], dtype=float),
            np.asarray([s[1] for s in sweep]),
        ),
    )
    files.append(dat)
    if man.figures:
        fig = man.out_dir / "eigen_sweep.png"
        plots.eigen_sweep_figure(
            fig, [s[0] for s in sweep], [s[1] for s in sweep], [s[2] for s in sweep]
        )
        files.append(fig)
        heat = man.out_dir / f"gram_{truncations[-1]}.png"
        plots.gram_figure(heat, last.matrix)
        files.append(heat)
    results = {"grams": reports}
    queries = cfg.get("point_queries")
    if queries:
        family = trapezoid_basis(
            Trapezoid(profile),
            truncations[-1],
            truncations[-1] if k_window is None else k_window,
            perturbation=perturbation,
            weighted=weighted,
        )
        evaluated = []
        for n, k, x, y in queries:
            value = complex(family.element(int(n), int(k)).evaluate(x, y))
            evaluated.append(
                {"n": int(n), "k": int(k), "x": x, "y": y,
                 "re": value.real, "im": value.imag}
            )
        results["point_queries"] = evaluated
    bad = any(r["verdict"] == VERDICT_ILL for r in reports.values())
    verdict = "ill_conditioned" if bad else last.verdict
    code = EXIT_NEGATIVE if bad else EXIT_OK
    files.append(_emit_report(man, cfg, results, verdict, code, files))
    return code


def _target_from_config(cfg: dict, profile) -> BoxTarget | ElementTarget:
    kind = cfg["kind"]
    if kind == "element":
        return ElementTarget(position=cfg.get("position", 0))
    if kind == "constant":
        reach = profile.upper + 1.0
        return BoxTarget(-reach, reach, 0.0, 1.0, value=cfg.get("value", 1.0))
    x = cfg.get("x", [-0.5, 0.5])
    y = cfg.get("y", [0.0, 0.5])
    return BoxTarget(x[0], x[1], y[0], y[1], value=cfg.get("value", 1.0))


def _run_reconstruct(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    weighted = cfg.get("weighted", True)
    truncations = sorted(cfg["truncations"])
    target = _target_from_config(cfg["target"], profile)
    tol = _tol(man)
    files = []
    rows = []
    reports = {}
    for trunc in truncations:
        family = trapezoid_basis(Trapezoid(profile), trunc, trunc, weighted=weighted)
        rep = reconstruct(target, family, tol=tol)
        rows.append((trunc, rep.relative_residual))
        reports[str(trunc)] = {
            "relative_residual": rep.relative_residual,
            "target_norm": rep.target_norm,
        }
    table = man.out_dir / "residuals.csv"
    _write_csv(table, ("truncation", "relative_residual"), rows)
    files.append(table)
    dat = man.out_dir / "residuals.dat"
    _write_dat(
        dat,
        (
            np.asarray([r[0] for r in rows], dtype=float),
            np.asarray([r[1] for r in rows]),
        ),
    )
    files.append(dat)
    if man.figures:
        fig = man.out_dir / "residuals.png"
        plots.residual_figure(fig, [r[0] for r in rows], [r[1] for r in rows])
        files.append(fig)
    files.append(
        _emit_report(
            man,
            cfg,
            {"target": target.label, "residuals": reports},
            "pass",
            EXIT_OK,
            files,
        )
    )
    return EXIT_OK


def _run_multirect(man: ExperimentManifest) -> int:
    cfg = man.config
    step = StepProfile(tuple(cfg["steps"]))
    window = cfg["window"]
    max_cond = cfg["max_cond"]
    y_window = cfg.get("y_window", 2)
    interval = build_multiinterval(step)
    files = []
    selection_name = man.overrides.get("selection_file", "selection.json")
    try:
        selection = search_interval_basis(
            interval,
            window,
            max_cond,
            half_width=float(step.cells),
            seed=man.seed,
        )
    except SelectionSearchError as exc:
        results = {
            "best_condition": exc.best_condition,
            "best_indices": list(exc.best_indices or ()),
            "interval": [list(s) for s in interval.segments],
        }
        files.append(
            _emit_report(man, cfg, results, "search-miss", EXIT_NEGATIVE, files)
        )
        return EXIT_NEGATIVE
    build = build_multirect_basis(step, selection, y_window)
    sel_path = man.out_dir / selection_name
    with open(sel_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "selection": selection.to_dict(),
                "family": build.to_dict(),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    files.append(sel_path)
    table = man.out_dir / "selection.csv"
    _write_csv(
        table,
        ("n_k", "lambda_k"),
        zip(selection.indices, selection.frequencies),
    )
    files.append(table)
    if man.figures:
        fig = man.out_dir / "selection.png"
        plots.selection_figure(
            fig, interval, selection.indices, selection.frequencies
        )
        files.append(fig)
    results = {
        "selection": selection.to_dict(),
        "lifted_gram": build.gram.to_dict(),
        "tensor_gram": build.tensor_gram.to_dict(),
    }
    files.append(_emit_report(man, cfg, results, "certified", EXIT_OK, files))
    return EXIT_OK


def _run_spherical(man: ExperimentManifest) -> int:
    cfg = man.config
    profile = profile_from_config(cfg["profile"])
    solid = SphericalTrapezoid(profile, cfg["dimension"])
    trunc = cfg["truncation"]
    family = spherical_basis(solid, trunc, trunc, weighted=cfg.get("weighted", True))
    rep = gram_matrix(family, tol=_tol(man))
    files = []
    csv_path = man.out_dir / "gram_radial.csv"
    write_gram_csv(rep.matrix, csv_path)
    files.append(csv_path)
    if man.figures:
        fig = man.out_dir / "gram_radial.png"
        plots.gram_figure(fig, rep.matrix, title="radial Gram magnitude")
        files.append(fig)
    code = EXIT_OK if rep.verdict != VERDICT_ILL else EXIT_NEGATIVE
    files.append(_emit_report(man, cfg, rep.to_dict(), rep.verdict, code, files))
    return code


def _run_frame(man: ExperimentManifest) -> int:
    cfg = man.config
    import math

    box_cfg = cfg.get("box")
    box = (
        ((-math.pi, math.pi), (-math.pi, math.pi))
        if box_cfg is None
        else tuple(tuple(b) for b in box_cfg)
    )
    profile_cfg = cfg.get("profile")
    domain = (
        None if profile_cfg is None else Trapezoid(profile_from_config(profile_cfg))
    )
    report = restricted_frame_check(
        box,
        domain,
        cfg["truncation"],
        trials=cfg.get("trials", 32),
        probe_window=cfg.get("probe_window"),
        seed=man.seed,
        tol=_tol(man),
    )
    files = []
    table = man.out_dir / "ratios.csv"
    _write_csv(
        table,
        ("trial", "ratio"),
        ((i + 1, r) for i, r in enumerate(report.ratios)),
    )
    files.append(table)
    if man.figures:
        fig = man.out_dir / "ratios.png"
        plots.ratio_figure(fig, report.ratios, report.tight_constant)
        files.append(fig)
    ok = 0.0 < report.min_ratio and report.max_ratio <= report.tight_constant + 1e-6
    verdict = "frame-evidence" if ok else "ratio-out-of-range"
    code = EXIT_OK if ok else EXIT_NEGATIVE
    files.append(_emit_report(man, cfg, report.to_dict(), verdict, code, files))
    return code


_RUNNERS = {
    "validate": _run_validate,
    "approximate": _run_approximate,
    "stability": _run_stability,
    "gram": _run_gram,
    "reconstruct": _run_reconstruct,
    "multirect": _run_multirect,
    "spherical": _run_spherical,
    "frame": _run_frame,
}


def run(man: ExperimentManifest) -> int:
    """Execute one manifest; returns the process exit code."""
    man.out_dir.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[man.kind](man)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output location")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    parser.add_argument("--no-figures", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="trapbasis", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for kind in ("validate", "approximate", "gram", "reconstruct", "spherical", "frame"):
        p = sub.add_parser(kind)
        _add_common(p)

    p = sub.add_parser("stability")
    p.add_argument("action", nargs="?", default="check", choices=["check"])
    _add_common(p)
    p.add_argument("--nmax", type=int, default=None)
    p.add_argument("--grid", type=int, default=None)

    p = sub.add_parser("multirect")
    p.add_argument("action", nargs="?", default="build", choices=["build"])
    _add_common(p)
    p.add_argument("--steps", type=str, default=None, help='e.g. "1,0.5"')
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--max-cond", type=float, default=None)
    p.add_argument("--y-window", type=int, default=None)
    return parser


def _manifest_from_args(args) -> ExperimentManifest:
    kind = args.command
    overrides = {}
    if args.config is not None:
        config = load_config(args.config)
    else:
        config = {"schema_version": SCHEMA_VERSION}
    if kind == "stability":
        if args.nmax is not None:
            config["n_max"] = args.nmax
        if args.grid is not None:
            config["grid"] = args.grid
    if kind == "multirect":
        if args.steps is not None:
            config["steps"] = [float(v) for v in args.steps.split(",") if v.strip()]
        if args.window is not None:
            config["window"] = args.window
        if args.max_cond is not None:
            config["max_cond"] = args.max_cond
        if args.y_window is not None:
            config["y_window"] = args.y_window
        config.setdefault("max_cond", 50.0)
        config.setdefault("window", 24)
    out = args.out
    if out.suffix == ".json":
        overrides["selection_file"] = out.name
        out = out.parent if str(out.parent) else Path(".")
    return ExperimentManifest(
        kind=kind,
        config=config,
        out_dir=out,
        seed=args.seed,
        threads=args.threads,
        tolerance=args.tol,
        figures=not args.no_figures,
        overrides=overrides,
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = _manifest_from_args(args)
        return run(manifest)
    except TrapBasisError as exc:
        payload = {"code": exc.code, "message": str(exc)}
        print(json.dumps(payload, sort_keys=True), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
