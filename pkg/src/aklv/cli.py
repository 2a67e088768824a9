"""Command line front end: `aklv run` builds the pipeline, writes tables and a verification report."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import klv
from .duality import (
    DualityError,
    NoIntegralSolution,
    check_btable,
    compute_b,
    compute_duality,
    hecke_residual,
    involution_residual,
)
from .hecke_module import braid_residual, quadratic_residual
from .orbit_graph import DeltaInconsistency, GraphError, SeedUnsupported, build
from .root_datum import DatumError, load_pair_spec, preset_names, validate

log = logging.getLogger("aklv")

OUTPUTS = ("orbits", "b", "P", "c", "relkf")
VERIFY = ("hecke", "duality", "selfdual", "parity", "positivity", "degree", "codim", "group_case", "gl2o2")
DEFAULT_VERIFY = ("duality", "selfdual", "parity", "positivity", "degree")

EXIT_OK, EXIT_VERIFY, EXIT_UNSUPPORTED, EXIT_IO = 0, 1, 2, 3


class VerificationFailed(RuntimeError):
    pass


@dataclass
class RunConfig:
    spec: str | None
    max_delta: int = 4
    outputs: tuple = ("orbits",)
    verify: tuple = DEFAULT_VERIFY
    format: str = "json"
    out: Path = Path("aklv_out")
    threads: int = 1
    mode: str = "general"
    keep_going: bool = False
    figures: bool = False


@dataclass
class Report:
    checks: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool | None, detail: dict | None = None):
        self.checks[name] = {"status": "skipped" if ok is None else ("pass" if ok else "fail"), **(detail or {})}

    @property
    def ok(self) -> bool:
        return all(c["status"] != "fail" for c in self.checks.values())


def resolve_threads(value) -> int:
    env = os.environ.get("AKLV_THREADS")
    if env:
        value = env
    if value in (None, "", "auto"):
        return os.cpu_count() or 1
    n = int(value)
    if n < 1:
        raise ValueError("threads must be positive")
    return n


def _write_rows(path: Path, rows: list[dict], fmt: str):
    if fmt == "json":
        path.with_suffix(".json").write_text(json.dumps(rows, sort_keys=True, indent=1) + "\n")
        return
    cols = sorted({k for r in rows for k in r})
    with open(path.with_suffix(".csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([json.dumps(r.get(c), sort_keys=True) if isinstance(r.get(c), (list, dict)) else r.get(c) for c in cols])


def _orbit_rows(graph) -> list[dict]:
    data = graph.to_json()
    by_src: dict[int, dict] = {}
    for e in data["edges"]:
        by_src.setdefault(e["source"], {})[e["root"]] = {"type": e["type"], "neighbors": e["neighbors"]}
    return [dict(n, edges=by_src.get(n["id"], {})) for n in data["nodes"]]


def _residual_check(items) -> tuple[int, int]:
    checked = bad = 0
    for r in items:
        if r is None:
            continue
        checked += 1
        if not r.is_zero():
            bad += 1
    return checked, bad


def _fail(report: Report, name: str, cfg: RunConfig, detail: dict):
    report.add(name, False, detail)
    if not cfg.keep_going:
        raise VerificationFailed(f"{name}: {detail}")


def verify_hecke(graph, report: Report, cfg: RunConfig):
    q = [quadratic_residual(graph, s, v, xi) for v, xi in graph.basis() for s in graph.roots]
    br = [
        braid_residual(graph, s, t, v, xi)
        for v, xi in graph.basis()
        for s in graph.roots
        for t in graph.roots
        if s < t
    ]
    (cq, bq), (cb, bb) = _residual_check(q), _residual_check(br)
    detail = {"quadratic_checked": cq, "quadratic_nonzero": bq, "braid_checked": cb, "braid_nonzero": bb}
    if bq or bb:
        _fail(report, "hecke", cfg, detail)
    else:
        report.add("hecke", True, detail)


def verify_duality(graph, D, b, report: Report, cfg: RunConfig):
    inv = _residual_check(involution_residual(D, v, xi) for v, xi in graph.basis())
    hk = _residual_check(hecke_residual(D, s, v, xi) for v, xi in graph.basis() for s in graph.roots)
    problems = check_btable(b)
    detail = {
        "involution_checked": inv[0],
        "involution_nonzero": inv[1],
        "hecke_checked": hk[0],
        "hecke_nonzero": hk[1],
        "b_problems": problems[:10],
    }
    if inv[1] or hk[1] or problems:
        _fail(report, "duality", cfg, detail)
    else:
        report.add("duality", True, detail)


def verify_selfdual(graph, D, P, report: Report, cfg: RunConfig):
    bad = 0
    for v in graph.order:
        for xi in graph.characters(v):
            c = klv.kl_basis_elt(graph, P, xi, v)
            if not klv.verify_selfdual(graph, D, c, xi, v).is_zero():
                bad += 1
    detail = {"checked": len(graph.basis()), "nonzero": bad}
    if bad:
        _fail(report, "selfdual", cfg, detail)
    else:
        report.add("selfdual", True, detail)


def verify_P_props(graph, P, C, wanted, report: Report, cfg: RunConfig):
    problems = klv.check_P(graph, P) + (klv.check_c(C) if C is not None else ["c table unavailable"])
    groups = {
        "parity": [p for p in problems if "half-integral" in p or "odd slot" in p or "unavailable" in p or "slot" in p],
        "positivity": [p for p in problems if "negative" in p],
        "degree": [p for p in problems if "degree" in p or "diagonal" in p or "support" in p],
    }
    for name in ("parity", "positivity", "degree"):
        if name not in wanted:
            continue
        if groups[name]:
            _fail(report, name, cfg, {"problems": groups[name][:10]})
        else:
            report.add(name, True, {"entries": len(P.entries)})


def verify_codim(spec, sph, report: Report, cfg: RunConfig):
    from .spherical import codim_check, lx_connected, spherical_closure_leq

    if not lx_connected(spec.datum, spec.inv):
        report.add("codim", None, {"reason": "LX is not connected"})
        return
    checked, bad = 0, []
    for a in sph.orbits:
        for b in sph.orbits:
            if spherical_closure_leq(spec.datum, spec.inv, a.lam, b.lam):
                ok, lhs, rhs = codim_check(spec.datum, sph, a.lam, b.lam)
                checked += 1
                if not ok:
                    bad.append({"lam": list(a.lam), "mu": list(b.lam), "delta_diff": lhs, "rho_pairing": str(rhs)})
    if bad:
        _fail(report, "codim", cfg, {"checked": checked, "mismatches": bad[:10]})
    else:
        report.add("codim", True, {"checked": checked})


def verify_group_case(graph, b, P, report: Report, cfg: RunConfig):
    from .compare import compare_b, compare_P, oracle_for

    if not graph.spec.group_case:
        report.add("group_case", None, {"reason": "not a group-case pair"})
        return
    orc, elt = oracle_for(graph)
    bp = compare_P(graph, P, orc, elt)
    bb = compare_b(graph, b, orc, elt)
    detail = {"pairs": len(graph.order) ** 2, "P_mismatches": len(bp), "b_mismatches": len(bb)}
    if bp or bb:
        _fail(report, "group_case", cfg, detail)
    else:
        report.add("group_case", True, detail)


def verify_gl2o2(report: Report, cfg: RunConfig, m_max: int = 20):
    from .oracles import gl2o2_report, gl2o2_sequences

    rows, ok = [], True
    for m in range(m_max + 1):
        rep = gl2o2_report(gl2o2_sequences(m))
        good = all(rep[k] for k in ("d_recursion", "bd_recursion", "square_identity", "total_is_minus_one", "mu_from_lambda"))
        ok &= good
        rows.append({"m": m, "ok": good, "total": str(rep["total"]), "discriminant_proxy": str(rep["discriminant_proxy"])})
    seq = gl2o2_sequences(m_max)
    detail = {"lambda_1": str(seq.lam[1]), "lambda_2": str(seq.lam[2]), "by_m": rows}
    if ok:
        report.add("gl2o2", True, detail)
    else:
        _fail(report, "gl2o2", cfg, detail)


def run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    report = Report()
    need_graph = bool(cfg.outputs) or any(v != "gl2o2" for v in cfg.verify)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if "gl2o2" in cfg.verify:
            verify_gl2o2(report, cfg)
        if need_graph:
            if not cfg.spec:
                print("error: --spec is required for this run", file=sys.stderr)
                return EXIT_IO
            try:
                spec = load_pair_spec(cfg.spec)
            except (OSError, ValueError, KeyError, TypeError, DatumError) as exc:
                print(f"error: cannot read pair spec: {exc}", file=sys.stderr)
                return EXIT_IO
            vr = validate(spec.datum, spec.inv)
            if not vr.ok:
                print("error: schema violation: " + "; ".join(vr.violations), file=sys.stderr)
                return EXIT_IO
            _pipeline(spec, cfg, out, report)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        _write_report(out, report)
        return EXIT_VERIFY
    except (NoIntegralSolution, DeltaInconsistency, klv.KLVError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        _write_report(out, report)
        return EXIT_VERIFY
    except (SeedUnsupported, GraphError, DualityError) as exc:
        print(f"unsupported input: {exc}", file=sys.stderr)
        _write_report(out, report)
        return EXIT_UNSUPPORTED
    _write_report(out, report)
    log.info("finished in %.2fs", time.perf_counter() - t0)
    return EXIT_OK if report.ok else EXIT_VERIFY


def _pipeline(spec, cfg: RunConfig, out: Path, report: Report):
    graph = build(spec, mode=cfg.mode, max_delta=cfg.max_delta, threads=cfg.threads)
    wanted = set(cfg.outputs)
    verify = set(cfg.verify)
    if "orbits" in wanted:
        _write_rows(out / "orbits", _orbit_rows(graph), cfg.format)
    if "hecke" in verify:
        verify_hecke(graph, report, cfg)
    need_b = bool(wanted & {"b", "P", "c", "relkf"}) or bool(
        verify & {"duality", "selfdual", "parity", "positivity", "degree", "codim", "group_case"}
    )
    P = C = None
    if need_b:
        D = compute_duality(graph, cfg.threads)
        b = compute_b(graph, D, cfg.threads)
        if "b" in wanted:
            _write_rows(out / "b", b.rows(), cfg.format)
        if "duality" in verify:
            verify_duality(graph, D, b, report, cfg)
        P = klv.solve_P(graph, b, cfg.threads)
        C = klv.c_from_P(graph, P)
        if "P" in wanted:
            _write_rows(out / "P", P.rows(), cfg.format)
        if "c" in wanted:
            _write_rows(out / "c", C.rows(), cfg.format)
        if "selfdual" in verify:
            verify_selfdual(graph, D, P, report, cfg)
        verify_P_props(graph, P, C, verify, report, cfg)
        if "group_case" in verify:
            verify_group_case(graph, b, P, report, cfg)
        if "relkf" in wanted or "codim" in verify:
            from .spherical import enumerate_dominant, rel_kf

            sph = enumerate_dominant(graph, cfg.max_delta, P)
            if "relkf" in wanted:
                R = rel_kf(graph, P, sph)
                _write_rows(out / "relkf", R.rows(), cfg.format)
                _write_rows(out / "spherical_orbits", [o.to_json() for o in sph.orbits], cfg.format)
            if "codim" in verify:
                verify_codim(spec, sph, report, cfg)
    if cfg.figures:
        from .report import render

        render(out, graph, P)


def _write_report(out: Path, report: Report):
    (out / "verification.json").write_text(json.dumps(report.checks, sort_keys=True, indent=1) + "\n")


def _split(value: str, allowed: tuple, what: str) -> tuple:
    if value in ("", "none"):
        return ()
    if value == "all":
        return allowed
    items = tuple(x.strip() for x in value.split(",") if x.strip())
    bad = [x for x in items if x not in allowed]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown {what}: {', '.join(bad)}")
    return items


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aklv", description="Affine Kazhdan-Lusztig-Vogan polynomial engine")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="build the orbit graph, run the pipeline and write tables")
    r.add_argument("--spec", help="pair spec JSON file or preset name")
    r.add_argument("--max-delta", type=int, default=4)
    r.add_argument("--emit", default=None, help="comma list of " + ",".join(OUTPUTS))
    r.add_argument("--verify", default="default", help="comma list of " + ",".join(VERIFY) + ", 'all' or 'none'")
    r.add_argument("--skip-verify", default="", help="checks to drop from the default set")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.add_argument("--out", default="aklv_out")
    r.add_argument("--threads", default="1", help="integer or 'auto'; AKLV_THREADS overrides")
    r.add_argument("--mode", choices=("general", "group_case", "finite"), default="general")
    r.add_argument("--keep-going", action="store_true", help="record verification failures and continue")
    r.add_argument("--figures", action="store_true", help="render PNG figures (needs matplotlib)")
    r.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("presets", help="list bundled pair specs")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.verify == "default":
            verify = DEFAULT_VERIFY
        elif args.verify == "all":
            verify = VERIFY
        else:
            verify = _split(args.verify, VERIFY, "check")
        if args.emit is None:
            outputs = () if verify and set(verify) <= {"gl2o2"} else ("orbits",)
        else:
            outputs = _split(args.emit, OUTPUTS, "output")
        skip = set(_split(args.skip_verify, VERIFY, "check"))
        threads = resolve_threads(args.threads)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        parser.error(str(exc))
    if args.max_delta < 0:
        parser.error("--max-delta must be non-negative")
    if not outputs and not (verify and set(verify) <= {"gl2o2"}):
        parser.error("--emit must name at least one output")
    verify = tuple(v for v in verify if v not in skip)
    cfg = RunConfig(
        spec=args.spec,
        max_delta=args.max_delta,
        outputs=outputs,
        verify=verify,
        format=args.format,
        out=Path(args.out),
        threads=threads,
        mode=args.mode,
        keep_going=args.keep_going,
        figures=args.figures,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
