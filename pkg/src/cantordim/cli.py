"""Batch command-line front end.

One command per invocation; all limits are explicit flags with conservative
defaults and every report embeds the limits used, so results are
self-describing and byte-reproducible.  Exit codes: 0 pass, 1 verification
fail, 2 input error, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import covers, ideals, measures, specio
from .errors import (BuildError, CantorDimError, DepthExceededError,
                     ResourceLimitError, SpecFormatError)
from .hfun import power_hfn
from .treeset import Budget, CISet, FullCube
from .words import evens, odds

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_RESOURCE = 3

DEFAULT_DEPTH = 32
DEFAULT_GROUPS = 16
DEFAULT_SCALE = 8
DEFAULT_BUDGET = 1 << 22
DEFAULT_PRECISION = 128


@dataclass
class RunConfig:
    command: str
    depth: int
    groups: int
    scale: int
    precision: int
    budget: int
    out: str | None
    fmt: str

    def limits(self) -> dict:
        return {"depth": self.depth, "groups": self.groups, "scale": self.scale,
                "precision": self.precision, "budget": self.budget}

    def make_budget(self) -> Budget:
        return Budget(self.budget)


def _write(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg: RunConfig, payload: dict) -> None:
    _write(cfg, specio.canonical_json(payload))


def _emit_csv(cfg: RunConfig, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _write(cfg, buf.getvalue())


# ---------------------------------------------------------------------------
# Commands


def cmd_dim(cfg: RunConfig, args) -> int:
    e = specio.parse_set(specio.load_json(args.set))
    lo, hi = _parse_range(args.range, default=(1, cfg.depth))
    if args.hfn:
        # gauge given: emit the box-content sequence n, N, N*h instead
        h = specio.parse_hfn(specio.load_json(args.hfn))
        seq = measures.box_content_sequence(e, h, lo, hi, cfg.make_budget())
        rows = [(n, count, specio.rational_str(v_hi))
                for n, count, _, v_hi in seq.entries]
        if cfg.fmt == "csv":
            _emit_csv(cfg, ["n", "N", "N_times_h"], rows)
        else:
            _emit_json(cfg, {
                "rows": [{"n": n, "N": str(c), "N_times_h": v} for n, c, v in rows],
                "tail_sup": specio.rational_str(seq.tail_sup),
                "tail_inf": specio.rational_str(seq.tail_inf),
                "window_start": seq.window_start,
                "limits": cfg.limits(),
            })
        return EXIT_PASS
    report = measures.box_dimensions(e, lo, hi, cfg.make_budget())
    rows = [(n, count, f"{ratio:.6f}") for n, count, ratio in report.rows]
    if cfg.fmt == "csv":
        _emit_csv(cfg, ["n", "N", "log2N_over_n"], rows)
        return EXIT_PASS
    payload = {
        "rows": [{"n": n, "N": str(c), "log2N_over_n": r} for n, c, r in rows],
        "lower_estimate": f"{report.lower_estimate:.6f}",
        "upper_estimate": f"{report.upper_estimate:.6f}",
        "limits": cfg.limits(),
    }
    if report.closed_form is not None:
        payload["closed_form"] = {
            "complement_density_lower": specio.rational_str(report.closed_form[0]),
            "complement_density_upper": specio.rational_str(report.closed_form[1]),
        }
    _emit_json(cfg, payload)
    return EXIT_PASS


def cmd_measure(cfg: RunConfig, args) -> int:
    e = specio.parse_set(specio.load_json(args.set))
    h = specio.parse_hfn(specio.load_json(args.hfn))
    bound = measures.hausdorff_measure_delta(e, h, cfg.scale, cfg.depth,
                                             cfg.make_budget())
    _emit_json(cfg, {
        "lower": specio.rational_str(bound.lower),
        "upper": specio.rational_str(bound.upper),
        "scale_m": bound.scale_m,
        "depth": bound.depth,
        "gauge": bound.gauge,
        "lower_source": bound.lower_source,
        "mass_exact": bound.mass_exact,
        "limits": cfg.limits(),
    })
    return EXIT_PASS


def _instance_ec3(cfg: RunConfig):
    h = power_hfn(Fraction(1, 2))
    ispec = measures.sparse_I_builder(h, 64)
    e = CISet(ispec)
    cert = measures.mass_lower_certificate(e, h, measures.CIProductMass(ispec), 64,
                                           cfg.make_budget())
    checks = {"certificate_ok": cert.ok and cert.value >= 1,
              "certificate": specio.rational_str(cert.value),
              "exact": cert.exact}
    uppers_ok = True
    for m in (8, 32, 64):
        b = measures.hausdorff_measure_delta(e, h, m, 64, cfg.make_budget())
        uppers_ok = uppers_ok and b.upper >= cert.value
    checks["dp_uppers_dominate"] = uppers_ok
    return all(v for v in checks.values() if isinstance(v, bool)), checks


def _instance_howroyd_i(cfg: RunConfig):
    rep = measures.product_inequality_check(
        CISet(evens()), CISet(odds()), power_hfn(Fraction(1, 2)),
        power_hfn(Fraction(1, 2)), 1, 12, budget=cfg.make_budget())
    return rep.counting_exact and rep.content_window_ok, {
        "counting_exact": rep.counting_exact,
        "content_window_ok": rep.content_window_ok,
    }


def _instance_chain(cfg: RunConfig, e, h):
    rep = measures.chain_check(e, h, cfg.scale, cfg.depth, budget=cfg.make_budget())
    return rep.ok, {
        "H_lower": specio.rational_str(rep.h_bounds.lower),
        "H_upper": specio.rational_str(rep.h_bounds.upper),
        "dbox_witness": specio.rational_str(rep.dbox_witness),
        "ubox_tail_sup": specio.rational_str(rep.ubox_tail_sup),
        "failures": list(rep.failures),
    }


BUILTIN_INSTANCES = {
    "EC3": _instance_ec3,
    "howroyd-i": _instance_howroyd_i,
    "chain-fullcube": lambda cfg: _instance_chain(cfg, FullCube(), power_hfn(1)),
    "chain-ci": lambda cfg: _instance_chain(cfg, CISet(evens()),
                                            power_hfn(Fraction(1, 2))),
}


def _verify_from_file(cfg: RunConfig, spec: dict):
    check = spec.get("check")
    if check == "chain":
        e = specio.parse_set(spec.get("set", {}), "set")
        h = specio.parse_hfn(spec.get("hfn", {}), "hfn")
        return _instance_chain(cfg, e, h)
    if check == "product":
        a = specio.parse_set(spec.get("a", {}), "a")
        b = specio.parse_set(spec.get("b", {}), "b")
        h = specio.parse_hfn(spec.get("h", {}), "h")
        g = specio.parse_hfn(spec.get("g", {}), "g")
        lo, hi = spec.get("range", [1, 12])
        rep = measures.product_inequality_check(a, b, h, g, int(lo), int(hi),
                                                budget=cfg.make_budget())
        return rep.ok, {"counting_exact": rep.counting_exact,
                        "transport_ok": rep.transport_ok,
                        "lower_product_ok": rep.lower_product_ok}
    if check == "cover-gamma":
        e = specio.parse_set(spec.get("set", {}), "set")
        cover = specio.parse_cover(spec.get("cover", []), "cover")
        v = covers.verify_gamma_groupable(e, cover, cfg.groups, cfg.depth,
                                          cfg.make_budget())
        return v.holds, {"status": v.status, "j0": v.j0,
                         "depth": v.depth, "group_failures": list(v.group_failures)}
    if check == "cover-lambda":
        e = specio.parse_set(spec.get("set", {}), "set")
        cover = specio.parse_cover(spec.get("cover", []), "cover")
        v = covers.verify_lambda(e, cover, cfg.groups, cfg.depth, cfg.make_budget())
        return v.holds, {"status": v.status, "failure_index": v.failure_index,
                         "depth": v.depth}
    if check == "einc":
        f = ideals.BlockPartition(tuple(spec["f"]))
        g = ideals.BlockPartition(tuple(spec["g"]))
        fam = ideals.BlockFamily(f, tuple(tuple(x) for x in spec["F"]))
        gfam = ideals.BlockFamily(f.compose(g), tuple(tuple(x) for x in spec["G"]))
        v = ideals.einc_inclusion(f, g, fam, gfam, int(spec.get("horizon", cfg.groups)))
        return v.n0 is not None, {"n0": v.n0, "failures": list(v.failures)}
    raise SpecFormatError(f"unknown check {check!r}", "check")


def cmd_verify(cfg: RunConfig, args) -> int:
    name = args.instance
    if name in BUILTIN_INSTANCES:
        ok, detail = BUILTIN_INSTANCES[name](cfg)
    else:
        spec = specio.load_json(name)
        ok, detail = _verify_from_file(cfg, spec)
    _emit_json(cfg, {"instance": name, "status": "pass" if ok else "fail",
                     "detail": detail, "limits": cfg.limits()})
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_cover(cfg: RunConfig, args) -> int:
    if args.action == "build":
        e = specio.parse_set(specio.load_json(args.set))
        h = specio.parse_hfn(specio.load_json(args.hfn))
        filt = measures.Filtration(tuple([e] * args.levels))
        cover = covers.build_gamma_groupable(filt, h, max_scale=cfg.depth,
                                             depth=cfg.depth,
                                             budget=cfg.make_budget())
        v = covers.verify_gamma_groupable(e, cover, cover.group_count - 1,
                                          cfg.depth, cfg.make_budget())
        payload = specio.cover_to_obj(cover)
        if args.cover_out:
            with open(args.cover_out, "w", encoding="utf-8") as fh:
                fh.write(specio.canonical_json(payload))
        total, _ = covers.gamma_grouped_sum(cover, h)
        _emit_json(cfg, {"status": "pass" if v.holds else "fail",
                         "groups": cover.group_count,
                         "elements": len(cover.elements),
                         "hausdorff_sum": specio.rational_str(total),
                         "j0": v.j0, "limits": cfg.limits()})
        return EXIT_PASS if v.holds else EXIT_FAIL
    if args.action == "verify":
        e = specio.parse_set(specio.load_json(args.set))
        cover = specio.parse_cover(specio.load_json(args.cover))
        if cover.groups is not None:
            v = covers.verify_gamma_groupable(e, cover, cfg.groups, cfg.depth,
                                              cfg.make_budget())
            detail = {"status": v.status, "j0": v.j0, "depth": v.depth,
                      "group_failures": list(v.group_failures)}
            ok = v.holds
        else:
            v = covers.verify_lambda(e, cover, cfg.groups, cfg.depth,
                                     cfg.make_budget())
            detail = {"status": v.status, "failure_index": v.failure_index,
                      "depth": v.depth}
            ok = v.holds
        _emit_json(cfg, {"detail": detail, "status": "pass" if ok else "fail",
                         "limits": cfg.limits()})
        return EXIT_PASS if ok else EXIT_FAIL
    raise SpecFormatError(f"unknown cover action {args.action!r}")


def cmd_witness(cfg: RunConfig, args) -> int:
    if args.action == "compile-me":
        h = specio.parse_hfn(specio.load_json(args.hfn))
        f = ideals.me_fbuilder(h, args.k)
        sums = ideals.me_sums(f, h, args.k)
        ok = all((1 << f(k)) * h.hi_at(f(k + 1)) <= Fraction(1, 1 << k)
                 for k in range(args.k))
        if args.witness_out:
            with open(args.witness_out, "w", encoding="utf-8") as fh:
                fh.write(specio.canonical_json({"f": list(f.table)}))
        _emit_json(cfg, {"f": list(f.table),
                         "partial_sum": specio.rational_str(sum(sums)),
                         "inequality_ok": ok,
                         "status": "pass" if ok else "fail",
                         "limits": cfg.limits()})
        return EXIT_PASS if ok else EXIT_FAIL
    if args.action == "compile-nadd":
        h = specio.parse_hfn(specio.load_json(args.hfn))
        growth = lambda n: Fraction(1, h.hi_at(max(0, n - 1)))
        f = ideals.nadd_fbuilder(growth, args.k)
        if args.witness_out:
            with open(args.witness_out, "w", encoding="utf-8") as fh:
                fh.write(specio.canonical_json({"f": list(f.table)}))
        _emit_json(cfg, {"f": list(f.table), "status": "pass",
                         "limits": cfg.limits()})
        return EXIT_PASS
    if args.action == "compile-tprime":
        h = specio.parse_hfn(specio.load_json(args.hfn))
        growth = lambda n: Fraction(1, h.hi_at(n))
        f = ideals.tprime_fbuilder(growth, lambda n: n + 1, args.k)
        if args.witness_out:
            with open(args.witness_out, "w", encoding="utf-8") as fh:
                fh.write(specio.canonical_json({"f": list(f.table)}))
        _emit_json(cfg, {"f": list(f.table), "status": "pass",
                         "limits": cfg.limits()})
        return EXIT_PASS
    if args.action == "check":
        w = specio.parse_witness(specio.load_json(args.witness))
        lo, hi = _parse_range(args.range, default=(0, cfg.groups))
        if isinstance(w, ideals.ShelahMWitness):
            v = ideals.shelahM_check(w, args.x, lo, hi)
        elif isinstance(w, ideals.ShelahNWitness):
            v = ideals.shelahN_check(w, args.x, lo, hi)
        else:
            v = ideals.tprime_check(w, args.x, lo, hi)
        ok = v.n0 is not None
        _emit_json(cfg, {"outcomes": [[n, flag] for n, flag in v.outcomes],
                         "n0": v.n0, "horizon": v.horizon,
                         "status": "pass" if ok else "fail",
                         "limits": cfg.limits()})
        return EXIT_PASS if ok else EXIT_FAIL
    raise SpecFormatError(f"unknown witness action {args.action!r}")


# ---------------------------------------------------------------------------
# Wiring


def _parse_range(text, default):
    if not text:
        return default
    try:
        lo, hi = text.split(":")
        return int(lo), int(hi)
    except ValueError:
        raise SpecFormatError(f"bad range {text!r}; want LO:HI") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    common.add_argument("--groups", type=int, default=DEFAULT_GROUPS)
    common.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    common.add_argument("--budget", type=int, default=None,
                        help="node budget (env CANTORDIM_BUDGET overrides "
                             "the default)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None)

    p = argparse.ArgumentParser(prog="cantordim",
                                description="Exact fractal measures and "
                                            "witness combinatorics on the "
                                            "Cantor cube.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dim", parents=[common],
                       help="covering-number table and dimension estimates")
    d.add_argument("set")
    d.add_argument("--range", default=None)
    d.add_argument("--hfn", default=None,
                   help="emit the content sequence n, N, N*h for this gauge")

    m = sub.add_parser("measure", parents=[common],
                       help="certified Hausdorff-measure bounds")
    m.add_argument("set")
    m.add_argument("hfn")

    v = sub.add_parser("verify", parents=[common],
                       help="run a named or file-described instance")
    v.add_argument("instance")

    c = sub.add_parser("cover", parents=[common], help="build or verify covers")
    c.add_argument("action", choices=("build", "verify"))
    c.add_argument("--set", required=True)
    c.add_argument("--hfn")
    c.add_argument("--cover")
    c.add_argument("--levels", type=int, default=4)
    c.add_argument("--cover-out", dest="cover_out")

    w = sub.add_parser("witness", parents=[common],
                       help="compile or check block witnesses")
    w.add_argument("action",
                   choices=("compile-me", "compile-nadd", "compile-tprime",
                            "check"))
    w.add_argument("--hfn")
    w.add_argument("--witness")
    w.add_argument("--k", type=int, default=12)
    w.add_argument("--x", default="")
    w.add_argument("--range", default=None)
    w.add_argument("--witness-out", dest="witness_out")
    return p


COMMANDS = {
    "dim": cmd_dim,
    "measure": cmd_measure,
    "verify": cmd_verify,
    "cover": cmd_cover,
    "witness": cmd_witness,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    budget = args.budget
    if budget is None:
        budget = int(os.environ.get("CANTORDIM_BUDGET", DEFAULT_BUDGET))
    cfg = RunConfig(args.command, args.depth, args.groups, args.scale,
                    args.precision, budget, args.out, args.format)
    try:
        if min(cfg.depth, cfg.groups, cfg.precision, cfg.budget) <= 0 or cfg.scale < 0:
            raise SpecFormatError("limits must be positive (scale nonnegative)")
        return COMMANDS[args.command](cfg, args)
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (SpecFormatError, DepthExceededError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BuildError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except CantorDimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
