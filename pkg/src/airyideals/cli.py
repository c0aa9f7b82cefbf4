"""Command-line front end: ``airyideals <command> [options]``.

Exit codes: 0 success or accepted, 2 rejected with a witness, 1 error.
"""

import argparse
import csv
import io as _io
import sys

from . import airy, wsp
from ._validation import check_order, check_rank, check_window
from .heisenberg import ZeroModeScenario, modes_to_records
from .io import GeneratorCache, dumps, load_family, load_operator
from .weyl import WindowError, format_q, operator_to_records

EXIT_OK, EXIT_ERROR, EXIT_REJECTED = 0, 1, 2


def _config(args):
    N = check_rank(args.rank)
    K = check_order(args.order)
    kmax, varmax = check_window(N, args.kmax, args.varmax)
    return wsp.TwistConfig(N, K, kmax, varmax)


def _family(args):
    if args.family:
        return load_family(args.family), None
    if args.scenario != "rho":
        raise ValueError("the W(sp_2N) family is defined with the zero mode as a derivative")
    cfg = _config(args)
    return wsp.build_family(cfg, GeneratorCache(args.cache_dir)), cfg


def _csv(header, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _series_records(series):
    return [{"hbar": n, "x": [list(t) for t in m], "coeff": format_q(c)}
            for n in sorted(series) for m, c in sorted(series[n].items())]


def cmd_ck(args):
    cs = wsp.compute_ck(check_rank(args.rank), args.order)
    if args.format == "csv":
        return _csv(["k", "c_k"], [[k, format_q(c)] for k, c in enumerate(cs)]), EXIT_OK
    return dumps({"rank": args.rank, "c": [{"k": k, "value": format_q(c)}
                                           for k, c in enumerate(cs)]}), EXIT_OK


def cmd_generators(args):
    if args.family:
        F = load_family(args.family)
        return dumps({str(i): operator_to_records(F.generators[i])
                      for i in F.indices()}), EXIT_OK
    cfg = _config(args)
    cache = GeneratorCache(args.cache_dir)
    modes = cache.load(cfg)
    if modes is None:
        modes = wsp.build_modes(cfg)
        cache.store(cfg, modes)
    if args.format == "csv":
        rows = []
        for i, p in sorted(modes.items()):
            m, k = wsp.generator_label(cfg.N, i)
            for r in modes_to_records(p):
                rows.append([i, m, k, r["hbar"], " ".join(map(str, r["modes"])), r["coeff"]])
        return _csv(["index", "m", "k", "hbar", "modes", "coeff"], rows), EXIT_OK
    out = []
    for i, p in sorted(modes.items()):
        m, k = wsp.generator_label(cfg.N, i)
        out.append({"index": i, "m": m, "k": k, "modes": modes_to_records(p)})
    return dumps({"rank": cfg.N, "order": cfg.K, "generators": out}), EXIT_OK


def cmd_linear_parts(args):
    F, _ = _family(args)
    M, shape = airy.linear_part(F)
    rows = [[i, a, format_q(c)] for i in sorted(M) for a, c in sorted(M[i].items())]
    if args.format == "csv":
        return _csv(["generator", "index", "coeff"], rows), EXIT_OK
    return dumps({"rows": {str(i): {str(a): format_q(c) for a, c in sorted(M[i].items())}
                           for i in sorted(M)},
                  "shape_ok": shape.passed}), EXIT_OK


def cmd_check(args):
    F, cfg = _family(args)
    if cfg is not None:
        res = wsp.verify_wsp_airy(cfg, F)
        report = res.report
    else:
        report = airy.check_airy(F)
    code = EXIT_OK if report.verdict == "airy-at-truncation" else EXIT_REJECTED
    return dumps(report.to_dict()), code


def _accepted(F):
    report = airy.check_airy(F)
    if report.verdict != "airy-at-truncation":
        return report, None
    return report, airy.normalize(F)[0]


def cmd_normal_form(args):
    F, _ = _family(args)
    report, normalized = _accepted(F)
    if normalized is None:
        return dumps(report.to_dict()), EXIT_REJECTED
    T, _ = airy.extract_transvection(F, normalized)
    out = {"normalized": {str(a): operator_to_records(H) for a, H in sorted(normalized.items())},
           "transvection": {"q": {str(n): _series_records({0: p}) for n, p in sorted(T.q.items())},
                            "s": {str(n): _series_records({0: p}) for n, p in sorted(T.s.items())}}}
    return dumps(out), EXIT_OK


def cmd_partition(args):
    F, _ = _family(args)
    report, normalized = _accepted(F)
    if normalized is None:
        return dumps(report.to_dict()), EXIT_REJECTED
    table = airy.solve_partition(F, normalized)
    recs = table.to_records()
    if args.format == "csv":
        rows = [[r["two_g"], r["n"], " ".join(map(str, r["indices"])), r["value"],
                 str(r["exact"]).lower()] for r in recs]
        return _csv(["two_g", "n", "indices", "value", "exact"], rows), EXIT_OK
    return dumps({"entries": recs}), EXIT_OK


def cmd_reduce(args):
    if not args.input:
        raise ValueError("reduce needs --input <operator file>")
    F, _ = _family(args)
    report, normalized = _accepted(F)
    if normalized is None:
        return dumps(report.to_dict()), EXIT_REJECTED
    P = load_operator(args.input, F.K, F.config.unrestricted())
    rem = airy.Reducer(normalized, F.K).reduce(P)
    return dumps({"remainder": _series_records(rem), "in_ideal": not rem}), EXIT_OK


COMMANDS = {
    "ck": cmd_ck,
    "generators": cmd_generators,
    "linear-parts": cmd_linear_parts,
    "check": cmd_check,
    "normal-form": cmd_normal_form,
    "partition": cmd_partition,
    "reduce": cmd_reduce,
}


class _Parser(argparse.ArgumentParser):
    # usage errors share the generic error code; 2 is reserved for rejection
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="airyideals",
                                     description="Quantum Airy ideals and W(sp_2N) constraints.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--rank", type=int, default=3)
        p.add_argument("--order", type=int, default=4)
        p.add_argument("--kmax", type=int, default=2)
        p.add_argument("--varmax", type=int, default=None)
        p.add_argument("--scenario", choices=[s.value for s in ZeroModeScenario], default="rho")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--cache-dir", default=None)
        p.add_argument("--family", default=None)
        if name == "reduce":
            p.add_argument("--input", default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.varmax is None:
        # enough room for log Z up to ℏ^(K-1)
        args.varmax = max((args.rank + 1) * (args.order - 1), args.rank + 1)
    if args.command == "ck" and args.rank < 2:
        parser.error("rank must be at least 2")
    try:
        text, code = COMMANDS[args.command](args)
    except (ValueError, TypeError, WindowError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
