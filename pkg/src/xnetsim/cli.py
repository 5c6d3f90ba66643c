"""Command-line entry point: ``xnetsim {simulate,verify,rank-search,slope,certify}``.

Exit codes: 0 success, 1 a check failed, 2 usage or configuration error.
"""

import argparse
import json
import math
import sys

import numpy as np

from . import analysis, harness, stbc
from .constellation import PHI_CPD, by_name
from .exceptions import ConfigInvalid, InsufficientData, XNetError, ZeroBerInTail

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _angle(text):
    """Radians, or the symbolic names ``cpd`` and ``pi/4``-style fractions."""
    t = text.strip().lower()
    if t == "cpd":
        return PHI_CPD
    if "pi" in t:
        num, _, den = t.partition("/")
        num = num.replace("pi", "").strip() or "1"
        num = -1.0 if num == "-" else float(num)
        return num * math.pi / (float(den) if den else 1.0)
    return float(t)


def _pdb_list(text):
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _json_out(obj, path):
    text = json.dumps(obj, indent=2, default=_jsonable) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigInvalid("config file must hold a JSON object")
    if "pdb" in data:
        data["p_db_list"] = data.pop("pdb")
    for key in ("phi", "theta"):
        if isinstance(data.get(key), str):
            data[key] = _angle(data[key])
    return data


def _sim_config(args):
    data = _load_config(args.config) if args.config else {}
    overrides = {
        "scheme": args.scheme, "constellation": args.constellation, "phi": args.phi,
        "theta": args.theta, "p_db_list": args.pdb, "seed": args.seed,
        "workers": args.workers, "target_bit_errors": args.target_errors,
        "max_trials_per_point": args.max_trials,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return harness.SimConfig.from_dict(data)


def cmd_simulate(args):
    cfg = _sim_config(args)

    def report(pt):
        if not args.quiet:
            print(f"P={pt.p_db:g} dB trials={pt.trials} errors={pt.bit_errors} ber={pt.ber:.3e}",
                  file=sys.stderr)

    curve = harness.run_ber(cfg, progress=report)
    text = harness.format_plot_data(curve, args.reference_slope)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_verify(args):
    rep = harness.run_verify(args.suite, seed=args.seed, quick=not args.full)
    _json_out(rep, args.out)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def cmd_rank_search(args):
    theta = math.pi / 4 if args.theta is None else args.theta
    phi = PHI_CPD if args.phi is None else args.phi
    code = (stbc.proposed_3tx_code if args.code == "proposed" else stbc.sr_4tx_code)(theta)
    const = by_name(args.constellation or "qpsk", phi)
    rep = analysis.rank_search(code, const, max_vectors=args.max_vectors)
    out = rep.to_dict()
    out["phi"] = phi
    _json_out(out, args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_slope(args):
    pairs = harness.read_ber_pairs(args.input)
    try:
        slope = analysis.diversity_slope(pairs, args.tail_points)
    except (InsufficientData, ZeroBerInTail) as exc:
        _json_out({"input": args.input, "error": str(exc), "passed": False}, args.out)
        return EXIT_FAIL
    ok = args.min is None or slope >= args.min
    _json_out({"input": args.input, "tail_points": args.tail_points, "slope": slope,
               "min": args.min, "passed": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_certify(args):
    if args.theta is not None:
        grid = [args.theta]
    else:
        grid = np.linspace(0, 2 * np.pi, args.points, endpoint=False)
    checks = [analysis.appendix_c_certificates(th, strict=False) for th in grid]
    witness = [abs(analysis.s_witness_det(th)) for th in grid]
    rep = {
        "checks": checks,
        "det_R_passed": all(c["det_R_ok"] for c in checks),
        "det_S_passed": all(c["det_S_ok"] for c in checks),
        "s_witness_min_abs_det": float(min(witness)),
        "passed": all(c["passed"] for c in checks),
    }
    _json_out(rep, args.out)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


def build_parser():
    p = _Parser(prog="xnetsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sim_flags(sp):
        sp.add_argument("--scheme", choices=("ljj3", "ar", "ljj2", "js3"))
        sp.add_argument("--constellation", choices=("qpsk", "qam8", "qam16"))
        sp.add_argument("--phi", type=_angle, help="rotation in radians, or 'cpd'")
        sp.add_argument("--theta", type=_angle, help="code angle in radians, e.g. 'pi/4'")
        sp.add_argument("--pdb", type=_pdb_list, help="comma-separated P values in dB")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--workers", type=int)
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--config", help="JSON file with SimConfig fields")
        sp.add_argument("--target-errors", type=int)
        sp.add_argument("--max-trials", type=int)
        sp.add_argument("--reference-slope", type=float,
                        help="add an a*P^-d column anchored at the last point")
        sp.add_argument("--quiet", action="store_true")

    sp = sub.add_parser("simulate", help="Monte-Carlo BER curve to CSV")
    sim_flags(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run verification suites, JSON report")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--suite", default="all", choices=harness.SUITES + ("all",))
    sp.add_argument("--full", action="store_true", help="full-size draws and exhaustive search")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("rank-search", help="exhaustive difference-matrix rank census")
    sp.add_argument("--constellation", choices=("qpsk", "qam8", "qam16"))
    sp.add_argument("--phi", type=_angle, help="rotation in radians, or 'cpd'")
    sp.add_argument("--theta", type=_angle)
    sp.add_argument("--out")
    sp.add_argument("--code", choices=("proposed", "sr"), default="proposed")
    sp.add_argument("--max-vectors", type=int, default=analysis.MAX_DIFFERENCE_VECTORS)
    sp.set_defaults(func=cmd_rank_search)

    sp = sub.add_parser("slope", help="diversity slope of an emitted CSV")
    sp.add_argument("input")
    sp.add_argument("--tail-points", type=int, default=3)
    sp.add_argument("--min", type=float, help="fail when the slope is below this")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_slope)

    sp = sub.add_parser("certify", help="determinant certificates over a theta grid")
    sp.add_argument("--theta", type=_angle)
    sp.add_argument("--points", type=int, default=64)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_certify)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigInvalid, OSError) as exc:
        print(f"xnetsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XNetError as exc:
        print(f"xnetsim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
