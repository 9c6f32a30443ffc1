"""Command-line front end.

Exit codes: 0 success, 1 invariant failure, 2 input error, 3 numerical failure.
"""

import argparse
import json
import math
import os
import sys
import tempfile
import time

from . import bounds as bd
from . import divergences as dv
from . import fisher as fi
from . import linalg as la
from . import selftest as st
from .channels import parse_descriptor
from .config import resolve_tolerances
from .errors import InputError, NumericalError, SchemaError

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3
RLD_AGREEMENT = 1e-6
SLD_AGREEMENT = 1e-3


class InvariantFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SchemaError(message)


# ------------------------------------------------------------------ helpers


def encode(v):
    """JSON-safe value: infinities become the strings ``"inf"`` / ``"-inf"``."""
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    if isinstance(v, dict):
        return {k: encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode(x) for x in v]
    return v


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".qdb-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, text):
    if getattr(args, "output", None):
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def emit_json(args, obj, started):
    if not args.no_timing:
        obj["runtime_ms"] = round((time.perf_counter() - started) * 1000.0, 3)
    emit(args, json.dumps(encode(obj)) + "\n")


def load_descriptor(raw, name="channel"):
    """Parse a descriptor given inline or as ``@path``."""
    if raw is None:
        raise SchemaError(f"--{name} is required")
    if raw.startswith("@"):
        try:
            with open(raw[1:]) as fh:
                raw = fh.read()
        except OSError as exc:
            raise SchemaError(f"{name}: cannot read {raw[1:]}: {exc.strerror}") from exc
    try:
        desc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{name}: malformed JSON ({exc.msg} at line {exc.lineno} column {exc.colno})") from exc
    try:
        return parse_descriptor(desc)
    except SchemaError as exc:
        raise SchemaError(f"{name}: {exc}") from exc


def tolerances(args):
    return resolve_tolerances(rank=args.tol_rank, sdp=args.tol_sdp, consistency=args.tol_consistency)


def _methods(raw, allowed):
    ms = [m.strip() for m in raw.split(",") if m.strip()]
    bad = [m for m in ms if m not in allowed]
    if not ms or bad:
        raise SchemaError(f"--method must be a comma-separated subset of {', '.join(allowed)}")
    return ms


def _agreement(values, rel):
    vals = list(values.values())
    if any(math.isinf(v) for v in vals):
        return 0.0 if all(math.isinf(v) for v in vals) else math.inf, all(math.isinf(v) for v in vals)
    delta = max(vals) - min(vals)
    return delta, delta <= rel * max(1.0, max(abs(v) for v in vals))


def _result(quantity, methods, values, residual, rel):
    out = {"quantity": quantity, "method": ",".join(methods), "value": values[methods[0]]}
    if len(methods) > 1:
        delta, ok = _agreement(values, rel)
        out.update(values=values, delta=delta, consistent=ok)
    out["finiteness_residual"] = residual
    return out


# ----------------------------------------------------------------- commands


def cmd_fisher(args):
    started = time.perf_counter()
    tol = tolerances(args)
    fam, _, info = load_descriptor(args.channel)
    theta = args.theta if args.theta is not None else info.get("theta")
    if theta is None:
        raise SchemaError("--theta is required for this channel descriptor")
    g = fam.choi_op(theta)
    rank_tol = la.rank_tolerance(la.eig_hermitian(g).values, tol.rank)
    values = {}
    if args.quantity == "rld-channel":
        from .sdp.programs import rld_channel_sdp

        methods = _methods(args.method or "closed", ("closed", "sdp"))
        rep = fi.channel_finiteness(fam, theta, "RLD", rank_tol)
        for m in methods:
            if m == "closed":
                values[m] = fi.rld_channel(fam, theta, rank_tol).value
            else:
                values[m] = rld_channel_sdp(fam, theta, tol=tol.sdp, rank_tol=rank_tol).value
        out = _result(args.quantity, methods, values, rep.residual, max(RLD_AGREEMENT, tol.consistency))
    else:
        from .sdp.seesaw import sld_channel_seesaw

        methods = _methods(args.method or "seesaw", ("seesaw", "limit"))
        rep = fi.channel_finiteness(fam, theta, "SLD", rank_tol)
        for m in methods:
            if m == "seesaw":
                values[m] = sld_channel_seesaw(fam, theta).lower_bound
            elif not rep.finite:
                values[m] = math.inf
            else:
                values[m] = fi.sld_channel_limit(fam, theta, central=True).richardson
        out = _result(args.quantity, methods, values, rep.residual, SLD_AGREEMENT)
    emit_json(args, out, started)
    if out.get("consistent") is False:
        raise InvariantFailure(f"methods disagree by {out['delta']:.3e}")
    return EXIT_OK


def cmd_divergence(args):
    started = time.perf_counter()
    tol = tolerances(args)
    _, cN, _ = load_descriptor(args.channel1, "channel1")
    _, cM, _ = load_descriptor(args.channel2, "channel2")
    q = args.quantity
    out = {"quantity": q}
    if q == "geometric-renyi":
        if args.alpha is None:
            raise SchemaError("--alpha is required for geometric-renyi")
        if args.alpha == 1:
            out.update(quantity="bs", method="closed", value=dv.bs_channel(cN, cM), alpha=1.0)
            out["note"] = "alpha = 1 routed to the Belavkin-Staszewski divergence"
        else:
            r = dv.geometric_renyi_channel(cN, cM, args.alpha)
            out.update(method="closed", value=r.value, alpha=args.alpha, support_case=r.support_case)
            if r.regularization:
                out["regularization"] = r.regularization
    elif q == "bs":
        out.update(method="closed", value=dv.bs_channel(cN, cM))
    elif q == "geometric-fidelity":
        from .sdp.programs import geo_fidelity_channel_sdp

        methods = _methods(args.method or "closed", ("closed", "sdp"))
        values = {}
        for m in methods:
            if m == "closed":
                values[m] = dv.geometric_fidelity_channel(cN, cM)
            else:
                values[m] = geo_fidelity_channel_sdp(cN, cM, tol=tol.sdp)
        out = _result(q, methods, values, None, max(RLD_AGREEMENT, tol.consistency))
        del out["finiteness_residual"]
    else:
        from .sdp.programs import root_fidelity_channel_sdp

        out.update(method="sdp", value=root_fidelity_channel_sdp(cN, cM, tol=tol.sdp))
    emit_json(args, out, started)
    if out.get("consistent") is False:
        raise InvariantFailure(f"methods disagree by {out['delta']:.3e}")
    return EXIT_OK


def cmd_discriminate(args):
    started = time.perf_counter()
    _, cN, _ = load_descriptor(args.channel1, "channel1")
    _, cM, _ = load_descriptor(args.channel2, "channel2")
    bd.DiscriminationSetting(p=args.p, n=args.n, r=args.r if args.r is not None else 1.0)
    lower = bd.chernoff_lower(cN, cM, seed=args.seed)
    upper = bd.geometric_chernoff_upper(cN, cM)
    out = {
        "chernoff_lower": lower,
        "geometric_chernoff_upper": upper,
        "d_half": bd.geometric_fidelity_divergence(cN, cM),
        "nonasymptotic_upper": bd.chernoff_nonasymptotic_upper(cN, cM, args.n, args.p),
        "n": args.n,
        "p": args.p,
    }
    if args.r is not None:
        h = bd.hoeffding_upper(cN, cM, args.r)
        out["hoeffding_upper"] = h.value
        out["r"] = args.r
        if h.note:
            out["hoeffding_note"] = h.note
    emit_json(args, out, started)
    if lower > upper + 1e-6:
        raise InvariantFailure(f"Chernoff lower bound {lower:.6g} exceeds upper bound {upper:.6g}")
    return EXIT_OK


def cmd_figures(args):
    grid = bd.parse_grid(args.grid)
    try:
        fd = bd.figure_data(
            args.name,
            grid,
            gamma=args.gamma,
            N=args.N,
            gamma1=args.gamma1,
            gamma2=args.gamma2,
            N1=args.N1,
            N2=args.N2,
            sld_method=args.sld_method,
        )
    except (InputError, NumericalError):
        raise
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        raise NumericalError(f"figure point failed: {exc}") from exc
    emit(args, fd.to_csv())
    sys.stderr.write(json.dumps(encode({"figure": fd.name, "rows": len(fd.rows), "checks": fd.checks})) + "\n")
    if fd.checks.get("gap_ok") is False:
        raise InvariantFailure(f"negative gap {fd.checks['min_gap']:.3e} in discrimination data")
    if fd.checks.get("coincidence_ok") is False:
        raise InvariantFailure(f"RLD and SLD values differ by {fd.checks['coincidence_rel_diff']:.3e} at N = 1/2")
    if fd.checks.get("ordering_violation", 0.0) > SLD_AGREEMENT:
        raise InvariantFailure("SLD value exceeds RLD value")
    return EXIT_OK


def cmd_selftest(args):
    tol = tolerances(args)
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    if only:
        known = {s[0] for s in st.SUITES}
        unknown = [s for s in only if s not in known]
        if unknown:
            raise SchemaError(f"unknown suite(s): {', '.join(unknown)}")
    results = st.run(seed=args.seed, trials=args.trials, tol=tol, only=only)
    emit(args, st.report(results, args.seed, args.trials))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


# ------------------------------------------------------------------- parser


def _common(p):
    p.add_argument("--tol-rank", type=float, default=None, help="relative rank cutoff factor")
    p.add_argument("--tol-sdp", type=float, default=None, help="SDP duality-gap tolerance")
    p.add_argument("--tol-consistency", type=float, default=None, help="cross-method agreement tolerance")
    p.add_argument("--output", "-o", default=None, help="write the result to this file")
    p.add_argument("--no-timing", action="store_true", help="omit runtime_ms for byte-stable output")


def build_parser():
    parser = _Parser(prog="qdb", description="Quantum Fisher information, geometric divergences and channel bounds.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fisher", help="Fisher information of a channel family")
    p.add_argument("--quantity", required=True, choices=["rld-channel", "sld-channel"])
    p.add_argument("--channel", required=True, help="channel descriptor JSON or @file")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--method", default=None, help="rld: closed,sdp; sld: seesaw,limit")
    _common(p)
    p.set_defaults(func=cmd_fisher)

    p = sub.add_parser("divergence", help="divergence between two channels")
    p.add_argument("--quantity", required=True, choices=["geometric-renyi", "bs", "geometric-fidelity", "root-fidelity"])
    p.add_argument("--channel1", required=True)
    p.add_argument("--channel2", required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--method", default=None, help="geometric-fidelity: closed,sdp")
    _common(p)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("discriminate", help="Chernoff and Hoeffding bounds for two channels")
    p.add_argument("--channel1", required=True)
    p.add_argument("--channel2", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    p.set_defaults(func=cmd_discriminate)

    p = sub.add_parser("figures", help="CSV data for the estimation and discrimination sweeps")
    p.add_argument("--name", required=True, choices=list(bd.FIGURES))
    p.add_argument("--grid", required=True, help="a:b:step or comma-separated values")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--N", type=float, default=None)
    p.add_argument("--gamma1", type=float, default=None)
    p.add_argument("--gamma2", type=float, default=None)
    p.add_argument("--N1", type=float, default=None)
    p.add_argument("--N2", type=float, default=None)
    p.add_argument("--sld-method", default="seesaw", choices=["seesaw", "limit"])
    _common(p)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("selftest", help="run the invariant suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--only", default=None, help="comma-separated suite names")
    _common(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
