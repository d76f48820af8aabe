"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 invalid parameters, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys

from . import analysis, attacks, tails
from .algebra import Matrix, parse_matrix, to_text
from .groups import BudgetExceeded, env_budget
from .hasher import (
    Hasher,
    InvalidTrit,
    as_trits,
    default_table,
    encode_bytes,
    hash_trits,
    table_from_grid,
)
from .params import ParamError, build_generators, check_generation, read_config, validate_params

EXIT_OK, EXIT_USAGE, EXIT_PARAMS, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file with n, p, a, b, ell")
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=int)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--ell", type=int)


def _params(args):
    vals = {"n": 3, "a": 4, "b": 2, "ell": 4}
    if args.config:
        vals.update(read_config(args.config))
    for key in ("n", "p", "a", "b", "ell"):
        v = getattr(args, key, None)
        if v is not None:
            vals[key] = v
    if "p" not in vals:
        raise UsageError("--p is required")
    return validate_params(vals["n"], vals["p"], vals["a"], vals["b"], vals["ell"])


def _gens(args):
    return build_generators(_params(args))


def _table(args):
    if getattr(args, "table", None):
        with open(args.table) as fh:
            return table_from_grid(fh.read())
    return default_table()


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slhash", description="SL_n(F_p) Cayley-graph hashing and analysis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    h = sub.add_parser("hash", help="hash stdin, files, or a trit literal")
    _add_params(h)
    h.add_argument("files", nargs="*")
    h.add_argument("--trits", help="hash this string over {1,2,3} verbatim")
    h.add_argument("--format", choices=("hex", "matrix"), default="hex")
    h.add_argument("--parallel", "--workers", dest="workers", type=int, default=1)
    h.add_argument("--min-segment", type=int, default=tails.DEFAULT_MIN_SEGMENT)
    h.add_argument("--table", help="attribution table as a 4x3 grid file")

    pr = sub.add_parser("params")
    psub = pr.add_subparsers(dest="action", required=True, parser_class=_Parser)
    v = psub.add_parser("validate")
    _add_params(v)
    v.add_argument("--check-generation", action="store_true")

    an = sub.add_parser("analyze")
    asub = an.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = asub.add_parser("girth")
    _add_params(g)
    g.add_argument("--radius", type=int, default=64)
    m = asub.add_parser("mixing")
    _add_params(m)
    m.add_argument("--kmax", type=int, default=200)
    m.add_argument("--table")
    at = asub.add_parser("attack")
    _add_params(at)
    at.add_argument("--k", type=int, required=True)
    at.add_argument("--trials", type=int, default=100_000)
    at.add_argument("--seed", type=int, default=0)
    at.add_argument("--table")
    t = asub.add_parser("tails")
    t.add_argument("--table")
    t.add_argument("--length", type=int, default=2)

    ak = sub.add_parser("attack")
    ksub = ak.add_subparsers(dest="action", required=True, parser_class=_Parser)
    pal = ksub.add_parser("palindrome")
    _add_params(pal)
    pal.add_argument("--mode", choices=("exhaustive", "bilinear"), default="exhaustive")
    pal.add_argument("--density", action="store_true")
    ver = ksub.add_parser("verify")
    _add_params(ver)
    ver.add_argument("--word", required=True)
    ver.add_argument("--target")
    em = ksub.add_parser("emit-em")
    _add_params(em)
    em.add_argument("--m", type=int, required=True)
    em.add_argument("--target")
    return parser


def _read_target(path, gens) -> Matrix:
    if not path:
        return Matrix.identity(gens.n, gens.p)
    with open(path) as fh:
        target = parse_matrix(fh.read())
    if target.p == 0:
        target = target.reduce(gens.p)
    if (target.n, target.p) != (gens.n, gens.p):
        raise UsageError("target matrix does not match n, p")
    return target


def _cmd_hash(args, out) -> int:
    gens = _gens(args)
    table = _table(args)
    if args.trits is not None and args.files:
        raise UsageError("give either --trits or files, not both")
    if args.trits is not None:
        trits = as_trits(args.trits.strip())
        digests = [_hash_seq(trits, table, gens, args)]
    elif args.files:
        digests = []
        for path in args.files:
            with open(path, "rb") as fh:
                digests.append(_hash_data(fh.read(), table, gens, args))
    else:
        digests = [_hash_data(sys.stdin.buffer.read(), table, gens, args)]
    for d in digests:
        out.write(d.hexdigest() + "\n" if args.format == "hex" else to_text(d.matrix))
    return EXIT_OK


def _hash_seq(trits, table, gens, args):
    if args.workers > 1:
        return tails.parallel_hash(trits, table, gens, args.workers, args.min_segment)
    return hash_trits(trits, table, gens)


def _hash_data(data: bytes, table, gens, args):
    if args.workers > 1:
        return tails.parallel_hash(encode_bytes(data), table, gens, args.workers, args.min_segment)
    return Hasher(gens, table).update(data).digest()


def _cmd_params(args, out) -> int:
    ps = _params(args)
    gens = build_generators(ps)
    out.write(f"valid n={ps.n} p={ps.p} a={ps.a} b={ps.b} ell={ps.ell} q={ps.q} k={ps.k} c={gens.c}\n")
    if args.check_generation:
        res = check_generation(gens)
        out.write(f"generation {res.status} order={res.order} group_order={res.group_order}\n")
        if res.status == "budget_exceeded":
            return EXIT_BUDGET
    return EXIT_OK


def _cmd_analyze(args, out) -> int:
    if args.action == "tails":
        table = _table(args)
        out.write("tail,class,final_step\n")
        for t in sorted(_all_strings(args.length)):
            c = tails.classify_tail(table, t)
            out.write(f"{t},{'good' if c.good else 'bad'},{c.final_step.label if c.good else ''}\n")
        return EXIT_OK

    gens = _gens(args)
    if args.action == "girth":
        rep = analysis.measure_girth(gens, args.radius)
        measured = rep.measured if rep.found else f"not_found_within_{rep.measured.radius}"
        word = " ".join(s.label for s in rep.shortest_relator or ())
        out.write("n,p,c,lower_bound,measured,relator\n")
        out.write(f"{gens.n},{gens.p},{gens.c},{rep.theoretical_lower},{measured},{word}\n")
        return EXIT_OK

    table = _table(args)
    if args.action == "mixing":
        prof = analysis.mixing_profile(gens, table, args.kmax)
        N = analysis.generated_group(gens).order
        out.write("k,linf,bound\n")
        for k, d in prof:
            out.write(f"{k},{d:.6e},{1.0 / N**2:.6e}\n")
        return EXIT_OK

    # attack
    dX = analysis.walk_distribution(gens, table, args.k)
    dY = analysis.uniform(dX.size, dX.group)
    res = analysis.play_challenge(dX, dY, args.trials, args.seed)
    out.write("exact,empirical,ci_low,ci_high,epsilon,bound\n")
    out.write(f"{res.exact_success:.12f},{res.empirical_success:.12f},{res.ci_low:.12f},"
              f"{res.ci_high:.12f},{res.epsilon:.6e},{res.bound:.12f}\n")
    return EXIT_OK


def _all_strings(length):
    import itertools

    return {"".join(map(str, t)) for t in itertools.product((1, 2, 3), repeat=length)}


def _cmd_attack(args, out) -> int:
    gens = _gens(args)
    if args.action == "verify":
        with open(args.word) as fh:
            word = attacks.FactorizationWord.parse(fh.read())
        ok = attacks.verify_factorization(word, _read_target(args.target, gens), gens)
        out.write(("true" if ok else "false") + "\n")
        return EXIT_OK
    if args.action == "emit-em":
        system = attacks.emit_em_system(args.m, _read_target(args.target, gens), gens)
        out.write(attacks.em_system_to_text(system))
        return EXIT_OK

    res = attacks.find_symmetrizer(gens, args.mode)
    out.write(f"# mode={res.mode} candidates_tried={res.candidates_tried} matches={res.matches_found}\n")
    for name, M in (("C", res.C), ("A_hat", res.A_hat), ("B_hat", res.B_hat)):
        out.write(f"# {name}\n{to_text(M)}")
    M = attacks.palindromic_product("ABABA", res.A_hat, res.B_hat)
    R = attacks.rho(M, res.A_hat, res.B_hat)
    out.write(f"# M = ABABA\n{to_text(M)}# rho(M)\n{to_text(R)}")
    out.write("i,witness\n")
    for w in attacks.power_entry_witness(M, R, gens.p):
        out.write(f"{w.exponent},{'' if w.witness is None else w.witness}\n")
    if args.density:
        out.write("ambient,total,matches,fraction\n")
        for d in attacks.symmetrizer_density(gens):
            out.write(f"{d.ambient},{d.total},{d.matches},{d.fraction:.6e}\n")
    return EXIT_OK


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        handler = {
            "hash": _cmd_hash,
            "params": _cmd_params,
            "analyze": _cmd_analyze,
            "attack": _cmd_attack,
        }[args.command]
        return handler(args, out)
    except (UsageError, InvalidTrit, FileNotFoundError) as exc:
        err.write(f"slhash: usage error: {exc}\n")
        return EXIT_USAGE
    except ParamError as exc:
        err.write(f"slhash: invalid parameters: {exc} [constraint: {exc.constraint}]\n")
        return EXIT_PARAMS
    except attacks.NotFound as exc:
        err.write(f"slhash: not found: {exc}\n")
        return EXIT_BUDGET
    except BudgetExceeded as exc:
        err.write(f"slhash: budget exceeded: {exc} (budget {env_budget()}; set SLHASH_BUDGET)\n")
        return EXIT_BUDGET


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
