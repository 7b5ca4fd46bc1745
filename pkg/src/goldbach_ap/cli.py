"""Command-line driver: sieve, characters, zeros and the verification runs.

Exit codes: 0 success, 2 configuration error, 3 validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, zeros as zmod
from ._backend import BACKEND
from .arith import build_lambda_table, dump_lambda_table
from .characters import character_table_csv, enumerate_characters
from .goldbach import (
    GoldbachConfig,
    assemble_report,
    check_residue,
    gallagher_check,
    omega_construction,
    omega_scan,
)
from .moments import (
    MomentResult,
    power_sum_identities,
    second_moment_H,
    second_moment_K,
    sum_psi_progression,
    weighted_beta_sum,
)
from .zeros import (
    ExponentConfig,
    SiegelDatum,
    ZeroCountError,
    ZeroFileError,
    PairingError,
    find_zeros,
    load_zeros,
    save_zeros,
    zero_file_name,
    zeros_for_modulus,
)

log = logging.getLogger("goldbach_ap")

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3


class ConfigError(ValueError):
    pass


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def parse_grid(spec: str) -> list:
    try:
        start, factor, count = spec.split(":")
        start, factor, count = float(start), float(factor), int(count)
    except ValueError as exc:
        raise ConfigError(f"bad grid {spec!r}, expected start:factor:count") from exc
    if count < 1 or factor <= 1 or start <= 0:
        raise ConfigError("grid needs count >= 1, factor > 1 and start > 0")
    return [start * factor**k for k in range(count)]


def read_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    for i, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


# ------------------------------------------------------------------ output


class Emitter:
    def __init__(self, args, extra: dict | None = None):
        self.args = args
        self.prov = {
            "toolkit": f"goldbach_ap {__version__}",
            "backend": BACKEND,
            "T": getattr(args, "T", None),
            "b_star": getattr(args, "b_star", None),
            "zero_source": "file" if getattr(args, "zeros_file", None) else
                           ("dir" if getattr(args, "zeros_dir", None) else "computed"),
            "seed": getattr(args, "seed", None),
        }
        self.prov.update(extra or {})

    def provenance_line(self) -> str:
        return "# " + " ".join(f"{k}={fmt(v)}" for k, v in self.prov.items())

    def emit(self, header: list, rows: list, records: list | None = None) -> str:
        if self.args.format == "json":
            payload = {"provenance": self.prov,
                       "rows": records if records is not None else
                       [dict(zip(header, r)) for r in rows]}
            text = json.dumps(payload, indent=1, sort_keys=True, default=_json_default) + "\n"
        else:
            buf = io.StringIO()
            buf.write(self.provenance_line() + "\n")
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([fmt(v) for v in r])
            text = buf.getvalue()
        write_out(self.args.out, text)
        return text


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serialisable: {type(o)}")


def write_out(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# ------------------------------------------------------------- arguments


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--q1", type=int, default=1)
    g.add_argument("--q2", type=int, default=1)
    g.add_argument("--a1", type=int, default=None)
    g.add_argument("--a2", type=int, default=None)
    g.add_argument("--q", type=int, default=None, help="single modulus")
    g.add_argument("--a", type=int, default=None, help="single residue")
    g.add_argument("--X", type=float, action="append", default=None)
    g.add_argument("--grid", default=None, help="start:factor:count")
    g.add_argument("--T", type=float, default=100.0)
    g.add_argument("--zeros-file", action="append", default=None)
    g.add_argument("--zeros-dir", default=None)
    g.add_argument("--b-star", type=float, default=0.5)
    g.add_argument("--siegel", action="append", default=None, help="beta:label or beta:q.label")
    g.add_argument("--out", default=None)
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--config", default=None)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="goldbach-ap", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("sieve", help="build (and optionally dump) a Lambda table")
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--dump", default=None, help="binary LTBL1 output path")

    sub.add_parser("chars", help="character table of (Z/qZ)*")

    s = sub.add_parser("zeros", help="compute, validate or save zero sets")
    s.add_argument("--label", type=int, default=None)

    s = sub.add_parser("verify-theorem", help="decomposition reports on an X grid")
    s.add_argument("--sample", type=int, default=None,
                   help="seeded random subset of residue pairs when a1/a2 are omitted")

    s = sub.add_parser("moments", help="second moments H and K on an x grid")
    s.add_argument("--kind", choices=("H", "K"), default="H")
    s.add_argument("--h", type=float, default=None, help="fixed h (K only)")
    s.add_argument("--h-power", type=float, default=0.5, help="h = x**p when --h is unset")

    s = sub.add_parser("sums", help="auxiliary summation identities")
    s.add_argument("--which", choices=("psi", "beta", "power"), default="psi")
    s.add_argument("--beta", type=float, default=0.75)
    s.add_argument("--beta1", type=float, default=0.6)
    s.add_argument("--beta2", type=float, default=0.9)

    s = sub.add_parser("omega", help="lower-bound construction or running-max scan")
    s.add_argument("--mode", choices=("construction", "scan"), default="construction")
    s.add_argument("--x", type=float, default=1e4)
    s.add_argument("--y", type=float, default=7.0)
    s.add_argument("--N", type=int, default=10**5)
    s.add_argument("--p1", type=int, default=None, help="excluded prime (experimental)")

    s = sub.add_parser("gallagher", help="character-sum inequality over [x, 2x]")
    s.add_argument("--x", type=float, default=1e4)

    for sp in sub.choices.values():
        _common(sp)
    return p


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            values = read_config_file(args.config)
        except OSError as exc:
            raise ConfigError(str(exc)) from exc
        sp = parser._subparsers._group_actions[0].choices[args.cmd]
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, v in values.items():
            if k not in known:
                raise ConfigError(f"unknown config key {k!r}")
            act = known[k]
            conv = act.type or str
            if isinstance(act, argparse._AppendAction):
                defaults[k] = [conv(x) for x in v.split(",")]
            else:
                defaults[k] = conv(v)
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def x_values(args) -> list:
    if args.grid:
        return parse_grid(args.grid)
    if args.X:
        return list(args.X)
    raise ConfigError("give --X or --grid")


def siegel_data(args) -> dict:
    """{modulus: SiegelDatum} from --siegel beta:label (q1 first, then q2) or beta:q.label."""
    out = {}
    order = [args.q1, args.q2]
    for i, spec in enumerate(args.siegel or []):
        try:
            beta_s, lab = spec.split(":")
            if "." in lab:
                q_s, l_s = lab.split(".")
                q, label = int(q_s), int(l_s)
            else:
                q, label = order[min(i, 1)], int(lab)
            out[q] = SiegelDatum(float(beta_s), q, label)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"bad --siegel {spec!r}: {exc}") from exc
    return out


def register_zero_files(paths) -> None:
    """Seed the zero cache from ZSET1 files (complex characters need both halves)."""
    heads = {}
    for p in paths:
        q, label, *_ = zmod._read_half(p)
        heads[(q, label)] = p
    for (q, label), p in heads.items():
        chi = enumerate_characters(q).by_label(label)
        if not chi.is_primitive:
            raise ConfigError(f"{p}: zero files must be for primitive characters")
        conj = None if chi.is_real else heads.get((q, chi.conj_label))
        if not chi.is_real and conj is None:
            raise ConfigError(f"{p}: conjugate character's file is missing")
        zmod._CACHE[(q, label)] = load_zeros(p, conj)


def get_zeros(args, q: int) -> dict:
    if args.T <= 0:
        return zmod.empty_zeros(q)
    return zeros_for_modulus(q, args.T, threads=args.threads, directory=args.zeros_dir)


def sieve_for(n: float):
    return build_lambda_table(max(16, int(math.ceil(n)) + 2))


def residues(q: int, a):
    if a is not None:
        return [check_residue(q, a)]
    return [r for r in range(q) if math.gcd(r, q) == 1] if q > 1 else [0]


# ------------------------------------------------------------- commands


def cmd_sieve(args):
    tab = build_lambda_table(args.N)
    if args.dump:
        dump_lambda_table(tab, args.dump)
    return Emitter(args, {"N": args.N}).emit(
        ["N", "prime_powers", "psi_N"], [[tab.N, len(tab.prime_powers), tab.psi(tab.N)]])


def cmd_chars(args):
    q = args.q or args.q1
    text = character_table_csv(enumerate_characters(q))
    em = Emitter(args, {"q": q})
    if args.format == "json":
        rows = list(csv.reader(io.StringIO(text)))
        return em.emit(rows[0], rows[1:])
    write_out(args.out, em.provenance_line() + "\n" + text)
    return text


def cmd_zeros(args):
    if args.zeros_file:
        register_zero_files(args.zeros_file)
        rows = []
        for (q, label), zs in sorted(zmod._CACHE.items()):
            zs.count_check()
            rows.append([q, label, zs.T, len(zs.positive), len(zs)])
        return Emitter(args).emit(["q", "label", "T", "positive", "total"], rows)
    q = args.q or args.q1
    group = enumerate_characters(q)
    chars = [c for c in group if c.is_primitive]
    if args.label is not None:
        chars = [group.by_label(args.label)]
        if not chars[0].is_primitive:
            raise ConfigError(f"{q}.{args.label} is not primitive")
    if not chars:
        raise ConfigError(f"no primitive characters mod {q}")
    sets = [find_zeros(c, args.T, threads=args.threads) for c in chars]
    if len(sets) == 1 and not (args.out and Path(args.out).is_dir()):
        text = zmod.format_zeros(sets[0])
        write_out(args.out, text)
        return text
    if not args.out:
        raise ConfigError("several primitive characters: --out must name a directory")
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    rows = []
    for zs in sets:
        save_zeros(zs, d / zero_file_name(zs.q, zs.label))
        rows.append([zs.q, zs.label, zs.T, len(zs.positive), len(zs)])
    text = Emitter(args).provenance_line() + "\n" + "\n".join(",".join(fmt(v) for v in r) for r in rows) + "\n"
    sys.stdout.write(text)
    return text


def cmd_verify(args):
    xs = x_values(args)
    sieg = siegel_data(args)
    pairs = list(itertools.product(residues(args.q1, args.a1), residues(args.q2, args.a2)))
    if args.sample is not None and (args.a1 is None or args.a2 is None):
        rng = np.random.default_rng(args.seed)
        idx = sorted(rng.choice(len(pairs), size=min(args.sample, len(pairs)), replace=False))
        pairs = [pairs[i] for i in idx]
    tab = sieve_for(max(xs))
    z1, z2 = get_zeros(args, args.q1), get_zeros(args, args.q2)
    exps = ExponentConfig(default=args.b_star)
    header = ["X", "q1", "q2", "a1", "a2", "S", "main", "H1", "H2", "Z", "E", "bound_ratio"]
    rows, records = [], []
    for a1, a2 in pairs:
        for X in xs:
            cfg = GoldbachConfig(X, args.q1, args.q2, a1, a2, args.T, exps,
                                 sieg.get(args.q1), sieg.get(args.q2))
            r = assemble_report(cfg, z1, z2, tab)
            rows.append([X, args.q1, args.q2, a1, a2, r.S_exact, r.main_term, r.h1_term,
                         r.h2_term, r.z_term, r.residual, r.bound_ratio])
            records.append(r.to_dict())
    return Emitter(args).emit(header, rows, records)


def cmd_moments(args):
    xs = x_values(args)
    q = args.q or args.q1
    sieg = siegel_data(args).get(q)
    rows = []
    hmax = max(xs) if args.kind == "K" else 0
    tab = sieve_for(max(xs) + hmax)
    for a in residues(q, args.a):
        for x in xs:
            if args.kind == "H":
                r = second_moment_H(x, q, a, tab, sieg, args.b_star)
            else:
                h = args.h if args.h is not None else max(1.0, x**args.h_power)
                r = second_moment_K(x, h, q, a, tab, sieg, args.b_star)
            rows.append(r.csv_row())
    return Emitter(args, {"kind": args.kind}).emit(list(MomentResult.CSV_FIELDS), rows)


def cmd_sums(args):
    xs = x_values(args)
    q = args.q or args.q1
    if args.which == "power":
        rows = []
        for X in xs:
            r = power_sum_identities(X, args.beta, args.beta1, args.beta2)
            rows.append([X, r.beta, r.beta1, r.beta2, r.lhs1, r.main1, r.dev1,
                         r.lhs2, r.main2, r.dev2])
        return Emitter(args).emit(["X", "beta", "beta1", "beta2", "lhs1", "main1", "dev1",
                                   "lhs2", "main2", "dev2"], rows)
    tab = sieve_for(max(xs))
    zs = get_zeros(args, q)
    sieg = siegel_data(args).get(q)
    rows = []
    for a in residues(q, args.a):
        for X in xs:
            if args.which == "psi":
                r = sum_psi_progression(X, q, a, zs, tab, sieg)
            else:
                r = weighted_beta_sum(X, q, a, args.beta, zs, tab, sieg)
            rows.append([X, q, a, r.lhs, r.rhs, r.residual, r.ratio])
    return Emitter(args, {"which": args.which}).emit(
        ["X", "q", "a", "lhs", "rhs", "residual", "ratio"], rows)


def cmd_omega(args):
    q1, q2 = args.q1, args.q2
    a1 = residues(q1, args.a1)[0]
    a2 = residues(q2, args.a2)[0]
    if args.mode == "construction":
        tab = sieve_for(2 * args.x)
        r = omega_construction(args.x, args.y, q1, q2, a1, a2, tab, p1=args.p1)
        log.info("omega margin lhs/rhs = %.6g", r.margin)
        return Emitter(args).emit(["x", "y", "Q", "lhs", "rhs", "margin", "pass"],
                                  [[r.x, r.y, r.Q, r.lhs, r.rhs, r.margin, r.passed]])
    tab = sieve_for(args.N)
    rows = [[r.x, r.best_ratio, r.best_n, r.max_G] for r in omega_scan(args.N, q1, q2, a1, a2, tab)]
    return Emitter(args).emit(["x", "best_ratio", "best_n", "max_G"], rows)


def cmd_gallagher(args):
    tab = sieve_for(2 * args.x)
    qs = [args.q] if args.q else [args.q1]
    rows = []
    for q in qs:
        r = gallagher_check(args.x, q, tab)
        rows.append([r.x, r.q, r.lhs, r.ratio, r.passed])
    return Emitter(args).emit(["x", "q", "lhs", "lhs_over_x", "pass"], rows)


COMMANDS = {
    "sieve": cmd_sieve,
    "chars": cmd_chars,
    "zeros": cmd_zeros,
    "verify-theorem": cmd_verify,
    "moments": cmd_moments,
    "sums": cmd_sums,
    "omega": cmd_omega,
    "gallagher": cmd_gallagher,
}


def run(argv=None) -> int:
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.zeros_file and args.cmd != "zeros":
            register_zero_files(args.zeros_file)
        COMMANDS[args.cmd](args)
    except (ZeroCountError, ZeroFileError, PairingError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, ValueError, KeyError, OverflowError, MemoryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
