"""Command-line entry points: random property runs, group tables, bundles, and the DSL.

Exit status is 0 when every checked equality holds, 1 on a counterexample and
2 on unusable input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

from . import apps, dsl, morse
from .kv2vect import KVObject, KVOneMor, KVTwoMor, compose1
from .linalg import GF, QQ, Field, Matrix
from .trace import (
    CommutingPair,
    TraceIdentityError,
    dual_trace_map,
    secondary_trace_a,
    secondary_trace_b,
    shear_map,
    sheared_pair,
    snake_identities,
    trace_map,
    trace_map_alt,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    field: Field = QQ
    seed: int = 0
    cases: int = 100
    max_rank: int = 3
    max_dim: int = 3
    max_numerator: int = 5
    jobs: int = 1

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must fit in 64 unsigned bits")
        for name in ("cases", "max_rank", "max_dim", "max_numerator", "jobs"):
            if getattr(self, name) < 1:
                raise InputError(f"{name.replace('_', '-')} must be at least 1")

    def rng(self, index: int, stream: str) -> random.Random:
        # string seeds hash deterministically, independent of PYTHONHASHSEED
        return random.Random(f"{stream}:{self.seed}:{index}")

    def describe(self) -> dict:
        d = asdict(self)
        d["field"] = "q" if not self.field.modulus else f"fp:{self.field.modulus}"
        del d["jobs"]
        return d


def parse_field(text: str) -> Field:
    if text == "q":
        return QQ
    if text.startswith("fp:"):
        try:
            return GF(int(text[3:]))
        except ValueError as e:
            raise InputError(f"bad field {text!r}: {e}") from None
    raise InputError(f"field must be 'q' or 'fp:P', got {text!r}")


# --- random instances ------------------------------------------------------------------------


def random_onemor(rng: random.Random, src: KVObject, tgt: KVObject, max_dim: int) -> KVOneMor:
    """Cell dims uniform in ``[0, max_dim]``; empty cells are intended."""
    return KVOneMor(src, tgt, tuple(tuple(rng.randint(0, max_dim) for _ in range(src.rank)) for _ in range(tgt.rank)))


def random_twomor(rng: random.Random, s: KVOneMor, t: KVOneMor, max_num: int, fld: Field) -> KVTwoMor:
    blocks = tuple(
        tuple(
            Matrix.from_rows(
                [[fld(rng.randint(-max_num, max_num)) for _ in range(s.dims[i][j])] for _ in range(t.dims[i][j])],
                fld,
                ncols=s.dims[i][j],
            )
            for j in range(s.source.rank)
        )
        for i in range(s.target.rank)
    )
    return KVTwoMor(s, t, blocks, fld)


def random_object(rng: random.Random, cfg: RunConfig) -> KVObject:
    return KVObject(rng.randint(1, cfg.max_rank))


def random_endo(rng: random.Random, cfg: RunConfig) -> KVOneMor:
    a = random_object(rng, cfg)
    return random_onemor(rng, a, a, cfg.max_dim)


def random_pair(rng: random.Random, cfg: RunConfig) -> CommutingPair:
    a = random_object(rng, cfg)
    pa = random_onemor(rng, a, a, cfg.max_dim)
    pb = random_onemor(rng, a, a, cfg.max_dim)
    alpha = random_twomor(rng, compose1(pa, pb), compose1(pb, pa), cfg.max_numerator, cfg.field)
    return CommutingPair(pa, pb, alpha)


def random_trace_instance(rng: random.Random, cfg: RunConfig) -> tuple:
    """``(psi, alpha, phi, phi')`` with ``psi: A -> B`` and ``alpha: psi o phi => phi' o psi``."""
    a, b = random_object(rng, cfg), random_object(rng, cfg)
    phi = random_onemor(rng, a, a, cfg.max_dim)
    phi_p = random_onemor(rng, b, b, cfg.max_dim)
    psi = random_onemor(rng, a, b, cfg.max_dim)
    alpha = random_twomor(rng, compose1(psi, phi), compose1(phi_p, psi), cfg.max_numerator, cfg.field)
    return psi, alpha, phi, phi_p


def random_invertible(rng: random.Random, n: int, max_num: int, fld: Field) -> Matrix:
    while True:
        m = Matrix.from_rows([[fld(rng.randint(-max_num, max_num)) for _ in range(n)] for _ in range(n)], fld, ncols=n)
        if apps._rank(m) == n:
            return m


def random_bundle(rng: random.Random, cfg: RunConfig, max_points: int = 6, max_fiber: int = 3) -> apps.EquivariantBundle:
    """Random bijection ``f``; fiber dims constant along ``f``-orbits so every ``beta_x`` is square."""
    n = rng.randint(1, max_points)
    f = list(range(n))
    rng.shuffle(f)
    dims = [None] * n
    for x in range(n):
        if dims[x] is None:
            d, y = rng.randint(0, max_fiber), x
            while dims[y] is None:
                dims[y] = d
                y = f[y]
    beta = [random_invertible(rng, dims[x], cfg.max_numerator, cfg.field) for x in range(n)]
    return apps.EquivariantBundle(tuple(dims), tuple(f), tuple(beta))


# --- serialization ---------------------------------------------------------------------------


def _grid(f: KVOneMor) -> list:
    return [list(r) for r in f.dims]


def _blocks(t: KVTwoMor) -> list:
    return [[[[str(v) for v in row] for row in b.to_lists()] for b in r] for r in t.blocks]


def dump_pair(pair: CommutingPair) -> dict:
    return {"phi_a": _grid(pair.phi_a), "phi_b": _grid(pair.phi_b), "alpha": _blocks(pair.alpha)}


def dump_instance(psi, alpha, phi, phi_p) -> dict:
    return {"psi": _grid(psi), "phi": _grid(phi), "phi_prime": _grid(phi_p), "alpha": _blocks(alpha)}


def dump_bundle(b: apps.EquivariantBundle) -> dict:
    return {
        "fiber_dims": list(b.fiber_dims),
        "f": list(b.f),
        "beta_blocks": [[[str(v) for v in r] for r in m.to_lists()] for m in b.beta],
    }


# --- reports ---------------------------------------------------------------------------------


@dataclass
class CaseResult:
    index: int
    checks: dict
    dump: dict | None = None
    info: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


@dataclass
class Report:
    command: str
    config: dict
    counts: dict = field(default_factory=dict)  # check -> [passed, failed]
    counterexample: dict | None = None
    rows: list = field(default_factory=list)

    def add(self, res: CaseResult):
        for name, ok in res.checks.items():
            c = self.counts.setdefault(name, [0, 0])
            c[0 if ok else 1] += 1
        if not res.ok and self.counterexample is None:
            failed = sorted(k for k, v in res.checks.items() if not v)
            self.counterexample = {"case": res.index, "failed": failed, "instance": res.dump, **res.info}

    @property
    def ok(self) -> bool:
        return all(f == 0 for _, f in self.counts.values())

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "ok": self.ok,
            "checks": {k: {"passed": p, "failed": f} for k, (p, f) in self.counts.items()},
            "rows": self.rows,
            "counterexample": self.counterexample,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.ok else 'FAIL'}"]
        for k, v in self.config.items():
            lines.append(f"  {k:<14} {v}")
        if self.rows:
            keys = list(self.rows[0])
            widths = [max(len(k), *(len(str(r[k])) for r in self.rows)) for k in keys]
            lines.append("  " + "  ".join(k.ljust(w) for k, w in zip(keys, widths)))
            for r in self.rows:
                lines.append("  " + "  ".join(str(r[k]).ljust(w) for k, w in zip(keys, widths)))
        if self.counts:
            w = max(len(k) for k in self.counts)
            lines.append(f"  {'check'.ljust(w)}  passed  failed")
            for k, (p, f) in self.counts.items():
                lines.append(f"  {k.ljust(w)}  {p:>6}  {f:>6}")
        if self.counterexample is not None:
            lines.append("counterexample:")
            lines.append(json.dumps(self.counterexample, sort_keys=True))
        return "\n".join(lines)


def _run_cases(fn: Callable, cfg: RunConfig) -> list[CaseResult]:
    if cfg.jobs == 1:
        return [fn(cfg, i) for i in range(cfg.cases)]
    with ProcessPoolExecutor(cfg.jobs) as pool:
        return list(pool.map(fn, [cfg] * cfg.cases, range(cfg.cases)))  # order is by index


def _safe(fn: Callable, *args) -> bool:
    try:
        return bool(fn(*args))
    except TraceIdentityError:
        return False


# --- commands --------------------------------------------------------------------------------


def verify_case(cfg: RunConfig, i: int) -> CaseResult:
    pair = random_pair(cfg.rng(i, "pair"), cfg)
    a, b, al = pair.phi_a, pair.phi_b, pair.alpha
    sb = secondary_trace_b(pair)
    checks = {"secondary": _safe(lambda: secondary_trace_a(pair) == sb)}
    tm = trace_map(a, al, b, b)
    checks["shear"] = shear_map(pair) == tm
    sp = sheared_pair(pair)
    # the sheared phi_a is a composite; the closed-form commutor keeps this cheap
    checks["shear_invariance"] = _safe(lambda: secondary_trace_b(sp) == sb == secondary_trace_a(sp, closed_form=True))
    inst = random_trace_instance(cfg.rng(i, "map"), cfg)
    checks["alt"] = trace_map(*inst) == trace_map_alt(*inst)
    checks["dual"] = _safe(dual_trace_map, *inst)
    checks["duality"] = all(snake_identities(inst[2], cfg.field)) and all(snake_identities(inst[3], cfg.field))
    ok = all(checks.values())
    dump = None if ok else {"pair": dump_pair(pair), "trace_instance": dump_instance(*inst)}
    return CaseResult(i, checks, dump)


def cmd_verify(cfg: RunConfig) -> tuple[int, Report]:
    rep = Report("verify", cfg.describe())
    for res in _run_cases(verify_case, cfg):
        rep.add(res)
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep


def _morse_checks(pair: CommutingPair) -> tuple[dict, dict]:
    r = morse.verify_main(pair)
    paths = morse.check_functoriality(pair)
    fm = morse.MorseFunctor(pair)
    dims = dsl.t_object_dims(pair)
    _, s = dsl.secondary_trace_dsl(pair)
    checks = {
        "main": r.ok,
        "paths": all(paths.values()),
        "dsl_objects": all(dims[k] == fm.obj(k).dim for k in dims),
        "dsl_scalar": s == r.secondary_b,
    }
    return checks, {"scalar": str(r.secondary_b), "report": r.to_dict() if not r.ok else None}


def morse_case(cfg: RunConfig, i: int) -> CaseResult:
    pair = random_pair(cfg.rng(i, "morse"), cfg)
    checks, info = _morse_checks(pair)
    ok = all(checks.values())
    return CaseResult(i, checks, None if ok else dump_pair(pair), {} if ok else info)


def identity_pair(n: int, fld: Field = QQ) -> CommutingPair:
    a = KVObject(n)
    one = KVOneMor(a, a, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))
    from .kv2vect import identity2
    return CommutingPair(one, one, identity2(compose1(one, one), fld))


def cmd_morse(cfg: RunConfig) -> tuple[int, Report]:
    rep = Report("morse", cfg.describe())
    fixed = [("identity", identity_pair(cfg.max_rank, cfg.field), cfg.max_rank)]
    s3 = apps.symmetric3()
    for g, h in s3.group.commuting_pairs():
        fixed.append((f"S3({g},{h})", apps.commuting_pair(s3, g, h, cfg.field), apps.fixed_point_oracle(s3, g, h)))
    for n, (label, pair, expected) in enumerate(fixed):
        checks, info = _morse_checks(pair)
        checks["oracle"] = morse.verify_main(pair).secondary_a == cfg.field(expected)
        rep.add(CaseResult(-1 - n, checks, {"label": label, **dump_pair(pair)}, info))
    for res in _run_cases(morse_case, cfg):
        rep.add(res)
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep


BUILTIN_ACTIONS = ("S3", "Z4", "V4", "D4")


def load_action(group_path: str | None, action_path: str | None, builtin: str | None) -> apps.GroupAction:
    try:
        if builtin:
            if builtin.startswith("trivial:"):
                return apps.trivial_action(int(builtin.split(":", 1)[1]))
            acts = apps.standard_actions()
            if builtin not in acts:
                raise InputError(f"unknown built-in action {builtin!r}; choose from {', '.join(acts)} or trivial:N")
            return acts[builtin]
        if group_path is None:
            raise InputError("give a group file or --builtin")
        G, elems = apps.group_from_json(apps.load_json(group_path))
        doc = apps.load_json(action_path) if action_path else {}
        return apps.action_from_json(G, doc, elems)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise InputError(str(e)) from None


def cmd_char2(action: apps.GroupAction, cfg: RunConfig) -> tuple[int, Report]:
    t = apps.char2_table(action, cfg.field)
    rep = Report("char2", {"group": action.group.name, "points": action.set_size, "field": cfg.describe()["field"]})
    G = action.group
    for (g, h), v in sorted(t.values.items()):
        oracle = apps.fixed_point_oracle(action, g, h)
        s_ok = (g, h) not in t.report.s_failures
        t_ok = (g, h) not in t.report.t_failures
        rep.rows.append({"g": g, "h": h, "chi": str(v), "oracle": oracle, "S": s_ok, "T": t_ok})
        rep.add(CaseResult(len(rep.rows), {"oracle": t.oracle_ok[(g, h)], "S": s_ok, "T": t_ok,
                                            "conjugation": not any(c[:2] == (g, h) for c in t.report.conj_failures)},
                           {"g": g, "h": h, "order": G.order}))
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep


def _lefschetz_row(b: apps.EquivariantBundle) -> tuple[dict, bool]:
    r = apps.lefschetz(b)
    return {"lhs": str(r.lhs), "rhs": str(r.rhs), "secondary": str(r.secondary_b),
            "verdict": "equal" if r.ok else "unequal"}, r.ok


def lefschetz_case(cfg: RunConfig, i: int) -> CaseResult:
    b = random_bundle(cfg.rng(i, "bundle"), cfg)
    row, ok = _lefschetz_row(b)
    return CaseResult(i, {"lefschetz": ok}, None if ok else dump_bundle(b), {"row": row})


def cmd_lefschetz(bundle: apps.EquivariantBundle | None, cfg: RunConfig) -> tuple[int, Report]:
    if bundle is not None:
        rep = Report("lefschetz", {"field": cfg.describe()["field"], "points": bundle.size})
        row, ok = _lefschetz_row(bundle)
        rep.rows.append(row)
        rep.add(CaseResult(0, {"lefschetz": ok}, dump_bundle(bundle)))
    else:
        rep = Report("lefschetz", cfg.describe())
        for res in _run_cases(lefschetz_case, cfg):
            rep.rows.append({"case": res.index, **res.info["row"]})
            rep.add(res)
    return (EXIT_OK if rep.ok else EXIT_FAIL), rep


def _show_value(v) -> dict:
    if isinstance(v, KVOneMor):
        return {"kind": "1-morphism", "source": v.source.rank, "target": v.target.rank, "dims": _grid(v)}
    return {"kind": "2-morphism", "source": _grid(v.source), "target": _grid(v.target), "blocks": _blocks(v)}


def cmd_eval(expr_text: str, env: dsl.Environment) -> tuple[int, list]:
    return EXIT_OK, [_show_value(v) for v in dsl.run_program(expr_text, env)]


# --- argument handling -----------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, cases: int = 100):
    p.add_argument("--cases", type=int, default=cases)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-rank", type=int, default=3)
    p.add_argument("--max-dim", type=int, default=3)
    p.add_argument("--max-numerator", type=int, default=5)
    p.add_argument("--field", default="q", help="q for the rationals, fp:P for the prime field of order P")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker processes; output does not depend on this")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sectrace", description="Exact checks of secondary trace identities.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("verify", help="trace-map identities on random commuting pairs"), 200)
    _common(sub.add_parser("morse", help="Morse factorization on random pairs"), 50)
    p = sub.add_parser("char2", help="2-character table of a finite group action")
    p.add_argument("group", nargs="?")
    p.add_argument("action", nargs="?")
    p.add_argument("--builtin", help="S3, Z4, V4, D4 or trivial:N")
    _common(p)
    p = sub.add_parser("lefschetz", help="fixed-point formula for an equivariant bundle")
    p.add_argument("bundle", nargs="?", help="bundle JSON; random bundles when omitted")
    _common(p, 50)
    p = sub.add_parser("eval", help="evaluate a DSL program")
    p.add_argument("program")
    p.add_argument("env", nargs="?")
    _common(p)
    return ap


def _config(ns) -> RunConfig:
    return RunConfig(parse_field(ns.field), ns.seed, ns.cases, ns.max_rank, ns.max_dim, ns.max_numerator, ns.jobs)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        cfg = _config(ns)
        if ns.command == "verify":
            code, rep = cmd_verify(cfg)
        elif ns.command == "morse":
            code, rep = cmd_morse(cfg)
        elif ns.command == "char2":
            code, rep = cmd_char2(load_action(ns.group, ns.action, ns.builtin), cfg)
        elif ns.command == "lefschetz":
            bundle = None
            if ns.bundle:
                try:
                    bundle = apps.bundle_from_json(apps.load_json(ns.bundle), cfg.field)
                except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
                    raise InputError(str(e)) from None
            code, rep = cmd_lefschetz(bundle, cfg)
        else:
            try:
                with open(ns.program, encoding="utf-8") as fh:
                    text = fh.read()
                env = dsl.Environment(field=cfg.field)
                if ns.env:
                    env = dsl.Environment.from_json(apps.load_json(ns.env), cfg.field)
            except (OSError, json.JSONDecodeError, KeyError) as e:
                raise InputError(str(e)) from None
            code, values = cmd_eval(text, env)
            if ns.format == "json":
                print(json.dumps(values, indent=2), file=out)
            else:
                for v in values:
                    print(v["kind"], json.dumps({k: v[k] for k in v if k != "kind"}), file=out)
            return code
    except (dsl.DSLSyntaxError, dsl.DSLTypeError) as e:
        where = f"{ns.program}:" if getattr(ns, "program", None) else ""
        print(f"error: {where}{e}", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, apps.GroupLawError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    print(rep.to_json() if ns.format == "json" else rep.to_text(), file=out)
    return code


if __name__ == "__main__":
    sys.exit(main())
