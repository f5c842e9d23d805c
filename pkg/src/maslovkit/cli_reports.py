"""Command-line front end: problem ingestion, report emission and bundled demos.

    maslovkit maslov    --input demo:half_turn_loop.json
    maslovkit geodesic  --input demo:sphere_like.json --format text
    maslovkit demos

Every report records the seed and an invariant ledger; a failed ledger entry
gives exit status 4.  Parse errors exit with 2, numerical ambiguity
(AmbiguousRank, NotStabilized) with 3, other library errors with 1.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .errors import AmbiguousRank, MaslovKitError, NotStabilized
from .forms_core import as_array, float_policy
from .lagrangian_maslov import (AnalyticPath, LagrangianFrame, SampledPath, SymplecticSpace,
                                intersection_dim, maslov_analytic, maslov_continuous)
from .multi_indices import (SymplecticPath, conley_zehnder, cz_comparison, hormander_fourfold,
                            kashiwara_triple, pair_maslov)
from .partial_signatures import (PolyPath, TaylorPath, jet_at, jump_decomposition, partial_signatures,
                                 spectral_flow)
from .polys import PolyMatrix
from .serialization import jsonable, poly_from_json

COMMANDS = ("psig", "maslov", "pair", "triple", "hormander", "cz", "geodesic")
EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_AMBIGUOUS, EXIT_LEDGER = 0, 1, 2, 3, 4


class ParseError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list
    scalar: str = "exact"
    tol: float | None = None
    galerkin_n: int = 16
    m0: float | None = None
    seed: int = 0
    format: str = "json"
    jobs: int = 1
    strict: bool = False
    timing: bool = False

    def echo(self):
        # worker count and timing never change results, so they stay out of the report
        d = asdict(self)
        d.pop("timing")
        d.pop("jobs")
        return d


@dataclass
class Report:
    command: dict
    items: list = field(default_factory=list)
    ledger: list = field(default_factory=list)     # [{"item", "check", "pass"}]
    wall_time: float | None = None

    @property
    def ok(self):
        return all(e["pass"] for e in self.ledger)

    def as_dict(self):
        d = {"command": self.command, "items": self.items, "ledger": self.ledger, "ok": self.ok}
        if self.wall_time is not None:
            d["wall_time"] = self.wall_time
        return d


# ------------------------------------------------------------- inputs

def demo_names() -> list:
    return sorted(p.name for p in resources.files("maslovkit").joinpath("data").iterdir()
                  if p.name.endswith(".json"))


def load_input(source: str) -> dict:
    """A JSON file path, or ``demo:NAME`` for a bundled demo."""
    try:
        if source.startswith("demo:"):
            name = source[5:]
            if not name.endswith(".json"):
                name += ".json"
            text = resources.files("maslovkit").joinpath("data", name).read_text()
        else:
            with open(source) as fh:
                text = fh.read()
        return json.loads(text)
    except (OSError, json.JSONDecodeError, FileNotFoundError) as exc:
        raise ParseError(f"{source}: {exc}") from exc


def _kind(cfg):
    return cfg.scalar == "exact"


def _space(data, cfg):
    if "omega" in data:
        return SymplecticSpace(as_array(data["omega"], _kind(cfg)))
    return SymplecticSpace.standard(int(data["n"]), _kind(cfg))


def _frame(space, F):
    return LagrangianFrame(space, as_array(F, space.exact))


def _lag_path(space, d, cfg, samples=65):
    kind = d.get("kind", "samples")
    if kind == "analytic":
        P = poly_from_json(d["frame"])
        a, b = d.get("interval", ["0", "1"])
        if space.exact:
            return AnalyticPath(space, P, (a, b))
        Pf = PolyMatrix(np.asarray(P.coeffs, dtype=float))
        prov = lambda t: Pf(float(t))
        ts = list(np.linspace(float(as_array([a], True)[0]), float(as_array([b], True)[0]), samples))
        return SampledPath(space, ts, [_frame(space, prov(t)) for t in ts], prov)
    if kind == "samples":
        times = list(as_array(d["times"], space.exact))
        return SampledPath(space, times, [_frame(space, F) for F in d["frames"]])
    raise ParseError(f"unknown path kind {kind!r}")


def _sym_path(space, d, cfg):
    kind = d.get("kind", "samples")
    if kind == "poly":
        P = poly_from_json(d["poly"])
        a, b = as_array(d.get("interval", ["0", "1"]), True)
        count = int(d.get("count", 33))
        ts = [a + (b - a) * i / (count - 1) for i in range(count)]
        if not space.exact:
            P = PolyMatrix(np.asarray(P.coeffs, dtype=float))
            ts = [float(t) for t in ts]
        return SymplecticPath.from_function(space, lambda t: P(t), ts)
    if kind == "samples":
        times = list(as_array(d["times"], space.exact))
        return SymplecticPath(space, times, [as_array(M, space.exact) for M in d["mats"]])
    raise ParseError(f"unknown symplectic path kind {kind!r}")


def _checks(ledger, item, checks: dict):
    for name, ok in checks.items():
        ledger.append({"item": item, "check": name, "pass": bool(ok)})


# ----------------------------------------------------------- commands

def _run_psig(data, cfg):
    exact = _kind(cfg)
    kind = data.get("kind", "poly")
    out = {"label": data.get("label", "")}
    checks = {}
    if kind == "taylor":
        path = TaylorPath(data["t0"], [as_array(c, exact) for c in data["coeffs"]], exact)
        tables = [partial_signatures(path)]
    elif kind == "poly":
        interval = data.get("interval", ["-1", "1"])
        pp = PolyPath(poly_from_json(data["poly"]), interval)
        tables = []
        if "t0" in data:
            tables.append(partial_signatures(jet_at(pp, data["t0"], exact_kind=exact)))
        rep = spectral_flow(pp, detail=True, exact_kind=exact)
        out["spectral_flow"] = {"interval": [str(x) for x in pp.interval], "value": rep.value,
                                "crossings": [c.as_dict() for c in rep.crossings]}
        checks["spectral flow = sum of crossing contributions"] = rep.consistent
        if tables:
            t0 = tables[0].t0
            others = sum(c.contribution for c in rep.crossings if c.t0 != t0)
            interior = any(c.t0 == t0 and c.position == "interior" for c in rep.crossings)
            if interior:
                checks["odd signature sum = spectral flow across t0"] = (
                    tables[0].odd_sigma_sum() == rep.value - others)
    else:
        raise ParseError(f"unknown psig input kind {kind!r}")
    out["tables"] = []
    for tb in tables:
        jr = jump_decomposition(tb)
        out["tables"].append({"table": tb.as_dict(), "jumps": jr.as_dict(), "odd_sigma_sum": tb.odd_sigma_sum()})
        for k, v in tb.invariant_checks().items():
            checks[f"t0={tb.t0}: {k}"] = v
        checks[f"t0={tb.t0}: odd signature sum = sf_across"] = tb.odd_sigma_sum() == jr.sf_across
    if "expect_sigma" in data and tables:
        checks["sigma matches expected"] = list(tables[0].sigma) == list(data["expect_sigma"])
    return out, checks


def _run_maslov(data, cfg):
    space = _space(data, cfg)
    L0 = _frame(space, data["L0"])
    path = _lag_path(space, data["path"], cfg)
    checks = {}
    if isinstance(path, AnalyticPath):
        res = maslov_analytic(path, L0, seed=cfg.seed, detail=True)
        sampled = maslov_continuous(path.sampled(65), L0, seed=cfg.seed)
        checks["analytic = sampled"] = sampled == res.value
        out = {"value": res.value, "method": "analytic",
               "crossings": [c.as_dict() for c in res.crossings]}
    else:
        res = maslov_continuous(path, L0, seed=cfg.seed, detail=True)
        out = {"value": res.value, "method": "sampled", "segments": len(res.segments)}
    if "expect" in data:
        checks["value matches expected"] = out["value"] == data["expect"]
    return out, checks


def _run_pair(data, cfg):
    space = _space(data, cfg)
    g1 = _lag_path(space, data["path1"], cfg)
    g2 = _lag_path(space, data["path2"], cfg)
    v = pair_maslov(g1, g2, seed=cfg.seed)
    checks = {"antisymmetry": pair_maslov(g2, g1, seed=cfg.seed) == -v}
    return {"value": v}, checks


def _run_triple(data, cfg):
    space = _space(data, cfg)
    L = [_frame(space, F) for F in data["frames"]]
    tau = kashiwara_triple(*L)
    checks = {}
    perms = {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1, (1, 0, 2): -1, (0, 2, 1): -1, (2, 1, 0): -1}
    checks["[P1] antisymmetry under permutations"] = all(
        kashiwara_triple(*(L[i] for i in p)) == s * tau for p, s in perms.items())
    if space.exact:
        M = _random_symplectic(space, np.random.default_rng(cfg.seed))
        checks["[P3] symplectic invariance"] = kashiwara_triple(*(x.image(M) for x in L)) == tau
        p4 = _p4_triple(space.exact)
        summed = [_direct_sum(a, b) for a, b in zip(L, p4)]
        checks["[P2] additivity with the normalization triple"] = kashiwara_triple(*summed) == tau + 1
    if "expect" in data:
        checks["value matches expected"] = tau == data["expect"]
    return {"value": tau}, checks


def _random_symplectic(space, rng):
    """Exact symplectic map: two shears written in a Lagrangian splitting L + P."""
    from fractions import Fraction
    from .forms_core import inverse
    from .lagrangian_maslov import lagrangian_complement, some_lagrangian
    L = some_lagrangian(space)
    P = lagrangian_complement(L)
    B = np.hstack([L.frame, P.frame])       # omega reads [[0, N], [-N^T, 0]] in this basis
    n = space.n
    Ninv = inverse(L.frame.T @ space.omega @ P.frame)
    S = as_array([[Fraction(int(rng.integers(-3, 4))) for _ in range(n)] for _ in range(n)], True)
    S = S + S.T
    I = as_array(np.eye(n, dtype=int).tolist(), True)
    Z = as_array(np.zeros((n, n), dtype=int).tolist(), True)
    up = np.block([[I, Ninv.T @ S], [Z, I]])     # needs N^T X symmetric
    lo = np.block([[I, Z], [Ninv @ S, I]])       # needs N Y symmetric
    M = B @ up @ lo @ inverse(B)
    if not space.is_symplectic_map(M):
        raise MaslovKitError("internal: random map is not symplectic")
    return M


def _p4_triple(exact):
    V = SymplecticSpace.standard(1, exact)
    return [LagrangianFrame(V, as_array(F, exact)) for F in ([[1], [0]], [[1], [1]], [[0], [1]])]


def _direct_sum(a, b):
    from .multi_indices import _blockdiag
    space = a.space.direct_sum(b.space)
    return LagrangianFrame(space, _blockdiag(a.frame, b.frame))


def _closed_form_q(L0, L1, L0p, L1p):
    d = intersection_dim
    twice = (kashiwara_triple(L0, L1, L0p) - kashiwara_triple(L0, L1, L1p)
             + d(L1p, L1) - d(L0p, L1) - d(L1p, L0) + d(L0p, L0))
    return twice // 2 if twice % 2 == 0 else None


def _run_hormander(data, cfg):
    space = _space(data, cfg)
    L = [_frame(space, F) for F in data["frames"]]
    rep = hormander_fourfold(*L, seed=cfg.seed, detail=True)
    checks = {"connecting paths agree": len(set(rep.values)) == 1,
              "matches triple-index closed form": rep.value == _closed_form_q(*L)}
    if "expect" in data:
        checks["value matches expected"] = rep.value == data["expect"]
    return {"value": rep.value, "values": list(rep.values)}, checks


def _run_cz(data, cfg):
    space = _space(data, cfg)
    phi = _sym_path(space, data["path"], cfg)
    out = {"value": conley_zehnder(phi, seed=cfg.seed)}
    checks = {}
    if "L0" in data:
        L0 = _frame(space, data["L0"])
        ell0 = _frame(space, data.get("ell0", data["L0"]))
        rep = cz_comparison(phi, L0, ell0, seed=cfg.seed)
        out.update({"mu": rep.mu, "q": rep.q, "is_loop": rep.is_loop, "fixed_dims": list(rep.fixed_dims)})
        if rep.is_loop:
            checks["loop: cz = -mu"] = rep.cz == -rep.mu
        checks["cz + mu = q"] = rep.cz + rep.mu == rep.q
        checks["cz + mu = q + fixed-point dimension change"] = rep.holds_corrected
    if "expect" in data:
        checks["value matches expected"] = out["value"] == data["expect"]
    return out, checks


def _run_geodesic(data, cfg):
    from .morse_sturm import MorseSturmProblem, verify_index_theorem
    prob = MorseSturmProblem.from_dict(data)
    rep = verify_index_theorem(prob, N=cfg.galerkin_n, M0=cfg.m0, seed=cfg.seed)
    out = rep.as_dict()
    out["label"] = prob.label
    checks = dict(rep.verdicts)
    if "expect" in data:
        checks["indices match expected"] = [rep.i_maslov, rep.i_morse, rep.i_spectral] == list(data["expect"])
    return out, checks


RUNNERS = {"psig": _run_psig, "maslov": _run_maslov, "pair": _run_pair, "triple": _run_triple,
           "hormander": _run_hormander, "cz": _run_cz, "geodesic": _run_geodesic}


def _run_item(args):
    cfg, source = args
    data = load_input(source)
    if not isinstance(data, dict):
        raise ParseError(f"{source}: top-level JSON must be an object")
    with float_policy(rel_tol=cfg.tol, strict=cfg.strict):
        try:
            out, checks = RUNNERS[cfg.command](data, cfg)
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{source}: malformed input ({exc!r})") from exc
    return jsonable(out), {k: bool(v) for k, v in checks.items()}


def run(cfg: RunConfig) -> Report:
    t_start = time.perf_counter()
    report = Report(command=cfg.echo())
    work = [(cfg, source) for source in cfg.inputs]
    if cfg.jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_item, work))
    else:
        results = [_run_item(w) for w in work]
    for source, (out, checks) in zip(cfg.inputs, results):
        report.items.append({"input": source, "result": out})
        _checks(report.ledger, source, checks)
    if cfg.timing:
        report.wall_time = time.perf_counter() - t_start
    return report


def cmd_psig(cfg):
    return run(cfg)


cmd_maslov = cmd_pair = cmd_triple = cmd_hormander = cmd_cz = cmd_geodesic = cmd_psig


# ------------------------------------------------------------- output

def _csv_rows(report: Report):
    cmd = report.command["command"]
    rows = []
    if cmd in ("psig", "geodesic"):
        for it in report.items:
            res = it["result"]
            if cmd == "psig":
                tabs = [t["table"] for t in res.get("tables", [])]
                tabs += [c["table"] for c in res.get("spectral_flow", {}).get("crossings", []) if c["table"]]
                seen = set()
                for t in tabs:
                    if t["t0"] not in seen:
                        seen.add(t["t0"])
                        rows.append([it["input"], t["t0"], t["n0"]] + t["sigma"] + [""])
            else:
                for c in res["instants"]:
                    flags = ";".join(f for f, on in (("degenerate", c["degenerate"]),
                                                     ("bifurcation", c["bifurcation"])) if on)
                    rows.append([it["input"], repr(c["t0"]), c["multiplicity"]] + c["table"]["sigma"] + [flags])
        header = ["input", "t0", "mult", "sigma..."]
        return header, rows
    for it in report.items:
        rows.append([it["input"], it["result"].get("value")])
    return ["input", "value"], rows


def render(report: Report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        header, rows = _csv_rows(report)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    lines = [f"command: {report.command['command']}  seed: {report.command['seed']}  scalar: {report.command['scalar']}"]
    for it in report.items:
        res = it["result"]
        if report.command["command"] == "geodesic":
            lines.append(f"{it['input']}: i_maslov={res['i_maslov']} i_morse={res['i_morse']} "
                         f"i_spectral={res['i_spectral']}  theorem holds: {res['theorem_holds']}")
            for c in res["instants"]:
                lines.append(f"  t0={c['t0']:.10g} mult={c['multiplicity']} sigma={tuple(c['table']['sigma'])} "
                             f"{c['formula']}{' degenerate' if c['degenerate'] else ''}"
                             f"{' bifurcation' if c['bifurcation'] else ''}")
        elif report.command["command"] == "psig":
            for t in res.get("tables", []):
                lines.append(f"{it['input']}: t0={t['table']['t0']} sigma={tuple(t['table']['sigma'])} "
                             f"W dims={tuple(t['table']['w_dims'])} jumps={t['jumps']}")
            if "spectral_flow" in res:
                lines.append(f"  spectral flow on {res['spectral_flow']['interval']}: {res['spectral_flow']['value']}")
        else:
            lines.append(f"{it['input']}: value={res.get('value')}")
    for e in report.ledger:
        lines.append(f"  [{'PASS' if e['pass'] else 'FAIL'}] {e['item']}: {e['check']}")
    lines.append("ok" if report.ok else "LEDGER FAILURE")
    if report.wall_time is not None:
        lines.append(f"wall time: {report.wall_time:.3f}s")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- main

def _parser():
    p = argparse.ArgumentParser(prog="maslovkit", description="Maslov indices, partial signatures and "
                                "Morse-Sturm index theorems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--input", action="append", required=True,
                       help="JSON file, or demo:NAME for a bundled demo (repeatable)")
        s.add_argument("--scalar", choices=("exact", "float"), default="exact")
        s.add_argument("--tol", type=float, default=None, help="relative float zero tolerance")
        s.add_argument("--galerkin-n", type=int, default=16)
        s.add_argument("--m0", type=float, default=None)
        s.add_argument("--seed", type=int, default=None, help="defaults to $MASLOVKIT_SEED or 0")
        s.add_argument("--format", choices=("json", "csv", "text"), default="json")
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--strict", action="store_true", help="raise on ambiguous float ranks")
        s.add_argument("--timing", action="store_true", help="add wall time (breaks byte-identity)")
    sub.add_parser("demos", help="list bundled demo inputs")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "demos":
        for name in demo_names():
            print(name)
        return EXIT_OK
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("MASLOVKIT_SEED", "0"))
    cfg = RunConfig(args.command, args.input, args.scalar, args.tol, args.galerkin_n, args.m0, seed,
                    args.format, max(1, args.jobs), args.strict, args.timing)
    try:
        report = run(cfg)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (AmbiguousRank, NotStabilized) as exc:
        print(f"numerical ambiguity: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS
    except (MaslovKitError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    sys.stdout.write(render(report, cfg.format))
    return EXIT_OK if report.ok else EXIT_LEDGER


if __name__ == "__main__":
    sys.exit(main())
