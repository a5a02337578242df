"""Command line: ``onbab gen|run|check|compare|oracle``.

Exit codes: 0 success (all hard checks pass), 1 an invariant failed,
2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import harness
from .metric import BadParams, Instance, MetricError, generate
from .oracles import (TooLarge, brute_force_routing_opt, cable_cost_fn, exact_single_sink_rob, exact_steiner,
                      exact_steiner_forest, greedy_online_steiner, mst_cost)


def _write(text: str, out: str | None) -> None:
    if out and out != "-":
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cables(arg: str | None):
    if not arg:
        return None
    p = Path(arg)
    obj = json.loads(p.read_text() if p.exists() else arg)
    return [(float(c["sigma"]), float(c["beta"])) if isinstance(c, dict) else tuple(map(float, c)) for c in obj]


def _instance(path: str) -> Instance:
    return Instance.from_json(Path(path).read_text())


def cmd_gen(a) -> int:
    params = {"n": a.n}
    for key in ("dim", "side", "eps", "cap", "radius", "wmin", "wmax", "p_sink"):
        if getattr(a, key) is not None:
            params[key] = getattr(a, key)
    if a.cables:
        params["cables"] = _cables(a.cables)
    inst = generate(a.kind, seed=a.seed, roles=a.roles, **params)
    _write(inst.to_json(), a.out)
    return 0


def cmd_run(a) -> int:
    inst = _instance(a.instance)
    rep, traces = harness.run(inst, a.alg, a.seed, a.kmode, _cables(a.cables))
    _write(harness.dumps(rep), a.out)
    if a.trace:
        Path(a.trace).write_text("".join(json.dumps(t, sort_keys=True) + "\n" for t in traces))
    if a.check:
        return _report_checks(inst, rep, a.check)
    return 0


def _report_checks(inst, rep, names) -> int:
    names = None if names in (None, "all") else names.split(",")
    res = harness.check(inst, rep, names)
    for r in res:
        print(r.line())
    return 0 if all(r.ok for r in res if r.hard) else 1


def cmd_check(a) -> int:
    inst = _instance(a.instance)
    rep = json.loads(Path(a.report).read_text())
    return _report_checks(inst, rep, a.check)


def _cell(args):
    inst_text, alg, seed, kmode, cables, exact = args
    return harness.compare_rows(Instance.from_json(inst_text), alg, seed, kmode, cables, exact)


def cmd_compare(a) -> int:
    inst = _instance(a.instance)
    algs = a.alg or ["last", "bab", "obl-rand"]
    text = inst.to_json()
    cells = [(text, alg, s, a.kmode, _cables(a.cables), a.exact) for alg in algs for s in range(a.seed, a.seed + a.seeds)]
    if a.jobs > 1:
        with ProcessPoolExecutor(a.jobs) as ex:
            parts = list(ex.map(_cell, cells))
    else:
        parts = [_cell(c) for c in cells]
    _write(harness.to_csv([r for p in parts for r in p]), a.out)
    return 0


def cmd_oracle(a) -> int:
    inst = _instance(a.instance)
    m = inst.online()
    if m.n < m.capacity:
        m.reveal_until(m.capacity - 1)
    ids = [x.id for x in inst.arrivals]
    root, terms = ids[0], ids[1:]
    if a.kind == "mst":
        val = mst_cost(m, ids)
    elif a.kind == "greedy":
        val = greedy_online_steiner(m, ids)
    elif a.kind == "steiner":
        val = exact_steiner(m, ids)
    elif a.kind == "forest":
        val = exact_steiner_forest(m, inst.pairs())
    elif a.kind == "rob":
        val = exact_single_sink_rob(m, terms, root, a.sigma, a.beta)["cost"]
    else:
        cables = _cables(a.cables) or inst.cables
        if not cables:
            raise BadParams("brute force needs --cables or instance cables")
        val = brute_force_routing_opt(m, terms, root, cable_cost_fn(cables))
    _write(json.dumps({"kind": a.kind, "value": val}) + "\n", a.out)
    return 0


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="onbab", description="Online buy-at-bulk network design experiments.")
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("gen", help="generate an instance")
    s.add_argument("--kind", required=True, choices=["euclidean", "random-metric", "capped-comb", "circle"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--roles", default="single-sink", choices=["single-sink", "multi-sink", "pairs"])
    for key, typ in (("dim", int), ("side", float), ("eps", float), ("cap", float), ("radius", float),
                     ("wmin", float), ("wmax", float), ("p-sink", float)):
        s.add_argument(f"--{key}", type=typ, dest=key.replace("-", "_"))
    s.add_argument("--cables", help="JSON list of {sigma, beta} (inline or a file)")
    s.add_argument("-o", "--out")
    s.set_defaults(fn=cmd_gen)

    s = sub.add_parser("run", help="run an algorithm and write a report")
    s.add_argument("--alg", required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--cables")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kmode", default="known", choices=["known", "unknown"])
    s.add_argument("--trace", help="write per-arrival traces as JSON lines")
    s.add_argument("--check", nargs="?", const="all", help="check the report right away (all or comma-separated names)")
    s.add_argument("-o", "--out")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("check", help="re-check invariants of a report")
    s.add_argument("--report", required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--check", default="all")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("compare", help="ALG/OPT table as CSV")
    s.add_argument("--instance", required=True)
    s.add_argument("--alg", action="append", choices=harness.ALGORITHMS)
    s.add_argument("--cables")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds", type=int, default=1)
    s.add_argument("--kmode", default="known", choices=["known", "unknown"])
    s.add_argument("--exact", action="store_true", help="fail instead of falling back to lower bounds")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("-o", "--out")
    s.set_defaults(fn=cmd_compare)

    s = sub.add_parser("oracle", help="evaluate one oracle on an instance")
    s.add_argument("--kind", required=True, choices=["mst", "greedy", "steiner", "forest", "rob", "brute"])
    s.add_argument("--instance", required=True)
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--cables")
    s.add_argument("-o", "--out")
    s.set_defaults(fn=cmd_oracle)
    return p


def main(argv=None) -> int:
    a = parser().parse_args(argv)
    try:
        return a.fn(a)
    except (harness.UnknownAlgorithm, harness.InstanceRoleMismatch, harness.TooLargeForOracle, TooLarge,
            BadParams, MetricError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
