"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

from . import benchgen, engine, oracle
from .context import ContextError, load_context, save_context
from .lattice import add_flow, build, rebuild_after_removal
from .measurement import load_queries, save_queries, compute_support
from .state import STATE_ENV, StateError, load_state, locked, summary, write_epoch
from .verify import verify

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _state_dir(args) -> Path:
    d = args.state or os.environ.get(STATE_ENV)
    if not d:
        raise InputError(f"no state directory (pass --state or set {STATE_ENV})")
    return Path(d)


def _print_summary(lat, support) -> None:
    s = summary(lat, support)
    print(
        f"concepts={s['concepts']} targets={s['targets']} projections={s['projections']} "
        f"grounds={s['grounds']} counters={s['counters']}"
    )
    if s["unsatisfiable"]:
        print(f"unsatisfiable: {' '.join(s['unsatisfiable'])}")


def _report_checks(results, quiet=False) -> int:
    failed = [r for r in results if not r.ok]
    for r in results:
        if not quiet or not r.ok:
            print(f"{'PASS' if r.ok else 'FAIL'} {r.name}" + (f": {r.detail}" if r.detail else ""))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_build(args) -> int:
    ctx = load_context(args.context, strict_subsets=args.strict)
    queries = load_queries(args.queries, ctx)
    lat = build(ctx)
    support = compute_support(lat, queries)
    out = Path(args.out_dir)
    with locked(out):
        epoch = write_epoch(out, lat, support)
    _print_summary(lat, support)
    print(f"state written to {out} (epoch {epoch})")
    if args.verify:
        return _report_checks(verify(lat, support), quiet=True)
    return EXIT_OK


def cmd_add_flow(args) -> int:
    root = _state_dir(args)
    with locked(root):
        st = load_state(root)
        items = [m.strip() for m in args.matchfields.split(",") if m.strip()]
        report = add_flow(st.lat, items, name=args.name, support=st.support)
        lat, support, ctx = st.lat, st.support, st.ctx
        labels = lambda c: "{" + ",".join(ctx.labels(lat[c].intent_set)) + "}"  # noqa: E731
        delta = {
            "flow": ctx.flows[report.flow].name,
            "modified": report.modified,
            "new": [{"id": n, "genitor": g, "intent": ctx.labels(lat[n].intent_set)} for n, g in report.new],
            "retargeted": [{"query": support.queries[q].label, "from": a, "to": b}
                           for q, a, b in report.retargeted],
            "eclipsed": [{"genitor": g, "new": n} for g, n in report.eclipsed],
            "ground": report.ground,
        }
        print(f"flow {delta['flow']}: modified={len(report.modified)} new={len(report.new)}")
        for c in report.modified:
            print(f"  modified c{c} {labels(c)}")
        for n, g in report.new:
            print(f"  new c{n} {labels(n)} genitor c{g}")
        for d in delta["retargeted"]:
            print(f"  retarget {d['query']}: c{d['from']} -> c{d['to']}")
        for d in delta["eclipsed"]:
            print(f"  eclipse c{d['genitor']} -> c{d['new']}")
        ground = "none" if report.ground is None else f"c{report.ground}"
        print(f"  ground {delta['flow']} -> {ground}")
        epoch = write_epoch(root, lat, support, delta)
    print(f"epoch {epoch}")
    if args.verify:
        return _report_checks(verify(lat, support), quiet=True)
    return EXIT_OK


def cmd_remove(args) -> int:
    root = _state_dir(args)
    with locked(root):
        st = load_state(root)
        ctx, lat, support = rebuild_after_removal(
            st.lat, st.support, flow=args.flow, query=args.query
        )
        old_names = [f.name for f in st.ctx.flows]
        store = engine.install_counters(st.support, engine.MINIMAL, st.ctx.n_flows)
        _, mig = engine.reinstall_on_change(
            store, st.support, support, old_names=old_names, new_names=[f.name for f in ctx.flows]
        )
        delta = {
            "removed": {"flow": args.flow} if args.flow else {"query": args.query},
            "preserved_counters": mig.preserved,
            "reset_counters": [a for a, _, _ in mig.archived],
        }
        epoch = write_epoch(root, lat, support, delta)
    _print_summary(lat, support)
    print(f"epoch {epoch}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    st = load_state(_state_dir(args))
    ctx, support = st.ctx, st.support
    names = {f.name: f.id for f in ctx.flows}
    store = engine.install_counters(support, args.mode, ctx.n_flows)
    stream = sys.stdin if args.events == "-" else open(args.events, encoding="utf-8")
    try:
        store.process_all(engine.read_events(stream, names))
    finally:
        if stream is not sys.stdin:
            stream.close()
    rows = []
    for q in support.queries:
        if args.mode == engine.MINIMAL:
            p, b, _ = engine.query_stats(store, support, q.id)
            touched = len(support.grounds_for(q.id))
        else:
            flows = oracle.answer_direct(ctx, q)
            p, b = engine.baseline_stats(store, flows)
            touched = len(flows)
        rows.append((q.label, p, b, touched))
    text = engine.stats_csv(rows)
    summary_json = json.dumps(store.summary(), indent=1)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.summary:
        Path(args.summary).write_text(summary_json + "\n", encoding="utf-8")
    else:
        print(summary_json, file=sys.stderr)
    return EXIT_OK


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def cmd_bench(args) -> int:
    spec = benchgen.load_spec(args.spec) if args.spec != "default" else benchgen.default_spec()
    if args.flows is not None:
        spec = spec.with_(num_flows=args.flows)
    pcts = [spec.wildcard_pct]
    if args.sweep:
        key, _, values = args.sweep.partition("=")
        if key.strip() != "wildcard_pct":
            raise InputError("only wildcard_pct can be swept")
        pcts = _floats(values)
    nqs = _ints(args.queries) if args.queries else [spec.num_queries]
    seeds = range(spec.seed, spec.seed + args.seeds)
    rows = benchgen.sweep(spec, pcts, nqs, seeds)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N_Q", "wildcard_pct", "N_c", "|F|", "seed"])
    for r in rows:
        w.writerow([r["N_Q"], r["wildcard_pct"], r["N_c"], r["num_flows"], r["seed"]])
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())
    bad = [r for r in rows if r["N_c"] > r["num_flows"]]
    for r in bad:
        print(f"FAIL counters exceed flows at {r}", file=sys.stderr)
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_gen(args) -> int:
    spec = benchgen.load_spec(args.spec) if args.spec != "default" else benchgen.default_spec()
    changes = {k: v for k, v in (("seed", args.seed), ("num_flows", args.flows),
                                 ("num_queries", args.queries), ("wildcard_pct", args.wildcard_pct))
               if v is not None}
    spec = spec.with_(**changes)
    ctx = benchgen.gen_flows(spec)
    queries = benchgen.gen_queries(spec, ctx) if spec.num_queries else []
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_context(ctx, out / "context.json")
    save_queries(ctx, queries, out / "queries.json")
    print(f"flows={ctx.n_flows} matchfields={ctx.n_matchfields} queries={len(queries)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    st = load_state(_state_dir(args))
    return _report_checks(verify(st.lat, st.support))


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conceptmeter", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build lattice and counters from context + queries")
    b.add_argument("context")
    b.add_argument("queries")
    b.add_argument("out_dir")
    b.add_argument("--verify", action="store_true")
    b.add_argument("--strict", action="store_true", help="reject nested flow entries")
    b.set_defaults(func=cmd_build)

    a = sub.add_parser("add-flow", help="insert one flow entry incrementally")
    a.add_argument("matchfields", help="comma-separated matchfield labels")
    a.add_argument("--name")
    a.add_argument("--state")
    a.add_argument("--verify", action="store_true")
    a.set_defaults(func=cmd_add_flow)

    r = sub.add_parser("remove", help="remove a flow or query and rebuild")
    g = r.add_mutually_exclusive_group(required=True)
    g.add_argument("--flow")
    g.add_argument("--query")
    r.add_argument("--state")
    r.set_defaults(func=cmd_remove)

    s = sub.add_parser("simulate", help="replay packet events through the counters")
    s.add_argument("events", help="tick,flow_name,bytes lines; '-' for stdin")
    s.add_argument("--mode", choices=[engine.MINIMAL, engine.BASELINE], default=engine.MINIMAL)
    s.add_argument("--state")
    s.add_argument("--out")
    s.add_argument("--summary")
    s.set_defaults(func=cmd_simulate)

    bn = sub.add_parser("bench", help="counter counts over generated workloads")
    bn.add_argument("spec", help="bench spec JSON or 'default'")
    bn.add_argument("--sweep", help="e.g. wildcard_pct=0.1,0.5,0.9")
    bn.add_argument("--queries", help="comma-separated N_Q values")
    bn.add_argument("--flows", type=int)
    bn.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds")
    bn.add_argument("--out")
    bn.set_defaults(func=cmd_bench)

    gn = sub.add_parser("gen", help="write a generated context and query file")
    gn.add_argument("spec")
    gn.add_argument("out_dir")
    gn.add_argument("--seed", type=int)
    gn.add_argument("--flows", type=int)
    gn.add_argument("--queries", type=int)
    gn.add_argument("--wildcard-pct", type=float)
    gn.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", help="run every oracle cross-check on the current state")
    v.add_argument("--state")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ContextError, StateError, benchgen.BenchSpecError,
            FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
