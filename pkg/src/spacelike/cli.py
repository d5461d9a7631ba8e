"""Command-line front end.

Subcommands:

* ``simulate``: evaluate a scenario in a chosen frame and print the
  record table. A tie in the frame ordering is not an error: every
  resolution is evaluated and the spread between them is reported.
* ``check-invariance``: run the order-invariance certifier, either on a
  scenario file/built-in or on ``--trials`` random product scenarios.
* ``check-no-signaling``: run the marginal-invariance certifier over
  spacelike station pairs, with generated alternatives.
* ``check-povm``: validate completeness and report the worst deviation
  of any station's POVM sum from the identity.
* ``demo``: narrate a built-in scenario, printing the quantities it
  reproduces, and exit nonzero if they are not reproduced.

Exit status is 0 iff every check the invocation executed came back ok.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

import numpy as np

from .linalg import CMatrix, dagger, matmul, max_abs_diff
from .intervention import (
    Intervention,
    LocalIntervention,
    Outcome,
    povm_elements,
    random_intervention,
)
from .experiment import (
    EvaluationResult,
    Scenario,
    check_no_signaling,
    check_order_invariance,
    evaluate_in_order,
    marginal,
)
from .scenarios import (
    builtin_scenarios,
    chsh,
    correlation,
    dimension_change_scenario,
    eprb,
    noncommuting_counterexample,
    random_product_scenario,
    spin_analyzer,
)
from .schema import SchemaError, parse_scenario
from .spacetime import TIE_TOLERANCE, Frame, IntervalKind, boost, classify

_BUILTIN_ALIASES = {
    "eprb": "eprb",
    "counterexample": "counterexample",
    "dimension-change": "dimension_change",
    "dimension_change": "dimension_change",
}


def load_scenario(name_or_path: str) -> Scenario:
    """Resolve a built-in name or parse a scenario file."""
    key = _BUILTIN_ALIASES.get(name_or_path)
    if key is not None:
        return builtin_scenarios()[key]
    path = Path(name_or_path)
    if not path.exists():
        raise SystemExit(
            f"error: {name_or_path!r} is neither a built-in scenario "
            f"({', '.join(sorted(set(_BUILTIN_ALIASES)))}) nor an existing file"
        )
    return parse_scenario(path.read_bytes())


def _frame_orders(s: Scenario, v: float) -> list[list[str]]:
    """All station orderings the frame admits; >1 entry exactly on a tie."""
    boosted = sorted(
        ((boost(st.event, Frame(v))[0], st.id) for st in s.stations),
        key=lambda pair: (pair[0], pair[1]),
    )
    groups: list[list[str]] = []
    last_t = None
    for t, sid in boosted:
        if last_t is not None and abs(t - last_t) <= TIE_TOLERANCE:
            groups[-1].append(sid)
        else:
            groups.append([sid])
        last_t = t
    orders = []
    for perm in itertools.product(*(itertools.permutations(g) for g in groups)):
        orders.append([sid for group in perm for sid in group])
    return orders


def _records_rows(result: EvaluationResult) -> tuple[list[str], list[list[str]]]:
    ids = list(result.ordering)
    rows = []
    for rec in result.records():
        outcomes = dict(rec)
        rows.append([outcomes[i] for i in ids] + [f"{result.probabilities[rec]:.12g}"])
    return ids + ["probability"], rows


def _print_table(header: list[str], rows: list[list[str]], out) -> None:
    widths = [len(h) for h in header]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*header), file=out)
    print("  ".join("-" * w for w in widths), file=out)
    for row in rows:
        print(fmt.format(*row), file=out)


def _emit_result(result: EvaluationResult, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(result.as_dict(), indent=2, sort_keys=True), file=out)
        return
    header, rows = _records_rows(result)
    if fmt == "csv":
        print(",".join(header), file=out)
        for row in rows:
            print(",".join(row), file=out)
    else:
        print(f"ordering: {' -> '.join(result.ordering)}", file=out)
        _print_table(header, rows, out)
        total = sum(result.probabilities.values())
        print(f"sum of probabilities: {total:.12g}", file=out)


def _emit_report(report_dict: dict, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(report_dict, indent=2, sort_keys=True), file=out)
    elif fmt == "csv":
        print("key,value", file=out)
        for k, v in report_dict.items():
            print(f"{k},{json.dumps(v) if isinstance(v, (dict, list)) else v}", file=out)
    else:
        for k, v in report_dict.items():
            print(f"{k}: {v}", file=out)


def cmd_simulate(args, out) -> int:
    s = load_scenario(args.scenario)
    orders = _frame_orders(s, args.frame_velocity)
    results = [evaluate_in_order(s, order) for order in orders]
    if len(results) == 1:
        _emit_result(results[0], args.format, out)
        return 0
    # Tie: every resolution is evaluated and compared record by record.
    records = set()
    for r in results:
        records.update(r.probabilities)
    worst = 0.0
    for rec in records:
        vals = [r.probabilities.get(rec, 0.0) for r in results]
        worst = max(worst, max(vals) - min(vals))
    ok = worst <= args.tolerance
    if args.format == "json":
        doc = {
            "tie": True,
            "ok": ok,
            "worst": worst,
            "resolutions": [r.as_dict() for r in results],
        }
        print(json.dumps(doc, indent=2, sort_keys=True), file=out)
    else:
        print(
            f"tie at velocity {args.frame_velocity}: {len(results)} orderings evaluated",
            file=out,
        )
        for r in results:
            _emit_result(r, args.format, out)
            print("", file=out)
        print(f"worst spread across resolutions: {worst:.3e} (ok: {ok})", file=out)
    return 0 if ok else 1


def cmd_check_invariance(args, out) -> int:
    if args.trials is not None:
        reports = []
        all_ok = True
        for i in range(args.trials):
            s = random_product_scenario(seed=args.seed + i)
            rep = check_order_invariance(s, args.tolerance)
            reports.append({"seed": args.seed + i, **rep.as_dict()})
            all_ok &= rep.ok
        worst = max((r["worst"] for r in reports), default=0.0)
        _emit_report(
            {"ok": all_ok, "worst": worst, "trials": len(reports), "reports": reports}
            if args.format == "json"
            else {"ok": all_ok, "worst": worst, "trials": len(reports)},
            args.format,
            out,
        )
        return 0 if all_ok else 1
    s = load_scenario(args.scenario)
    report = check_order_invariance(s, args.tolerance)
    _emit_report(report.as_dict(), args.format, out)
    return 0 if report.ok else 1


def _identity_intervention(d: int) -> Intervention:
    return Intervention(
        d_in=d,
        outcomes=(Outcome(label="id", d_out=d, kraus=(CMatrix.identity(d),)),),
    )


def _generated_alternatives(s: Scenario, varied_id: str, seed: int) -> list[LocalIntervention]:
    st = s.station(varied_id)
    if isinstance(st.local, LocalIntervention):
        d_in = st.local.local.d_in
    else:
        d_in = s.dims0[st.subsystem]
    rng = np.random.Generator(np.random.Philox(key=seed))
    alts = [LocalIntervention(st.subsystem, _identity_intervention(d_in))]
    for _ in range(2):
        k = int(rng.integers(1, 4))
        outcome_dims = [int(rng.integers(1, 4)) for _ in range(k)]
        while sum(outcome_dims) < d_in:
            outcome_dims.append(int(rng.integers(1, 4)))
        alts.append(
            LocalIntervention(
                st.subsystem,
                random_intervention(d_in, outcome_dims, seed=int(rng.integers(0, 2**62))),
            )
        )
    return alts


def _spacelike_pairs(s: Scenario) -> list[tuple[str, str]]:
    pairs = []
    for a in s.stations:
        for b in s.stations:
            if a.id != b.id and classify(a.event, b.event) is IntervalKind.SPACELIKE:
                pairs.append((a.id, b.id))
    return pairs


def _check_no_signaling_all(s: Scenario, tol: float, seed: int, target: str | None, varied: str | None):
    if target is not None and varied is not None:
        pairs = [(varied, target)]
    else:
        pairs = [
            (v, t)
            for (v, t) in _spacelike_pairs(s)
            if (target is None or t == target) and (varied is None or v == varied)
        ]
        if not pairs:
            raise SystemExit("error: no mutually spacelike station pair matches the request")
    reports = []
    for v, t in pairs:
        alts = _generated_alternatives(s, v, seed)
        rep = check_no_signaling(s, t, alts, tol, varied=v)
        reports.append(rep)
    return reports


def cmd_check_no_signaling(args, out) -> int:
    if args.trials is not None:
        all_ok = True
        worst = 0.0
        count = 0
        for i in range(args.trials):
            s = random_product_scenario(seed=args.seed + i)
            for rep in _check_no_signaling_all(s, args.tolerance, args.seed + i, None, None):
                all_ok &= rep.ok
                worst = max(worst, rep.worst)
                count += 1
        _emit_report(
            {"ok": all_ok, "worst": worst, "trials": args.trials, "pairs_checked": count},
            args.format,
            out,
        )
        return 0 if all_ok else 1
    s = load_scenario(args.scenario)
    reports = _check_no_signaling_all(s, args.tolerance, args.seed, args.target, args.varied)
    all_ok = all(r.ok for r in reports)
    doc = {
        "ok": all_ok,
        "worst": max(r.worst for r in reports),
        "pairs": [r.as_dict() for r in reports],
    }
    if args.format == "json":
        _emit_report(doc, args.format, out)
    else:
        for r in reports:
            _emit_report(r.as_dict(), args.format, out)
        print(f"overall ok: {all_ok}", file=out)
    return 0 if all_ok else 1


def cmd_check_povm(args, out) -> int:
    s = load_scenario(args.scenario)
    worst = 0.0
    rows = []
    for st in s.stations:
        locals_to_check = (
            {(): st.local.local}
            if isinstance(st.local, LocalIntervention)
            else dict(st.local.cases)
        )
        for key, iv in locals_to_check.items():
            total = np.zeros((iv.d_in, iv.d_in), dtype=complex)
            for _, element in povm_elements(iv):
                total += element.array
            dev = float(np.max(np.abs(total - np.eye(iv.d_in))))
            worst = max(worst, dev)
            label = st.id if not key else f"{st.id}{list(key)}"
            rows.append((label, dev))
    ok = worst <= args.tolerance
    doc = {
        "ok": ok,
        "worst": worst,
        "stations": {label: dev for label, dev in rows},
    }
    _emit_report(doc, args.format, out)
    return 0 if ok else 1


def _demo_eprb(args, out) -> int:
    print("Singlet pair, one analyzer per side at spacelike events.", file=out)
    ok = True
    print("correlation E(a, b) against the -cos(a - b) law:", file=out)
    for a_deg, b_deg in ((0, 60), (0, 90), (30, 75)):
        a, b = math.radians(a_deg), math.radians(b_deg)
        e = correlation(a, b)
        expected = -math.cos(a - b)
        ok &= abs(e - expected) <= args.tolerance
        print(f"  a={a_deg:>3}deg b={b_deg:>3}deg  E={e:+.9f}  -cos={expected:+.9f}", file=out)
    s = eprb(0.0, math.pi / 3.0)
    rep = check_order_invariance(s, args.tolerance)
    ok &= rep.ok
    print(f"order invariance over {rep.orders_checked} orderings: worst {rep.worst:.3e}", file=out)
    alts = [
        LocalIntervention(0, spin_analyzer(0.0)),
        LocalIntervention(0, spin_analyzer(math.pi / 2.0)),
        LocalIntervention(0, spin_analyzer(math.pi / 4.0)),
        LocalIntervention(0, _identity_intervention(2)),
    ]
    ns = check_no_signaling(s, "B", alts, args.tolerance, varied="A")
    ok &= ns.ok
    bob = marginal(evaluate_in_order(s, ["A", "B"]), "B")
    print(
        f"Bob's marginal {{+: {bob['+']:.6f}, -: {bob['-']:.6f}}} is unchanged by "
        f"Alice's analyzer choice: worst {ns.worst:.3e} over {ns.alternatives_checked} "
        "interventions",
        file=out,
    )
    s_value = chsh((math.pi / 2.0, 0.0), (math.pi / 4.0, 3.0 * math.pi / 4.0))
    ok &= abs(s_value - 2.0 * math.sqrt(2.0)) <= 1e-9
    print(f"CHSH combination at optimal angles: {s_value:.9f} (2*sqrt(2) = {2*math.sqrt(2):.9f})", file=out)
    print(f"demo checks {'passed' if ok else 'FAILED'}", file=out)
    return 0 if ok else 1


def _demo_counterexample(args, out) -> int:
    s = noncommuting_counterexample()
    first = evaluate_in_order(s, ["Z", "X"])
    second = evaluate_in_order(s, ["X", "Z"])
    key = (("X", "x+"), ("Z", "z+"))
    p_zx = first.probabilities[key]
    p_xz = second.probabilities[key]
    print("Two spacelike stations measure the SAME qubit along z and along x.", file=out)
    print(f"  z-first ordering: p(z+, x+) = {p_zx:.6f}", file=out)
    print(f"  x-first ordering: p(z+, x+) = {p_xz:.6f}", file=out)
    rep = check_order_invariance(s, args.tolerance)
    print(
        f"order-invariance certifier: ok={rep.ok}, worst spread {rep.worst:.6f}",
        file=out,
    )
    if rep.witness is not None:
        w = rep.witness
        print(
            f"  witness record {dict(w.record)}: {w.p_low:.6f} under "
            f"{' -> '.join(w.order_low)} vs {w.p_high:.6f} under {' -> '.join(w.order_high)}",
            file=out,
        )
    reproduced = (
        not rep.ok
        and rep.worst >= 0.25 - args.tolerance
        and abs(p_zx - 0.5) <= 1e-12
        and abs(p_xz - 0.25) <= 1e-12
    )
    print(
        "the violation is the point: interventions on one subsystem do not commute, "
        f"and the certifier flags it ({'reproduced' if reproduced else 'NOT reproduced'})",
        file=out,
    )
    return 0 if reproduced else 1


def _demo_dimension_change(args, out) -> int:
    s = dimension_change_scenario()
    a_first = evaluate_in_order(s, ["A", "B"])
    b_first = evaluate_in_order(s, ["B", "A"])
    ok = True
    some_record = a_first.records()[0]
    final_dim = a_first.final_states[some_record].rows
    print("Both halves of a singlet are teleported into larger systems:", file=out)
    print("  station A converts its qubit into a 3-level system (4 Bell outcomes)", file=out)
    print("  station B converts its qubit into a 5-level system", file=out)
    print("  composite dimension: 4 -> 6 -> 15 when A fires first, 4 -> 10 -> 15 when B does", file=out)
    ok &= final_dim == 15
    print(f"  final states are {final_dim}-dimensional for every record", file=out)
    uniform = all(
        abs(p - 1.0 / 16.0) <= 1e-12 for p in a_first.probabilities.values()
    )
    ok &= uniform and len(a_first.probabilities) == 16
    print(
        f"  {len(a_first.probabilities)} records, each with probability 1/16: {uniform}",
        file=out,
    )
    rep = check_order_invariance(s, args.tolerance)
    ok &= rep.ok
    print(f"order invariance across orderings: worst {rep.worst:.3e}", file=out)
    worst_states = 0.0
    for rec in a_first.records():
        worst_states = max(
            worst_states,
            max_abs_diff(a_first.final_states[rec], b_first.final_states[rec]),
        )
    ok &= worst_states <= args.tolerance
    print(f"final unnormalized states agree across orderings to {worst_states:.3e}", file=out)
    iv = s.stations[0].resolve({})
    branches = [o.kraus[0] for o in iv.outcomes]
    branch_spread = max(max_abs_diff(branches[0], k) for k in branches[1:])
    v = CMatrix(2.0 * branches[0].array)
    gram = matmul(dagger(v), v)
    dev = float(np.max(np.abs(gram.array - np.eye(2))))
    print(
        "  all four corrected branches equal the same half-isometry "
        f"(spread {branch_spread:.3e}); V = 2*branch has max|V*V - I| = {dev:.3e}",
        file=out,
    )
    ok &= dev <= args.tolerance and branch_spread <= args.tolerance
    print(f"demo checks {'passed' if ok else 'FAILED'}", file=out)
    return 0 if ok else 1


_DEMOS = {
    "eprb": _demo_eprb,
    "counterexample": _demo_counterexample,
    "dimension-change": _demo_dimension_change,
    "dimension_change": _demo_dimension_change,
}


def cmd_demo(args, out) -> int:
    fn = _DEMOS.get(args.name)
    if fn is None:
        raise SystemExit(
            f"error: unknown demo {args.name!r}; available: eprb, counterexample, dimension-change"
        )
    return fn(args, out)


def _velocity(text: str) -> float:
    v = float(text)
    if not abs(v) < 1.0:
        raise argparse.ArgumentTypeError(f"frame velocity must satisfy |v| < 1, got {v}")
    return v


def _tolerance(text: str) -> float:
    t = float(text)
    if not t > 0.0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {t}")
    return t


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacelike",
        description=(
            "Evaluate sequences of localized quantum interventions at spacetime "
            "events and certify frame-order invariance and no-signaling."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario_optional=False):
        if scenario_optional:
            p.add_argument("scenario", nargs="?", help="built-in name or scenario JSON file")
        else:
            p.add_argument("scenario", help="built-in name or scenario JSON file")
        p.add_argument("--tolerance", type=_tolerance, default=1e-9)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv", "table"), default="table")

    p_sim = sub.add_parser("simulate", help="evaluate a scenario in one frame")
    add_common(p_sim)
    p_sim.add_argument(
        "--frame-velocity",
        type=_velocity,
        default=0.0,
        help="boost velocity of the evaluating frame, |v| < 1",
    )

    p_inv = sub.add_parser("check-invariance", help="certify ordering invariance")
    add_common(p_inv, scenario_optional=True)
    p_inv.add_argument(
        "--trials",
        type=int,
        default=None,
        help="check this many random product scenarios instead of one file",
    )

    p_ns = sub.add_parser("check-no-signaling", help="certify marginal invariance")
    add_common(p_ns, scenario_optional=True)
    p_ns.add_argument("--trials", type=int, default=None)
    p_ns.add_argument("--target", default=None, help="station whose marginal is inspected")
    p_ns.add_argument("--varied", default=None, help="station whose intervention is replaced")

    p_povm = sub.add_parser("check-povm", help="validate completeness of every station")
    add_common(p_povm)

    p_demo = sub.add_parser("demo", help="narrated run of a built-in scenario")
    p_demo.add_argument("name")
    p_demo.add_argument("--tolerance", type=_tolerance, default=1e-9)
    p_demo.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    try:
        if args.command == "simulate":
            return cmd_simulate(args, out)
        if args.command == "check-invariance":
            if args.trials is None and args.scenario is None:
                raise SystemExit("error: provide a scenario or --trials")
            return cmd_check_invariance(args, out)
        if args.command == "check-no-signaling":
            if args.trials is None and args.scenario is None:
                raise SystemExit("error: provide a scenario or --trials")
            return cmd_check_no_signaling(args, out)
        if args.command == "check-povm":
            return cmd_check_povm(args, out)
        if args.command == "demo":
            return cmd_demo(args, out)
        raise SystemExit(f"error: unknown command {args.command!r}")
    except SchemaError as exc:
        print(f"scenario validation failed: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
