"""Batch command line front end.

Every subcommand reads JSON artifacts, runs one exact computation, and emits
a single-line JSON report carrying the command name, a digest of every input
file, the scalar parameters, the seed (null when no sampling is involved),
and exact-rational results as [numerator, denominator] string pairs.  Output
is deterministic: identical invocations produce byte-identical reports.

Exit codes follow the shared error taxonomy: 2 parse, 3 validation,
4 horizon exhausted, 5 precondition, 6 infeasible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import pathlib
import sys
from fractions import Fraction

from .cohen import (
    build_cohen_tree,
    catalog_from_json,
    null_cover_witness,
    validate_catalog,
)
from .domination import (
    dominates_seq,
    eventually_dominates_seq,
    gap_function_from_json,
    pi_transform,
)
from .errors import GaugeForcingError, ParseError
from .gauges import (
    dominates_on_window,
    eventually_dominates,
    finer_gauge,
    gauge_from_json,
    gauge_to_json,
    hat_transform,
    is_ratio_monotone,
)
from .mathias import (
    build_mathias_tree,
    condition_from_json,
    condition_to_json,
    condition_tree,
    operator_catalog_from_json,
    sparsify_condition,
)
from .measure import (
    cover_cost,
    cover_from_json,
    cover_to_json,
    dp_cover_oracle,
    level_trace,
    liminf_ratio_trace,
    refine_cover_hat,
)
from .sacks import (
    SacksCondition,
    build_sacks_tree,
    compute_perfect_to_depth,
    sacks_catalog_from_json,
    split_triggers,
    thin_tree,
)
from .trees import (
    SplitSchedule,
    level_counts,
    schedule_to_explicit,
    tree_from_json,
    tree_to_json,
    uniformity_check,
)


def _rat(v: Fraction) -> list[str]:
    return [str(v.numerator), str(v.denominator)]


def _rats(vs) -> list[list[str]]:
    return [_rat(v) for v in vs]


def _parse_fraction(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"{what} must be a rational like '3/4', got {text!r}") from exc


def _load(path: str, what: str) -> tuple[object, dict]:
    try:
        data = pathlib.Path(path).read_bytes()
    except OSError as exc:
        raise ParseError(f"cannot read {what} file {path!r}: {exc}") from exc
    digest = hashlib.sha256(data).hexdigest()
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {what} file {path!r}: {exc}") from exc
    return obj, {"path": path, "sha256": digest}


def _load_gauge(args, inputs: dict, apply_hat: bool = False):
    obj, digest = _load(args.gauge, "gauge")
    inputs["gauge"] = digest
    g = gauge_from_json(obj)
    if apply_hat and getattr(args, "hat", False):
        g = hat_transform(g)
    if getattr(args, "horizon", None) is not None:
        g = g.truncate(args.horizon)
    return g


def _emit(command: str, args, inputs: dict, params: dict, result: dict,
          seed: int | None = None) -> None:
    report = {
        "command": command,
        "inputs": inputs,
        "params": params,
        "seed": seed,
        "result": result,
    }
    text = json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n"
    if args.out:
        pathlib.Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_gauge_eval(args) -> None:
    inputs: dict = {}
    g = _load_gauge(args, inputs, apply_hat=True)
    trace = liminf_ratio_trace(g)
    _emit("gauge-eval", args, inputs,
          {"hat": bool(args.hat), "horizon": g.horizon},
          {
              "gauge": gauge_to_json(g),
              "ratios": _rats(trace.values),
              "ratio_running_min": _rats(trace.running_min),
              "final_min": _rat(trace.final_min),
              "is_ratio_monotone": is_ratio_monotone(g),
          })


def _cmd_gauge_hat(args) -> None:
    inputs: dict = {}
    g = _load_gauge(args, inputs)
    h = hat_transform(g)
    _emit("gauge-hat", args, inputs, {"horizon": g.horizon},
          {
              "gauge": gauge_to_json(h),
              "is_ratio_monotone": is_ratio_monotone(h),
              "changed": h != g,
          })


def _cmd_gauge_dominates(args) -> None:
    inputs: dict = {}
    g0 = _load_gauge(args, inputs)
    obj, digest = _load(args.other, "comparison gauge")
    inputs["other"] = digest
    g1 = gauge_from_json(obj)
    shared = min(g0.horizon, g1.horizon)
    lo = args.lo
    hi = args.hi if args.hi is not None else shared
    _emit("gauge-dominates", args, inputs, {"lo": lo, "hi": hi},
          {
              "dominates_on_window": dominates_on_window(g0, g1, lo, hi),
              "eventually_threshold": eventually_dominates(g0, g1),
              "shared_horizon": shared,
          })


def _cmd_gauge_finer(args) -> None:
    inputs: dict = {}
    g = _load_gauge(args, inputs)
    obj, digest = _load(args.catalog, "gauge catalog")
    inputs["catalog"] = digest
    if not isinstance(obj, list):
        raise ParseError("gauge catalog must be a JSON list of gauge objects")
    members = [gauge_from_json(entry) for entry in obj]
    out = finer_gauge(g, members)
    _emit("gauge-finer", args, inputs, {"members": len(members)},
          {
              "gauge": gauge_to_json(out),
              "below_base": dominates_on_window(g, out),
              "ratio_monotone": is_ratio_monotone(out),
              "escapes_all": all(eventually_dominates(h, out) is None
                                 for h in members),
          })


def _cmd_tree_trace(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.tree, "tree")
    inputs["tree"] = digest
    t = tree_from_json(obj)
    g = _load_gauge(args, inputs)
    trace = level_trace(t, g)
    csv_text = trace.to_csv()
    if args.csv_out:
        pathlib.Path(args.csv_out).write_text(csv_text)
    _emit("tree-trace", args, inputs, {"depth": t.depth},
          {
              "csv": csv_text,
              "final_running_min": _rat(trace.final_min),
          })


def _cmd_tree_oracle(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.tree, "tree")
    inputs["tree"] = digest
    t = tree_from_json(obj)
    g = _load_gauge(args, inputs)
    value = dp_cover_oracle(t, g, args.min_length)
    result = {"value": _rat(value), "min_length": args.min_length}
    if isinstance(t, SplitSchedule):
        counts = level_counts(t)
        formula = min(g.value(n) * counts[n]
                      for n in range(args.min_length, t.depth + 1))
        result["formula_value"] = _rat(formula)
        result["matches_formula"] = formula == value
    _emit("tree-oracle", args, inputs, {"min_length": args.min_length}, result)


def _cmd_cohen_cover(args) -> None:
    inputs: dict = {}
    g = _load_gauge(args, inputs)
    witness = null_cover_witness(g, args.min_length, args.count)
    cost = cover_cost(witness, g)
    bound = Fraction(1, 1 << args.min_length)
    _emit("cohen-cover", args, inputs,
          {"min_length": args.min_length, "count": args.count},
          {
              "cover": cover_to_json(witness),
              "cost": _rat(cost),
              "bound": _rat(bound),
              "cost_below_bound": cost < bound,
          })


def _cmd_cohen_build(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.catalog, "dense-set catalog")
    inputs["catalog"] = digest
    catalog = catalog_from_json(obj)
    g = _load_gauge(args, inputs, apply_hat=True)
    vdepth = (args.validate_depth if args.validate_depth is not None
              else min(g.horizon, 20))
    validate_catalog(catalog, vdepth, seed=args.seed)
    tree, stages = build_cohen_tree(catalog, g)
    trace = level_trace(tree, g)
    _emit("cohen-build", args, inputs,
          {"hat": bool(args.hat), "validate_depth": vdepth},
          {
              "tree": tree_to_json(tree),
              "stages": stages,
              "height": tree.depth,
              "uniformity": uniformity_check(tree).value,
              "trace_final_min": _rat(trace.final_min),
          },
          seed=args.seed)


def _cmd_mathias_sparsify(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.condition, "condition")
    inputs["condition"] = digest
    c = condition_from_json(obj)
    g = _load_gauge(args, inputs)
    out = sparsify_condition(c, g)
    trace = level_trace(condition_tree(out, out.horizon), g)
    _emit("mathias-sparsify", args, inputs, {},
          {
              "condition": condition_to_json(out),
              "kept": len(out.reservoir),
              "dropped": len(c.reservoir) - len(out.reservoir),
              "trace_final_min": _rat(trace.final_min),
          })


def _cmd_mathias_build(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.catalog, "operator catalog")
    inputs["catalog"] = digest
    ops = operator_catalog_from_json(obj)
    g = _load_gauge(args, inputs)
    tree, stages, s = build_mathias_tree(ops, g, args.depth)
    _emit("mathias-build", args, inputs, {"depth": args.depth},
          {
              "tree": tree_to_json(tree),
              "stages": stages,
              "normalization": _rat(s),
          })


def _cmd_sacks_thin(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.tree, "tree")
    inputs["tree"] = digest
    t = tree_from_json(obj)
    if isinstance(t, SplitSchedule):
        t = schedule_to_explicit(t)
    g = _load_gauge(args, inputs)
    cond = SacksCondition(t, compute_perfect_to_depth(t))
    out = thin_tree(cond, g)
    trace = level_trace(out.tree, g)
    _emit("sacks-thin", args, inputs, {"depth": t.depth},
          {
              "tree": tree_to_json(out.tree),
              "perfect_to_depth": out.perfect_to_depth,
              "triggers": split_triggers(g, t.depth),
              "trace_final_min": _rat(trace.final_min),
          })


def _cmd_sacks_build(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.catalog, "operator catalog")
    inputs["catalog"] = digest
    ops = sacks_catalog_from_json(obj)
    g = _load_gauge(args, inputs)
    tree, stages, s = build_sacks_tree(ops, g, args.depth)
    _emit("sacks-build", args, inputs, {"depth": args.depth},
          {
              "tree": tree_to_json(tree),
              "stages": stages,
              "normalization": _rat(s),
          })


def _cmd_dom_pi(args) -> None:
    gaps = pi_transform(args.bits)
    _emit("dom-pi", args, {}, {"bits": args.bits},
          {"gaps": gaps, "ones": args.bits.count("1")})


def _cmd_dom_check(args) -> None:
    inputs: dict = {}
    left_obj, digest = _load(args.left, "left gap sequence")
    inputs["left"] = digest
    right_obj, digest = _load(args.right, "right gap sequence")
    inputs["right"] = digest
    x = list(gap_function_from_json(left_obj).gaps)
    y = list(gap_function_from_json(right_obj).gaps)
    _emit("dom-check", args, inputs, {},
          {
              "dominates": dominates_seq(x, y),
              "eventual_threshold": eventually_dominates_seq(x, y),
              "overlap": min(len(x), len(y)),
          })


def _cmd_cover_refine(args) -> None:
    inputs: dict = {}
    obj, digest = _load(args.cover, "cover")
    inputs["cover"] = digest
    c = cover_from_json(obj)
    g = _load_gauge(args, inputs)
    delta = _parse_fraction(args.delta, "--delta")
    refined = refine_cover_hat(c, g, delta)
    hat_cost = cover_cost(c, hat_transform(g))
    refined_cost = cover_cost(refined, g)
    bound = hat_cost + delta
    _emit("cover-refine", args, inputs, {"delta": args.delta},
          {
              "cover": cover_to_json(refined),
              "hat_cost_original": _rat(hat_cost),
              "cost_refined": _rat(refined_cost),
              "bound": _rat(bound),
              "bound_holds": refined_cost <= bound,
          })


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugeforcing",
        description="Exact gauge-measure computations on binary trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--out", default=None, help="write the JSON report here "
                       "instead of stdout")
        return p

    p = add("gauge-eval", _cmd_gauge_eval, "tabulate a gauge and its ratio trace")
    p.add_argument("--gauge", required=True)
    p.add_argument("--hat", action="store_true", help="apply the hat transform first")
    p.add_argument("--horizon", type=int, default=None, help="truncate to this horizon")

    p = add("gauge-hat", _cmd_gauge_hat, "hat transform of a gauge")
    p.add_argument("--gauge", required=True)
    p.add_argument("--horizon", type=int, default=None)

    p = add("gauge-dominates", _cmd_gauge_dominates, "pointwise and eventual comparison")
    p.add_argument("--gauge", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--lo", type=int, default=0)
    p.add_argument("--hi", type=int, default=None)

    p = add("gauge-finer", _cmd_gauge_finer, "gauge below the base escaping a catalog")
    p.add_argument("--gauge", required=True)
    p.add_argument("--catalog", required=True, help="JSON list of gauge objects")

    p = add("tree-trace", _cmd_tree_trace, "level trace of a tree under a gauge")
    p.add_argument("--tree", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--csv-out", default=None, help="also write the raw trace CSV here")

    p = add("tree-oracle", _cmd_tree_oracle, "exact minimal cover cost of a tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--min-length", type=int, default=0)
    p.add_argument("--horizon", type=int, default=None)

    p = add("cohen-cover", _cmd_cohen_cover, "cheap dense cover witnessing nullity")
    p.add_argument("--gauge", required=True)
    p.add_argument("--min-length", type=int, default=0)
    p.add_argument("--count", type=int, required=True)

    p = add("cohen-build", _cmd_cohen_build, "staged tree meeting every dense set")
    p.add_argument("--catalog", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--hat", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for catalog sampling")
    p.add_argument("--validate-depth", type=int, default=None)

    p = add("mathias-sparsify", _cmd_mathias_sparsify,
            "thin a reservoir until the gauge looks light")
    p.add_argument("--condition", required=True)
    p.add_argument("--gauge", required=True)

    p = add("mathias-build", _cmd_mathias_build,
            "staged stem-and-reservoir construction")
    p.add_argument("--catalog", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--depth", type=int, required=True)

    p = add("sacks-thin", _cmd_sacks_thin, "leftmost-path thinning of a perfect tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--gauge", required=True)

    p = add("sacks-build", _cmd_sacks_build, "staged perfect-tree construction")
    p.add_argument("--catalog", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--depth", type=int, required=True)

    p = add("dom-pi", _cmd_dom_pi, "zero-run gap sequence of a bit string")
    p.add_argument("--bits", required=True)

    p = add("dom-check", _cmd_dom_check, "compare two gap sequences")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = add("cover-refine", _cmd_cover_refine,
            "deepen a cover to realize the hat transform's cost")
    p.add_argument("--cover", required=True)
    p.add_argument("--gauge", required=True)
    p.add_argument("--delta", required=True, help="slack as a rational, e.g. 1/1024")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.handler(args)
    except GaugeForcingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
