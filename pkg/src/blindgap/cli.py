"""Command-line front end.

Subcommands:

- ``constants``  -- solve and print the fixed-point constants.
- ``repro``      -- run a named reproduction experiment; exits 1 on any
  failed check.
- ``gen``        -- emit a generated instance (and its stress orders) as
  JSON.
- ``eval``       -- evaluate a policy on an instance for one or more
  arrival orders; rows as CSV or JSON.
- ``gap``        -- min over orders of policy value / order-aware optimum.

Identical arguments (including seeds) produce byte-identical output.
Exit codes: 0 success, 1 failed check, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import adversary, repro
from .constants import constants_report
from .core import ArrivalOrder, BlindGapError, Instance
from .evaluation import DEFAULT_CAP, evaluate, gap
from .optimal import (
    opt_order_aware_maxexp,
    opt_order_aware_maxprob,
)
from .policies import (
    MAX_EXP,
    MAX_PROB,
    Policy,
    policy_from_descriptor,
)

CSV_COLUMNS = (
    "instance",
    "order",
    "policy",
    "objective",
    "method",
    "value",
    "ci",
    "samples",
    "seed",
)

_POLICY_KINDS = (
    "gap_optimal",
    "prophet_half",
    "one_over_e",
    "greedy_positive",
    "opt_order_aware",
)


class UsageError(Exception):
    pass


def _json_dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _load_instance(path: str) -> Instance:
    try:
        with open(path) as fh:
            doc = json.load(fh)
        return Instance.from_json(doc)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read instance {path!r}: {exc}") from exc


def _parse_orders(args, instance: Instance) -> list[ArrivalOrder]:
    orders: list[ArrivalOrder] = []
    for spec in args.order or ():
        try:
            perm = tuple(int(x) for x in spec.split(","))
            orders.append(ArrivalOrder(perm))
        except (ValueError, BlindGapError) as exc:
            raise UsageError(f"bad order {spec!r}: {exc}") from exc
    if getattr(args, "orders_file", None):
        try:
            with open(args.orders_file) as fh:
                doc = json.load(fh)
            orders.extend(ArrivalOrder(tuple(perm)) for perm in doc)
        except (OSError, ValueError, TypeError, BlindGapError) as exc:
            raise UsageError(
                f"cannot read orders {args.orders_file!r}: {exc}"
            ) from exc
    if not orders:
        orders.append(ArrivalOrder.identity(instance.n))
    for order in orders:
        if len(order.perm) != instance.n:
            raise UsageError(
                f"order of length {len(order.perm)} does not match "
                f"instance with {instance.n} boxes"
            )
    return orders


def _resolve_policy(
    spec: str,
    instance: Instance,
    order: ArrivalOrder,
    objective: str,
) -> tuple[Policy, str]:
    """Returns (policy, label). `spec` is a kind name, an inline JSON
    object, or @file with a JSON descriptor."""
    if spec == "opt_order_aware":
        if objective == MAX_EXP:
            pol, _ = opt_order_aware_maxexp(instance, order)
        else:
            pol, _ = opt_order_aware_maxprob(instance, order)
        return pol, spec
    try:
        if spec.startswith("@"):
            with open(spec[1:]) as fh:
                doc = json.load(fh)
        elif spec.lstrip().startswith("{"):
            doc = json.loads(spec)
        elif spec in _POLICY_KINDS:
            doc = {"kind": spec}
        else:
            try:
                doc = {"kind": "threshold", "tau": float(spec)}
            except ValueError:
                raise UsageError(
                    f"unknown policy {spec!r}; expected one of "
                    f"{_POLICY_KINDS}, a threshold value, inline JSON, "
                    f"or @file"
                ) from None
        return policy_from_descriptor(doc, instance), spec
    except UsageError:
        raise
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad policy {spec!r}: {exc}") from exc


def _dump_policy(policy: Policy) -> dict:
    from .optimal import OrderAwareMaxExpPolicy, OrderAwareMaxProbPolicy
    from .policies import SkipThenGreedyPolicy, ThresholdPolicy

    if isinstance(policy, ThresholdPolicy):
        return {
            "kind": "threshold",
            "tau": policy.tau,
            "xi": policy.xi,
            "objective": policy.objective,
        }
    if isinstance(policy, SkipThenGreedyPolicy):
        return {
            "kind": "skip_then_greedy",
            "skip": policy.skip,
            "horizon": policy.horizon,
            "accept_last": policy.accept_last,
        }
    if isinstance(policy, OrderAwareMaxExpPolicy):
        return {
            "kind": "order_aware_maxexp",
            "starts": list(policy.starts),
            "continuations": list(policy.continuations),
        }
    if isinstance(policy, OrderAwareMaxProbPolicy):
        return {
            "kind": "order_aware_maxprob",
            "starts": list(policy.starts),
            "grid": list(policy.grid),
            "survive": [list(row) for row in policy.survive],
            "continue_win": [list(row) for row in policy.continue_win],
        }
    return {"kind": type(policy).__name__}


def _emit_rows(rows: list[dict], fmt: str, out) -> None:
    if fmt == "json":
        out.write(_json_dumps(rows) + "\n")
        return
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    out.write(buf.getvalue())


def _order_label(order: ArrivalOrder) -> str:
    return ",".join(str(p) for p in order.perm)


def cmd_constants(args) -> int:
    report = constants_report()
    if args.format == "json":
        print(_json_dumps(report))
    else:
        for key in sorted(report):
            print(f"{key},{report[key]!r}")
    return 0


def cmd_repro(args) -> int:
    if args.target == "all":
        targets = list(repro.REPRO_TARGETS)
    else:
        targets = [args.target]
    failed = False
    for name in targets:
        rows = repro.REPRO_TARGETS[name]()
        for row in rows:
            print(row.line())
            failed = failed or not row.passed
    return 1 if failed else 0


def cmd_gen(args) -> int:
    doc: dict
    if args.generator == "ladder":
        inst = adversary.bernoulli_ladder(args.n, args.eps)
        doc = {"instance": inst.to_json()}
        if args.threshold is not None:
            orders = adversary.ladder_orders(args.n, args.eps, args.threshold)
            doc["orders"] = {
                "descending": orders.descending.to_json(),
                "up_then_down": orders.up_then_down.to_json(),
            }
            if orders.mid_then_down is not None:
                doc["orders"]["mid_then_down"] = orders.mid_then_down.to_json()
    elif args.generator == "three-box":
        inst, orders = adversary.three_box_example(args.mid, args.eps)
        doc = {
            "instance": inst.to_json(),
            "orders": [o.to_json() for o in orders],
        }
    elif args.generator == "maxexp-hardness":
        inst, prior = adversary.maxexp_hardness(args.n, args.eps)
        doc = {
            "instance": inst.to_json(),
            "prior": prior.to_json(),
        }
    elif args.generator == "point-mass":
        table = adversary.point_mass_instances(args.n, args.eps)
        inst, orders = table[args.claim]
        doc = {
            "instance": inst.to_json(),
            "orders": [o.to_json() for o in orders],
        }
    elif args.generator == "random":
        inst = adversary.random_instance(
            args.n,
            seed=args.seed,
            max_atoms=args.max_atoms,
            max_point_mass=args.max_point_mass,
        )
        doc = {"instance": inst.to_json()}
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown generator {args.generator!r}")
    text = _json_dumps(doc)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def _eval_rows(args) -> list[dict]:
    instance = _load_instance(args.instance)
    orders = _parse_orders(args, instance)
    rows = []
    dumps = []
    for order in orders:
        policy, label = _resolve_policy(
            args.policy, instance, order, args.objective
        )
        result = evaluate(
            instance,
            order,
            policy,
            args.objective,
            cap=args.cap,
            samples=args.samples,
            seed=args.seed,
        )
        row = {"instance": instance.name or args.instance,
               "order": _order_label(order),
               "policy": label,
               "objective": args.objective}
        row.update(result.to_row())
        rows.append(row)
        if args.dump_policy:
            dumps.append(
                {"order": _order_label(order), "policy": _dump_policy(policy)}
            )
    if args.dump_policy:
        with open(args.dump_policy, "w") as fh:
            fh.write(_json_dumps(dumps) + "\n")
    return rows


def cmd_eval(args) -> int:
    _emit_rows(_eval_rows(args), args.format, sys.stdout)
    return 0


def cmd_gap(args) -> int:
    instance = _load_instance(args.instance)
    orders = _parse_orders(args, instance)
    policy, label = _resolve_policy(
        args.policy, instance, orders[0], args.objective
    )
    report = gap(
        instance,
        orders,
        policy,
        args.objective,
        cap=args.cap,
        samples=args.samples,
        seed=args.seed,
    )
    doc = {
        "instance": instance.name or args.instance,
        "policy": label,
        "objective": args.objective,
        "ratio": report.ratio,
        "argmin_order": _order_label(orders[report.argmin_index]),
        "per_order": list(report.per_order),
    }
    if args.format == "json":
        print(_json_dumps(doc))
    else:
        rows = []
        for i, entry in enumerate(report.per_order):
            rows.append({
                "instance": doc["instance"],
                "order": _order_label(orders[i]),
                "policy": label,
                "objective": args.objective,
                "method": entry["method"],
                "value": entry["ratio"],
                "ci": entry.get("ci", 0.0),
                "samples": args.samples if entry["method"] == "mc" else 0,
                "seed": args.seed,
            })
        _emit_rows(rows, "csv", sys.stdout)
        print(f"# gap,{report.ratio!r},argmin,{doc['argmin_order']}")
    return 0


def _add_common_eval_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument(
        "--order",
        action="append",
        help="comma-separated arrival order, repeatable (default: identity)",
    )
    p.add_argument("--orders-file", help="JSON file with a list of orders")
    p.add_argument(
        "--policy",
        default="gap_optimal",
        help="policy kind, bare threshold value, inline JSON, or @file",
    )
    p.add_argument(
        "--objective", choices=(MAX_EXP, MAX_PROB), default=MAX_PROB
    )
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--cap",
        type=int,
        default=DEFAULT_CAP,
        help="product-support size limit for exact enumeration",
    )
    p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blindgap",
        description="identity-blind online selection toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_const = sub.add_parser("constants", help="solve the gap constants")
    p_const.add_argument("--format", choices=("csv", "json"), default="csv")
    p_const.set_defaults(func=cmd_constants)

    p_repro = sub.add_parser("repro", help="run a reproduction experiment")
    p_repro.add_argument(
        "target", choices=sorted(repro.REPRO_TARGETS) + ["all"]
    )
    p_repro.set_defaults(func=cmd_repro)

    p_gen = sub.add_parser("gen", help="generate an instance as JSON")
    p_gen.add_argument(
        "generator",
        choices=(
            "ladder",
            "three-box",
            "maxexp-hardness",
            "point-mass",
            "random",
        ),
    )
    p_gen.add_argument("--n", type=int, default=3)
    p_gen.add_argument("--eps", type=float, default=0.1)
    p_gen.add_argument("--mid", type=float, default=0.5)
    p_gen.add_argument(
        "--threshold", type=int, help="ladder: also emit orders for this T"
    )
    p_gen.add_argument(
        "--claim",
        choices=("det_claim", "threshold_claim"),
        default="det_claim",
    )
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--max-atoms", type=int, default=3)
    p_gen.add_argument("--max-point-mass", type=float, default=None)
    p_gen.add_argument("-o", "--output", help="write JSON here")
    p_gen.set_defaults(func=cmd_gen)

    p_eval = sub.add_parser("eval", help="evaluate a policy on an instance")
    _add_common_eval_args(p_eval)
    p_eval.add_argument(
        "--dump-policy", help="write resolved policy descriptors here"
    )
    p_eval.set_defaults(func=cmd_eval)

    p_gap = sub.add_parser(
        "gap", help="min over orders of policy value / order-aware optimum"
    )
    _add_common_eval_args(p_gap)
    p_gap.set_defaults(func=cmd_gap)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BlindGapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
