"""Batch command-line surface: every verifier and calculator, one report per run.

Exit codes are a stable contract: 0 all requested checks pass, 1 a check
ran and came out false, 2 bad usage or a refused (capped) request.  JSON
and text outputs carry the same fields; exact-backend reports are
byte-identical across runs.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from math import isinf

from . import dicke, permanent, rank, slocc, states

ENV_ENTRY_CAP = "GHZW_ENTRY_CAP"
ENV_PHASE_CAP = "GHZW_PHASE_CAP"

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


# -- small parsers -----------------------------------------------------------

def parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValueError(f"expected comma-separated integers, got {text!r}")


def parse_state(text: str, entry_cap: int) -> tuple[states.PureState, str]:
    """Builtin state names (w3, ghz:4,2, dicke:2,1, perm:4) or file:PATH."""
    name = text.strip()
    if name.startswith("file:"):
        path = name[len("file:"):]
        with open(path, "r", encoding="utf-8") as fh:
            return states.PureState.loads(fh.read()), name
    if name.startswith("w:") or (name.startswith("w") and name[1:].isdigit()):
        parties = int(name.split(":")[1]) if ":" in name else int(name[1:])
        return states.build_w(parties), name
    if name.startswith("ghz"):
        rest = name.split(":", 1)[1] if ":" in name else name[3:]
        parts = parse_ints(rest) if rest else ()
        if not parts:
            raise ValueError(f"bad state spec {text!r}")
        parties = parts[0]
        levels = parts[1] if len(parts) > 1 else 2
        return states.build_ghz(parties, levels, entry_cap=entry_cap), name
    if name.startswith("dicke:"):
        spec = states.DickeSpec(parse_ints(name[len("dicke:"):]))
        return states.build_dicke(spec, entry_cap=entry_cap), name
    if name.startswith("perm:"):
        return permanent.permanent_tensor(int(name[len("perm:"):]), entry_cap=entry_cap), name
    raise ValueError(f"unknown state spec {text!r}")


def parse_dicke_label(text: str) -> tuple[tuple[int, ...], ...]:
    """Per-party characteristic vectors: semicolons between parties."""
    return tuple(parse_ints(part) for part in text.split(";"))


def parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def parse_cuts(text: str, num_parties: int) -> list[rank.Bipartition]:
    if text == "half":
        return [rank.Bipartition.half(num_parties)]
    if text == "all":
        return rank.all_bipartitions(num_parties)
    return [rank.Bipartition.of(parse_ints(text), num_parties)]


# -- output ------------------------------------------------------------------

def _plain(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and isinf(value):
        return "inf"
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, list):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def render_text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            value = obj[key]
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.extend(render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {value}")
    elif isinstance(obj, list):
        for value in obj:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(render_text(value, indent + 1))
            else:
                lines.append(f"{pad}- {value}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def emit(report: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    payload = _plain(report)
    if fmt == "json":
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(render_text(payload)) + "\n")


# -- command handlers ----------------------------------------------------------

def cmd_verify_w_decomp(args, caps) -> tuple[dict, bool]:
    from math import comb

    parties = args.parties
    components = slocc.decompose_w_power(args.n, parties, entry_cap=caps["entry"])
    power = states.build_w(parties).tensor_power(args.n, entry_cap=caps["entry"])
    total = states.PureState(power.local_dims, {})
    terms = 0
    for comp in components.values():
        total = total + comp
        terms += comp.num_entries()
    expected = comb(args.n + parties - 1, parties - 1)
    disjoint = terms == total.num_entries()
    passed = disjoint and total == power and len(components) == expected
    report = {
        "command": "verify w-decomp",
        "n": args.n,
        "parties": parties,
        "components": len(components),
        "expected_components": expected,
        "terms": terms,
        "disjoint": disjoint,
        "pass": passed,
    }
    return report, passed


def cmd_verify_lemma1(args, caps) -> tuple[dict, bool]:
    if args.label:
        labels = [parse_ints(args.label)]
    else:
        labels = slocc.component_labels(args.n, args.parties)
    reports = [slocc.verify_lemma1(args.n, label).to_dict() for label in labels]
    passed = all(r["pass"] for r in reports)
    report = {
        "command": "verify lemma1",
        "n": args.n,
        "parties": args.parties,
        "labels_checked": len(reports),
        "results": reports,
        "pass": passed,
    }
    return report, passed


def cmd_verify_dicke(args, caps) -> tuple[dict, bool]:
    spec = states.DickeSpec(parse_ints(args.j))
    decomp = dicke.verify_dicke_decomposition(args.n, spec, entry_cap=caps["entry"]).to_dict()
    passed = decomp["pass"]
    report = {
        "command": "verify dicke",
        "spec": list(spec.multiplicities),
        "n": args.n,
        "decomposition": decomp,
    }
    if args.phase:
        if args.label:
            labels = [dicke.check_dicke_label(args.n, spec, parse_dicke_label(args.label))]
        else:
            labels = dicke.partition_set(args.n, spec, entry_cap=caps["entry"])
        phase_reports = [
            dicke.verify_phase_identity(
                args.n, spec, label,
                phase_cap=caps["phase"], tol=caps["tol"], entry_cap=caps["entry"],
            ).to_dict()
            for label in labels
        ]
        report["phase_identities"] = phase_reports
        passed = passed and all(r["pass"] for r in phase_reports)
    report["pass"] = passed
    return report, passed


def cmd_rank_flatten(args, caps) -> tuple[dict, bool]:
    state, name = parse_state(args.state, caps["entry"])
    cuts = parse_cuts(args.cut, state.num_parties)
    result = rank.rank_report(state, cuts, cell_cap=caps["entry"]).to_dict()
    report = {
        "command": "rank flatten",
        "state": name,
        "flattening_ranks": result["flattening_ranks"],
        "max_flattening": result["max_flattening"],
    }
    return report, True


def cmd_rank_classify(args, caps) -> tuple[dict, bool]:
    state, name = parse_state(args.state, caps["entry"])
    verdict = rank.classify_222(state)
    det = rank.hyperdeterminant_222(state)
    ranks = {
        rank.Bipartition.of([p], 3).key(): rank.flattening_rank(state, rank.Bipartition.of([p], 3))
        for p in range(3)
    }
    report = {
        "command": "rank classify",
        "state": name,
        "tensor_rank": verdict,
        "hyperdeterminant": str(Fraction(det)) if not isinstance(det, complex) else repr(det),
        "flattening_ranks": ranks,
    }
    return report, True


def cmd_rank_bounds(args, caps) -> tuple[dict, bool]:
    report = {"command": "rank bounds"}
    passed = True
    if args.w:
        value = rank.w_power_rank_lower(args.parties, args.n)
        report.update({
            "target": f"w{args.parties}^{args.n}",
            "bounds": [
                {
                    "name": "w_power_rank_lower",
                    "value": value,
                    "formula": "(N-1)*2^n - N + 2",
                }
            ],
        })
    elif args.j:
        spec = states.DickeSpec(parse_ints(args.j))
        r = spec.num_parties // 2
        entries = [
            {
                "name": "dicke_split_count",
                "value": rank.dicke_split_count(spec, r),
                "formula": "|{beta : 0 <= beta_i <= j_i, sum beta = floor(N/2)}|",
            },
            {
                "name": "rate_lower_bound",
                "value": _plain(rank.rate_lower_bound(spec)),
                "formula": "1 / sum_{i>=2} log2(j_i + 1)",
            },
        ]
        report.update({"target": f"dicke:{args.j}", "bounds": entries})
        if args.tight:
            tight = rank.verify_tight_bound(spec, entry_cap=caps["entry"]).to_dict()
            report["tight_bound"] = tight
            passed = tight["pass"]
    else:
        raise ValueError("rank bounds needs --w or --j")
    report["pass"] = passed
    return report, passed


def cmd_rate_copies(args, caps) -> tuple[dict, bool]:
    target_text = args.target
    if target_text.startswith("dicke:"):
        target = states.DickeSpec(parse_ints(target_text[len("dicke:"):]))
    elif target_text.startswith("w:") or (target_text.startswith("w") and target_text[1:].isdigit()):
        target = int(target_text.split(":")[1]) if ":" in target_text else int(target_text[1:])
    else:
        raise ValueError(f"unknown rate target {target_text!r}")
    rows = []
    for n in parse_range(args.n):
        m = rank.copies_needed(n, target)
        rows.append({"n": n, "m": m, "ratio": m / n})
    report = {"command": "rate copies", "target": target_text, "rows": rows}
    return report, True


def cmd_rate_bound(args, caps) -> tuple[dict, bool]:
    spec = states.DickeSpec(parse_ints(args.j))
    value = rank.rate_lower_bound(spec)
    report = {
        "command": "rate bound",
        "spec": list(spec.multiplicities),
        "rate_lower_bound": "inf" if isinstance(value, float) and isinf(value) else float(value),
        "exact": str(value) if isinstance(value, Fraction) else None,
    }
    return report, True


def cmd_perm_check(args, caps) -> tuple[dict, bool]:
    if args.family == "glynn":
        if args.parties is None:
            raise ValueError("--family glynn needs --N")
        family = permanent.glynn_family(args.parties)
    else:
        with open(args.family, "r", encoding="utf-8") as fh:
            family = permanent.CoeffFamily.loads(fh.read())
    result = permanent.family_report(family, entry_cap=caps["entry"])
    result["command"] = "perm check"
    passed = result["reconstructs_permanent"] and result["satisfied"]
    result["pass"] = passed
    return result, passed


def cmd_perm_oracle(args, caps) -> tuple[dict, bool]:
    if args.matrix:
        with open(args.matrix, "r", encoding="utf-8") as fh:
            rows = json.loads(fh.read())
        matrix = [[Fraction(str(v)) for v in row] for row in rows]
        values = {
            "ryser": permanent.perm_ryser(matrix),
            "glynn": permanent.perm_glynn(matrix),
        }
        if len(matrix) <= permanent.BRUTE_LIMIT:
            values["brute"] = permanent.perm_brute(matrix)
        agree = len({Fraction(v) for v in values.values()}) == 1
        report = {
            "command": "perm oracle",
            "N": len(matrix),
            "values": {k: str(Fraction(v)) for k, v in sorted(values.items())},
            "agree": agree,
        }
        return report, agree
    rng = random.Random(args.seed)
    disagreements = 0
    for _ in range(args.trials):
        matrix = [
            [rng.randint(-3, 3) for _ in range(args.parties)]
            for _ in range(args.parties)
        ]
        brute = permanent.perm_brute(matrix)
        if not permanent.perm_ryser(matrix) == permanent.perm_glynn(matrix) == brute:
            disagreements += 1
    report = {
        "command": "perm oracle",
        "N": args.parties,
        "trials": args.trials,
        "seed": args.seed,
        "disagreements": disagreements,
        "agree": disagreements == 0,
    }
    return report, disagreements == 0


def cmd_state_dump(args, caps) -> tuple[dict, bool]:
    state, _ = parse_state(args.state, caps["entry"])
    text = state.dumps()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return {}, True


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzw",
        description="Exact verifiers and calculators for multiparty state decompositions and tensor-rank bounds.",
    )
    parser.add_argument("--format", choices=("json", "text"), default="json")
    parser.add_argument("--entry-cap", type=int, default=None, help="sparse entry cap (env GHZW_ENTRY_CAP)")
    parser.add_argument("--phase-cap", type=int, default=None, help="phase-index cap (env GHZW_PHASE_CAP)")
    parser.add_argument("--tol", type=float, default=dicke.DEFAULT_PHASE_TOL, help="float-path residual tolerance")
    top = parser.add_subparsers(dest="group", required=True)

    verify = top.add_parser("verify", help="exact decomposition and identity checks").add_subparsers(
        dest="command", required=True
    )
    wd = verify.add_parser("w-decomp", help="weight components sum to the W power")
    wd.add_argument("--n", type=int, required=True)
    wd.add_argument("--parties", type=int, default=3)
    wd.set_defaults(handler=cmd_verify_w_decomp)
    lm = verify.add_parser("lemma1", help="sign matrices map the diagonal state onto each component")
    lm.add_argument("--n", type=int, required=True)
    lm.add_argument("--parties", type=int, default=3)
    group = lm.add_mutually_exclusive_group(required=True)
    group.add_argument("--label", help="one weight profile, e.g. 1,1,1")
    group.add_argument("--all-labels", action="store_true")
    lm.set_defaults(handler=cmd_verify_lemma1)
    dk = verify.add_parser("dicke", help="characteristic-vector components and phase identities")
    dk.add_argument("--j", required=True, help="multiplicities, e.g. 2,1")
    dk.add_argument("--n", type=int, required=True)
    dk.add_argument("--phase", action="store_true", help="also verify the phase-averaged expansion")
    dk.add_argument("--label", help="per-party characteristic vectors, e.g. 1;0;0")
    dk.set_defaults(handler=cmd_verify_dicke)

    rank_group = top.add_parser("rank", help="flattening ranks, 2x2x2 class, bounds").add_subparsers(
        dest="command", required=True
    )
    fl = rank_group.add_parser("flatten")
    fl.add_argument("--state", required=True)
    fl.add_argument("--cut", default="half", help="half | all | left party indices, e.g. 0,2")
    fl.set_defaults(handler=cmd_rank_flatten)
    cl = rank_group.add_parser("classify")
    cl.add_argument("--state", required=True)
    cl.set_defaults(handler=cmd_rank_classify)
    bd = rank_group.add_parser("bounds")
    bd.add_argument("--w", action="store_true", help="weight-1 target family")
    bd.add_argument("--N", dest="parties", type=int, default=3)
    bd.add_argument("--n", type=int, default=1)
    bd.add_argument("--j", help="multiplicities for a symmetrized-word target")
    bd.add_argument("--tight", action="store_true", help="verify the middle-cut rank matches the product bound")
    bd.set_defaults(handler=cmd_rank_bounds)

    rate = top.add_parser("rate", help="copy counts and rate bounds").add_subparsers(
        dest="command", required=True
    )
    cp = rate.add_parser("copies")
    cp.add_argument("--target", required=True, help="w3, w:N or dicke:j1,j2,...")
    cp.add_argument("--n", required=True, help="single value or range, e.g. 1..10")
    cp.set_defaults(handler=cmd_rate_copies)
    rb = rate.add_parser("bound")
    rb.add_argument("--j", required=True)
    rb.set_defaults(handler=cmd_rate_bound)

    perm = top.add_parser("perm", help="permanent oracles and family certificates").add_subparsers(
        dest="command", required=True
    )
    pc = perm.add_parser("check")
    pc.add_argument("--family", required=True, help="glynn or a JSON family file")
    pc.add_argument("--N", dest="parties", type=int)
    pc.set_defaults(handler=cmd_perm_check)
    po = perm.add_parser("oracle")
    po.add_argument("--N", dest="parties", type=int, default=5)
    po.add_argument("--trials", type=int, default=50)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--matrix", help="JSON file with matrix rows")
    po.set_defaults(handler=cmd_perm_oracle)

    state = top.add_parser("state", help="state construction and serialization").add_subparsers(
        dest="command", required=True
    )
    sd = state.add_parser("dump")
    sd.add_argument("--state", required=True)
    sd.add_argument("--out")
    sd.set_defaults(handler=cmd_state_dump)

    return parser


def _caps_from(args) -> dict:
    entry = args.entry_cap
    if entry is None:
        entry = int(os.environ.get(ENV_ENTRY_CAP, states.DEFAULT_ENTRY_CAP))
    phase = args.phase_cap
    if phase is None:
        phase = int(os.environ.get(ENV_PHASE_CAP, dicke.DEFAULT_PHASE_CAP))
    if entry <= 0 or phase <= 0:
        raise ValueError("caps must be positive")
    if not 0 < args.tol < 1:
        raise ValueError("tolerance must lie in (0, 1)")
    return {"entry": entry, "phase": phase, "tol": args.tol}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        caps = _caps_from(args)
        report, passed = args.handler(args, caps)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if report:
        emit(report, args.format)
    return EXIT_PASS if passed else EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
