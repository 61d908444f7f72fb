"""Command-line front end: norms, distances, constructions, certificates.

Exit codes: 0 when everything requested verified, 1 when a certificate or
validation fails, 2 for unusable input. Output is JSON (CSV for the
dichotomy profile table) and is byte-identical for identical inputs,
parameters and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional

from . import diametral, reproduce
from .free import FreeElement, Molecule, free_dist, free_norm, molecules_in_slice
from .functions import (
    LipFunction,
    daugavet_recursive_construction,
    delta_hat_family,
    mcshane_extend,
    nearest_point_function,
)
from .metric import (
    FiniteMetricSpace,
    build_annuli_space,
    build_hat_space,
    build_recursion_space,
    load_space,
    validate,
)
from .reports import CertificateReport
from .scalars import format_scalar, rat

PASS, FAIL, ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _space_from_args(args) -> FiniteMetricSpace:
    if getattr(args, "space", None) is None:
        raise CliError("--space is required for this command")
    return FiniteMetricSpace.from_json(_load_json(args.space))


def _function_from_args(args, attr: str = "function") -> LipFunction:
    obj = _load_json(getattr(args, attr))
    if "space" in obj:
        return LipFunction.from_json(obj)
    return LipFunction.from_json(obj, space=_space_from_args(args))


def _element_from_path(path: str, space: FiniteMetricSpace) -> FreeElement:
    return FreeElement.from_json(_load_json(path), space)


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(
        payload, indent=2, sort_keys=True
    )
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _envelope(args, result: dict) -> dict:
    out = {"mode": args.mode, "seed": args.seed, "result": result}
    if args.mode == "float":
        out["tol"] = args.tol
    return out


def _scalar_list(text: str) -> list:
    return [item.strip() for item in text.split(",") if item.strip()]


# ---------------------------------------------------------------------------
# subcommand handlers


def cmd_validate(args) -> int:
    space = FiniteMetricSpace.from_json(_load_json(args.space))
    rep = validate(space)
    _emit(args, _envelope(args, rep.to_json()))
    return PASS if rep.ok else FAIL


def cmd_lipnorm(args) -> int:
    f = _function_from_args(args)
    value = format_scalar(f.norm, args.mode)
    if args.out:
        _emit(args, _envelope(args, {"norm": value}))
    else:
        print(value)
    return PASS


def cmd_freenorm(args) -> int:
    space = _space_from_args(args)
    mu = _element_from_path(args.element, space)
    res = free_norm(mu)
    if args.out:
        _emit(
            args,
            _envelope(
                args,
                {
                    "norm": format_scalar(res.value, args.mode),
                    "witness": [format_scalar(v, args.mode) for v in res.witness.values],
                    "plan": [
                        [space.labels[p], space.labels[q], format_scalar(m, args.mode)]
                        for p, q, m in res.plan.flows
                    ],
                },
            ),
        )
    else:
        print(format_scalar(res.value, args.mode))
    return PASS


def cmd_dist(args) -> int:
    space = _space_from_args(args)
    mu = _element_from_path(args.first, space)
    nu = _element_from_path(args.second, space)
    value = free_dist(mu, nu)
    if args.out:
        _emit(args, _envelope(args, {"dist": format_scalar(value, args.mode)}))
    else:
        print(format_scalar(value, args.mode))
    return PASS


def cmd_extend(args) -> int:
    space = _space_from_args(args)
    values = {
        space.index(lbl): rat(v) for lbl, v in _load_json(args.values).items()
    }
    f = mcshane_extend(
        space,
        values.keys(),
        values,
        rat(args.lip),
        direction=args.direction,
        shift_base=args.shift_base,
    )
    _emit(
        args,
        _envelope(
            args,
            {"values": [format_scalar(v, args.mode) for v in f.values],
             "norm": format_scalar(f.norm, args.mode)},
        ),
    )
    return PASS


def cmd_slice(args) -> int:
    space = _space_from_args(args)
    f = _function_from_args(args)
    mols = molecules_in_slice(space, f, rat(args.alpha))
    _emit(
        args,
        _envelope(
            args,
            {
                "alpha": format_scalar(rat(args.alpha), args.mode),
                "molecules": [
                    {
                        "u": space.labels[m.u],
                        "v": space.labels[m.v],
                        "value": format_scalar(f.molecule_value(m.u, m.v), args.mode),
                    }
                    for m in mols
                ],
            },
        ),
    )
    return PASS


def cmd_construct(args) -> int:
    if args.construction == "daugavet":
        rs = build_recursion_space(args.stages)
        f, log = daugavet_recursive_construction(rs.space, rs.pairs, rs.annuli)
        result = {
            "space": rs.space.to_json(),
            "function": [format_scalar(v, args.mode) for v in f.values],
            "stages": [
                {
                    "stage": rec.stage,
                    "lip_constant": format_scalar(rec.lip_constant, args.mode),
                    "molecule_value": format_scalar(rec.molecule_value, args.mode),
                    "ok": rec.ok,
                }
                for rec in log
            ],
        }
    elif args.construction == "delta-hat":
        hs = build_hat_space(args.pairs, args.scale)
        fam = delta_hat_family(hs.space, hs.pairs, hs.scale, hs.tolerance)
        result = {
            "space": hs.space.to_json(),
            "f": [format_scalar(v, args.mode) for v in fam.f.values],
            "g": {
                str(i): [format_scalar(v, args.mode) for v in g.values]
                for i, g in sorted(fam.g.items())
            },
        }
    else:  # nearest
        space = _space_from_args(args)
        sites = [space.index(lbl) for lbl in _scalar_list(args.sites)]
        f = nearest_point_function(space, sites)
        result = {
            "function": [format_scalar(v, args.mode) for v in f.values],
            "norm": format_scalar(f.norm, args.mode),
        }
    _emit(args, _envelope(args, result))
    return PASS


def cmd_certify(args) -> int:
    name = args.certificate
    if name == "example1":
        report = reproduce.verify_example1(
            N=args.N if args.N is not None else 24,
            n=args.n if args.n is not None else 3,
            samples=args.samples if args.samples is not None else 50,
            seed=args.seed,
        )
    elif name == "example2":
        report = reproduce.verify_example2(
            N=args.N if args.N is not None else 7,
            n=args.n if args.n is not None else 6,
            alpha=_scalar_list(args.alpha),
            eps=_scalar_list(args.eps),
            samples=args.samples if args.samples is not None else 20,
            seed=args.seed,
        )
    elif name == "delta-exist":
        report = reproduce.verify_delta_existence(
            k=args.pairs if args.pairs is not None else 16
        )
    elif name == "daug-rec":
        report = reproduce.verify_daugavet_recursion(
            stages=args.stages,
            samples=args.samples if args.samples is not None else 5,
            seed=args.seed,
        )
    elif name == "two-anchor":
        report = reproduce.verify_two_anchor_daugavet(
            N=args.N if args.N is not None else 8,
            delta_grid=_scalar_list(args.deltas),
        )
    else:  # annuli
        asp = build_annuli_space(args.pairs if args.pairs is not None else 3, args.eps)
        report = diametral.verify_separated_annuli(
            asp.space,
            asp.pairs,
            asp.annuli,
            list(asp.eps),
            samples=args.samples if args.samples is not None else 50,
            seed=args.seed,
        )
    _emit(args, _envelope(args, report.to_json(args.mode)))
    if report.overall:
        return PASS
    first = report.failing()[0]
    print(f"certificate failed: {first.description}", file=sys.stderr)
    return FAIL


def cmd_scan_dichotomy(args) -> int:
    space = _space_from_args(args)
    f = _function_from_args(args)
    report = reproduce.scan_theorem4_condition6(
        space, f, _scalar_list(args.eps_grid), args.radius
    )
    if args.format == "json":
        _emit(args, _envelope(args, report.to_json(args.mode)))
        return PASS
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "eps",
            "molecules",
            "min_pair_distance",
            "max_support_radius",
            "small_pair_witness",
            "escaping_witness",
        ]
    )
    for check, e in zip(report.checks, report.parameters["eps_grid"]):
        v = check.values
        writer.writerow(
            [
                format_scalar(e, args.mode),
                v["molecules"],
                "" if v["min_pair_distance"] is None else format_scalar(v["min_pair_distance"], args.mode),
                "" if v["max_support_radius"] is None else format_scalar(v["max_support_radius"], args.mode),
                int(v["small_pair_witness"]),
                int(v["escaping_witness"]),
            ]
        )
    _emit(args, buf.getvalue())
    return PASS


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--tol", default="1e-9", help="tolerance recorded in float mode")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="write output to this path")

    parser = argparse.ArgumentParser(
        prog="lipfree",
        description="Exact free-space norms, Lipschitz constructions and certificates "
        "on finite metric spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check the metric axioms")
    p.add_argument("space")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("lipnorm", parents=[common], help="Lipschitz norm of a function")
    p.add_argument("function")
    p.add_argument("--space")
    p.set_defaults(func=cmd_lipnorm)

    p = sub.add_parser("freenorm", parents=[common], help="free-space norm of an element")
    p.add_argument("element")
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_freenorm)

    p = sub.add_parser("dist", parents=[common], help="free-space distance of two elements")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--space", required=True)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("extend", parents=[common], help="McShane-Whitney extension")
    p.add_argument("--space", required=True)
    p.add_argument("--values", required=True, help="JSON file: label -> value")
    p.add_argument("--lip", default="1")
    p.add_argument("--direction", choices=("lower", "upper"), default="lower")
    p.add_argument("--shift-base", action="store_true")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("slice", parents=[common], help="molecules inside a slice")
    p.add_argument("--space", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--alpha", required=True)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("construct", parents=[common], help="run a named construction")
    p.add_argument("construction", choices=("daugavet", "delta-hat", "nearest"))
    p.add_argument("--stages", type=int, default=10)
    p.add_argument("--pairs", type=int, default=16)
    p.add_argument("--scale", default="2")
    p.add_argument("--space")
    p.add_argument("--sites", default="", help="comma-separated labels, base first")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", parents=[common], help="run a certificate verifier")
    p.add_argument(
        "certificate",
        choices=("example1", "example2", "delta-exist", "daug-rec", "two-anchor", "annuli"),
    )
    p.add_argument("--N", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--alpha", default="1/2")
    p.add_argument("--eps", default="1/5")
    p.add_argument("--pairs", type=int, default=None)
    p.add_argument("--stages", type=int, default=10)
    p.add_argument("--deltas", default="1/2,1/4,1/8")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser(
        "scan-dichotomy", parents=[common], help="slice-profile table per eps"
    )
    p.add_argument("--space", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--eps-grid", default="1/2,1/4,1/8")
    p.add_argument("--radius", default="1")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_scan_dichotomy)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
