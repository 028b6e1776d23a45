"""Command-line front end.

Exit status: 0 on success, 1 when a verification fails (nonzero residue or
duality violation), 2 on input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from importlib import resources

from . import coordforms, detsys, jetalg, render, structure
from .kernel import McforgeError


def _color_enabled() -> bool:
    return os.environ.get("MCFORGE_COLOR", "0") == "1"


def _diag(message: str) -> str:
    if _color_enabled():
        return f"\x1b[31m{message}\x1b[0m"
    return message


def _read_input(path: str) -> str:
    if path.startswith("@"):
        # bundled example inputs, e.g. @cartan_essential.dsys
        ref = resources.files("mcforge").joinpath("data", path[1:])
        if not ref.is_file():
            raise McforgeError(f"no bundled input named {path[1:]!r}")
        return ref.read_text()
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise McforgeError(f"cannot read {path!r}: {exc}") from exc


def _parse_point(text: str | None, coords: list[str]) -> dict:
    point = {c: Fraction(1) for c in coords}
    if not text:
        return point
    for item in text.split(","):
        if "=" not in item:
            raise McforgeError(f"bad --point entry {item!r} (expected name=value)")
        name, value = (part.strip() for part in item.split("=", 1))
        if name not in coords:
            raise McforgeError(f"unknown coordinate {name!r} in --point")
        try:
            point[name] = Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise McforgeError(f"bad rational value {value!r} in --point") from exc
    return point


def _diffeo_system(dim: int) -> detsys.DeterminingSystem:
    if dim < 1:
        raise McforgeError("--dim must be >= 1")
    coords = ["x", "y", "z"][:dim] if dim <= 3 else [f"z{i+1}" for i in range(dim)]
    return detsys.DeterminingSystem.empty(coords)


def _emit(args, text_fn, latex_fn, json_obj_fn) -> None:
    if args.format == "text":
        sys.stdout.write(text_fn())
    elif args.format == "latex":
        sys.stdout.write(latex_fn())
    else:
        sys.stdout.write(render.render_json(json_obj_fn()))


def cmd_structure(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    eqs = structure.pseudo_group_structure(system, args.order, cap=args.cap)
    _emit(args,
          lambda: render.render_structure_text(eqs),
          lambda: render.render_structure_latex(eqs),
          lambda: render.structure_json_obj(eqs))
    return 0


def cmd_diffeo(args) -> int:
    system = _diffeo_system(args.dim)
    eqs = structure.pseudo_group_structure(system, args.order, cap=args.cap)
    _emit(args,
          lambda: render.render_structure_text(eqs),
          lambda: render.render_structure_latex(eqs),
          lambda: render.structure_json_obj(eqs))
    return 0


def cmd_lift(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    solved = detsys.solve_to_order(system, args.order, cap=args.cap)
    relations = detsys.lift(solved)
    _emit(args,
          lambda: render.render_lift_text(relations),
          lambda: render.render_lift_latex(relations),
          lambda: render.lift_json_obj(relations))
    return 0


def cmd_prolong(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    prolonged = detsys.prolong(system, args.order)
    _emit(args,
          lambda: render.render_prolong_text(prolonged),
          lambda: render.render_prolong_text(prolonged),
          lambda: render.prolong_json_obj(prolonged))
    return 0


def cmd_check_d2(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    eqs = structure.pseudo_group_structure(system, args.order, cap=args.cap)
    report = structure.check_d_squared(eqs, cap=args.cap)
    if args.format == "json":
        obj = {"order": args.order, "ok": report.ok,
               "failures": [render.gen_text(g, system.coords, system.targets)
                            for g in report.failures()]}
        sys.stdout.write(render.render_json(obj))
    else:
        if report.ok:
            sys.stdout.write("all residues zero\n")
        else:
            for g in report.failures():
                sys.stdout.write(
                    f"nonzero residue for d^2 "
                    f"{render.gen_text(g, system.coords, system.targets)}\n")
    return 0 if report.ok else 1


def cmd_check_duality(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    point = _parse_point(args.point, system.coords)
    eqs = structure.pseudo_group_structure(system, args.order, cap=args.cap)
    basis = jetalg.solution_basis(system, point, args.order + 1, cap=args.cap)
    report = jetalg.check_duality(eqs, basis, point)
    if args.format == "json":
        obj = {"order": args.order, "pairings": report.pairings, "ok": report.ok,
               "violations": len(report.violations)}
        sys.stdout.write(render.render_json(obj))
    else:
        sys.stdout.write(
            f"{report.pairings} pairings checked, "
            f"{len(report.violations)} violations\n")
    return 0 if report.ok else 1


def cmd_bracket(args) -> int:
    system = detsys.parse_system(_read_input(args.input))
    point = _parse_point(args.point, system.coords)
    basis = jetalg.solution_basis(system, point, args.order, cap=args.cap)
    rows = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            br = jetalg.bracket(basis[i], basis[j])
            entries = sorted(
                ((comp, idx, c) for (comp, idx), c in br.coefficients.items()),
                key=lambda t: (t[1].sort_key(), t[0]))
            rows.append((i, j, entries))
    if args.format == "json":
        obj = {"dimension": len(basis), "order": args.order,
               "brackets": [
                   {"i": i, "j": j,
                    "terms": [{"component": comp,
                               "index": list(idx.entries),
                               "coeff": render.coeff_text(c)}
                              for comp, idx, c in entries]}
                   for i, j, entries in rows]}
        sys.stdout.write(render.render_json(obj))
    else:
        sys.stdout.write(f"solution basis dimension: {len(basis)}\n")
        for i, j, entries in rows:
            body = " + ".join(
                f"({render.coeff_text(c)})*zeta[{comp}]{list(idx.entries)}"
                for comp, idx, c in entries) or "0"
            sys.stdout.write(f"[v{i+1}, v{j+1}] = {body}\n")
    return 0


def cmd_verify_coframe(args) -> int:
    session = coordforms.parse_coframe(_read_input(args.input))
    report = coordforms.verify_structure_equations(session)
    if args.format == "json":
        obj = {"verified": report.verified,
               "residues": {name: [{"pair": list(key),
                                    "coeff": render.coeff_text(c)}
                                   for key, c in sorted(two.terms.items())]
                            for name, two in report.residues.items()}}
        sys.stdout.write(render.render_json(obj))
    else:
        for name in session.forms:
            residue = report.residues.get(name)
            status = "ok" if residue is not None and residue.is_zero else "RESIDUE"
            sys.stdout.write(f"d{name}: {status}\n")
            if residue is not None and not residue.is_zero:
                for (s, t), c in sorted(residue.terms.items()):
                    sys.stdout.write(
                        f"  residue term: ({render.coeff_text(c)}) d{s}^d{t}\n")
        sys.stdout.write("verified\n" if report.verified else "verification failed\n")
    return 0 if report.verified else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcforge",
        description="Maurer-Cartan structure equations of Lie pseudo-groups")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=True, order=True):
        if needs_input:
            p.add_argument("input", help="determining-system file (@name for bundled)")
        if order:
            p.add_argument("--order", type=int, required=True)
        p.add_argument("--cap", type=int, default=None,
                       help="max prolongation order for the fixed-point loop")
        p.add_argument("--format", choices=["text", "latex", "json"], default="text")

    p = sub.add_parser("structure", help="pseudo-group structure equations")
    common(p)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("diffeo", help="diffeomorphism structure equations")
    p.add_argument("--dim", type=int, required=True)
    common(p, needs_input=False)
    p.set_defaults(func=cmd_diffeo)

    p = sub.add_parser("lift", help="lifted determining relations")
    common(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("prolong", help="prolonged determining system")
    common(p)
    p.set_defaults(func=cmd_prolong)

    p = sub.add_parser("check-d2", help="verify d(d mu) = 0")
    common(p)
    p.set_defaults(func=cmd_check_d2)

    p = sub.add_parser("check-duality",
                       help="verify structure equations against jet brackets")
    common(p)
    p.add_argument("--point", default=None, help="evaluation point, e.g. x=1,y=2")
    p.set_defaults(func=cmd_check_duality)

    p = sub.add_parser("bracket", help="bracket table of the solution basis")
    common(p)
    p.add_argument("--point", default=None, help="evaluation point, e.g. x=1,y=2")
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("verify-coframe", help="check a coframe's structure equations")
    common(p, order=False)
    p.set_defaults(func=cmd_verify_coframe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except McforgeError as exc:
        sys.stderr.write(_diag(f"error: {exc}") + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
