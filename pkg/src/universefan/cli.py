"""Command-line front end.

Exit status: 0 on success, 1 when an identity check comes out false, 2 on
bad input (anything derived from InputError, plus usage errors).
"""
from __future__ import annotations

import argparse
import os
import re
import sys

from . import io
from .errors import InputError, TooLarge, UniverseFanError
from .nestoid import diagnose, enumerate_nested_sets, parse_region
from .ratexpr import to_canonical

OK, FAILED, BAD_INPUT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors already; keep its message but our code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BAD_INPUT, f"{self.prog}: error: {message}\n")


def _out(text):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_expr(args, e):
    if args.max_terms is not None and len(e) > args.max_terms:
        raise TooLarge(f"expression has {len(e)} terms, more than --max-terms {args.max_terms}")
    if args.json:
        _out(io.dumps(io.expr_to_json(e)))
    else:
        _out(to_canonical(e))


def _need_input(args):
    if not args.input:
        raise InputError(f"{args.command} needs --input (a nestable JSON file, a graph file or a fixture name)")
    return io.load_input(args.input)


def _verdict(args, ok, payload):
    if args.json:
        _out(io.dumps(payload | {"ok": bool(ok)}))
    return OK if ok else FAILED


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args):
    G = _need_input(args)
    rows = diagnose(G.lat, G)
    if args.json:
        _out(io.dumps([{"property": p, "holds": h, "witness": w} for p, h, w in rows]))
        return OK
    width = max(len(p) for p, _, _ in rows)
    for p, h, w in rows:
        _out(f"{p:<{width}}  {'yes' if h else 'no ':<3}" + (f"  {w}" if w else ""))
    return OK


def cmd_nested_sets(args):
    G = _need_input(args)
    sets = enumerate_nested_sets(G, only_maximal=args.maximal)
    rows = [sorted(G.ids(N), key=lambda s: (-G.lat.grade(G.lat.index(s)), s)) for N in sets]
    if args.json:
        _out(io.dumps(rows))
    else:
        for r in rows:
            _out("{" + ",".join(r) + "}")
    return OK


def cmd_amplitude(args):
    from .amplitude import amplitude, amplitude_E
    G = _need_input(args)
    _emit_expr(args, amplitude_E(G) if args.doubled else amplitude(G))
    return OK


def cmd_factor_check(args):
    from .amplitude import check_factorization
    G = _need_input(args)
    f = G.lat.index(args.at)
    if f not in G:
        raise InputError(f"{args.at} is not a member of G")
    ok = check_factorization(G, f)
    if not args.json:
        _out(f"Res at s:{args.at}: {'factorizes' if ok else 'does NOT factorize'}")
    return _verdict(args, ok, {"at": args.at})


def cmd_wavefunction(args):
    from .fan import wavefunction
    G = _need_input(args)
    _emit_expr(args, wavefunction(G))
    return OK


def cmd_universe_fan(args):
    from .fan import DoubledSpace, face_lattice, region_text, universe_max_cone, universe_rays
    G = _need_input(args)
    L = G.lat
    if args.faces:
        _out(io.dumps(face_lattice(G).to_json()))
        return OK
    if args.cone is not None:
        ids = [s.strip() for s in args.cone.strip("{}").split(",") if s.strip()]
        N = tuple(sorted(L.index(s) for s in ids))
        C = universe_max_cone(G, N)
        space = DoubledSpace(G)
        payload = {"N": G.ids(N), "rays": C.ray_texts(),
                   "vectors": [list(space.w(R)) for R in C.regions],
                   "checks": {k: bool(v) for k, v in C.checks.items()}}
        ok = all(C.checks.values())
        if args.json:
            _out(io.dumps(payload | {"ok": ok}))
        else:
            _out(f"U_N for N = {{{','.join(payload['N'])}}}: {len(C.regions)} rays")
            for t in payload["rays"]:
                _out("  " + t)
            for k, v in payload["checks"].items():
                _out(f"  {k}: {v}")
        return OK if ok else FAILED
    rays = universe_rays(G)
    space = DoubledSpace(G)
    if args.json:
        _out(io.dumps({"coords": [f"{k}:{L.id(f)}" for k, f in space.coords],
                       "rays": [{"region": R.label(L), "text": region_text(L, R), "vector": list(v)}
                                for R, v in rays]}))
    else:
        for R, v in rays:
            _out(f"{R.label(L):<20} {region_text(L, R)}")
    return OK


def cmd_residue_check(args):
    from .fan import check_region_factorization, check_total_energy_residue, wavefunction
    from .nestoid import enumerate_causal_regions
    G = _need_input(args)
    results = []
    if args.region:
        regions = [parse_region(G, args.region)]
    else:
        regions = enumerate_causal_regions(G)
        results.append(("total energy", check_total_energy_residue(G)))
    from .nestoid import is_stable
    if not is_stable(G.lat, G):
        raise InputError("region factorization needs a stable nestoid")
    psi = wavefunction(G, check=False)
    for R in regions:
        results.append((R.label(G.lat), check_region_factorization(G, R, check=False, psi=psi)))
    ok = all(r for _, r in results)
    if args.json:
        _out(io.dumps({"results": [{"region": k, "equal": bool(v)} for k, v in results], "ok": ok}))
    else:
        for k, v in results:
            _out(f"{k:<24} {'ok' if v else 'FAILED'}")
    return OK if ok else FAILED


def _polygon_n(spec):
    m = re.fullmatch(r"(?:fixture:)?polygon-n(\d+)", spec or "")
    return int(m.group(1)) if m else None


def cmd_refine(args):
    from .refine import lightcone_refinement, project_refinement
    G = _need_input(args)
    if args.diagonal:
        from .physics import build_polygon, diagonal_refinement
        n = _polygon_n(args.input)
        if n is None:
            raise InputError("--diagonal needs a polygon fixture input (polygon-nK)")
        model = build_polygon(n)
        out = {",".join(model.id(g) for g in N): diagonal_refinement(model, N)
               for N in enumerate_nested_sets(model.nestable, only_maximal=True)}
        _out(io.dumps(out))
        return OK
    if args.project:
        P = project_refinement(G, mode=args.mode)
        payload = {"mode": args.mode, "upstairs": P.upstairs, "downstairs": P.downstairs.to_json(),
                   "universe_up": P.universe_up, "universe_down": len(P.universe_down.cones),
                   "checks": {k: bool(v) for k, v in P.checks.items()}}
        _out(io.dumps(payload | {"ok": P.ok}))
        return OK if P.ok else FAILED
    ref = lightcone_refinement(G, "graphical" if args.mode == "max" else "minimal")
    _out(io.dumps(io.fan_to_json(ref.fan)))
    return OK


def cmd_physics(args):
    from .physics import amplitude_n, factorization_demo, psi_n, russian_doll
    if args.factor_at:
        d = factorization_demo(args.n, args.factor_at)
        if args.json:
            _out(io.dumps(d))
        else:
            for k in ("region", "pole", "G_in", "G_out", "A_sh", "psi_out", "equal"):
                v = d[k]
                _out(f"{k}: {','.join(v) if isinstance(v, list) else v}")
        return OK if d["equal"] else FAILED
    if args.what == "psi":
        e = psi_n(args.n, physical=args.physical)
    elif args.what == "amplitude":
        e = amplitude_n(args.n)
    else:
        e = russian_doll(args.n)
        if args.physical:
            from .physics import build_polygon, physical_substitution
            e = physical_substitution(e, build_polygon(args.n))
    _emit_expr(args, e)
    return OK


def cmd_selftest(args):
    from .acceptance import run
    only = [int(x) for x in args.only.split(",")] if args.only else None
    outcomes = run(only, jobs=args.jobs, echo=None if args.json else print)
    if args.json:
        _out(io.dumps([o.to_json() for o in outcomes]))
    return OK if all(o.passed for o in outcomes) else FAILED


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="nestable JSON, graph file, or fixture name (e.g. star, polygon-n5)")
    common.add_argument("--seed", type=int, help="seed for randomized equality checks (env UNIVERSEFAN_SEED)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for selftest")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--canonical", action="store_true", help="canonical text output (default)")
    fmt.add_argument("--json", action="store_true", help="JSON output")
    common.add_argument("--max-terms", type=int, help="refuse to print expressions with more terms")

    p = _Parser(prog="universefan", description="Nested set complexes, nestoid amplitudes and universe fans.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        s = sub.add_parser(name, parents=[common], help=help, description=help)
        s.set_defaults(fn=fn)
        return s

    add("check", cmd_check, "nestable / building / nestoid / stable, with witnesses")
    s = add("nested-sets", cmd_nested_sets, "list nested sets")
    s.add_argument("--maximal", action="store_true", help="only inclusion-maximal ones")
    s = add("amplitude", cmd_amplitude, "nestoid amplitude A(L, G)")
    s.add_argument("--doubled", action="store_true", help="in Ep/Em variables instead of s")
    s = add("factor-check", cmd_factor_check, "residue factorization of A at s_f = 0")
    s.add_argument("--at", required=True, help="element id f")
    add("wavefunction", cmd_wavefunction, "wavefunction Ψ(L, G)")
    s = add("universe-fan", cmd_universe_fan, "rays, face lattice or one maximal cone of the universe fan")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--rays", action="store_true", help="one ray per causal region (default)")
    g.add_argument("--faces", action="store_true", help="face lattice as a JSON Hasse diagram")
    g.add_argument("--cone", help="U_N for a maximal nested set given as ids, e.g. 123,12,1")
    s = add("residue-check", cmd_residue_check, "residue factorization of Ψ on causal regions")
    s.add_argument("--region", help='one region "r*;f1,f2"; default: all of them plus total energy')
    s = add("refine", cmd_refine, "lightcone refinement fans")
    s.add_argument("--mode", choices=("min", "max"), default="min")
    s.add_argument("--project", action="store_true", help="push down to atom space and check")
    s.add_argument("--diagonal", action="store_true", help="polygon diagonal cones, per maximal nested set")
    s = add("physics", cmd_physics, "polygon model of the flat-space wavefunction")
    s.add_argument("--n", type=int, required=True, help="number of path sides (the polygon has n+1)")
    s.add_argument("--what", choices=("psi", "amplitude", "russian-doll"), default="psi")
    s.add_argument("--physical", action="store_true", help="substitute side/chord energies")
    s.add_argument("--factor-at", help='causal region "r*;f1,..."; "star-complement" names the top')
    s = add("selftest", cmd_selftest, "run the acceptance suite")
    s.add_argument("--only", help="comma separated criterion numbers")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is not None:
        os.environ["UNIVERSEFAN_SEED"] = str(args.seed)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"universefan: {e}", file=sys.stderr)
        return BAD_INPUT
    except UniverseFanError as e:
        print(f"universefan: {type(e).__name__}: {e}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
