"""Command-line front end.

Exit codes: 0 success / positive verdict, 1 negative verdict, 2 bad input.
Payloads go to stdout (or --out), logs to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any

import tomli

from . import bp, dieudonne as dd, fgl, hopfring
from .padic import make_ring

log = logging.getLogger("chromalg")

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# output

def dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def render_table(obj: Any, indent: str = "") -> str:
    """Plain-text rendering of a JSON payload (never a separate computation)."""
    lines: list[str] = []
    if isinstance(obj, dict):
        for key in sorted(obj):
            val = obj[key]
            if isinstance(val, list) and val and all(isinstance(r, dict) for r in val):
                cols = sorted({c for r in val for c in r})
                lines.append(f"{indent}{key}:")
                lines.append(indent + "  " + "\t".join(cols))
                for r in val:
                    lines.append(indent + "  " + "\t".join(_cell(r.get(c, "")) for c in cols))
            elif isinstance(val, list) and val and all(isinstance(r, list) for r in val):
                lines.append(f"{indent}{key}:")
                for r in val:
                    lines.append(indent + "  " + "\t".join(_cell(c) for c in r))
            elif isinstance(val, dict):
                lines.append(f"{indent}{key}:")
                lines.append(render_table(val, indent + "  ").rstrip("\n"))
            else:
                lines.append(f"{indent}{key}: {_cell(val)}")
    else:
        lines.append(indent + _cell(obj))
    return "\n".join(lines) + "\n"


def emit(args: argparse.Namespace, payload: Any) -> None:
    text = render_table(payload) if args.format == "table" else dump(payload)
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# input

def load_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def load_module(path: str) -> dd.DieudonneModule:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    return dd.DieudonneModule.from_json(obj)


def load_law(path: str) -> fgl.TruncatedFGL:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    return fgl.TruncatedFGL.from_json(obj)


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, "rb") as fh:
            cfg = tomli.load(fh)
    except (OSError, tomli.TOMLDecodeError) as exc:
        raise InputError(f"config {path}: {exc}") from exc
    section = cfg.get("defaults", cfg)
    allowed = {"p", "d", "N", "D", "h", "n", "r", "m"}
    bad = set(section) - allowed - {"defaults"}
    if bad:
        raise InputError(f"config {path}: unknown keys {sorted(bad)}")
    return {k: v for k, v in section.items() if k in allowed}


def param(args: argparse.Namespace, name: str, default: Any = None) -> Any:
    val = getattr(args, name, None)
    if val is None:
        val = args.config_values.get(name, default)
    if val is None:
        raise InputError(f"missing parameter --{name}")
    return val


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args) -> int:
    report = dd.validate(load_module(args.module))
    emit(args, report.to_json())
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_exterior(args) -> int:
    M = load_module(args.module)
    emit(args, dd.exterior_power(M, args.m).to_json())
    return EXIT_OK


def cmd_detect_gm_module(args) -> int:
    M = load_module(args.module)
    verdict, inv = dd.top_exterior_is_gm(M)
    emit(args, {"verdict": "ISO" if verdict else "NOT-ISO", "rank": M.rank,
                "invariant": inv.to_json(), "detail": verdict.to_json()})
    return EXIT_OK if verdict else EXIT_NEGATIVE


def _degree(args, G: fgl.TruncatedFGL) -> int:
    D = args.degree if args.degree is not None else args.config_values.get("D")
    if D is None:
        D = min(G.p ** 3, G.D)
        log.info("using default degree %d", D)
    if D > G.D:
        raise InputError(f"--degree {D} exceeds the law's truncation {G.D}")
    return D


def cmd_fgl(args) -> int:
    G = load_law(args.law)
    D = _degree(args, G)
    Gt = G.truncate(D)
    if args.action == "pseries":
        ps = fgl.p_series(Gt)
        emit(args, {"p": G.p, "D": D, "pseries": ps.to_json()})
        return EXIT_OK
    if args.action == "height":
        emit(args, {"p": G.p, "D": D, **fgl.height(Gt).to_json()})
        return EXIT_OK
    if args.action == "westerland":
        emit(args, fgl.westerland_solve(Gt).to_json())
        return EXIT_OK
    verdict = fgl.detect_gm(Gt)
    emit(args, verdict.to_json())
    return EXIT_OK if verdict.is_iso else EXIT_NEGATIVE


def cmd_hopf(args) -> int:
    if args.action == "verify-xpzero":
        cert = hopfring.verify_xpzero(param(args, "p"), param(args, "h"), param(args, "n"), workers=args.workers)
        text = cert.dumps() + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text if args.format == "json" else render_table(cert.to_json()))
        log.info("verdict %s", cert.verdict)
        return EXIT_OK if cert.verified else EXIT_NEGATIVE
    if args.action == "replay":
        same, fresh = hopfring.replay(load_json(args.certificate))
        emit(args, {"identical": same, "verdict": fresh.verdict})
        return EXIT_OK if same and fresh.verified else EXIT_NEGATIVE
    report = hopfring.f0_nonnilpotence(param(args, "p"), param(args, "h"), param(args, "m"))
    emit(args, report)
    return EXIT_NEGATIVE if report["nilpotent"] else EXIT_OK


def cmd_bp(args) -> int:
    p, h, r = param(args, "p"), param(args, "h"), param(args, "r", 0)
    D = param(args, "D", p ** (h + 1))
    if args.action == "pseries":
        payload = bp.series_to_json(bp.p_series_mod_Ir(p, h, r, D))
    elif args.action == "fsum":
        payload = bp.series_to_json(bp.fsum_coefficients(p, h, r, D))
    else:
        payload = {"p": p, "nu": bp.nu_table(p, h)}
    emit(args, payload)
    return EXIT_OK


def cmd_gen(args) -> int:
    kind = args.kind
    p = param(args, "p")
    if kind in ("na", "honda-module", "gm-module"):
        d = param(args, "d", 1)
        ring = make_ring(p, d, param(args, "N", 8))
        if kind == "na":
            if d != 1:
                raise InputError("N_a is only generated over Z_p (d = 1)")
            M = dd.make_Na(ring.element(args.a))
        elif kind == "gm-module":
            M = dd.gm_module(ring)
        else:
            M = dd.honda_module(ring, param(args, "h"))
        emit(args, M.to_json())
        return EXIT_OK
    D = param(args, "D")
    if kind == "gm-law":
        G = fgl.gm_law((p, param(args, "d", 1)), D)
    elif kind == "ga-law":
        G = fgl.ga_law((p, param(args, "d", 1)), D)
    else:
        G = fgl.honda_law(p, param(args, "h"), D)
    emit(args, G.to_json())
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--out", help="write the payload here instead of stdout")

    ap = argparse.ArgumentParser(prog="chromalg", description="Dieudonne modules, formal group laws and Hopf-ring certificates.")
    ap.add_argument("--config", help="TOML file with default p, d, N, D, h, n, r, m")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check the Dieudonne module axioms")
    s.add_argument("module")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("exterior", parents=[common], help="m-th exterior power of a module")
    s.add_argument("module")
    s.add_argument("--m", type=int, required=True)
    s.set_defaults(func=cmd_exterior)

    s = sub.add_parser("detect-gm", parents=[common], help="is the top exterior power multiplicative?")
    s.add_argument("module")
    s.set_defaults(func=cmd_detect_gm_module)

    s = sub.add_parser("fgl", parents=[common], help="formal group law tools")
    s.add_argument("action", choices=("pseries", "height", "westerland", "detect"))
    s.add_argument("law")
    s.add_argument("--degree", type=int)
    s.set_defaults(func=cmd_fgl)

    s = sub.add_parser("hopf", parents=[common], help="Hopf-ring certificates")
    s.add_argument("action", choices=("verify-xpzero", "f0", "replay"))
    s.add_argument("certificate", nargs="?", help="certificate file (replay only)")
    for name in ("p", "h", "n", "m"):
        s.add_argument(f"--{name}", type=int)
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_hopf)

    s = sub.add_parser("bp", parents=[common], help="BP<h> p-series tables")
    s.add_argument("action", choices=("pseries", "fsum", "nu"))
    for name in ("p", "h", "r", "D"):
        s.add_argument(f"--{name}", type=int)
    s.set_defaults(func=cmd_bp)

    s = sub.add_parser("gen", parents=[common], help="write standard example inputs")
    s.add_argument("kind", choices=("na", "gm-module", "honda-module", "gm-law", "ga-law", "honda-law"))
    for name in ("p", "d", "N", "D", "h"):
        s.add_argument(f"--{name}", type=int)
    s.add_argument("--a", type=int, default=1, help="the unit a for N_a")
    s.set_defaults(func=cmd_gen)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING - 10 * args.verbose,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.config_values = load_config(args.config)
        if args.command == "hopf" and args.action == "replay" and not args.certificate:
            raise InputError("replay needs a certificate file")
        return args.func(args)
    except (InputError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
