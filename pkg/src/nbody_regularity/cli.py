"""Command-line front end (``nbreg``).

Exit codes: 0 success, 1 validation failure or bad input, 2 usage error.
Every report is written with sorted keys, so identical argv and seed give
byte-identical output.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .blowup import Stratum, clean_check, gv_embed, ray_limit
from .charts import roundtrip_errors
from .config import LatticeConfig, builtin, load_eigenpair, load_lattice, load_order
from .distance import equivalence_scan, rho_system
from .errors import ConfigError, EmptyIntersection, GeometryError
from .lattice import LatticeRelations, generate_admissible_order, is_admissible, validate
from .potential import eval_potential, rho2V_bound_scan
from .verify import DEFAULT_EPS, SCHEMA_VERSION, regularity_report

OK, FAILED, USAGE = 0, 1, 2


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays to lists, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _flatten(obj, prefix="") -> list[tuple[str, object]]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj):
            out += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    if isinstance(obj, list):
        return [(prefix, " ".join(repr(v) for v in obj))]
    return [(prefix, obj)]


def render(report: dict, fmt: str = "json") -> str:
    report = _plain(report)
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(report):
        w.writerow([k, repr(v) if isinstance(v, float) else v])
    return buf.getvalue()


def _emit(args, report: dict) -> None:
    text = render(report, args.format)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _point(text: str) -> np.ndarray:
    text = text.strip()
    try:
        vals = json.loads(text) if text.startswith("[") else [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse point {text!r}") from exc
    return np.asarray(vals, dtype=float)


def _load(args) -> LatticeConfig:
    if args.config is None:
        raise ConfigError("--config is required")
    return _load_config(args.config)


def _load_config(source: str, close: bool | None = None) -> LatticeConfig:
    """A lattice config file, or a built-in name such as nbody:2."""
    if not Path(source).exists() and (source == "hydrogen" or source.split(":")[0] in ("invsq", "nbody")):
        return builtin(source)
    return load_lattice(source, close)


def _check_dim(F, x) -> None:
    if x.shape != (F.n,):
        raise ConfigError(f"point has {x.size} coordinates, the lattice lives in R^{F.n}")


def cmd_lattice(args) -> int:
    if args.check:
        cfg = _load_config(args.config, close=False)
        diags = validate(cfg.lattice)
        _emit(args, {"schema_version": SCHEMA_VERSION, "diagnostics": [d.to_dict() for d in diags],
                     "valid": not diags})
        for d in diags:
            print(f"{d.kind}: {d.message}", file=sys.stderr)
        return FAILED if diags else OK
    F = _load(args).lattice
    _emit(args, {"schema_version": SCHEMA_VERSION, "ambient_dim": F.n,
                 "members": [{"name": m.name, "dim": m.dim, "basis": m.basis} for m in F.members],
                 "hasse": [list(e) for e in F.hasse_edges()]})
    return OK


def cmd_order(args) -> int:
    F = _load(args).lattice
    if args.validate:
        order = load_order(args.validate)
        res = is_admissible(LatticeRelations(F), order)
        _emit(args, {"schema_version": SCHEMA_VERSION, "order": list(order.entries), "admissible": res.ok,
                     "index": res.index, "head_index": res.head_index})
        if not res.ok:
            print(f"not admissible: entry {res.index} ({order.entries[res.index]}) is strictly inside "
                  f"head {res.head_index} ({order.entries[res.head_index]})", file=sys.stderr)
            return FAILED
        return OK
    order = generate_admissible_order(F, prefer=args.prefer)
    _emit(args, {"schema_version": SCHEMA_VERSION, "order": list(order.entries)})
    return OK


def cmd_chart(args) -> int:
    _emit(args, dict(roundtrip_errors(args.dim, args.samples, args.seed), schema_version=SCHEMA_VERSION))
    return OK


def cmd_embed(args) -> int:
    F = _load(args).lattice
    if args.mode == "ray":
        if args.base is None or args.dir is None:
            raise ConfigError("embed ray needs --base and --dir")
        base, d = _point(args.base), _point(args.dir)
        _check_dim(F, base)
        _check_dim(F, d)
        gv = ray_limit(F, base, d)
    else:
        if args.point is None:
            raise ConfigError("embed needs --point")
        x = _point(args.point)
        _check_dim(F, x)
        gv = gv_embed(F, x)
    _emit(args, {"schema_version": SCHEMA_VERSION, "components": gv.to_json()})
    return OK


def cmd_distance(args) -> int:
    F = _load(args).lattice
    x = _point(args.point)
    _check_dim(F, x)
    table = rho_system(F, x, total=True)
    _emit(args, dict(table.to_dict(), schema_version=SCHEMA_VERSION))
    return OK


def cmd_equivalence(args) -> int:
    F = _load(args).lattice
    stats = equivalence_scan(F, args.samples, args.seed, bins=args.bins)
    _emit(args, dict(stats.to_dict(), seed=args.seed, schema_version=SCHEMA_VERSION))
    return OK


def _strata(m):
    out = [Stratum("closure", m)]
    if not m.is_zero():
        out.append(Stratum("sphere", m))
    return out


def cmd_clean_check(args) -> int:
    F = _load(args).lattice
    members = F.members if not args.pair else [F[args.pair[0]], F[args.pair[1]]]
    rows = []
    for a, b in itertools.combinations(members, 2):
        for P in _strata(a):
            for Q in _strata(b):
                try:
                    rows.append(clean_check(P, Q).to_dict())
                except EmptyIntersection:
                    rows.append({"p": P.label, "q": Q.label, "clean": True, "empty": True})
    bad = [r for r in rows if not r["clean"]]
    _emit(args, {"schema_version": SCHEMA_VERSION, "checks": rows, "all_clean": not bad})
    return FAILED if bad else OK


def cmd_potential(args) -> int:
    cfg = _load(args)
    if cfg.potential is None:
        raise ConfigError("the config has no potential")
    report = {"schema_version": SCHEMA_VERSION, "potential": cfg.potential.to_dict()}
    if args.point:
        x = _point(args.point)
        _check_dim(cfg.lattice, x)
        report["value"] = eval_potential(cfg.potential, x)
    if args.scan:
        report["rho2V"] = rho2V_bound_scan(cfg.potential, args.samples, args.seed)
    _emit(args, report)
    return OK


def _eps(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse eps ladder {text!r}") from exc


def cmd_verify(args) -> int:
    pair = load_eigenpair(args.eigenpair)
    F = _load_config(args.config).lattice if args.config else None
    rep = regularity_report(pair, F, kmax=args.max_order, weight=args.weight, eps_ladder=_eps(args.eps),
                            seed=args.seed, method=args.method, samples=args.samples)
    _emit(args, rep.to_dict())
    if args.weight != "none" and not rep.weighted_all_finite:
        print("some weighted norms are not finite", file=sys.stderr)
        return FAILED
    return OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="nbreg", description="Blow-up geometry and weighted regularity checks")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lattice", parents=[common], help="close and inspect a lattice config")
    s.add_argument("--config", required=True)
    s.add_argument("--check", action="store_true", help="validate the family as written, without closing it")
    s.set_defaults(func=cmd_lattice)

    s = sub.add_parser("order", parents=[common], help="generate or validate a blow-up order")
    s.add_argument("--config", required=True)
    s.add_argument("--prefer", help="member whose sub-members come first")
    s.add_argument("--validate", metavar="ORDER_FILE")
    s.set_defaults(func=cmd_order)

    s = sub.add_parser("chart", parents=[common], help="chart roundtrip errors")
    s.add_argument("action", choices=["roundtrip"])
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--samples", type=int, default=10_000)
    s.set_defaults(func=cmd_chart)

    s = sub.add_parser("embed", parents=[common], help="multi-diagonal image of a point or ray")
    s.add_argument("mode", nargs="?", choices=["point", "ray"], default="point")
    s.add_argument("--config", required=True)
    s.add_argument("--point")
    s.add_argument("--base")
    s.add_argument("--dir")
    s.set_defaults(func=cmd_embed)

    s = sub.add_parser("distance", parents=[common], help="distances, factors and rho_F at a point")
    s.add_argument("--config", required=True)
    s.add_argument("--point", required=True)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("equivalence", parents=[common], help="rho_F / delta_F ratio scan")
    s.add_argument("--config", required=True)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--bins", type=int, default=20)
    s.set_defaults(func=cmd_equivalence)

    s = sub.add_parser("clean-check", parents=[common], help="clean intersection of closures and spheres")
    s.add_argument("--config", required=True)
    s.add_argument("--pair", nargs=2, metavar=("Y", "Z"))
    s.set_defaults(func=cmd_clean_check)

    s = sub.add_parser("potential", parents=[common], help="evaluate a potential or scan rho_F^2 V")
    s.add_argument("--config", required=True)
    s.add_argument("--point")
    s.add_argument("--scan", action="store_true")
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_potential)

    s = sub.add_parser("verify", parents=[common], help="weighted Sobolev refinement report")
    s.add_argument("--config", help="lattice config (default: the eigenpair's own lattice)")
    s.add_argument("--eigenpair", required=True, help="hydrogen, invsq:<gamma> or a JSON description file")
    s.add_argument("--max-order", type=int, default=3)
    s.add_argument("--weight", choices=["delta", "rho", "none"], default="delta")
    s.add_argument("--eps", default=",".join(f"{e:g}" for e in DEFAULT_EPS))
    s.add_argument("--method", choices=["auto", "grid", "qmc"], default="auto")
    s.add_argument("--samples", type=int, default=2**18, help="QMC sample count")
    s.set_defaults(func=cmd_verify)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    try:
        return args.func(args)
    except (GeometryError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
