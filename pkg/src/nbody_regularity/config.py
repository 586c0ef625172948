"""Reading lattice configs, order files and eigenpair specs.

A lattice config is JSON::

    {"ambient_dim": 3,
     "subspaces": [{"name": "Y1", "basis": [[1, 0, 0]]}, ...],
     "auto_close": true,
     "potential": {"terms": [{"member": "0", "a": 0, "b": 2}], "c": 0}}

``potential`` may also be one of the built-in names "hydrogen",
"invsq:<gamma>" or "nbody:<N>"; a config holding only a built-in name needs
no subspaces. Order files are JSON lists of names or plain text with one
name per line (commas also separate); ``EMPTY`` marks the empty set.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, GeometryError
from .lattice import EMPTY, OrderedTuple, Semilattice, closure
from .potential import (Eigenpair, InverseSquarePotential, hydrogen_pair, make_inverse_square, nbody_coulomb,
                        radial_invsq_pair)
from .subspace import make_subspace

__all__ = ["ConfigError", "LatticeConfig", "load_lattice", "lattice_from_dict", "load_order", "parse_order",
           "builtin", "load_eigenpair"]


@dataclass
class LatticeConfig:
    lattice: Semilattice
    potential: InverseSquarePotential | None = None
    eigenpair: Eigenpair | None = None


def _read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


def builtin(name: str) -> LatticeConfig:
    """Lattice, potential and (when known) eigenpair of a built-in case."""
    if name == "hydrogen":
        pair = hydrogen_pair()
        return LatticeConfig(pair.F, pair.V, pair)
    if name.startswith("invsq:"):
        try:
            gamma = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad built-in {name!r}") from exc
        pair = radial_invsq_pair(gamma)
        return LatticeConfig(pair.F, pair.V, pair)
    if name.startswith("nbody:"):
        try:
            N = int(name.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError(f"bad built-in {name!r}") from exc
        F, V = nbody_coulomb(N)
        return LatticeConfig(F, V)
    raise ConfigError(f"unknown built-in {name!r}")


def lattice_from_dict(data: dict, close: bool | None = None) -> LatticeConfig:
    """Build the config; ``close`` overrides the file's auto_close flag."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    pot = data.get("potential")
    if isinstance(pot, str) and not data.get("subspaces"):
        return builtin(pot)
    try:
        n = int(data["ambient_dim"])
        subs = [make_subspace(n, s["basis"], name=s.get("name")) for s in data.get("subspaces", [])]
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            raise
        raise ConfigError(f"malformed lattice config: {exc}") from exc
    auto = data.get("auto_close", True) if close is None else close
    F = closure(n, subs) if auto else Semilattice(n, subs)
    if pot is None:
        return LatticeConfig(F)
    if isinstance(pot, str):
        cfg = builtin(pot)
        return LatticeConfig(F, cfg.potential, cfg.eigenpair)
    try:
        terms = {t["member"]: (t.get("a", 0.0), t.get("b", 0.0)) for t in pot.get("terms", [])}
        return LatticeConfig(F, make_inverse_square(F, terms, pot.get("c", 0.0)))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"malformed potential: {exc}") from exc


def load_lattice(path, close: bool | None = None) -> LatticeConfig:
    return lattice_from_dict(_read_json(path), close)


def parse_order(text: str) -> OrderedTuple:
    text = text.strip()
    if text.startswith("["):
        try:
            names = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid order list: {exc.msg}") from exc
        if not all(isinstance(x, str) for x in names):
            raise ConfigError("order entries must be names")
    else:
        names = [tok.strip() for line in text.splitlines() if not line.lstrip().startswith("#")
                 for tok in line.split(",") if tok.strip()]
    return OrderedTuple(tuple(EMPTY if x.upper() == EMPTY else x for x in names))


def load_order(path) -> OrderedTuple:
    try:
        return parse_order(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def load_eigenpair(source: str) -> Eigenpair:
    """A built-in name, or a JSON file {"kind": "hydrogen"} / {"kind": "invsq", "gamma": g}."""
    if source == "hydrogen" or source.startswith("invsq:"):
        pair = builtin(source).eigenpair
        assert pair is not None
        return pair
    data = _read_json(source)
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"{source}: eigenpair description needs a 'kind'")
    if data["kind"] == "hydrogen":
        return hydrogen_pair()
    if data["kind"] == "invsq":
        return radial_invsq_pair(float(data.get("gamma", 0.3)))
    raise ConfigError(f"{source}: unknown eigenpair kind {data['kind']!r}")
