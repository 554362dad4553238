"""File formats: operator sets, states, grids, CSV tables and provenance.

Operator set (JSON)::

    {"dim": d, "operators": [{"name": str, "re": [[...]], "im": [[...]]}, ...]}

State (JSON)::

    {"type": "pure" | "density" | "maximally_mixed", "re": ..., "im": ...}

A grid is a metadata JSON file plus a sidecar ``.bin`` with the values as
little-endian float64, row-major (first axis slowest).
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .operators import (
    OperatorTuple,
    QuantumState,
    density_from_pure,
    make_tuple,
    maximally_mixed,
    pauli_triple,
    random_hermitian,
    random_state,
    spin_basis_index,
    spin_triple,
)
from .wigner import Axis, GridSpec, WignerGrid

__all__ = [
    "read_operators",
    "write_operators",
    "operators_from_dict",
    "operators_to_dict",
    "resolve_operators",
    "read_state",
    "write_state",
    "state_from_dict",
    "resolve_state",
    "write_grid",
    "read_grid",
    "write_grid_csv",
    "write_csv",
    "matrix_hash",
    "provenance",
    "dump_json",
]


def dump_json(obj, path):
    """Deterministic JSON (sorted keys, fixed indentation, trailing newline)."""
    Path(path).write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _load_json(path):
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"file not found: {p}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc


def _complex(entry, key="re", ikey="im") -> np.ndarray:
    try:
        re = np.asarray(entry[key], dtype=float)
    except KeyError as exc:
        raise ConfigError(f"missing '{key}' field") from exc
    im = np.asarray(entry.get(ikey, np.zeros_like(re)), dtype=float)
    if im.shape != re.shape:
        raise ConfigError("real and imaginary parts differ in shape")
    return re + 1j * im


def operators_from_dict(data: dict) -> OperatorTuple:
    try:
        entries = data["operators"]
    except (KeyError, TypeError) as exc:
        raise ConfigError("operator file needs an 'operators' list") from exc
    mats = [_complex(e) for e in entries]
    names = [e.get("name", f"A{k + 1}") for k, e in enumerate(entries)]
    tup = make_tuple(mats, names)
    if "dim" in data and int(data["dim"]) != tup.dim:
        raise ConfigError(f"declared dim {data['dim']} does not match matrices of dim {tup.dim}")
    return tup


def operators_to_dict(tup: OperatorTuple) -> dict:
    return {
        "dim": tup.dim,
        "operators": [
            {"name": name, "re": op.matrix.real.tolist(), "im": op.matrix.imag.tolist()}
            for name, op in zip(tup.names, tup.ops)
        ],
    }


def read_operators(path) -> OperatorTuple:
    return operators_from_dict(_load_json(path))


def write_operators(path, tup: OperatorTuple):
    dump_json(operators_to_dict(tup), path)


_AXES = {"x": 0, "y": 1, "z": 2}


def resolve_operators(spec: str) -> OperatorTuple:
    """Operator set from a file path or a preset name.

    Presets: ``pauli`` (triple), ``pauli:xy`` (any axis letters),
    ``spin:S`` / ``spin:S:zx``, ``random:DIM:N:SEED`` (seeds ``SEED .. SEED+N-1``),
    ``pentagon``.
    """
    if Path(spec).exists():
        return read_operators(spec)
    head, *rest = spec.split(":")
    try:
        if head == "pauli":
            tup = pauli_triple()
            return tup.select([_AXES[c] for c in rest[0]]) if rest else tup
        if head == "spin":
            tup = spin_triple(_number(rest[0]))
            return tup.select([_AXES[c] for c in rest[1]]) if len(rest) > 1 else tup
        if head == "random":
            dim, n, seed = (int(v) for v in rest)
            return OperatorTuple(tuple(random_hermitian(dim, seed + k) for k in range(n)))
        if head == "pentagon":
            from .analysis import pentagon_fixture
            return pentagon_fixture()[0]
    except (IndexError, KeyError, ValueError) as exc:
        raise ConfigError(f"malformed operator preset '{spec}'") from exc
    raise ConfigError(f"operators file not found and no preset named '{spec}'")


def _number(text: str) -> float:
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def state_from_dict(data: dict, dim: int | None = None) -> QuantumState:
    kind = data.get("type")
    if kind == "maximally_mixed":
        d = data.get("dim", dim)
        if d is None:
            raise ConfigError("maximally_mixed state needs a dimension")
        return maximally_mixed(int(d))
    if kind == "pure":
        return density_from_pure(_complex(data))
    if kind == "density":
        return QuantumState(_complex(data))
    raise ConfigError(f"unknown state type {kind!r}")


def read_state(path, dim: int | None = None) -> QuantumState:
    return state_from_dict(_load_json(path), dim)


def write_state(path, state: QuantumState):
    dump_json({"type": "density", "re": state.rho.real.tolist(), "im": state.rho.imag.tolist()}, path)


def resolve_state(spec: str, dim: int) -> QuantumState:
    """State from a file path or a preset.

    Presets: ``maximally_mixed``, ``basis:K`` (K-th basis vector),
    ``spin:M`` (J_z eigenvector with magnetic number M in the descending
    basis), ``random:SEED``, ``pure_random:SEED``.
    """
    if Path(spec).exists():
        state = read_state(spec, dim)
    else:
        head, *rest = spec.split(":")
        try:
            if head == "maximally_mixed":
                state = maximally_mixed(dim)
            elif head == "basis":
                vec = np.zeros(dim)
                vec[int(rest[0])] = 1
                state = density_from_pure(vec)
            elif head == "spin":
                vec = np.zeros(dim)
                vec[spin_basis_index((dim - 1) / 2, _number(rest[0]))] = 1
                state = density_from_pure(vec)
            elif head == "random":
                state = random_state(dim, int(rest[0]))
            elif head == "pure_random":
                state = random_state(dim, int(rest[0]), rank=1)
            else:
                raise ConfigError(f"state file not found and no preset named '{spec}'")
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"malformed state preset '{spec}'") from exc
    if state.dim != dim:
        raise ConfigError(f"state has dim {state.dim}, operators have dim {dim}")
    return state


def matrix_hash(*arrays) -> str:
    """SHA-256 over little-endian complex128 bytes of the given arrays."""
    h = hashlib.sha256()
    for a in arrays:
        a = np.ascontiguousarray(np.asarray(a, dtype="<c16"))
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def provenance(tup: OperatorTuple | None = None, state: QuantumState | None = None, /, **parameters) -> dict:
    out = {"tool": "nwigner", "version": __version__, "parameters": parameters}
    if tup is not None:
        out["operators_sha256"] = matrix_hash(tup.matrices)
    if state is not None:
        out["state_sha256"] = matrix_hash(state.rho)
    return out


def write_grid(path, grid: WignerGrid, prov: dict | None = None) -> tuple[Path, Path]:
    """Write ``<path>.json`` and ``<path>.bin``; returns both paths."""
    base = Path(path)
    if base.suffix in (".json", ".bin"):
        base = base.with_suffix("")
    meta_path, bin_path = base.with_suffix(".json"), base.with_suffix(".bin")
    np.ascontiguousarray(grid.values, dtype="<f8").tofile(bin_path)
    meta = {
        "n": grid.n,
        "axes": [{"min": ax.min, "max": ax.max, "count": ax.count} for ax in grid.spec.axes],
        "epsilon": grid.spec.epsilon,
        "mass": grid.mass,
        "min": grid.min_value,
        "max": grid.max_value,
        "imag_residue": grid.imag_residue,
        "values_file": bin_path.name,
        "dtype": "float64-le",
        "order": "row-major",
        "provenance": prov or {},
    }
    dump_json(meta, meta_path)
    return meta_path, bin_path


def read_grid(path) -> tuple[WignerGrid, dict]:
    base = Path(path)
    meta_path = base if base.suffix == ".json" else base.with_suffix(".json")
    meta = _load_json(meta_path)
    try:
        axes = tuple(Axis(float(a["min"]), float(a["max"]), int(a["count"])) for a in meta["axes"])
        spec = GridSpec(axes, float(meta["epsilon"]))
        bin_path = meta_path.parent / meta["values_file"]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{meta_path}: malformed grid metadata") from exc
    if not bin_path.exists():
        raise ConfigError(f"grid values file not found: {bin_path}")
    values = np.fromfile(bin_path, dtype="<f8")
    if values.size != int(np.prod(spec.shape)):
        raise ConfigError(f"{bin_path}: expected {int(np.prod(spec.shape))} values, found {values.size}")
    grid = WignerGrid.from_values(spec, values.reshape(spec.shape), meta.get("imag_residue", 0.0))
    return grid, meta


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def write_grid_csv(path, grid: WignerGrid):
    """Long-format CSV ``a_1,...,a_n,value`` for grids with at most two axes."""
    if grid.n > 2:
        raise ConfigError("CSV export is limited to grids with n <= 2")
    mesh = grid.spec.mesh()
    cols = [m.ravel() for m in mesh] + [grid.values.ravel()]
    header = [f"a_{k + 1}" for k in range(grid.n)] + ["value"]
    write_csv(path, header, zip(*cols))
