"""JSON filter files and atomic writes.

A filter file holds one function in the layout::

    {"dilation": [[...]], "n": 1, "representation": "coeff",
     "coeffs": [{"k": [0], "re": 1.0, "im": 0.0}, ...]}

or with ``"representation": "grid"`` and
``"grid": {"shape": [...], "values": [[re, im], ...]}`` (row-major).
A whole bank adds ``"filters": [<function>, ...]`` for members 1..q-1 and
``"normalized": bool`` (default false, i.e. ``m_0(0) = q``).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, IO

import numpy as np

from .errors import IoFailureError, ParseError, TorusFilterError
from .filters import FilterBank
from .lattice import DilationMatrix, validate_dilation
from .torusfn import TorusFunction


def atomic_write(path, write: Callable[[IO[str]], None]) -> None:
    """Write through a temporary file in the same directory, then rename."""
    path = Path(path)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise IoFailureError(f"cannot write {path}: {exc}") from exc


def write_json(path, obj) -> None:
    atomic_write(path, lambda fh: (json.dump(obj, fh, indent=1), fh.write("\n")))


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise IoFailureError(f"cannot read {path}: {exc}") from exc


def function_to_json(f: TorusFunction, representation: str | None = None) -> dict:
    """Serialize ``f``; coefficient form is preferred when available."""
    rep = representation or ("coeff" if f.has_coeffs else "grid")
    out: dict = {"n": f.n, "representation": rep}
    if rep == "coeff":
        if not f.has_coeffs:
            raise ValueError("function has no coefficient form")
        out["coeffs"] = [{"k": [int(i) for i in k], "re": float(c.real), "im": float(c.imag)}
                         for k, c in sorted(f.coeffs.items())]
    elif rep == "grid":
        g = f.grid if f.shape is not None else None
        if g is None:
            raise ValueError("function has no grid samples")
        flat = g.reshape(-1)
        out["grid"] = {"shape": list(g.shape),
                       "values": np.stack([flat.real, flat.imag], axis=1).tolist()}
    else:
        raise ValueError(f"unknown representation {rep!r}")
    return out


def function_from_json(d: dict) -> TorusFunction:
    try:
        n = int(d["n"])
        rep = d["representation"]
        if rep == "coeff":
            coeffs = {}
            for e in d["coeffs"]:
                k = tuple(int(i) for i in e["k"])
                if len(k) != n:
                    raise ParseError(f"coefficient index {k} does not have length {n}")
                coeffs[k] = coeffs.get(k, 0) + complex(float(e["re"]), float(e.get("im", 0.0)))
            return TorusFunction.from_coeffs(coeffs, n=n)
        if rep == "grid":
            shape = tuple(int(s) for s in d["grid"]["shape"])
            v = np.asarray(d["grid"]["values"], dtype=float)
            if len(shape) != n or v.shape != (int(np.prod(shape)), 2):
                raise ParseError(f"grid values do not match shape {shape}")
            return TorusFunction.from_grid((v[:, 0] + 1j * v[:, 1]).reshape(shape))
    except ParseError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed function entry: {exc!r}") from exc
    raise ParseError(f"unknown representation {rep!r}")


@dataclass
class FilterFile:
    A: DilationMatrix
    filters: list[TorusFunction]
    normalized: bool = False

    @property
    def bank(self) -> FilterBank:
        return FilterBank(self.A, tuple(self.filters), self.normalized)


def parse_dilation(obj) -> DilationMatrix:
    """Dilation from ``{"dilation": ...}`` or a bare nested list; integer entries only."""
    M = obj.get("dilation") if isinstance(obj, dict) else obj
    if M is None:
        raise ParseError("missing 'dilation'")
    if (not isinstance(M, list) or not M or not all(isinstance(r, list) for r in M)
            or not all(isinstance(x, int) and not isinstance(x, bool) for r in M for x in r)):
        raise ParseError("'dilation' must be a non-empty list of integer rows")
    if any(len(r) != len(M) for r in M):
        raise ParseError("'dilation' must be square")
    return validate_dilation(M)


def read_filter_file(path) -> FilterFile:
    d = read_json(path)
    if not isinstance(d, dict):
        raise ParseError("filter file must hold a JSON object")
    A = parse_dilation(d)
    fs = [function_from_json(d)] + [function_from_json(e) for e in d.get("filters", [])]
    for f in fs:
        if f.n != A.n:
            raise ParseError(f"function on T^{f.n} with a {A.n}x{A.n} dilation")
    return FilterFile(A, fs, bool(d.get("normalized", False)))


def filter_file_json(A: DilationMatrix, filters, normalized: bool = False,
                     representation: str | None = None) -> dict:
    filters = list(filters)
    out = {"dilation": [list(map(int, r)) for r in A.entries]}
    out.update(function_to_json(filters[0], representation))
    if len(filters) > 1:
        out["filters"] = [function_to_json(f, representation) for f in filters[1:]]
    out["normalized"] = bool(normalized)
    return out


def write_filter_file(path, A: DilationMatrix, filters, normalized: bool = False,
                      representation: str | None = None) -> None:
    write_json(path, filter_file_json(A, filters, normalized, representation))


__all__ = ["atomic_write", "write_json", "read_json", "function_to_json", "function_from_json",
           "FilterFile", "parse_dilation", "read_filter_file", "filter_file_json",
           "write_filter_file", "TorusFilterError"]
