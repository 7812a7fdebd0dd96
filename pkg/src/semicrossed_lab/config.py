"""JSON configuration parsing.

Complex scalars are ``[re, im]`` pairs and matrices are nested arrays of
such pairs.  A row is either explicit, ``{"u": ..., "v": ..., "window": ...}``
where ``u``/``v`` hold one matrix or a list of matrices, or a gallery
reference such as ``{"gallery": "odometer", "D": 8}``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from . import dynamics
from .errors import ConfigError, LabError, UnknownName

TASKS = ("covariance", "fourier", "cesaro", "membership", "commutant", "bicommutant",
         "thm41", "similarity", "decompose", "commuting", "laca", "reflexivity")

DEFAULT_TOLERANCES = {
    "covariance": 1e-10,
    "fourier": 1e-9,
    "cesaro": 1e-12,
    "membership": 1e-9,
    "commutant": 1e-8,
    "bicommutant": 1e-8,
    "thm41": 1e-9,
    "similarity": 1e-9,
    "decompose": 1e-10,
    "commuting": 1e-10,
    "laca": 1e-10,
    "reflexivity": 1e-8,
}

ALGEBRA_NAMES = ("full", "diag", "scalar", "I+E21")


@dataclass
class Config:
    kind: str
    L: int
    rows: List[dynamics.RowOperator]
    algebra: Any
    tasks: List[str]
    tolerances: Dict[str, float]
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"
    params: Dict[str, dict] = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def h(self) -> int:
        return self.rows[0].h

    def build_system(self) -> dynamics.DynSystem:
        return dynamics.DynSystem(self.kind, self.rows, self.algebra, self.L)


# ---------------------------------------------------------------------------
# scalars and matrices


def parse_complex(value, where: str) -> complex:
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        return complex(value[0], value[1])
    raise ConfigError("expected a complex number as [re, im]", where)


def parse_matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ConfigError("expected a matrix as a nested array of [re, im] pairs", where)
    width = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != width or width == 0:
            raise ConfigError("matrix rows must have equal positive length", f"{where}[{i}]")
        rows.append([parse_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=complex)


def encode_complex(z: complex) -> List[float]:
    return [float(np.real(z)), float(np.imag(z))]


def encode_matrix(a) -> list:
    return [[encode_complex(z) for z in row] for row in np.asarray(a)]


def _depth(value) -> int:
    d = 0
    while isinstance(value, list) and value:
        value = value[0]
        d += 1
    return d


def _matrix_list(value, where: str) -> List[np.ndarray]:
    # one matrix has depth 3 (rows, entries, pair); a list of matrices depth 4
    depth = _depth(value)
    if depth == 3:
        return [parse_matrix(value, where)]
    if depth == 4:
        return [parse_matrix(m, f"{where}[{k}]") for k, m in enumerate(value)]
    raise ConfigError("expected a matrix or a list of matrices", where)


# ---------------------------------------------------------------------------
# rows


def _param_scalar(entry: dict, key: str, where: str, default=1.0) -> complex:
    if key not in entry:
        return default
    v = entry[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return complex(v)
    return parse_complex(v, f"{where}.{key}")


def _param_int(entry: dict, key: str, where: str) -> int:
    if key not in entry:
        raise ConfigError(f"missing field {key!r}", where)
    v = entry[key]
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError("expected an integer", f"{where}.{key}")
    return v


def parse_gallery_row(entry: dict, where: str) -> dynamics.RowOperator:
    name = entry["gallery"]
    if name not in dynamics.GALLERY:
        raise UnknownName(f"unknown gallery entry {name!r}", f"{where}.gallery")
    D = _param_int(entry, "D", where)
    try:
        if name == "odometer":
            return dynamics.odometer(D)
        if name == "bilateral_odometer":
            return dynamics.bilateral_odometer(D)
        if name == "binary_weight_unitary":
            return dynamics.gallery(name, D=D, lam=_param_scalar(entry, "lam", where),
                                    mu=_param_scalar(entry, "mu", where))
        if name == "clock_shift":
            part = entry.get("part", "clock")
            if part not in ("clock", "shift"):
                raise UnknownName(f"unknown clock_shift part {part!r}", f"{where}.part")
            clock, shift = dynamics.gallery(name, D=D)
            return clock if part == "clock" else shift
        form = entry.get("form", "diagonal")
        if form not in ("diagonal", "swap"):
            raise UnknownName(f"unknown bilateral_swap form {form!r}", f"{where}.form")
        forms = dynamics.gallery(name, D=D, lam=_param_scalar(entry, "lam", where),
                                 mu=_param_scalar(entry, "mu", where))
        return forms[form]
    except ConfigError:
        raise
    except LabError as exc:
        raise ConfigError(str(exc), where) from None


def parse_row(entry, where: str) -> dynamics.RowOperator:
    if not isinstance(entry, dict):
        raise ConfigError("a row must be an object", where)
    if "gallery" in entry:
        return parse_gallery_row(entry, where)
    for key in ("u", "v"):
        if key not in entry:
            raise ConfigError(f"missing field {key!r}", where)
    u = _matrix_list(entry["u"], f"{where}.u")
    v = _matrix_list(entry["v"], f"{where}.v")
    window = entry.get("window")
    if window is not None and (not isinstance(window, list)
                               or not all(isinstance(i, int) for i in window)):
        raise ConfigError("window must be a list of integers", f"{where}.window")
    try:
        return dynamics.RowOperator(tuple(u), tuple(v), None if window is None else tuple(window))
    except LabError as exc:
        raise ConfigError(str(exc), where) from None


def parse_algebra(value, h: int, where: str = "algebra"):
    if isinstance(value, str):
        if value not in ALGEBRA_NAMES:
            raise UnknownName(f"unknown algebra {value!r}", where)
        return value
    mats = _matrix_list(value, where)
    if any(m.shape != (h, h) for m in mats):
        raise ConfigError(f"algebra matrices must be {h}x{h}", where)
    return mats


# ---------------------------------------------------------------------------
# top level


def config_from_dict(raw: dict) -> Config:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    kind = raw.get("kind")
    if kind not in ("free", "abelian"):
        raise ConfigError("kind must be 'free' or 'abelian'", "kind")
    L = raw.get("L")
    if not isinstance(L, int) or isinstance(L, bool) or L < 0:
        raise ConfigError("L must be a non-negative integer", "L")
    rows_raw = raw.get("rows")
    if not isinstance(rows_raw, list) or not rows_raw:
        raise ConfigError("rows must be a non-empty list", "rows")
    rows = [parse_row(r, f"rows[{i}]") for i, r in enumerate(rows_raw)]
    h = rows[0].h
    if any(r.h != h for r in rows):
        raise ConfigError("all rows must act on the same H", "rows")
    if "d" in raw and raw["d"] != len(rows):
        raise ConfigError(f"d={raw['d']} does not match {len(rows)} rows", "d")
    if "h" in raw and raw["h"] != h:
        raise ConfigError(f"h={raw['h']} does not match row size {h}", "h")
    algebra = parse_algebra(raw.get("algebra", "full"), h)

    tasks = raw.get("tasks", list(TASKS))
    if not isinstance(tasks, list):
        raise ConfigError("tasks must be a list", "tasks")
    for i, t in enumerate(tasks):
        if t not in TASKS:
            raise UnknownName(f"unknown task {t!r}", f"tasks[{i}]")
    # run in canonical order, each task once
    tasks = [t for t in TASKS if t in tasks]

    tolerances = dict(DEFAULT_TOLERANCES)
    tol_raw = raw.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ConfigError("tolerances must be an object", "tolerances")
    for k, v in tol_raw.items():
        if k not in TASKS:
            raise UnknownName(f"unknown task {k!r}", f"tolerances.{k}")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or v <= 0:
            raise ConfigError("tolerance must be a positive number", f"tolerances.{k}")
        tolerances[k] = float(v)

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a non-negative integer", "seed")
    fmt = raw.get("format", "json")
    if fmt not in ("json", "text"):
        raise ConfigError("format must be 'json' or 'text'", "format")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("params must be an object", "params")
    return Config(kind, L, rows, algebra, tasks, tolerances, seed, raw.get("out"), fmt,
                  params, raw)


def parse_config(path) -> Config:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}", str(path)) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from None
    return config_from_dict(raw)
