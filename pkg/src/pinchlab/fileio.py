"""JSON input formats for tensors, immersions and sweep corpora.

Tensor file, one of::

    {"dim": 4, "builder": {"name": "fubini_study", "params": {"m": 2}}}
    {"dim": 4, "entries": [{"i": 1, "j": 2, "k": 1, "l": 2, "v": 1.0}, ...]}
    {"dim": 4, "components": [[[[...]]]]}

``entries`` use 1-based indices; every entry is spread over its symmetry orbit
(R_ijkl = -R_jikl = -R_ijlk = R_klij) and unlisted orbits are zero.

Immersion file::

    {"ambient": <tensor> | {"dim": N, "tangential": <tensor>, "scalars": {...}},
     "tangent_frame": n | [[...], ...],
     "B": [[[...]]] | {"umbilic": {"radius": r, "codim": 1}} | {"zero": {"codim": 1}},
     "ambient_scalars": {"k_max": ..., ...}}
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .curvature import (
    VALIDATION_TOL,
    CurvatureTensor,
    constant_curvature,
    fubini_study,
    kulkarni_nomizu,
    new_curvature,
    random_algebraic,
)
from .errors import InputFormatError, PinchlabError, SymmetryViolation
from .submanifold import AmbientRestriction, SecondFundamentalForm, restrict_ambient

BUILDERS = {
    "constant_curvature": (lambda dim, c: constant_curvature(dim, c), {"c": "float"}),
    "flat": (lambda dim: constant_curvature(dim, 0.0), {}),
    "fubini_study": (lambda dim, m=None: fubini_study(m if m is not None else dim // 2), {"m": "int, dim = 2m"}),
    "random_algebraic": (lambda dim, seed: random_algebraic(dim, seed), {"seed": "int"}),
    "kulkarni_nomizu": (lambda dim, a, b: kulkarni_nomizu(np.asarray(a), np.asarray(b)),
                        {"a": "dim x dim symmetric matrix", "b": "dim x dim symmetric matrix"}),
}


def builder_catalog() -> list[dict]:
    return [{"name": k, "params": {"dim": "int", **p}} for k, (_, p) in BUILDERS.items()]


class _Source:
    """Raw text plus a label, for error messages with line context."""

    def __init__(self, text: str, label: str = "<input>"):
        self.text = text
        self.label = label

    def line_of(self, pos: int) -> int:
        return self.text.count("\n", 0, pos) + 1

    def error(self, msg: str, pos: int | None = None) -> InputFormatError:
        where = f"{self.label}:{self.line_of(pos)}" if pos is not None else self.label
        return InputFormatError(f"{where}: {msg}")


def _parse(text: str, label: str):
    src = _Source(text, label)
    try:
        return json.loads(text), src
    except json.JSONDecodeError as e:
        raise InputFormatError(f"{label}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None


def read_source(path) -> tuple[object, _Source]:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise InputFormatError(f"{path}: cannot read file: {e.strerror}") from None
    return _parse(text, str(path))


def _entry_positions(src: _Source) -> list[int]:
    """Character offsets of each element of the first "entries" array, for line numbers."""
    key = src.text.find('"entries"')
    if key < 0:
        return []
    pos = src.text.find("[", key) + 1
    dec = json.JSONDecoder()
    out = []
    text = src.text
    while pos < len(text):
        while pos < len(text) and text[pos] in " \t\r\n,":
            pos += 1
        if pos >= len(text) or text[pos] == "]":
            break
        out.append(pos)
        try:
            _, pos = dec.raw_decode(text, pos)
        except json.JSONDecodeError:
            break
    return out


_ORBIT = ((0, 1, 2, 3, 1), (1, 0, 2, 3, -1), (0, 1, 3, 2, -1), (1, 0, 3, 2, 1),
          (2, 3, 0, 1, 1), (3, 2, 0, 1, -1), (2, 3, 1, 0, -1), (3, 2, 1, 0, 1))


def _from_entries(dim: int, entries, src: _Source, tol: float) -> CurvatureTensor:
    R = np.zeros((dim,) * 4)
    seen = np.zeros((dim,) * 4, dtype=bool)
    lines = _entry_positions(src)
    for e_no, e in enumerate(entries):
        pos = lines[e_no] if e_no < len(lines) else None
        if not isinstance(e, dict) or not {"i", "j", "k", "l", "v"} <= set(e):
            raise src.error(f"entry {e_no + 1} must be an object with keys i, j, k, l, v", pos)
        try:
            idx = tuple(int(e[c]) - 1 for c in "ijkl")
            v = float(e["v"])
        except (TypeError, ValueError):
            raise src.error(f"entry {e_no + 1} has non-numeric fields", pos) from None
        if any(not 0 <= a < dim for a in idx):
            raise src.error(f"entry {e_no + 1} index {tuple(a + 1 for a in idx)} out of range 1..{dim}", pos)
        for p0, p1, p2, p3, sgn in _ORBIT:
            t = (idx[p0], idx[p1], idx[p2], idx[p3])
            val = sgn * v
            if seen[t] and abs(R[t] - val) > tol:
                name = "pair symmetry" if p0 >= 2 else "antisymmetry"
                where = f"{src.label}:{src.line_of(pos)}" if pos is not None else src.label
                raise SymmetryViolation(name, t, abs(R[t] - val), f"{where}: entry {e_no + 1}")
            R[t] = val
            seen[t] = True
    try:
        return new_curvature(dim, R, tol)
    except SymmetryViolation as e:
        raise SymmetryViolation(e.identity, e.index, e.residual, src.label) from None


def tensor_from_obj(obj, src: _Source) -> CurvatureTensor:
    if not isinstance(obj, dict) or "dim" not in obj:
        raise src.error('tensor must be an object with a "dim" field')
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 2:
        raise src.error(f'"dim" must be an integer >= 2, got {dim!r}')
    tol = float(obj.get("tol", VALIDATION_TOL))
    kinds = [k for k in ("builder", "entries", "components") if k in obj]
    if len(kinds) != 1:
        raise src.error('tensor needs exactly one of "builder", "entries", "components"')
    if "builder" in obj:
        b = obj["builder"]
        name = b.get("name") if isinstance(b, dict) else None
        if name not in BUILDERS:
            raise src.error(f"unknown builder {name!r}; known: {', '.join(BUILDERS)}")
        try:
            R = BUILDERS[name][0](dim, **b.get("params", {}))
        except TypeError as e:
            raise src.error(f"bad parameters for builder {name!r}: {e}") from None
        if R.dim != dim:
            raise src.error(f"builder {name!r} produced dim {R.dim}, file says {dim}")
        return R
    if "entries" in obj:
        if not isinstance(obj["entries"], list):
            raise src.error('"entries" must be a list')
        return _from_entries(dim, obj["entries"], src, tol)
    try:
        return new_curvature(dim, obj["components"], tol)
    except (TypeError, ValueError) as e:
        if isinstance(e, PinchlabError):
            raise
        raise src.error(f'"components" is not a numeric array: {e}') from None


def load_tensor(path) -> CurvatureTensor:
    obj, src = read_source(path)
    return tensor_from_obj(obj, src)


def loads_tensor(text: str, label: str = "<string>") -> CurvatureTensor:
    obj, src = _parse(text, label)
    return tensor_from_obj(obj, src)


def _second_fundamental_form(form, n: int, src: _Source) -> SecondFundamentalForm:
    if isinstance(form, dict):
        if "umbilic" in form:
            p = form["umbilic"]
            return SecondFundamentalForm.umbilic(n, float(p["radius"]), int(p.get("codim", 1)))
        if "zero" in form:
            return SecondFundamentalForm.zero(n, int(form["zero"].get("codim", 1)))
        raise src.error('"B" object must be {"umbilic": ...} or {"zero": ...}')
    try:
        return SecondFundamentalForm(np.asarray(form, dtype=float))
    except (TypeError, ValueError) as e:
        if isinstance(e, PinchlabError):
            raise
        raise src.error(f'bad "B": {e}') from None


def immersion_from_obj(obj, src: _Source, config=None) -> tuple[AmbientRestriction, SecondFundamentalForm]:
    if not isinstance(obj, dict) or "ambient" not in obj or "B" not in obj:
        raise src.error('immersion needs "ambient" and "B"')
    amb = obj["ambient"]
    scalars = obj.get("ambient_scalars")
    if isinstance(amb, dict) and "tangential" in amb:
        RT = tensor_from_obj(amb["tangential"], src)
        N = amb.get("dim")
        sc = {**(amb.get("scalars") or {}), **(scalars or {})}
        restriction = AmbientRestriction.from_scalars(RT, N, **sc)
    else:
        Rbar = tensor_from_obj(amb, src)
        frame = obj.get("tangent_frame")
        restriction = restrict_ambient(Rbar, frame, config, scalars=scalars)
    B = _second_fundamental_form(obj["B"], restriction.n, src)
    return restriction, B


def load_immersion(path, config=None):
    obj, src = read_source(path)
    return immersion_from_obj(obj, src, config)


def is_immersion(obj) -> bool:
    return isinstance(obj, dict) and "ambient" in obj


def to_jsonable(x):
    """Recursively convert numpy scalars/arrays and dataclass reports to plain JSON types."""
    if hasattr(x, "to_dict"):
        return to_jsonable(x.to_dict())
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return x


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"
