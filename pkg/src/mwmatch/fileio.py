"""On-disk formats for the command-line tools: UTF-8 JSON, one object per
file, format_version 1 throughout.

Instance files carry the n(n-1)/2 stored blocks (i < j only) and may
embed ground-truth permutations. Solution files carry the n permutation
maps. Points files carry n sets of m points in R^d plus optional integer
correspondence labels. Floats are emitted through Python's shortest
round-trip repr, so every written file re-parses to equal values and
re-runs are byte-identical.
"""

from __future__ import annotations

import json

import numpy as np

from .assignment import Perm
from .errors import ParseError, ValidationError
from .matchmodel import SimilarityTensor, Solution, validate_point_sets

FORMAT_VERSION = 1


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def _dump_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, separators=(",", ":"))
        fh.write("\n")


def _expect_int(obj, key, minimum, where):
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise ValidationError(f"{where}: field {key!r} must be an integer >= {minimum}")
    return v


def _check_version(obj, where):
    if not isinstance(obj, dict):
        raise ValidationError(f"{where}: top level must be a JSON object")
    if obj.get("format_version") != FORMAT_VERSION:
        raise ValidationError(f"{where}: unsupported format_version {obj.get('format_version')!r}")


def _perm_rows(rows, n, m, where):
    if not isinstance(rows, list) or len(rows) != n:
        raise ValidationError(f"{where}: expected {n} permutation rows")
    perms = []
    for row in rows:
        if not isinstance(row, list) or len(row) != m:
            raise ValidationError(f"{where}: each permutation row must have {m} entries")
        try:
            perms.append(Perm(row))
        except (ValidationError, ValueError, TypeError) as exc:
            raise ValidationError(f"{where}: bad permutation row: {exc}") from exc
    return Solution(tuple(perms))


def write_instance(path: str, tensor: SimilarityTensor, truth: Solution | None = None) -> None:
    blocks = []
    for i, j in tensor.pairs():
        blocks.append({"i": i, "j": j, "rows": tensor.block(i, j).tolist()})
    obj = {
        "format_version": FORMAT_VERSION,
        "n": tensor.n,
        "m": tensor.m,
        "blocks": blocks,
    }
    if truth is not None:
        obj["truth"] = [p.map.tolist() for p in truth.perms]
    _dump_json(path, obj)


def read_instance(path: str, strict: bool = False):
    """Load (tensor, truth-or-None). strict rejects entries outside [0, 1]."""
    obj = _load_json(path)
    _check_version(obj, path)
    n = _expect_int(obj, "n", 1, path)
    m = _expect_int(obj, "m", 1, path)
    raw = obj.get("blocks")
    if not isinstance(raw, list):
        raise ValidationError(f"{path}: field 'blocks' must be a list")
    blocks = {}
    for entry in raw:
        if not isinstance(entry, dict):
            raise ValidationError(f"{path}: each block must be an object")
        i = entry.get("i")
        j = entry.get("j")
        if not isinstance(i, int) or not isinstance(j, int) or not (0 <= i < j < n):
            raise ValidationError(f"{path}: bad block indices ({i!r}, {j!r})")
        if (i, j) in blocks:
            raise ValidationError(f"{path}: duplicate block ({i}, {j})")
        rows = entry.get("rows")
        try:
            arr = np.array(rows, dtype=np.float64)
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"{path}: block ({i}, {j}) rows are not numeric") from exc
        blocks[(i, j)] = arr
    tensor = SimilarityTensor(n, m, blocks, check_range=strict)
    truth = None
    if "truth" in obj:
        truth = _perm_rows(obj["truth"], n, m, path)
    return tensor, truth


def write_solution(path: str, s: Solution) -> None:
    obj = {
        "format_version": FORMAT_VERSION,
        "n": s.n,
        "m": s.m,
        "perms": [p.map.tolist() for p in s.perms],
    }
    _dump_json(path, obj)


def read_solution(path: str) -> Solution:
    obj = _load_json(path)
    _check_version(obj, path)
    n = _expect_int(obj, "n", 1, path)
    m = _expect_int(obj, "m", 1, path)
    return _perm_rows(obj.get("perms"), n, m, path)


def write_points(path: str, points, labels=None) -> None:
    pts = validate_point_sets(points)
    n, m, d = pts.shape
    obj = {"n": n, "m": m, "d": d, "sets": pts.tolist()}
    if labels is not None:
        obj["labels"] = [[int(x) for x in row] for row in labels]
    _dump_json(path, obj)


def read_points(path: str):
    """Load (points (n, m, d), labels-or-None). Labels are validated as a
    consistent correspondence: distinct within each set, same label set
    everywhere."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise ValidationError(f"{path}: top level must be a JSON object")
    n = _expect_int(obj, "n", 1, path)
    m = _expect_int(obj, "m", 1, path)
    d = _expect_int(obj, "d", 1, path)
    sets = obj.get("sets")
    try:
        pts = np.array(sets, dtype=np.float64)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: field 'sets' is not numeric") from exc
    if pts.shape != (n, m, d):
        raise ValidationError(f"{path}: 'sets' has shape {pts.shape}, header says {(n, m, d)}")
    pts = validate_point_sets(pts)
    labels = None
    if "labels" in obj:
        raw = obj["labels"]
        if (not isinstance(raw, list) or len(raw) != n
                or any(not isinstance(r, list) or len(r) != m for r in raw)):
            raise ValidationError(f"{path}: 'labels' must be an {n} x {m} integer grid")
        for row in raw:
            for x in row:
                if not isinstance(x, int) or isinstance(x, bool):
                    raise ValidationError(f"{path}: labels must be integers")
        base = set(raw[0])
        if len(base) != m:
            raise ValidationError(f"{path}: labels within a set must be distinct")
        for row in raw:
            if set(row) != base or len(set(row)) != m:
                raise ValidationError(f"{path}: every set must carry the same label set")
        labels = raw
    return pts, labels


def truth_from_labels(labels) -> Solution:
    """Ground-truth permutations implied by correspondence labels.

    Elements sharing a label correspond; each permutation lists the set's
    element indices in global label-rank order, which makes the implied
    ideal blocks match the "same label" relation exactly.
    """
    rank = {lab: r for r, lab in enumerate(sorted(labels[0]))}
    perms = []
    for row in labels:
        ranks = np.array([rank[lab] for lab in row], dtype=np.int64)
        perms.append(Perm(np.argsort(ranks)))
    return Solution(tuple(perms))
