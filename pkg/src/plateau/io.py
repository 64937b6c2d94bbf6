"""Output files: 17-digit JSON, CSV tables, and the boundary data of a solve."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .contour import Contour
from .douglas import Reparameterization
from .exceptions import ParseError


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in seq) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj)
    return json.dumps(str(obj))


def dumps(obj, indent=2):
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def write_json(obj, path):
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


def write_csv(path, header, rows):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_history(history, path):
    return write_csv(path, ["iteration", "energy", "grad_norm"],
                     [(int(it), float(f), float(g)) for it, f, g in history])


def write_boundary(contour, phi, path):
    """Contour samples and node angles, enough to rebuild a solve exactly.

    Rows of kind ``sample`` hold the contour's stored points; rows of kind
    ``node`` hold the angle ``phi_j`` of contour node ``t_j = j / N``.
    """
    n = contour.dimension
    header = ["kind", "index", "value"] + [f"x{k}" for k in range(n)]
    rows = [("meta", 0, 1.0 if contour.polygon else 0.0) + ("",) * n]
    rows += [("sample", j, j / contour.n_samples) + tuple(float(x) for x in p)
             for j, p in enumerate(contour.samples)]
    rows += [("node", j, float(a)) + ("",) * n for j, a in enumerate(phi.angles)]
    return write_csv(path, header, rows)


def read_boundary(path, anchors):
    """Inverse of :func:`write_boundary`: ``(Contour, Reparameterization)``."""
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    samples, angles, polygon = [], [], False
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if not header or header[:3] != ["kind", "index", "value"]:
            raise ParseError(f"{path}: not a boundary file")
        try:
            for row in rd:
                if row[0] == "meta":
                    polygon = float(row[2]) != 0.0
                elif row[0] == "sample":
                    samples.append([float(x) for x in row[3:]])
                elif row[0] == "node":
                    angles.append(float(row[2]))
        except (ValueError, IndexError):
            raise ParseError(f"{path}: malformed row") from None
    if not samples or not angles:
        raise ParseError(f"{path}: missing samples or nodes")
    contour = Contour(np.array(samples), {"kind": "file"}, polygon)
    phi = Reparameterization.from_angles(np.array(angles), anchors=np.asarray(anchors))
    return contour, phi
