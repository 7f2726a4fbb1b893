"""File formats: JSON for structured objects, CSV for point clouds.

Floats are written in shortest round-trip form, so equal inputs give
byte-identical files and every file re-parses to the same values.
"""

import csv
import hashlib
import json
import os

import numpy as np

from .domain import Domain, Grid
from .errors import ConfigurationError
from .measures import measure_from_json

OUT_ENV = "ENTROPIC_OUT"
DOMAIN_ALIASES = {
    "interval": Domain.interval,
    "circle": Domain.circle,
    "square": Domain.unit_square,
    "unit_square": Domain.unit_square,
}


def fmt(x):
    return repr(float(x))


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, np.array([[float(v) for v in row] for row in r])


def parse_domain(spec):
    """A named domain (interval, circle, square) or the path of a domain JSON file."""
    if spec in DOMAIN_ALIASES:
        return DOMAIN_ALIASES[spec]()
    if os.path.exists(spec):
        return Domain.from_json(read_json(spec))
    raise ConfigurationError(f"unknown domain {spec!r}")


def domain_hash(domain):
    return hashlib.sha256(json.dumps(domain.to_json(), sort_keys=True).encode()).hexdigest()[:16]


def measure_document(measure):
    return {"domain": measure.domain.to_json(), "measure": measure.to_json()}


def read_measure(path):
    """Measure from a ``{"domain": ..., "measure": ...}`` document."""
    doc = read_json(path)
    if "domain" not in doc or "measure" not in doc:
        raise ConfigurationError("measure file needs 'domain' and 'measure' entries")
    domain = Domain.from_json(doc["domain"])
    grid = Grid.from_json(doc["grid"]) if "grid" in doc else None
    return measure_from_json(doc["measure"], domain, grid)


def atom_rows(atoms, weights):
    pts = np.asarray(atoms, dtype=float).reshape(len(weights), -1)
    return [(float(w), *map(float, p)) for w, p in zip(weights, pts)]


def atom_header(dim):
    return ["weight", "x"] if dim == 1 else ["weight", "x", "y"]


def cloud_rows(points):
    pts = np.asarray(points, dtype=float)
    pts = pts.reshape(len(pts), -1)
    return [tuple(map(float, p)) for p in pts]


def output_dir(flag_value, default="entropic_out"):
    """Output directory: ``$ENTROPIC_OUT`` if set, else the flag, else ``default``."""
    path = os.environ.get(OUT_ENV) or flag_value or default
    os.makedirs(path, exist_ok=True)
    return path
