"""JSON configuration parsing and CSV/JSON table output with metadata headers."""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
import warnings
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .clicks import ClickDistribution, DetectorConfig
from .homodyne import (
    BeamSplitter,
    LocalOscillator,
    SchemeArms,
    eight_port_arms,
    four_port_arms,
    two_mode_arms,
    unbalanced_scheme,
)
from .imperfections import SpectralSetup, gaussian_profile
from .sampler import ClickHistogram
from .states import CoherentSuperposition, Mixture, coherent, make_cat, make_two_mode_cat, vacuum

__all__ = [
    "ConfigError",
    "parse_complex",
    "state_from_dict",
    "state_to_dict",
    "detector_from_dict",
    "scheme_from_dict",
    "spectral_from_dict",
    "config_hash",
    "metadata",
    "Table",
    "write_table",
    "read_table",
    "distribution_table",
    "distribution_from_table",
    "histogram_table",
    "histogram_from_table",
    "load_json",
]

MAX_DIODES = 256
SCHEMES = ("unbalanced4", "balanced4", "four_port", "eight", "two_mode")


class ConfigError(ValueError):
    """Invalid run, state, scheme or spectral configuration."""


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def parse_complex(value, what: str = "value") -> complex:
    """Accept a real number, ``[re, im]``, ``{"re":, "im":}``, ``{"abs":, "arg":}`` or a Python complex string."""
    try:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return complex(value)
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, Mapping):
            if "abs" in value:
                return complex(float(value["abs"]) * np.exp(1j * float(value.get("arg", 0.0))))
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        if isinstance(value, str):
            return complex(value.replace(" ", ""))
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read {what} = {value!r} as a complex number") from exc
    raise ConfigError(f"cannot read {what} = {value!r} as a complex number")


def _cx(z: complex) -> list:
    return [float(z.real), float(z.imag)]


# states ---------------------------------------------------------------------

def state_from_dict(spec: Mapping):
    """Build a state from one of the JSON forms.

    ``{"coherent": [a1, ...]}``, ``{"vacuum": modes}``,
    ``{"cat": {"alpha": a, "parity": "even", "two_mode": false}}``,
    ``{"modes": M, "terms": [{"c": c, "alphas": [a1, ...]}, ...]}`` or
    ``{"mixture": [{"weight": w, "state": {...}}, ...]}``.
    """
    if not isinstance(spec, Mapping):
        raise ConfigError("state spec must be a JSON object")
    try:
        if "mixture" in spec:
            items = spec["mixture"]
            if not items:
                raise ConfigError("mixture needs at least one component")
            return Mixture([float(it["weight"]) for it in items], [state_from_dict(it["state"]) for it in items])
        if "coherent" in spec:
            amps = spec["coherent"]
            amps = amps if isinstance(amps, list) and amps and not _is_pair(amps) else [amps]
            return coherent(*(parse_complex(a, "coherent amplitude") for a in amps))
        if "vacuum" in spec:
            return vacuum(int(spec["vacuum"]))
        if "cat" in spec:
            cat = spec["cat"]
            alpha = parse_complex(cat.get("alpha", 1.0), "cat alpha")
            parity = cat.get("parity", "even")
            return (make_two_mode_cat if cat.get("two_mode") else make_cat)(alpha, parity)
        if "terms" in spec:
            terms = spec["terms"]
            modes = int(spec.get("modes", len(terms[0]["alphas"])))
            coeffs = [parse_complex(t["c"], "term coefficient") for t in terms]
            amps = [[parse_complex(a, "term amplitude") for a in t["alphas"]] for t in terms]
            if any(len(a) != modes for a in amps):
                raise ConfigError(f"every term needs {modes} amplitudes")
            return CoherentSuperposition(coeffs, amps)
    except (KeyError, IndexError, TypeError) as exc:
        raise ConfigError(f"malformed state spec: missing or bad field {exc}") from exc
    raise ConfigError(f"unknown state spec keys {sorted(spec)}")


def _is_pair(v) -> bool:
    return len(v) == 2 and all(isinstance(x, (int, float)) for x in v)


def state_to_dict(state) -> dict:
    if isinstance(state, Mixture):
        return {"mixture": [{"weight": float(w), "state": state_to_dict(s)}
                            for w, s in zip(state.weights, state.components)]}
    return {
        "modes": state.modes,
        "terms": [{"c": _cx(c), "alphas": [_cx(a) for a in row]} for c, row in zip(state.coeffs, state.amplitudes)],
    }


# detectors and schemes --------------------------------------------------------

def detector_from_dict(spec: Mapping | None) -> DetectorConfig:
    spec = dict(spec or {})
    unknown = set(spec) - {"N", "eta", "nu"}
    if unknown:
        raise ConfigError(f"unknown detector fields {sorted(unknown)}")
    if int(spec.get("N", 8)) > MAX_DIODES:
        warnings.warn(f"N = {spec['N']} capped at {MAX_DIODES} diodes", stacklevel=2)
        spec["N"] = MAX_DIODES
    try:
        return DetectorConfig(int(spec.get("N", 8)), float(spec.get("eta", 1.0)), float(spec.get("nu", 0.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid detector: {exc}") from exc


def scheme_from_dict(spec: Mapping) -> SchemeArms:
    """``{"scheme": kind, "t":, "r":, "beta":, "beta2":, "detector": {...}}``."""
    kind = spec.get("scheme", "unbalanced4")
    if kind not in SCHEMES:
        raise ConfigError(f"unknown scheme {kind!r}; choose one of {', '.join(SCHEMES)}")
    det = detector_from_dict(spec.get("detector"))
    beta = LocalOscillator(parse_complex(spec.get("beta", 4.0), "beta"))
    try:
        if kind in ("unbalanced4", "four_port"):
            bs = BeamSplitter(parse_complex(spec.get("t", 0.8), "t"), parse_complex(spec.get("r", 0.6), "r"))
            return unbalanced_scheme(bs, beta, det) if kind == "unbalanced4" else four_port_arms(bs, beta, det, det)
        if kind == "balanced4":
            bs = BeamSplitter(1 / math.sqrt(2), 1 / math.sqrt(2))
            return four_port_arms(bs, beta, det, det)
        if kind == "eight":
            return eight_port_arms(beta, det)
        beta2 = LocalOscillator(parse_complex(spec.get("beta2", spec.get("beta", 4.0)), "beta2"))
        return two_mode_arms(beta, beta2, det)
    except ValueError as exc:
        raise ConfigError(f"invalid {kind} scheme: {exc}") from exc


def _profile(omega, spec, what):
    if isinstance(spec, Mapping) and "gaussian" in spec:
        g = spec["gaussian"]
        return gaussian_profile(omega, float(g.get("center", 0.0)), float(g["width"]), float(g.get("phase", 0.0)))
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return np.full(omega.shape, float(spec))
    if isinstance(spec, list):
        vals = [parse_complex(v, what) for v in spec]
        if len(vals) != omega.size:
            raise ConfigError(f"{what} has {len(vals)} samples, frequency grid has {omega.size}")
        return np.array(vals)
    raise ConfigError(f"cannot read spectral profile {what}")


def spectral_from_dict(spec: Mapping) -> SpectralSetup:
    """Spectral setup: ``{"omega": {"start", "stop", "num"} | [...], "G", "f_si", "f_lo", "t", "r", "beta"}``.

    Profiles are a number, a list of samples, or ``{"gaussian": {"center", "width", "phase"}}``.
    """
    grid = spec.get("omega", {"start": -6.0, "stop": 6.0, "num": 1201})
    omega = np.linspace(float(grid["start"]), float(grid["stop"]), int(grid["num"])) if isinstance(grid, Mapping) \
        else np.asarray(grid, dtype=float)
    try:
        return SpectralSetup(
            omega,
            np.real(_profile(omega, spec.get("G", 1.0), "G")),
            _profile(omega, spec.get("f_si", {"gaussian": {"width": 1.0}}), "f_si"),
            _profile(omega, spec.get("f_lo", {"gaussian": {"width": 1.0}}), "f_lo"),
            _profile(omega, spec.get("t", 0.8), "t"),
            _profile(omega, spec.get("r", 0.6), "r"),
            parse_complex(spec.get("beta", 4.0), "beta"),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid spectral setup: {exc}") from exc


# tables -----------------------------------------------------------------------

def config_hash(config: Any) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def metadata(config: Any, **extra) -> dict:
    from . import __version__

    out = {"generator": "clickhomodyne", "version": __version__, "config_hash": config_hash(config)}
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


class Table:
    """Named columns plus metadata; the on-disk form of every CLI output."""

    def __init__(self, columns: Sequence[str], rows: Iterable[Sequence], meta: Mapping | None = None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.meta = dict(meta or {})
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row {r} does not match columns {self.columns}")

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        buf = _io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [[_json_value(x) for x in r] for r in self.rows]
        return json.dumps({"metadata": self.meta, "columns": self.columns, "rows": rows},
                          indent=1, default=_json_default) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown output format {fmt!r}")


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return int(x)
    return x


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def _json_default(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    raise TypeError(f"not JSON serializable: {type(x)}")


def write_table(table: Table, path, fmt: str = "csv"):
    Path(path).write_text(table.render(fmt))


def _number(s: str):
    for kind in (int, float):
        try:
            return kind(s)
        except ValueError:
            pass
    return s


def read_table(path) -> Table:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        obj = json.loads(text)
        rows = [[math.nan if x is None else x for x in r] for r in obj["rows"]]
        return Table(obj["columns"], rows, obj.get("metadata"))
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    columns = next(reader)
    return Table(columns, ([_number(x) for x in row] for row in reader), meta)


def distribution_table(dist: ClickDistribution, meta: Mapping | None = None) -> Table:
    cols = [f"k{i + 1}" for i in range(dist.ndim)] + ["prob"]
    return Table(cols, dist.rows(), meta)


def _tensor_from_rows(table: Table, value: str, dtype):
    kcols = [c for c in table.columns if c != value]
    if value not in table.columns or not kcols or any(not c.startswith("k") for c in kcols):
        raise ConfigError(f"expected columns k1,...,kA,{value}; got {','.join(table.columns)}")
    idx = np.array([[int(r[table.columns.index(c)]) for c in kcols] for r in table.rows], dtype=int)
    if np.any(idx < 0):
        raise ConfigError("click counts must be nonnegative")
    sizes = tuple(int(m) for m in idx.max(axis=0))
    out = np.zeros(tuple(n + 1 for n in sizes), dtype=dtype)
    vals = table.column(value)
    for i, v in zip(idx, vals):
        out[tuple(i)] += v
    return sizes, out


def distribution_from_table(table: Table, sizes: Sequence[int] | None = None) -> ClickDistribution:
    found, probs = _tensor_from_rows(table, "prob", float)
    return ClickDistribution(*_pad(found, probs, sizes))


def histogram_table(hist: ClickHistogram, meta: Mapping | None = None) -> Table:
    cols = [f"k{i + 1}" for i in range(len(hist.sizes))] + ["count"]
    rows = [(*idx, int(c)) for idx, c in np.ndenumerate(hist.counts)]
    return Table(cols, rows, meta)


def histogram_from_table(table: Table, sizes: Sequence[int] | None = None) -> ClickHistogram:
    """Ingest a (possibly externally measured) ``k1,...,count`` histogram.

    Without explicit ``sizes`` the detector sizes are the largest ``k``
    listed per column, so measured files should list every outcome.
    """
    found, counts = _tensor_from_rows(table, "count", np.int64)
    sizes, counts = _pad(found, counts, sizes)
    return ClickHistogram(sizes, counts, int(counts.sum()))


def _pad(found, tensor, sizes):
    if sizes is None:
        return found, tensor
    sizes = tuple(int(n) for n in sizes)
    if len(sizes) != len(found) or any(f > n for f, n in zip(found, sizes)):
        raise ConfigError(f"outcomes {found} exceed detector sizes {sizes}")
    out = np.zeros(tuple(n + 1 for n in sizes), dtype=tensor.dtype)
    out[tuple(slice(0, f + 1) for f in found)] = tensor
    return sizes, out
