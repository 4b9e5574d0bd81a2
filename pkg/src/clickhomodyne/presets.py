"""Parameter sweeps of the witnesses and the hard-coded figure presets.

A sweep config is a plain dict::

    {"states": {"even": {"cat": {"alpha": 1, "parity": "even"}}},
     "scheme": {"scheme": "unbalanced4", "t": 0.8, "r": 0.6, "beta": 4,
                "detector": {"N": 8, "eta": 0.5, "nu": 0}},
     "criteria": ["variance"],
     "sweep": {"phi": {"start": 0, "stop": 6.283185307179586, "num": 256, "endpoint": false}},
     "fixed": {"phi": 1.5707963267948966}}

Swept variables form an outer-product grid in the order given.  Output
columns are the variables followed by ``<criterion>_<state>`` per pair.
"""

from __future__ import annotations

import copy
import math
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Mapping

import numpy as np

from .clicks import ArmDescriptor, DetectorConfig, click_statistics, photoelectric_statistics
from .io import ConfigError, Table, detector_from_dict, metadata, scheme_from_dict, state_from_dict
from .imperfections import thermal_variance_criterion
from .witnesses import (
    covariance_minor,
    fourth_order_criterion,
    moment_matrix,
    nonlinear_squeezing,
    scheme_forms,
    sum_variance,
    two_mode_criteria,
    variance,
    variance_criterion,
    xp_covariance_criterion,
)

__all__ = ["CRITERIA", "VARIABLES", "FIGURES", "figure_config", "grid_values", "run_sweep", "run_stats", "run_figure",
           "criterion_statistic"]

VARIABLES = ("phi", "phi1", "phi2", "N", "eta", "nu", "nbar")

TWO_PI = 2 * math.pi


def _variance(state, scheme, nbar):
    if nbar:
        return thermal_variance_criterion(state, scheme.arms[0], nbar).value
    return variance_criterion(state, scheme).value


def _fourth(state, scheme, nbar):
    if scheme.arms[0].N < 4:
        return math.nan
    return fourth_order_criterion(state, scheme).value


def _x_var(state, scheme, nbar):
    return nonlinear_squeezing(state, scheme, which="x").value


def _p_var(state, scheme, nbar):
    return nonlinear_squeezing(state, scheme, which="p").value


def _two_mode(index):
    def fn(state, scheme, nbar):
        return two_mode_criteria(state, scheme)[index].value
    return fn


# name -> (function, schemes it applies to)
CRITERIA = {
    "variance": (_variance, ("unbalanced4",)),
    "fourth_order": (_fourth, ("unbalanced4",)),
    "nonlinear_squeezing": (_x_var, ("balanced4", "four_port", "eight")),
    "sum_variance": (lambda st, sc, nb: sum_variance(st, sc).value, ("balanced4", "four_port")),
    "x_variance": (_x_var, ("eight",)),
    "p_variance": (_p_var, ("eight",)),
    "xp_covariance": (lambda st, sc, nb: xp_covariance_criterion(st, sc).value, ("eight",)),
    "variance_1": (_two_mode(0), ("two_mode",)),
    "variance_2": (_two_mode(1), ("two_mode",)),
    "covariance": (_two_mode(2), ("two_mode",)),
}


def criterion_statistic(name: str, scheme):
    """``provider -> value`` for a named criterion on the arms of ``scheme`` (for empirical data)."""
    if name not in CRITERIA:
        raise ConfigError(f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)}")
    if scheme.kind not in CRITERIA[name][1]:
        raise ConfigError(f"criterion {name!r} does not apply to scheme {scheme.kind!r}")
    if name == "variance":
        return lambda p: variance(p, [1.0])
    if name == "fourth_order":
        return lambda p: moment_matrix(p, 4).determinant()
    if name in ("nonlinear_squeezing", "x_variance"):
        return lambda p: variance(p, scheme_forms(scheme, "x"))
    if name == "p_variance":
        return lambda p: variance(p, scheme_forms(scheme, "p"))
    if name == "sum_variance":
        return lambda p: variance(p, scheme_forms(scheme, "x", sign=1.0))
    if name == "xp_covariance":
        return lambda p: covariance_minor(p, scheme_forms(scheme, "x"), scheme_forms(scheme, "p"))
    w1, w2 = scheme_forms(scheme, "x", mode=0), scheme_forms(scheme, "x", mode=1)
    if name == "covariance":
        return lambda p: covariance_minor(p, w1, w2)
    w = w1 if name == "variance_1" else w2
    return lambda p: variance(p, w)


def grid_values(spec) -> np.ndarray:
    """A grid is a list of values or ``{"start", "stop", "num", "endpoint"}``."""
    if isinstance(spec, Mapping):
        vals = np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]),
                           endpoint=bool(spec.get("endpoint", True)))
    else:
        vals = np.atleast_1d(np.asarray(spec, dtype=float))
    if vals.size == 0:
        raise ConfigError("sweep grids must be non-empty")
    return vals


def _validate(config: Mapping):
    for key in ("states", "scheme", "criteria"):
        if key not in config:
            raise ConfigError(f"sweep config needs {key!r}")
    kind = config["scheme"].get("scheme", "unbalanced4")
    for name in config["criteria"]:
        if name not in CRITERIA:
            raise ConfigError(f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)}")
        if kind not in CRITERIA[name][1]:
            raise ConfigError(f"criterion {name!r} does not apply to scheme {kind!r}")
    for var in list(config.get("sweep", {})) + list(config.get("fixed", {})):
        if var not in VARIABLES:
            raise ConfigError(f"unknown sweep variable {var!r}; choose from {', '.join(VARIABLES)}")
    nbar_used = "nbar" in config.get("sweep", {}) or config.get("fixed", {}).get("nbar")
    if nbar_used and (kind != "unbalanced4" or set(config["criteria"]) - {"variance"}):
        raise ConfigError("thermal LO noise (nbar) is modelled for the unbalanced variance criterion only")


def _evaluate(args):
    config, point = args
    values = dict(config.get("fixed", {}))
    values.update(point)
    scheme = scheme_from_dict(config["scheme"])
    det = scheme.arms[0].detector
    if {"N", "eta", "nu"} & set(values):
        det = DetectorConfig(int(values.get("N", det.N)), float(values.get("eta", det.eta)),
                             float(values.get("nu", det.nu)))
        scheme = scheme.with_detector(det)
    if "phi" in values:
        scheme = scheme.at_phase(float(values["phi"]))
    for mode, key in enumerate(("phi1", "phi2")):
        if key in values:
            scheme = scheme.at_phase(float(values[key]), mode=mode)
    nbar = float(values.get("nbar", 0.0))
    states = {label: state_from_dict(spec) for label, spec in config["states"].items()}
    row = []
    for crit in config["criteria"]:
        fn = CRITERIA[crit][0]
        for label, state in states.items():
            row.append(float(fn(state, scheme, nbar)))
    return row


def run_sweep(config: Mapping, jobs: int | None = None) -> Table:
    """Evaluate every criterion for every state on the sweep grid; rows in grid order."""
    _validate(config)
    sweep = config.get("sweep", {})
    names = list(sweep)
    grids = [grid_values(sweep[n]) for n in names]
    mesh = np.meshgrid(*grids, indexing="ij") if grids else []
    points = [dict(zip(names, (float(m.flat[i]) for m in mesh))) for i in range(mesh[0].size)] if grids else [{}]
    tasks = [(config, p) for p in points]
    jobs = jobs or os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_evaluate(t) for t in tasks]
    columns = names + [f"{c}_{s}" for c in config["criteria"] for s in config["states"]]
    rows = [[p[n] for n in names] + r for p, r in zip(points, results)]
    return Table(columns, rows, metadata(config))


def run_stats(config: Mapping) -> Table:
    """Direct-detection click statistics next to photoelectric counting statistics."""
    if "states" not in config:
        raise ConfigError("stats config needs 'states'")
    det = detector_from_dict(config.get("detector"))
    n_max = int(config.get("n_max", 16))
    if n_max < 0:
        raise ConfigError("n_max must be >= 0")
    arm = ArmDescriptor(0, 1.0, 0.0, det)
    cols, data = [], []
    for label, spec in config["states"].items():
        st = state_from_dict(spec)
        cols.append(f"click_{label}")
        data.append(click_statistics(st, arm).probabilities)
        cols.append(f"photo_{label}")
        data.append(photoelectric_statistics(st, det.eta, det.nu, n_max))
    size = max(det.N, n_max) + 1
    rows = [[k] + [float(d[k]) if k < d.size else math.nan for d in data] for k in range(size)]
    return Table(["k"] + cols, rows, metadata(config))


def _cat(parity, two_mode=False):
    return {"cat": {"alpha": 1.0, "parity": parity, "two_mode": two_mode}}


_DET = {"N": 8, "eta": 0.5, "nu": 0.0}
_UNBALANCED = {"scheme": "unbalanced4", "t": 0.8, "r": 0.6, "beta": 4.0, "detector": _DET}
_PHI256 = {"start": 0.0, "stop": TWO_PI, "num": 256, "endpoint": False}
_PHI64 = {"start": 0.0, "stop": TWO_PI, "num": 64, "endpoint": False}

FIGURES = {
    2: {
        "kind": "stats",
        "states": {"coherent": {"coherent": [2.0]}, "odd": {"cat": {"alpha": 2.0, "parity": "odd"}},
                   "even": {"cat": {"alpha": 2.0, "parity": "even"}}},
        "detector": {"N": 8, "eta": 1.0, "nu": 0.0},
        "n_max": 24,
    },
    4: {
        "kind": "sweep",
        "states": {"even": _cat("even"), "odd": _cat("odd")},
        "scheme": _UNBALANCED,
        "criteria": ["variance"],
        "sweep": {"phi": _PHI256},
    },
    5: {
        "kind": "sweep",
        "states": {"even": _cat("even")},
        "scheme": _UNBALANCED,
        "criteria": ["variance", "fourth_order"],
        "sweep": {"N": list(range(2, 129, 2))},
        "fixed": {"phi": math.pi / 2},
    },
    6: {
        "kind": "sweep",
        "states": {"even": _cat("even"), "odd": _cat("odd")},
        "scheme": {"scheme": "balanced4", "beta": 4.0, "detector": _DET},
        "criteria": ["nonlinear_squeezing", "sum_variance"],
        "sweep": {"phi": _PHI256},
    },
    7: {
        "kind": "sweep",
        "states": {"even": _cat("even")},
        "scheme": {**_UNBALANCED, "detector": {"N": 8, "eta": 1.0, "nu": 0.0}},
        "criteria": ["variance"],
        "sweep": {"nbar": [round(0.05 * i, 2) for i in range(11)], "phi": _PHI64},
    },
    8: {
        "kind": "sweep",
        "states": {"even": _cat("even")},
        "scheme": {"scheme": "eight", "beta": 4.0, "detector": _DET},
        "criteria": ["x_variance", "p_variance", "xp_covariance"],
        "sweep": {"phi": _PHI64},
    },
    9: {
        "kind": "sweep",
        "states": {"even": _cat("even", two_mode=True)},
        "scheme": {"scheme": "two_mode", "beta": 4.0, "beta2": 4.0, "detector": _DET},
        "criteria": ["variance_1", "variance_2", "covariance"],
        "sweep": {"phi1": _PHI64, "phi2": _PHI64},
    },
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for k, v in (override or {}).items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping) and k not in ("states", "sweep"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def figure_config(number: int, overrides: Mapping | None = None) -> dict:
    """Preset config of a figure, with any field overridden (nested dicts merge)."""
    if number not in FIGURES:
        raise ConfigError(f"no preset for figure {number}; available: {sorted(FIGURES)}")
    return _merge(FIGURES[number], overrides)


def run_figure(number: int, overrides: Mapping | None = None, jobs: int | None = None) -> Table:
    config = figure_config(number, overrides)
    kind = config.pop("kind")
    table = run_stats(config) if kind == "stats" else run_sweep(config, jobs)
    table.meta["figure"] = number
    return table
