"""Suite configuration, orchestration, and deterministic report emission.

Reports are byte-identical for identical config and seed: floats are
printed with 17 significant digits through one code path, keys keep a
fixed order, and timing is kept in memory only, never serialized.
"""

import json
import math
import time

import numpy as np

from . import checks as checkmod
from .convergence import ConvergenceSeries
from .errors import ConfigInvalid, SizeOverflow
from .fock import DIM_CAP

SCHEMA_VERSION = "1"


class SuiteConfig:
    """Validated run parameters shared by every check.

    bins is a single count for verify-style runs and a strictly increasing
    list for convergence sweeps; bins_list presents both uniformly.
    """

    def __init__(self, omega_max=1.0, bins=8, internal_dims=1, truncation=3,
                 seed=42, tolerance=None, checks=None, fmt="json", out=None):
        self.omega_max = omega_max
        self.bins = bins
        self.internal_dims = internal_dims
        self.truncation = truncation
        self.seed = seed
        self.tolerance = tolerance
        self.checks = checks
        self.fmt = fmt
        self.out = out
        self.validate()

    @property
    def bins_list(self):
        return list(self.bins) if isinstance(self.bins, (list, tuple)) else [self.bins]

    def validate(self):
        if not (isinstance(self.omega_max, (int, float)) and self.omega_max > 0):
            raise ConfigInvalid("omega_max must be positive")
        blist = self.bins_list
        if not blist or any(not isinstance(b, int) or b < 1 for b in blist):
            raise ConfigInvalid("bins must be positive integers")
        if any(b >= c for b, c in zip(blist, blist[1:])):
            raise ConfigInvalid("bin counts must be strictly increasing")
        dims = self.internal_dims
        if isinstance(dims, (list, tuple)):
            if any(not isinstance(d, int) or d < 1 for d in dims):
                raise ConfigInvalid("internal_dims must be positive integers")
            if len(dims) != blist[-1]:
                raise ConfigInvalid("internal_dims length must match bins")
            total = sum(dims)
        elif isinstance(dims, int) and dims >= 1:
            total = dims * blist[-1]
        else:
            raise ConfigInvalid("internal_dims must be a positive integer or list")
        if not isinstance(self.truncation, int) or self.truncation < 1:
            raise ConfigInvalid("truncation must be a positive integer")
        if not isinstance(self.seed, int):
            raise ConfigInvalid("seed must be an integer")
        if self.tolerance is not None:
            if not isinstance(self.tolerance, (int, float)) or self.tolerance < 0:
                raise ConfigInvalid("tolerance must be nonnegative")
        if self.fmt not in ("json", "csv"):
            raise ConfigInvalid(f"unknown format {self.fmt!r}")
        if self.checks is not None:
            known = set(checkmod.CHECKS) | set(checkmod.SWEEPS)
            for name in self.checks:
                if name not in known:
                    raise ConfigInvalid(f"unknown check {name!r}")
        # enforce the dimension cap up front: largest bose space requested
        if math.comb(total + self.truncation, self.truncation) > DIM_CAP:
            raise ConfigInvalid(
                f"bose space over {total} modes at truncation "
                f"{self.truncation} exceeds the dimension cap {DIM_CAP}"
            )

    def as_dict(self):
        return {
            "omega_max": self.omega_max,
            "bins": self.bins if isinstance(self.bins, int) else list(self.bins),
            "internal_dims": self.internal_dims
            if isinstance(self.internal_dims, int)
            else list(self.internal_dims),
            "truncation": self.truncation,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "checks": None if self.checks is None else list(self.checks),
            "format": self.fmt,
        }


class CheckResult:
    """One named check with its parameters and named defect values.

    wall_time is informational for the caller and is never serialized,
    keeping reports byte-identical across runs.
    """

    def __init__(self, name, parameters, defects, tolerance, wall_time):
        self.name = name
        self.parameters = parameters
        self.defects = defects
        self.tolerance = tolerance
        self.wall_time = wall_time

    @property
    def passed(self):
        return all(v <= self.tolerance for v in self.defects.values())


def run_verify(config):
    """Run the named exact checks at one grid size."""
    names = config.checks
    if names is None:
        names = checkmod.default_check_names()
    unknown_sweeps = [n for n in names if n in checkmod.SWEEPS]
    names = [n for n in names if n in checkmod.CHECKS]
    if not names and not unknown_sweeps:
        raise ConfigInvalid("no checks selected")
    results = []
    for name in names:
        start = time.perf_counter()
        params, defects, default_tol = checkmod.run_check(name, config)
        tol = config.tolerance if config.tolerance is not None else default_tol
        results.append(
            CheckResult(name, params, defects, tol, time.perf_counter() - start)
        )
    return sorted(results, key=lambda r: r.name)


def run_converge(config):
    """Run the named sweeps over the configured bin counts."""
    if len(config.bins_list) < 3:
        raise ConfigInvalid("convergence sweeps need at least three bin counts")
    names = config.checks
    if names is None:
        names = checkmod.default_sweep_names()
    names = [n for n in names if n in checkmod.SWEEPS]
    if not names:
        raise ConfigInvalid("no convergence sweeps selected")
    series = []
    for name in names:
        measured, band = checkmod.run_sweep(name, config)
        for label in sorted(measured):
            full = name if not label else f"{name}:{label}"
            series.append(ConvergenceSeries(full, measured[label], band))
    return sorted(series, key=lambda s: s.name)


# ---------------------------------------------------------------------------
# Serialization.  One float path: repr through %.17g.


def _fmt_float(x):
    if isinstance(x, float) and (math.isnan(x) or math.isinf(x)):
        raise ValueError("reports must not contain nan or inf")
    out = "%.17g" % x
    # keep a float marker so json types round-trip
    if "." not in out and "e" not in out and "n" not in out:
        out += ".0"
    return out


def _to_json(value, indent):
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _fmt_float(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        rows = [
            f"{inner}{json.dumps(str(k))}: {_to_json(v, indent + 1)}"
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        rows = [f"{inner}{_to_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _check_obj(result):
    return {
        "name": result.name,
        "parameters": result.parameters,
        "defects": dict(result.defects),
        "tolerance": float(result.tolerance),
        "passed": result.passed,
    }


def _series_obj(series):
    lo, hi = series.slope_band
    return {
        "name": series.name,
        "slope_band": [lo, hi],
        "measurements": [
            {"bins": n, "delta_omega": d, "defect": v}
            for n, d, v in series.measurements
        ],
        "slope": series.slope,
        "residual": series.residual,
        "passed": series.passed,
    }


def report_object(config, results=(), series=()):
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.as_dict(),
        "checks": [_check_obj(r) for r in results],
        "convergence": [_series_obj(s) for s in series],
    }


def render_json(config, results=(), series=()):
    return _to_json(report_object(config, results, series), 0) + "\n"


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def render_csv(config, results=(), series=()):
    lines = ["check,N,delta_omega,defect,tolerance,pass"]
    for r in results:
        bins = r.parameters.get("bins")
        dom = r.parameters.get("delta_omega")
        labels = list(r.defects)
        for label in labels:
            name = r.name if len(labels) == 1 else f"{r.name}.{label}"
            lines.append(",".join(_csv_cell(c) for c in (
                name, bins, dom, float(r.defects[label]),
                float(r.tolerance), r.defects[label] <= r.tolerance,
            )))
    for s in series:
        for n, d, v in s.measurements:
            lines.append(",".join(_csv_cell(c) for c in (
                s.name, n, d, float(v), None, s.passed,
            )))
    return "\n".join(lines) + "\n"


def render_report(config, results=(), series=()):
    if config.fmt == "csv":
        return render_csv(config, results, series)
    return render_json(config, results, series)


def emit_report(config, results=(), series=(), path=None):
    text = render_report(config, results, series)
    target = path if path is not None else config.out
    if target is not None:
        with open(target, "w") as fh:
            fh.write(text)
    return text
