"""CSV and JSON artifacts with provenance headers, and plot-ready data emission."""
import csv
import io
import json
import math

import numpy as np

from . import __version__


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps_json(payload, provenance):
    """Provenance fields merged with a dict payload (or stored under "result")."""
    body = dict(provenance)
    if isinstance(payload, dict):
        body.update(_clean(payload))
    else:
        body["result"] = _clean(payload)
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def write_json(path, payload, provenance):
    with open(path, "w") as fh:
        fh.write(dumps_json(payload, provenance))


def csv_text(header, rows, provenance):
    buf = io.StringIO()
    buf.write(f"# hypercantor {provenance.get('version', __version__)} "
              f"config_hash={provenance.get('config_hash', '')} "
              f"command={provenance.get('command', '')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, provenance):
    with open(path, "w") as fh:
        fh.write(csv_text(header, rows, provenance))


def read_csv(path):
    """Header and rows of an artifact CSV, skipping provenance comment lines."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)


def plot_table(report):
    """(header, rows) for any report type the library produces."""
    from .conjugacy import ConjugacyGrid
    from .ergodic import SceneryReport
    from .scaling import ScalingTable
    from .scenery import ConvergenceReport
    from .thermo import CylinderMeasure
    from .ratioset import RescaledSet

    if isinstance(report, ConvergenceReport):
        def log(v):
            return math.log(v) if v > 0 else float("-inf")
        return ["n", "log_dC", "log_bound"], [(int(n), log(report.d_c[i]), log(report.bound[i]))
                                              for i, n in enumerate(report.n)]
    if isinstance(report, ScalingTable):
        return ["dual_word", "l", "g", "r"], [row[:4] for row in report.rows()]
    if isinstance(report, SceneryReport):
        return (["n", "f_value_actual", "f_value_limitset", "running_avg_actual",
                 "running_avg_limit", "band"], list(report.rows()))
    if isinstance(report, ConjugacyGrid):
        return ["x", "value", "dvalue"], list(report.rows())
    if isinstance(report, CylinderMeasure):
        return ["word", "weight"], list(report.rows())
    if isinstance(report, RescaledSet):
        return ["left", "right"], [(float(a), float(b)) for a, b in report.intervals]
    raise TypeError(f"no plot layout for {type(report).__name__}")


def emit_plotdata(report, path, provenance=None):
    """Write a report as a plain CSV for external plotting."""
    header, rows = plot_table(report)
    write_csv(path, header, rows, provenance or {"version": __version__})
    return path
