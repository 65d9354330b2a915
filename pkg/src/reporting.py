"""
Trace CSV and summary JSON output. Floats are written with 17 significant digits,
booleans as true/false and absent fields as empty cells.
"""

import csv
import json
import math

SCHEMA_VERSION = 1

TRACE_HEADER = ["k", "objective", "stationarity", "feasibility", "lagrangian", "dual_lambda",
                "dual_mu", "delta", "d_norm", "descent_ok", "wallclock_ns"]

# header name -> IterationRecord attribute
TRACE_FIELDS = {"dual_lambda": "dual_norm_lambda", "dual_mu": "dual_norm_mu"}

def format_value(value):

    if value is None:
        return ""

    if isinstance(value, bool):
        return "true" if value else "false"

    if isinstance(value, int):
        return str(value)

    return "%.17g" % float(value)

def trace_row(record, wallclock=True):

    row = [format_value(getattr(record, TRACE_FIELDS.get(name, name))) for name in TRACE_HEADER]

    if not wallclock:
        row[-1] = ""

    return row

class TraceWriter(object):
    """
    Sink writing one CSV row per IterationRecord, flushed as it arrives.
    Use as a context manager:

        with TraceWriter(path) as sink:
            pplag.solve(p, params, stop, sink)
    """

    def __init__(self, path, wallclock=True):

        self.path = path
        self.wallclock = wallclock
        self.rows = 0

        self._file = None
        self._writer = None
        self._last_k = None

    def __enter__(self):

        self._file = open(self.path, "w", newline="")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(TRACE_HEADER)
        self._file.flush()

        return self

    def __exit__(self, exc_type, exc_value, traceback):

        self._file.close()

        return False

    def __call__(self, record):

        if self._last_k is not None and record.k <= self._last_k:
            raise ValueError("records must arrive in increasing k, got {} after {}".format(record.k, self._last_k))

        self._writer.writerow(trace_row(record, self.wallclock))
        self._file.flush()

        self._last_k = record.k
        self.rows += 1

def read_trace(path):
    """ :return: list of dicts keyed by header name, values as strings """

    with open(path, newline="") as f:
        return list(csv.DictReader(f))

def _json_safe(value):

    if isinstance(value, float) and not math.isfinite(value):
        return str(value)

    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}

    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]

    # numpy scalars
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        return _json_safe(value.item())

    return value

def write_json(path, payload):
    """ Writes payload with schema_version 1, sorted keys and indent 2. Non-finite floats become strings. """

    payload = dict(_json_safe(payload), schema_version=SCHEMA_VERSION)

    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=2)
        f.write("\n")

def read_json(path):

    with open(path) as f:
        return json.load(f)
