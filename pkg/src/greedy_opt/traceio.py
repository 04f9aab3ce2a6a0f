"""Trace and manifest serialization: locale-independent CSV, atomic writes.

Floats go out with 17 significant digits so values round-trip exactly; files
end every line with LF regardless of platform.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .dictionaries import Atom
from .greedy import RunTrace

__all__ = [
    "TRACE_COLUMNS",
    "trace_csv_text",
    "write_trace_csv",
    "read_trace_csv",
    "manifest_text",
    "write_manifest",
    "atomic_write_text",
]

TRACE_COLUMNS = ["m", "E", "gap", "E_D", "c_m", "atom", "sign", "A_m",
                 "sum_c", "sum_cED", "flags"]


def _fmt(x):
    return format(float(x), ".17g")


def trace_csv_text(trace):
    lines = [",".join(TRACE_COLUMNS)]
    gaps = trace.gaps()
    for i in range(len(trace)):
        atom = trace.atoms[i]
        row = [
            str(i + 1),
            _fmt(trace.E[i]),
            _fmt(gaps[i]) if gaps is not None else "",
            _fmt(trace.ED[i]),
            _fmt(trace.c[i]),
            str(atom.index),
            str(atom.sign),
            _fmt(trace.A[i]),
            _fmt(trace.sum_c[i]),
            _fmt(trace.sum_cED[i]),
            trace.flags[i],
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def atomic_write_text(path, text):
    """Write via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".",
                               suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_trace_csv(trace, path):
    atomic_write_text(path, trace_csv_text(trace))


def read_trace_csv(path):
    """Rebuild a trace from CSV.

    Config and explicit atom vectors are not serialized, so the result suits
    diagnostics and plotting, not replay of sphere runs.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != TRACE_COLUMNS:
            raise ValueError(f"unexpected trace header {header}")
        trace = RunTrace(algorithm="", status="", E0=float("nan"),
                         ED0=float("nan"))
        infimum = None
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise ValueError(f"malformed trace row: {line!r}")
            (_m, e, gap, ed, c, atom, sign, a, sum_c, sum_ced, flags) = parts
            trace.E.append(float(e))
            trace.ED.append(float(ed))
            trace.c.append(float(c))
            trace.atoms.append(Atom(index=int(atom), sign=int(sign))
                               if int(atom) >= 0 else None)
            trace.A.append(float(a))
            trace.sum_c.append(float(sum_c))
            trace.sum_cED.append(float(sum_ced))
            trace.flags.append(flags)
            if gap != "" and infimum is None:
                infimum = float(e) - float(gap)
        trace.infimum = infimum
    return trace


def manifest_text(manifest):
    return json.dumps(manifest, indent=2, sort_keys=True) + "\n"


def write_manifest(manifest, path):
    atomic_write_text(path, manifest_text(manifest))
