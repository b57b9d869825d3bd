"""Readers for the public percolab output contracts (CSV/JSON only)."""

import csv
import json

PHASE_HEADER = ["lambda", "R", "L", "trials", "crossings", "p_hat",
                "ci_low", "ci_high", "seed"]
GROWTH_HEADER = ["n", "size"]


class FormatError(Exception):
    """Malformed input file; carries the offending row number."""

    def __init__(self, message, row=None):
        self.row = row
        super().__init__(message if row is None
                         else f"{message} (row {row})")


def _rows(path, header):
    with open(path, newline="") as f:
        lines = [(i + 1, line) for i, line in enumerate(f)
                 if line.strip() and not line.startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty file")
    head_row, head_line = lines[0]
    cols = next(csv.reader([head_line]))
    if cols != header:
        raise FormatError(f"{path}: header {cols} does not match the "
                          f"contract {header}", head_row)
    out = []
    for rownum, line in lines[1:]:
        vals = next(csv.reader([line]))
        if len(vals) != len(header):
            raise FormatError(f"{path}: expected {len(header)} fields, "
                              f"got {len(vals)}", rownum)
        try:
            out.append({k: float(v) for k, v in zip(header, vals)})
        except ValueError as e:
            raise FormatError(f"{path}: {e}", rownum)
    return out


def read_phase_curve(path):
    """PhaseCurve rows grouped into series keyed by (R, L)."""
    rows = _rows(path, PHASE_HEADER)
    series = {}
    for r in rows:
        series.setdefault((r["R"], r["L"]), []).append(r)
    return series


def read_growth(path):
    return _rows(path, GROWTH_HEADER)


def read_cluster_report(path):
    with open(path) as f:
        doc = json.load(f)
    if "points" not in doc or doc.get("points") is None:
        raise FormatError(
            f"{path}: no point coordinates; rerun the percolab `run` "
            "command with model.snapshot = true")
    if "component_ids" not in doc:
        raise FormatError(f"{path}: no component labels in the report")
    return doc


def read_lambda_c(path):
    with open(path) as f:
        return json.load(f)
