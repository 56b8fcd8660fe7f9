"""Run directories, CSV emission (RFC 4180, fixed headers) and report formatting."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

ERRORS_HEADER = ["n", "t", "err_u_h1semi", "err_xi_l2", "err_p_h1semi", "err_div_u_l2"]
TABLE_HEADER = ["dt", "err_u_h1semi", "order_u", "err_xi_l2", "order_xi", "err_p_h1semi", "order_p", "err_div_u_l2", "order_div_u"]
ITERATIONS_HEADER = [
    "i",
    "S",
    "increment",
    "ref_err_u_h1semi",
    "ref_err_xi_l2",
    "ref_err_p_h1semi",
    "exact_err_u_h1semi",
    "exact_err_xi_l2",
    "exact_err_p_h1semi",
    "eps_rom",
    "eps_over",
    "n_snapshots",
    "n_r",
]
SPECTRA_HEADER = ["i", "field", "k", "gamma_normalized"]
INDEX_SETS_HEADER = ["index_set", "n_snapshots", "n_r", "S_stabilized"]


def fmt(v) -> str:
    """Full-precision, platform-stable rendering for machine-readable output."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def _atomic_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields, header has {len(header)}")
        w.writerow([fmt(v) for v in row])
    _atomic_text(Path(path), buf.getvalue())


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj):
    _atomic_text(Path(path), json.dumps(obj, indent=2, sort_keys=True) + "\n")


def orders(errors) -> list:
    """``log2(e_{2dt} / e_dt)`` for consecutive halvings; None for the first row."""
    out = [None]
    for a, b in zip(errors[:-1], errors[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else None)
    return out


def table_rows(dts, final_errors):
    """Convergence table rows from per-dt final errors ``(e_u, e_xi, e_p, e_div)``."""
    cols = list(zip(*final_errors))
    ords = [orders(list(c)) for c in cols]
    rows = []
    for k, dt in enumerate(dts):
        row = [str(dt)]
        for c, o in zip(cols, ords):
            row += [c[k], o[k]]
        rows.append(row)
    return rows


def format_table(rows) -> str:
    """Human-readable table with 6 significant digits."""
    head = ["dt", "|u|_H1 err", "order", "||xi||_L2 err", "order", "|p|_H1 err", "order", "||div u||_L2 err", "order"]
    lines = ["  ".join(f"{h:>16}" for h in head)]
    for row in rows:
        cells = [f"{row[0]:>16}"]
        for v in row[1:]:
            cells.append(f"{'-':>16}" if v is None else f"{v:>16.6g}")
        lines.append("  ".join(cells))
    return "\n".join(lines)


def iteration_rows(history):
    rows = []
    for r in history:
        ref = r.ref_errors or (None, None, None)
        ex = r.exact_errors or (None, None, None)
        e = r.extra
        rows.append([r.i, r.S, r.increment, *ref, *ex, e.get("eps_rom"), e.get("eps_over"), e.get("n_snapshots"), e.get("n_r")])
    return rows


def spectra_rows(history):
    rows = []
    for r in history:
        for fld in ("u", "xi"):
            for k, g in enumerate(r.extra.get(f"spectrum_{fld}", []), start=1):
                rows.append([r.i, fld, k, float(g)])
    return rows
