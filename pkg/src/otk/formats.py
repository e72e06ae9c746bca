"""Plain-text file formats: grid and trace CSV, PGM heatmaps, grid configs."""

import csv
import io
from dataclasses import fields, replace

import numpy as np

from .experiments import PhaseGrid, PhaseGridSpec

GRID_HEADER = ("m", "p", "successes", "trials", "rate")
TRACE_HEADER = ("p", "rel_error", "residual_norm", "qp_iters", "qp_converged")


def format_grid_csv(grid):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(GRID_HEADER)
    t = grid.spec.trials
    for i, m in enumerate(grid.spec.m_values):
        for j, p in enumerate(grid.spec.p_values):
            s = int(grid.successes[i, j])
            w.writerow((m, p, s, t, f"{s / t:.6f}"))
    return out.getvalue()


def write_grid_csv(grid, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_grid_csv(grid))


def read_grid_csv(path, spec=None):
    """Parse a grid CSV back into a :class:`PhaseGrid`.

    The file only records ``m``, ``p`` and the counts; other spec fields come
    from ``spec`` (defaults otherwise).
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != GRID_HEADER:
        raise ValueError(f"{path}: expected header {','.join(GRID_HEADER)}")
    body = [(int(m), int(p), int(s), int(t)) for m, p, s, t, _ in rows[1:]]
    m_values = sorted({r[0] for r in body})
    p_values = sorted({r[1] for r in body})
    trials = {r[3] for r in body}
    if len(trials) != 1:
        raise ValueError(f"{path}: inconsistent trial counts {sorted(trials)}")
    counts = np.full((len(m_values), len(p_values)), -1, dtype=np.int64)
    mi = {m: i for i, m in enumerate(m_values)}
    pi = {p: j for j, p in enumerate(p_values)}
    for m, p, s, _ in body:
        counts[mi[m], pi[p]] = s
    if (counts < 0).any():
        raise ValueError(f"{path}: grid has missing cells")
    base = spec if spec is not None else PhaseGridSpec()
    spec = replace(base, m_values=tuple(m_values), p_values=tuple(p_values), trials=trials.pop())
    return PhaseGrid(spec, counts)


def _fmt_float(v):
    return "nan" if v is None else f"{v:.10e}"


def format_trace_csv(rows):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for p, err, res, qp_iters, qp_conv in rows:
        w.writerow((p, _fmt_float(err), _fmt_float(res), qp_iters, int(bool(qp_conv))))
    return out.getvalue()


def write_trace_csv(rows, path):
    with open(path, "w", newline="") as fh:
        fh.write(format_trace_csv(rows))


def format_pgm(grid):
    """ASCII PGM with one pixel per cell: rows are m ascending downward,
    columns p ascending rightward, gray ``round(255 * rate)``."""
    gray = np.rint(255 * grid.rates).astype(int)
    h, w = gray.shape
    lines = ["P2", f"{w} {h}", "255"]
    lines += [" ".join(str(v) for v in row) for row in gray]
    return "\n".join(lines) + "\n"


def axes_sidecar_path(path):
    return f"{path}.axes.txt"


def write_heatmap(grid, path):
    """Write the PGM and a sidecar listing the axis values."""
    with open(path, "w", newline="") as fh:
        fh.write(format_pgm(grid))
    with open(axes_sidecar_path(path), "w", newline="") as fh:
        fh.write("rows m = " + ",".join(map(str, grid.spec.m_values)) + "\n")
        fh.write("cols p = " + ",".join(map(str, grid.spec.p_values)) + "\n")


def read_pgm(path):
    with open(path) as fh:
        tokens = fh.read().split()
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not an ASCII PGM")
    w, h, _ = map(int, tokens[1:4])
    return np.array(tokens[4:], dtype=int).reshape(h, w)


_SPEC_FIELDS = {f.name for f in fields(PhaseGridSpec)}
_INT_LISTS = {"m_values", "p_values"}
_INTS = {"n", "k", "trials", "master_seed"}
_FLOATS = {"epsilon", "noise_sigma"}


def parse_int_list(text):
    """``"4,6,8"`` or an inclusive range ``"4:50:2"``."""
    text = text.strip()
    if ":" in text:
        parts = [int(t) for t in text.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {text!r}")
        start, stop = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        return tuple(range(start, stop + 1, step))
    return tuple(int(t) for t in text.replace(",", " ").split())


def parse_config(text):
    """Parse ``key = value`` lines into :class:`PhaseGridSpec` keyword arguments.

    ``#`` starts a comment. Unknown keys raise ``KeyError``; malformed values
    raise ``ValueError``.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _SPEC_FIELDS:
            raise KeyError(f"line {lineno}: unknown key {key!r}")
        if key in _INT_LISTS:
            out[key] = parse_int_list(value)
        elif key in _INTS:
            out[key] = int(value)
        elif key in _FLOATS:
            out[key] = float(value)
        else:
            out[key] = value.lower()
    return out


def format_config(spec):
    lines = []
    for f in fields(PhaseGridSpec):
        v = getattr(spec, f.name)
        if f.name in _INT_LISTS:
            v = ",".join(map(str, v))
        elif hasattr(v, "value"):
            v = v.value
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
