"""Deterministic file output.

Every file the lab writes starts with a header comment carrying the tool
version and the fully resolved configuration, and all numbers are
rendered locale-independently: integers verbatim, floats as their
shortest round-trip representation capped at 12 significant digits with
a period decimal separator.  Identical invocations therefore produce
byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

from . import __version__
from .experiments import PhaseCell, RunSummary

Number = Union[int, float]


def format_number(value) -> str:
    """Shortest round-trip decimal, at most 12 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    f = float(value)
    if math.isnan(f):
        return "nan"
    if math.isinf(f):
        return "inf" if f > 0 else "-inf"
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    r = repr(f)
    digits = r.split("e")[0].split("E")[0].lstrip("-").replace(".", "")
    digits = digits.lstrip("0")
    if len(digits) <= 12:
        return r
    return f"{f:.12g}"


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, float) and not math.isfinite(value):
        return "null"  # JSON has no inf/nan
    return format_number(value)


def json_object(items: Sequence[tuple[str, object]]) -> str:
    """A JSON object with the given key order and our number format."""
    parts = []
    for key, value in items:
        if isinstance(value, (list, tuple)):
            inner = ", ".join(_json_scalar(v) for v in value)
            rendered = f"[{inner}]"
        elif isinstance(value, Mapping):
            rendered = json_object(list(value.items()))
        else:
            rendered = _json_scalar(value)
        parts.append(f'"{key}": {rendered}')
    return "{" + ", ".join(parts) + "}"


def config_header(config: Mapping[str, object]) -> str:
    """Single comment line with the tool version and resolved config."""
    return (f"# errwlab {__version__} | "
            + json_object(sorted(config.items())))


def write_csv(path: Union[str, Path], columns: Sequence[str],
              rows: Iterable[Sequence[object]],
              config: Mapping[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [config_header(config), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return format_number(value)


def write_jsonl(path: Union[str, Path],
                records: Iterable[Sequence[tuple[str, object]]],
                config: Mapping[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [config_header(config)]
    lines.extend(json_object(rec) for rec in records)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def summary_record(s: RunSummary) -> list[tuple[str, object]]:
    """Fixed-order JSON fields of one run summary."""
    return [
        ("seed", s.seed),
        ("run_index", s.run_index),
        ("horizon", s.horizon),
        ("steps", s.steps),
        ("stop_reason", s.stop_reason),
        ("final_position", s.final_position),
        ("max_position", s.max_position),
        ("tau_hit", s.tau_hit),
        ("tau", s.tau),
        ("returns_to_0", s.returns_to_0),
        ("last_return_step", s.last_return_step),
        ("window_size", s.window_size),
        ("last_window_min", s.last_window_range[0]),
        ("last_window_max", s.last_window_range[1]),
        ("M", s.M),
        ("Theta", s.Theta),
        ("S2", s.S2),
        ("S2_tail_fraction", s.S2_tail_fraction),
    ]


SWEEP_COLUMNS = ("alpha", "rho", "n_runs", "horizon", "frac_recurrent_like",
                 "frac_transient_like", "frac_localized_like", "theory_label",
                 "master_seed")


def sweep_row(cell: PhaseCell) -> tuple:
    return (cell.alpha, cell.rho, cell.n_runs, cell.horizon,
            cell.frac_recurrent_like, cell.frac_transient_like,
            cell.frac_localized_like, cell.theory_label, cell.master_seed)


BSTAR_COLUMNS = ("gamma", "rho", "n", "b_star", "h", "censored")
BSTAR_SUMMARY_COLUMNS = ("gamma", "rho", "n", "method", "samples",
                         "mean_b_star", "lemma_bound_c10", "within_bound",
                         "censored_count")
