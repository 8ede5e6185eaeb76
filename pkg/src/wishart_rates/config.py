"""JSON model configs and CSV outputs."""

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigParseError, OutputError, ValidationError
from .model import ModelParams
from .pricing import DEFAULT_GRID_MAX, DEFAULT_GRID_MIN, DEFAULT_GRID_POINTS, default_grid
from .sim import SimConfig

REQUIRED_KEYS = ("d", "a", "alpha", "B", "M", "Q", "X")


@dataclass(frozen=True)
class GridSpec:
    tau_min: float = DEFAULT_GRID_MIN
    tau_max: float = DEFAULT_GRID_MAX
    n_points: int = DEFAULT_GRID_POINTS

    def taus(self):
        return default_grid(self.tau_min, self.tau_max, self.n_points)


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    grid: GridSpec = field(default_factory=GridSpec)
    sim: Optional[SimConfig] = None
    output_dir: Path = Path(".")


def _matrix(raw, key, d):
    try:
        mat = np.array(raw[key], dtype=float)
    except (TypeError, ValueError):
        raise ValidationError(f"{key} must be a nested array of numbers", "shape") from None
    if mat.shape != (d, d):
        raise ValidationError(f"{key} must be {d}x{d}, got shape {mat.shape}", "dimension")
    return mat


def parse_model(raw, relaxed_gindikin=False):
    """ModelParams from a decoded JSON object (matrices as row-major nested arrays)."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object", "shape")
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ValidationError(f"config is missing keys: {', '.join(missing)}", "missing_key")
    d = raw["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ValidationError(f"d must be a positive integer, got {d!r}", "dimension")
    for key in ("a", "alpha"):
        if not isinstance(raw[key], (int, float)) or isinstance(raw[key], bool):
            raise ValidationError(f"{key} must be a number", "shape")
    return ModelParams(
        a=raw["a"],
        alpha=raw["alpha"],
        B=_matrix(raw, "B", d),
        M=_matrix(raw, "M", d),
        Q=_matrix(raw, "Q", d),
        X=_matrix(raw, "X", d),
        relaxed_gindikin=relaxed_gindikin,
    )


def load_config(path, relaxed_gindikin=False):
    """Read and validate a model config file.

    Raises ConfigParseError (with line/column) for malformed JSON and
    ValidationError naming the violated invariant otherwise.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"invalid JSON in {path}: {exc.msg}", exc.lineno, exc.colno) from None
    return RunConfig(model=parse_model(raw, relaxed_gindikin=relaxed_gindikin))


def fmt(value):
    """12 significant digits."""
    return f"{float(value):.12g}"


def _write_rows(path, header, rows):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from None
    return path


def write_curve_csv(curve, path):
    rows = ([fmt(t), fmt(y), fmt(pr)] for t, y, pr in zip(curve.taus, curve.yields, curve.prices))
    return _write_rows(path, ["tau", "yield", "bond_price"], rows)


def write_thresholds_csv(thresholds, path):
    d = thresholds.b_norm.shape[0]
    header = ["matrix"] + [f"e{i}{j}" for i in range(d) for j in range(d)]
    rows = []
    for name in ("b_norm", "b_inv", "psi_prime", "m_star"):
        rows.append([name] + [fmt(v) for v in getattr(thresholds, name).ravel()])
    return _write_rows(path, header, rows)


SUMMARY_COLUMNS = ("eta", "status", "empirical_class", "short_end", "long_end", "min_shift_vs_base", "min_shift_vs_prev")


def write_summary_csv(records, path):
    """Perturbation summary, one row per eta in the order given; missing fields stay empty."""
    rows = []
    for r in records:
        rows.append([fmt(r[c]) if isinstance(r.get(c), float) else str(r.get(c, "")) for c in SUMMARY_COLUMNS])
    return _write_rows(path, list(SUMMARY_COLUMNS), rows)


def write_path_csv(times, path_states, short_rates, path):
    d = path_states.shape[-1]
    header = ["t"] + [f"x{i}{j}" for i in range(d) for j in range(d)] + ["short_rate"]
    rows = ([fmt(t)] + [fmt(v) for v in X.ravel()] + [fmt(r)] for t, X, r in zip(times, path_states, short_rates))
    return _write_rows(path, header, rows)


def read_curve_csv(path):
    """Inverse of ``write_curve_csv``: arrays ``(taus, yields, prices)``."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array(rows[1:], dtype=float).reshape(-1, 3)
    return data[:, 0], data[:, 1], data[:, 2]
