"""Persistence: ledger CSV, certificate/report JSON, run manifest.

All writers are deterministic byte-for-byte for identical inputs; floats
are serialized with 17 significant digits.
"""

from __future__ import annotations

import dataclasses
import json
import os
import platform

import numpy as np

from .energy import EnergyLedger

LEDGER_COLUMNS = (
    "t", "l2_sq", "cum_ux", "w_u", "w_ux", "w_uy", "w_uxx", "w_uxy",
    "w_uyy", "res_E2", "res_E3", "res_E4", "res_ELEV", "env_ratio",
    "buffer_peak",
)


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def emit_ledger(ledger: EnergyLedger, path: str) -> None:
    """CSV with the fixed column order; one row per sample."""
    rows = [",".join(LEDGER_COLUMNS)]
    n = ledger.n_samples()
    series = {name: getattr(ledger, name) for name in LEDGER_COLUMNS}
    for i in range(n):
        rows.append(",".join(_fmt(series[name][i]) for name in LEDGER_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_report(report: dict, path: str) -> None:
    """Deterministic JSON (sorted keys, no timestamps)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_manifest(path: str, config_text: str, wall_time: float,
                   extra: dict | None = None) -> None:
    """Run manifest: config echo, versions, wall time.

    The manifest is the one artifact allowed to vary between identical runs
    (it carries timing); ledgers and reports stay byte-stable.
    """
    from . import __version__

    manifest = {
        "config": config_text,
        "versions": {
            "kbstrip": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "wall_time_seconds": wall_time,
    }
    if extra:
        manifest.update(_jsonable(extra))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
