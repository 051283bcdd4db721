"""Canonical on-disk formats: JSON records and CSV sweep tables.

Artifacts are deterministic byte-for-byte given the same seed and config:
JSON uses sorted keys, two-space indent and a trailing newline, with floats
in Python's shortest round-trip form; CSV uses '%.17g' floats, LF line
endings and leading comment lines that embed the package version, master
seed and the full config.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .states import ProblemInstance, StateSpec, make_instance

__all__ = [
    "canonical_json",
    "write_json_artifact",
    "instance_to_doc",
    "instance_from_doc",
    "save_instance",
    "load_instance",
    "fmt17",
    "write_csv",
]

INSTANCE_FORMAT = "entbandit.instance/1"


def _plain(obj):
    """Recursively convert numpy scalars/arrays so json can emit them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def canonical_json(doc: dict) -> str:
    return json.dumps(_plain(doc), sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def write_json_artifact(path, format_tag: str, seed, config: dict, body: dict) -> None:
    """Write a record with the standard envelope (format, version, seed, config)."""
    doc = {
        "format": format_tag,
        "version": __version__,
        "seed": _plain(seed),
        "config": _plain(config),
    }
    doc.update(_plain(body))
    Path(path).write_text(canonical_json(doc), encoding="utf-8")


def instance_to_doc(instance: ProblemInstance, seed=None, config: dict | None = None) -> dict:
    states = []
    for i, spec in enumerate(instance.specs):
        entry = spec.to_json_dict()
        entry["truth"] = bool(instance.truth[i])
        entry["exact_s"] = {
            str(j + 1): float(instance.criterion_values[i, j]) for j in range(6)
        }
        states.append(entry)
    return {
        "format": INSTANCE_FORMAT,
        "version": __version__,
        "seed": _plain(seed),
        "config": _plain(config or {}),
        "k": instance.k,
        "m": instance.m,
        "states": states,
    }


def instance_from_doc(doc: dict) -> ProblemInstance:
    """Rebuild an instance from its document and verify the recorded labels."""
    if doc.get("format") != INSTANCE_FORMAT:
        raise ValueError(f"not an instance document: format={doc.get('format')!r}")
    specs = [StateSpec.from_json_dict(s) for s in doc["states"]]
    instance = make_instance(specs)
    for i, s in enumerate(doc["states"]):
        if bool(s["truth"]) != instance.truth[i]:
            raise ValueError(f"state {i}: stored truth flag disagrees with the PPT oracle")
        for j in range(6):
            stored = float(s["exact_s"][str(j + 1)])
            if abs(stored - instance.criterion_values[i, j]) > 1e-9:
                raise ValueError(f"state {i}: stored criterion value for WBM {j + 1} drifted")
    return instance


def save_instance(path, instance: ProblemInstance, seed=None, config: dict | None = None) -> None:
    Path(path).write_text(canonical_json(instance_to_doc(instance, seed, config)), encoding="utf-8")


def load_instance(path) -> ProblemInstance:
    return instance_from_doc(json.loads(Path(path).read_text(encoding="utf-8")))


def fmt17(x) -> str:
    """Floats at 17 significant digits; ints and strings pass through."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def write_csv(path, header, rows, seed=None, config: dict | None = None) -> None:
    """CSV with embedded provenance comments; ``rows`` are dicts keyed by header."""
    lines = [
        f"# entbandit {__version__}",
        f"# seed={json.dumps(_plain(seed), sort_keys=True)}",
        f"# config={json.dumps(_plain(config or {}), sort_keys=True)}",
        ",".join(header),
    ]
    for row in rows:
        lines.append(",".join(fmt17(row[h]) for h in header))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
