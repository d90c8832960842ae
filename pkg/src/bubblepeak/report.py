"""JSON serialization, run manifests and report bundles."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Union

from bubblepeak import __version__

SCHEMA_VERSION = "1.0"


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def document(kind: str, payload) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "data": payload}


def digest(path: Union[str, Path]) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    inputs: list = field(default_factory=list)  # (path, digest) pairs
    parameters: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    tool_version: str = __version__

    def add_input(self, path: Union[str, Path]) -> None:
        self.inputs.append((str(path), digest(path)))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "inputs": [{"path": p, "digest": d} for p, d in self.inputs],
            "parameters": {k: self.parameters[k] for k in sorted(self.parameters)},
            "outputs": list(self.outputs),
            "tool_version": self.tool_version,
        }


def write_report(
    directory: Union[str, Path],
    manifest: RunManifest,
    results: Mapping[str, dict],
    charts: Mapping[str, str] = (),
) -> Path:
    """Write ``<name>.json`` per result, ``<name>.svg`` per chart, then ``manifest.json``.

    Files are written in sorted name order and the manifest lists them
    relative to ``directory``, so identical inputs give identical bytes.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name in sorted(results):
        rel = f"{name}.json"
        (directory / rel).write_text(dumps(results[name]), encoding="utf-8")
        outputs.append(rel)
    for name in sorted(dict(charts)):
        rel = f"{name}.svg"
        (directory / rel).write_text(dict(charts)[name], encoding="utf-8")
        outputs.append(rel)
    manifest.outputs = outputs
    path = directory / "manifest.json"
    path.write_text(dumps(manifest.to_dict()), encoding="utf-8")
    return path
