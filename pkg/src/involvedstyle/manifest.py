"""Run manifests written beside every CLI output."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from . import __version__

__all__ = ["RunManifest", "sha256_file", "manifest_path", "write_manifest", "verify_manifest"]


def sha256_file(path: Union[str, Path]) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def manifest_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(output.name + ".manifest.json")


@dataclass
class RunManifest:
    command: str
    config: Dict[str, object]
    seed: Optional[int] = None
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    policies: Dict[str, str] = field(default_factory=dict)
    diagnostics: Dict[str, object] = field(default_factory=dict)
    tool_version: str = __version__

    def add_input(self, path: Union[str, Path]) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: Union[str, Path]) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "policies": self.policies,
            "diagnostics": self.diagnostics,
            "tool_version": self.tool_version,
        }
        return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"


def write_manifest(manifest: RunManifest, primary_output: Union[str, Path]) -> Path:
    path = manifest_path(primary_output)
    path.write_text(manifest.to_json(), encoding="utf-8")
    return path


def verify_manifest(path: Union[str, Path]) -> List[str]:
    """Recompute recorded hashes; returns the files that no longer match."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    bad = []
    for section in ("inputs", "outputs"):
        for p, digest in data.get(section, {}).items():
            if not Path(p).exists() or sha256_file(p) != digest:
                bad.append(p)
    return bad
