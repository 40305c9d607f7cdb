"""Run manifests: JSON sidecars recording how an artifact was produced.

Manifests hold wall-clock timing, so they are written next to artifacts
rather than into them; artifact bytes stay a pure function of inputs,
parameters, and seeds.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)    # path -> sha256
    outputs: dict = field(default_factory=dict)   # path -> sha256
    tool_version: str = ""
    duration_seconds: float = 0.0
    started_unix: float = 0.0

    def start(self) -> "RunManifest":
        self.started_unix = time.time()
        return self

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs[str(path)] = sha256_file(path)

    def finish(self) -> "RunManifest":
        if self.started_unix:
            self.duration_seconds = time.time() - self.started_unix
        return self

    def write(self, artifact_path: str | Path) -> Path:
        """Write <artifact>.manifest.json next to the artifact."""
        target = Path(str(artifact_path) + ".manifest.json")
        payload = {
            "command": self.command,
            "parameters": self.parameters,
            "seeds": self.seeds,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "tool_version": self.tool_version,
            "duration_seconds": round(self.duration_seconds, 6),
        }
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return target
