"""Run manifests: input/output hashes, config, and tool version.

Execution-only knobs (worker count, output directory) are deliberately left
out so that reruns of the same logical job produce byte-identical manifests.
Output entries are keyed by file name and carry the hash of the written
artifact.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from . import __version__


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as handle:
        for block in iter(lambda: handle.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(
    out_dir: str | Path,
    command: str,
    config: dict,
    inputs: dict[str, str | Path],
    outputs: dict[str, str | Path],
) -> Path:
    manifest = {
        "tool": "polytok",
        "version": __version__,
        "command": command,
        "config": config,
        "inputs": {
            name: {"path": str(path), "sha256": file_sha256(path)}
            for name, path in sorted(inputs.items())
        },
        "outputs": {
            Path(path).name: {"sha256": file_sha256(path)}
            for _, path in sorted(outputs.items())
        },
    }
    target = Path(out_dir) / "manifest.json"
    target.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return target
