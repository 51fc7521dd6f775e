"""Run manifests: resolved configuration, seeds, and output digests.

Every CLI command writes a sidecar manifest next to its primary output.
Re-running the recorded argv must reproduce every output byte for byte
(the manifest's own timestamp is the only thing allowed to differ).
"""

from __future__ import annotations

import datetime
import hashlib
import json


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command: str, argv: list[str], params: dict, version: str,
                   inputs: dict[str, str] | None = None,
                   outputs: dict[str, str] | None = None) -> dict:
    return {
        "tool": "cgl",
        "version": version,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "command": command,
        "argv": list(argv),
        "params": params,
        "inputs": inputs or {},
        "outputs": outputs or {},
    }


def manifest_path(out_path: str) -> str:
    return str(out_path) + ".manifest.json"


def write_manifest(manifest: dict, out_path: str) -> str:
    path = manifest_path(out_path)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_manifest(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest.get("tool") != "cgl":
        raise ValueError(f"{path} is not a cgl manifest")
    return manifest


def verify_outputs(manifest: dict) -> list[str]:
    """Return the recorded output paths whose current digest differs."""
    mismatched = []
    for path, digest in manifest.get("outputs", {}).items():
        try:
            current = file_digest(path)
        except OSError:
            mismatched.append(path)
            continue
        if current != digest:
            mismatched.append(path)
    return mismatched
