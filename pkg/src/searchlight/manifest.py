"""Run manifests: what was built, from which config, hashing to which bytes.

Every artifact-producing command writes a manifest next to its output so a
result can be traced to the exact inputs that made it. The manifest itself
carries a timestamp and is therefore not part of any bitwise-determinism
contract; the artifacts it hashes are.
"""

from __future__ import annotations

import getpass
import hashlib
import json
import os
from datetime import datetime, timezone


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(artifact_path: str) -> str:
    return f"{artifact_path}.manifest.json"


def write_manifest(
    command: str,
    artifacts: dict[str, str],
    config_snapshot: dict | None = None,
    seeds: dict | None = None,
    extra: dict | None = None,
) -> str:
    """Write one manifest describing `artifacts` (name -> path).

    The manifest lands next to the first artifact. Returns its path.
    """
    if not artifacts:
        raise ValueError("manifest needs at least one artifact")
    entries = {}
    for name, path in artifacts.items():
        entries[name] = {
            "path": os.path.abspath(path),
            "sha256": sha256_file(path),
            "bytes": os.path.getsize(path),
        }
    try:
        user = getpass.getuser()
    except (KeyError, OSError):
        user = "unknown"
    payload = {
        "command": command,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "user": user,
        "config": config_snapshot or {},
        "seeds": seeds or {},
        "artifacts": entries,
    }
    if extra:
        payload.update(extra)
    first = next(iter(artifacts.values()))
    out = manifest_path(first)
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def read_manifest(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
