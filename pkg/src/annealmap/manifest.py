"""Run manifests: config snapshot, seed-derivation rule, and a digest
inventory of every output file, sufficient to re-run exact-mode presets
bit-identically."""
from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from . import __version__

MANIFEST_NAME = "manifest.json"
SEED_RULE = ("per-task seed = numpy SeedSequence(master_seed, "
             "spawn_key=(target_gs, h_index, initial_state)); exact mode "
             "uses no randomness")
AUTO_SCALE_NOTE = ("hardware coefficient auto-scaling is not applied; "
                   "coefficients enter the Hamiltonian exactly as given")


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def task_seed(master_seed: int, target_gs: int, h_index: int,
              initial_state: int = 0) -> int:
    """Stable per-task seed; independent of execution order and resume."""
    seq = np.random.SeedSequence(master_seed,
                                 spawn_key=(target_gs, h_index,
                                            initial_state))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass
class RunManifest:
    """Everything needed to reproduce a run and check its outputs."""

    config: Dict[str, Any]
    master_seed: int
    version: str = __version__
    seed_rule: str = SEED_RULE
    notes: Dict[str, str] = field(
        default_factory=lambda: {"auto_scale": AUTO_SCALE_NOTE})
    files: Dict[str, str] = field(default_factory=dict)
    created: Optional[str] = None

    def record_files(self, out_dir: str, relpaths: Iterable[str]) -> None:
        for rel in relpaths:
            self.files[rel] = sha256_file(os.path.join(out_dir, rel))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": self.version,
            "master_seed": self.master_seed,
            "seed_rule": self.seed_rule,
            "notes": dict(self.notes),
            "config": self.config,
            "files": {k: self.files[k] for k in sorted(self.files)},
            "created": self.created,
        }


def write_manifest(manifest: RunManifest, out_dir: str) -> str:
    manifest.created = datetime.datetime.now(
        datetime.timezone.utc).isoformat(timespec="seconds")
    path = os.path.join(out_dir, MANIFEST_NAME)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def load_manifest(out_dir: str) -> Dict[str, Any]:
    with open(os.path.join(out_dir, MANIFEST_NAME), encoding="utf-8") as fh:
        return json.load(fh)


def append_files(out_dir: str, relpaths: Iterable[str]) -> None:
    """Add or refresh digest entries in an existing manifest."""
    path = os.path.join(out_dir, MANIFEST_NAME)
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    files = doc.get("files", {})
    for rel in relpaths:
        files[rel] = sha256_file(os.path.join(out_dir, rel))
    doc["files"] = {k: files[k] for k in sorted(files)}
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def verify_digests(out_dir: str) -> List[str]:
    """Recompute digests of the files listed in the manifest; returns a
    list of mismatch findings (empty = intact)."""
    doc = load_manifest(out_dir)
    findings = []
    for rel, digest in doc.get("files", {}).items():
        path = os.path.join(out_dir, rel)
        if not os.path.exists(path):
            findings.append(f"{rel}: listed in manifest but missing")
        elif sha256_file(path) != digest:
            findings.append(f"{rel}: digest mismatch")
    return findings
