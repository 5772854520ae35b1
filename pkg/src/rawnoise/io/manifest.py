"""JSON sidecar manifests for tensor files.

A manifest records where a tensor came from: camera id, optional ISO,
the ground-truth parameter tuple when the data is synthetic, and seed
provenance (master seed plus the per-patch stream index).  Parsing is
strict -- unknown top-level fields are rejected -- except for the
versioned escape hatch: forward-compatible additions may ride inside an
``"extensions"`` object, which v1 readers ignore.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BadManifestError
from ..noise_core import NoiseParams
from .atomic import atomic_write_text

MANIFEST_VERSION = 1

_KNOWN_FIELDS = {"version", "camera_id", "iso", "params", "seed", "stream_index", "extensions"}


@dataclass(frozen=True)
class Manifest:
    camera_id: str
    iso: float | None = None
    params: NoiseParams | None = None
    seed: int | None = None
    stream_index: int | None = None
    extensions: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        record: dict = {"version": MANIFEST_VERSION, "camera_id": self.camera_id}
        if self.iso is not None:
            record["iso"] = self.iso
        if self.params is not None:
            record["params"] = self.params.as_dict()
        if self.seed is not None:
            record["seed"] = self.seed
        if self.stream_index is not None:
            record["stream_index"] = self.stream_index
        if self.extensions:
            record["extensions"] = self.extensions
        return record

    @classmethod
    def from_dict(cls, record: dict) -> "Manifest":
        if not isinstance(record, dict):
            raise BadManifestError("manifest must be a JSON object")
        version = record.get("version")
        if version != MANIFEST_VERSION:
            raise BadManifestError(
                f"unsupported manifest version {version!r} (expected {MANIFEST_VERSION})"
            )
        unknown = set(record) - _KNOWN_FIELDS
        if unknown:
            raise BadManifestError(
                f"unknown manifest fields {sorted(unknown)}; new fields belong "
                f"under 'extensions'"
            )
        if "camera_id" not in record or not isinstance(record["camera_id"], str):
            raise BadManifestError("manifest requires a string 'camera_id'")
        try:
            params = NoiseParams.from_dict(record["params"]) if "params" in record else None
        except Exception as exc:
            raise BadManifestError(f"invalid manifest params: {exc}") from exc
        return cls(
            camera_id=record["camera_id"],
            iso=float(record["iso"]) if "iso" in record else None,
            params=params,
            seed=int(record["seed"]) if "seed" in record else None,
            stream_index=int(record["stream_index"]) if "stream_index" in record else None,
            extensions=record.get("extensions", {}),
        )

    def save(self, path) -> None:
        atomic_write_text(Path(path), json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "Manifest":
        try:
            record = json.loads(Path(path).read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise BadManifestError(f"manifest is not valid JSON: {exc}") from exc
        return cls.from_dict(record)
