"""File formats: NRAW tensors, JSON manifests, atomic writes."""

from .atomic import atomic_write_bytes, atomic_write_text
from .manifest import MANIFEST_VERSION, Manifest
from .tensorfile import read_tensor, tensor_from_bytes, tensor_to_bytes, write_tensor

__all__ = [
    "MANIFEST_VERSION",
    "Manifest",
    "atomic_write_bytes",
    "atomic_write_text",
    "read_tensor",
    "tensor_from_bytes",
    "tensor_to_bytes",
    "write_tensor",
]
