"""Header + raw tensor file container used for model checkpoints.

Layout::

    MAGIC\\n
    version=1\\n
    key=value\\n            (zero or more metadata lines)
    tensor=name dtype d0,d1,...\\n   (one per tensor, in storage order)
    end\\n
    <tensor bytes, little-endian, C order, concatenated in the listed order>

``dtype`` is ``f4`` (the default for network weights) or ``f8``. Scalars
use an empty shape field.
"""

from pathlib import Path

import numpy as np

__all__ = ["ContainerError", "write_container", "read_container", "FORMAT_VERSION"]

FORMAT_VERSION = 1
_DTYPES = {"f4": "<f4", "f8": "<f8"}


class ContainerError(ValueError):
    """Raised when a container file is malformed or has the wrong magic."""


def write_container(path, magic, meta, tensors, dtype="f4"):
    """Write ``tensors`` (an iterable of ``(name, array)``) after a text header.

    ``dtype`` may be a single code or a dict from tensor name to code.
    """
    lines = [magic, f"version={FORMAT_VERSION}"]
    for k, v in meta:
        v = str(v)
        if "\n" in v or "=" in k or "\n" in k:
            raise ContainerError(f"metadata {k!r} cannot contain newlines or '='")
        lines.append(f"{k}={v}")
    blobs = []
    for name, arr in tensors:
        code = dtype.get(name, "f4") if isinstance(dtype, dict) else dtype
        arr = np.array(arr, dtype=_DTYPES[code], order="C")
        shape = ",".join(str(d) for d in arr.shape)
        lines.append(f"tensor={name} {code} {shape}")
        blobs.append(arr.tobytes(order="C"))
    lines.append("end")
    with Path(path).open("wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode("utf-8"))
        for blob in blobs:
            fh.write(blob)


def read_container(path, magic):
    """Return ``(meta_items, {name: array})``; arrays are float64 copies."""
    data = Path(path).read_bytes()
    pos = 0
    lines = []
    while True:
        nl = data.find(b"\n", pos)
        if nl < 0:
            raise ContainerError(f"{path}: truncated header")
        line = data[pos:nl].decode("utf-8")
        pos = nl + 1
        if line == "end":
            break
        lines.append(line)
    if not lines or lines[0] != magic:
        raise ContainerError(f"{path}: expected magic {magic!r}, got {lines[0] if lines else ''!r}")
    if len(lines) < 2 or lines[1] != f"version={FORMAT_VERSION}":
        raise ContainerError(f"{path}: unsupported version line {lines[1] if len(lines) > 1 else ''!r}")
    meta, specs = [], []
    for line in lines[2:]:
        key, _, value = line.partition("=")
        if key == "tensor":
            name, code, shape = (value.split(" ") + [""])[:3]
            if code not in _DTYPES:
                raise ContainerError(f"{path}: unknown dtype {code!r} for tensor {name!r}")
            dims = tuple(int(d) for d in shape.split(",") if d)
            specs.append((name, code, dims))
        else:
            meta.append((key, value))
    tensors = {}
    for name, code, dims in specs:
        dt = np.dtype(_DTYPES[code])
        n = int(np.prod(dims, dtype=np.int64)) * dt.itemsize
        if pos + n > len(data):
            raise ContainerError(f"{path}: tensor {name!r} extends past end of file")
        arr = np.frombuffer(data, dtype=dt, count=n // dt.itemsize, offset=pos).reshape(dims)
        tensors[name] = arr.astype(np.float64)
        pos += n
    if pos != len(data):
        raise ContainerError(f"{path}: {len(data) - pos} trailing bytes")
    return meta, tensors
