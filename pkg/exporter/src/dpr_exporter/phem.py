"""PHEM v1 writer.

Little-endian layout: magic b"PHEM", version u16=1, flags u16=0, dim u32,
count u64, then per record: id_len u16, id bytes (UTF-8), dim x f32.
"""

import struct

import numpy as np

_HEADER = struct.Struct("<4sHHIQ")


def write_phem(path, ids: list[str], vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.ndim != 2 or vectors.shape[0] != len(ids):
        raise ValueError(
            f"vector matrix {vectors.shape} does not match {len(ids)} ids"
        )
    dim = vectors.shape[1]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"PHEM", 1, 0, dim, len(ids)))
        for rec_id, row in zip(ids, vectors):
            raw = rec_id.encode("utf-8")
            if len(raw) > 0xFFFF:
                raise ValueError(f"id too long for PHEM: {rec_id[:40]!r}...")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(row.tobytes())
