"""Weight checkpoint container.

Binary layout (all integers little-endian):

    magic        4 bytes   b"OTMW"
    version      uint8     1
    config_len   uint32    byte length of the config JSON that follows
    config       bytes     UTF-8 JSON echo of the model config
    count        uint32    number of arrays
    count times:
        name_len uint16
        name     bytes     UTF-8
        ndim     uint8
        dims     uint32 x ndim
        data     float64 x prod(dims), little-endian, row-major
"""
import struct
from collections.abc import Mapping

import numpy as np

from src.utils.error_handlers import CheckpointError

MAGIC = b"OTMW"
VERSION = 1


def encode_weights(arrays: Mapping[str, np.ndarray], config_json: str) -> bytes:
    """Serialize named arrays plus a config echo into one byte string."""
    config_bytes = config_json.encode("utf-8")
    parts = [MAGIC, struct.pack("<B", VERSION), struct.pack("<I", len(config_bytes)), config_bytes]
    parts.append(struct.pack("<I", len(arrays)))
    for name in sorted(arrays):
        array = np.asarray(arrays[name], dtype="<f8").copy(order="C")
        name_bytes = name.encode("utf-8")
        parts.append(struct.pack("<H", len(name_bytes)))
        parts.append(name_bytes)
        parts.append(struct.pack("<B", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}I", *array.shape))
        parts.append(array.tobytes())
    return b"".join(parts)


def decode_weights(blob: bytes) -> tuple[str, dict[str, np.ndarray]]:
    """Parse a container produced by ``encode_weights``.

    Returns:
        Tuple of (config JSON, name -> array)

    Raises:
        CheckpointError: On a bad header, unknown version or truncated data
    """
    if blob[:4] != MAGIC:
        raise CheckpointError("not a weight checkpoint (bad magic header)")
    try:
        (version,) = struct.unpack_from("<B", blob, 4)
        if version != VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (config_len,) = struct.unpack_from("<I", blob, 5)
        offset = 9
        config_json = blob[offset : offset + config_len].decode("utf-8")
        offset += config_len
        (count,) = struct.unpack_from("<I", blob, offset)
        offset += 4

        arrays: dict[str, np.ndarray] = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", blob, offset)
            offset += 4 * ndim
            n_values = int(np.prod(shape)) if shape else 1
            end = offset + 8 * n_values
            if end > len(blob):
                raise CheckpointError(f"checkpoint truncated inside array '{name}'")
            arrays[name] = np.frombuffer(blob[offset:end], dtype="<f8").astype(np.float64).reshape(shape)
            offset = end
    except (struct.error, UnicodeDecodeError) as e:
        raise CheckpointError(f"checkpoint is corrupted: {e}") from e
    return config_json, arrays
