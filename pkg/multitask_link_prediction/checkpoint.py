""" Single-file model checkpoints.

Layout: the versioned header line, the length of the manifest as an 8-byte
little-endian integer, the msgpack-encoded manifest (model config, number
of relation types and the names and shapes of all parameters) and finally
the parameter values as little-endian float64, in manifest order.
"""
import logging
import struct
from pathlib import Path

import msgpack
import numpy as np

from multitask_link_prediction.errors import CheckpointError
from multitask_link_prediction.model import ModelConfig, ModelParams

logger = logging.getLogger(__name__)

HEADER = b"MTDEA-CKPT-1\n"
MANIFEST_KEYS = ("config", "num_relations", "parameters")


def checkpoint_save(params, path):
    """ Save model parameters to a checkpoint file.

    Parameters
    ----------
    params : ModelParams
        The parameters.

    path : str or pathlib.Path
        Output path.
    """
    path = Path(path).expanduser()

    manifest = {
        "config": params.config.to_dict(),
        "num_relations": params.num_relations,
        "parameters": [
            [name, list(value.shape)] for name, value in params.arrays.items()
        ],
    }
    payload = msgpack.packb(manifest, use_bin_type=True)

    with open(path, "wb") as f:
        f.write(HEADER)
        f.write(struct.pack("<Q", len(payload)))
        f.write(payload)
        for value in params.arrays.values():
            f.write(np.ascontiguousarray(value, dtype="<f8").tobytes())

    logger.info(f"Saved checkpoint to {path}")


def read_manifest(path):
    """ Read the manifest of a checkpoint without its parameter values. """
    manifest, _ = _read(path)
    return manifest


def _read(path):
    """ Read the manifest and the raw parameter bytes. """
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(f"No such file: {path}")

    with open(path, "rb") as f:
        content = f.read()

    if not content.startswith(HEADER):
        version = content.split(b"\n", 1)[0][:32]
        raise CheckpointError(
            f"{path} is not a {HEADER.decode().strip()} checkpoint "
            f"(header {version!r})"
        )

    offset = len(HEADER)
    if len(content) < offset + 8:
        raise CheckpointError(f"{path} is truncated")
    (length,) = struct.unpack("<Q", content[offset : offset + 8])
    offset += 8
    if len(content) < offset + length:
        raise CheckpointError(f"{path} is truncated")

    try:
        manifest = msgpack.unpackb(
            content[offset : offset + length], raw=False
        )
    except ValueError as e:
        raise CheckpointError(f"Corrupted manifest in {path}: {e}")
    if not isinstance(manifest, dict):
        raise CheckpointError(f"Corrupted manifest in {path}")
    missing = [key for key in MANIFEST_KEYS if key not in manifest]
    if missing:
        raise CheckpointError(
            f"Manifest of {path} lacks {', '.join(missing)}"
        )

    return manifest, content[offset + length :]


def checkpoint_load(path):
    """ Load model parameters from a checkpoint file.

    Parameters
    ----------
    path : str or pathlib.Path
        Path to a file written by :func:`checkpoint_save`.

    Returns
    -------
    ModelParams
        The parameters, bit-identical to the saved ones.
    """
    manifest, data = _read(path)

    try:
        shapes = [
            (str(name), tuple(int(n) for n in shape))
            for name, shape in manifest["parameters"]
        ]
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"Corrupted parameter list in {path}: {e}")

    expected = sum(int(np.prod(shape)) for _, shape in shapes)
    if len(data) != 8 * expected:
        raise CheckpointError(
            f"{path} holds {len(data)} data bytes, expected {8 * expected}"
        )

    values = np.frombuffer(data, dtype="<f8")
    arrays = {}
    offset = 0
    for name, shape in shapes:
        size = int(np.prod(shape))
        arrays[name] = (
            values[offset : offset + size].reshape(shape).astype(np.float64)
        )
        offset += size

    try:
        config = ModelConfig(**manifest["config"])
        params = ModelParams(arrays, config, int(manifest["num_relations"]))
    except (TypeError, ValueError) as e:
        raise CheckpointError(f"Inconsistent manifest in {path}: {e}")
    logger.debug(f"Loaded {len(arrays)} parameter arrays from {path}")

    return params
