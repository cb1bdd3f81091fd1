import struct

import msgpack
import numpy as np
import numpy.testing as npt
import pytest

from multitask_link_prediction.checkpoint import (
    HEADER,
    checkpoint_load,
    checkpoint_save,
    read_manifest,
)
from multitask_link_prediction.errors import CheckpointError
from multitask_link_prediction.model import ATTENTION


class TestCheckpoint:
    def test_round_trip(self, params, tmp_path):
        """"""
        path = tmp_path / "model.ckpt"
        checkpoint_save(params, path)

        loaded = checkpoint_load(path)
        assert loaded.digest() == params.digest()
        assert loaded.config == params.config
        assert loaded.num_relations == 3
        assert list(loaded.arrays) == list(params.arrays)
        npt.assert_equal(loaded[ATTENTION], params[ATTENTION])

    def test_adapted_attention(self, params, tmp_path):
        """"""
        adapted = params.with_attention(np.arange(58.0).reshape(29, 2))
        checkpoint_save(adapted, tmp_path / "model.ckpt")

        loaded = checkpoint_load(tmp_path / "model.ckpt")
        assert loaded.num_relations == 29
        assert loaded.digest() == adapted.digest()

    def test_manifest(self, params, tmp_path):
        """"""
        checkpoint_save(params, tmp_path / "model.ckpt")
        manifest = read_manifest(tmp_path / "model.ckpt")
        assert manifest["num_relations"] == 3
        assert manifest["config"]["hidden_dim"] == 4
        assert manifest["parameters"][-1] == [ATTENTION, [3, 2]]

    def test_header(self, params, tmp_path):
        """"""
        path = tmp_path / "model.ckpt"
        checkpoint_save(params, path)
        content = path.read_bytes()
        assert content.startswith(HEADER)

        path.write_bytes(b"MTDEA-CKPT-0\n" + content[len(HEADER) :])
        with pytest.raises(CheckpointError, match="MTDEA-CKPT-0"):
            checkpoint_load(path)

    def test_truncated(self, params, tmp_path):
        """"""
        path = tmp_path / "model.ckpt"
        checkpoint_save(params, path)
        content = path.read_bytes()

        for size in (len(HEADER) + 4, len(HEADER) + 20, len(content) - 8):
            path.write_bytes(content[:size])
            with pytest.raises(CheckpointError):
                checkpoint_load(path)

        path.write_bytes(content + b"\x00" * 8)
        with pytest.raises(CheckpointError):
            checkpoint_load(path)

    def test_missing(self, tmp_path):
        """"""
        with pytest.raises(FileNotFoundError):
            checkpoint_load(tmp_path / "missing.ckpt")

    @pytest.mark.parametrize("key", ["config", "num_relations", "parameters"])
    def test_manifest_missing_key(self, params, tmp_path, key):
        """"""
        path = tmp_path / "model.ckpt"
        checkpoint_save(params, path)
        manifest = read_manifest(path)
        del manifest[key]
        _rewrite_manifest(path, manifest)

        with pytest.raises(CheckpointError, match=key):
            checkpoint_load(path)

    def test_manifest_bad_config(self, params, tmp_path):
        """"""
        path = tmp_path / "model.ckpt"
        checkpoint_save(params, path)
        manifest = read_manifest(path)
        manifest["config"]["width"] = 3
        _rewrite_manifest(path, manifest)

        with pytest.raises(CheckpointError, match="Inconsistent"):
            checkpoint_load(path)

        manifest["config"] = [1, 2]
        _rewrite_manifest(path, manifest)
        with pytest.raises(CheckpointError):
            checkpoint_load(path)


def _rewrite_manifest(path, manifest):
    content = path.read_bytes()
    (length,) = struct.unpack("<Q", content[len(HEADER) : len(HEADER) + 8])
    data = content[len(HEADER) + 8 + length :]
    payload = msgpack.packb(manifest, use_bin_type=True)
    path.write_bytes(
        HEADER + struct.pack("<Q", len(payload)) + payload + data
    )
