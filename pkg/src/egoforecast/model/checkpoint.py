"""Checkpoint serialization.

Layout: 4-byte magic ``CXAT``, one format version byte, a 4-byte
little-endian header length, a UTF-8 JSON header (model config, the
ordered parameter name/shape list, training metadata), then every
parameter's values concatenated as little-endian float64 in header
order.  Loading validates everything before building a model, so a
corrupt file never yields a partial model.
"""
import json
import struct

import numpy as np

MAGIC = b"CXAT"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    """Malformed checkpoint (bad magic, unparseable header)."""


class CheckpointVersionError(CheckpointError):
    """Format version not supported by this build."""


class CheckpointTruncatedError(CheckpointError):
    """File shorter than its own header promises."""


class CheckpointShapeError(CheckpointError):
    """Header parameter shapes disagree with the model the config builds."""


def save_checkpoint(model, path, meta=None):
    named = model.params.items()
    header = {
        "config": model.config.to_dict(),
        "params": [[name, list(t.shape)] for name, t in named],
        "meta": dict(meta or {}),
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for _, t in named:
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Rebuild (model, meta) from a checkpoint file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 9:
        raise CheckpointTruncatedError(
            "file is %d bytes, too short for a checkpoint preamble" % len(raw))
    if raw[:4] != MAGIC:
        raise CheckpointError("bad magic %r, not a checkpoint" % raw[:4])
    version = raw[4]
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            "checkpoint format version %d, this build reads %d"
            % (version, FORMAT_VERSION))
    (hlen,) = struct.unpack_from("<I", raw, 5)
    if len(raw) < 9 + hlen:
        raise CheckpointTruncatedError(
            "header claims %d bytes but only %d remain" % (hlen, len(raw) - 9))
    try:
        header = json.loads(raw[9:9 + hlen].decode("utf-8"))
        config_dict = header["config"]
        param_list = header["params"]
        meta = header.get("meta", {})
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CheckpointError("unparseable checkpoint header: %s" % exc)

    from . import build_model
    from .config import ModelConfig

    config = ModelConfig.from_dict(config_dict)
    model = build_model(config, seed=0)

    store_names = model.params.names()
    header_names = [name for name, _ in param_list]
    if header_names != store_names:
        raise CheckpointShapeError(
            "parameter list mismatch: header has %d names, model built from "
            "the stored config has %d" % (len(header_names), len(store_names)))

    total = sum(int(np.prod(shape)) for _, shape in param_list)
    body = raw[9 + hlen:]
    if len(body) < total * 8:
        raise CheckpointTruncatedError(
            "parameter payload holds %d values, header promises %d"
            % (len(body) // 8, total))

    values = np.frombuffer(body[:total * 8], dtype="<f8")
    offset = 0
    staged = []
    for name, shape in param_list:
        shape = tuple(int(s) for s in shape)
        n = int(np.prod(shape))
        tensor = model.params[name]
        if tensor.shape != shape:
            raise CheckpointShapeError(
                "parameter %r has shape %r in the file but %r in the model"
                % (name, shape, tensor.shape))
        staged.append((tensor, values[offset:offset + n].reshape(shape)))
        offset += n
    for tensor, arr in staged:
        tensor.data[...] = arr
    return model, meta
