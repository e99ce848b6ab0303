"""Self-contained model files: magic "GFRG", format version, JSON+binary
payload, SHA-256 checksum. Loading a saved model reproduces its predictions
bit-exactly."""

from __future__ import annotations

import base64
import hashlib
import json
import struct
from typing import Any

import numpy as np

from .embedder import EmbeddingConfig, EmbeddingModel
from .errors import ChecksumError, InvalidArgument, IoError, VersionError
from .fingerspell import FingerspellModel
from .gesture import GestureHeadConfig, GestureModel
from .landmarks import NormalizationConfig, ScaleReference
from .nn import AffineParams, BatchNormParams, LstmParams

MAGIC = b"GFRG"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQ")  # magic, version, payload length


def _enc_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype=np.float64)
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _dec_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype=np.float64).reshape(d["shape"]).copy()


_LAYER_TYPES = {"affine": AffineParams, "batchnorm": BatchNormParams, "lstm": LstmParams}


def _enc_layer(layer) -> dict:
    rec: dict[str, Any] = {"kind": layer.kind,
                           "arrays": {k: _enc_array(v) for k, v in layer.arrays().items()}}
    if isinstance(layer, BatchNormParams):
        rec["momentum"] = layer.momentum
        rec["eps"] = layer.eps
    return rec


def _dec_layer(rec: dict):
    cls = _LAYER_TYPES[rec["kind"]]
    arrays = {k: _dec_array(v) for k, v in rec["arrays"].items()}
    if cls is BatchNormParams:
        return cls.restore(arrays, momentum=rec["momentum"], eps=rec["eps"])
    return cls.restore(arrays)


def _enc_norm_cfg(cfg: NormalizationConfig) -> dict:
    return {"scale_reference": cfg.scale_reference.value,
            "keep_rotation": cfg.keep_rotation, "epsilon": cfg.epsilon}


def _dec_norm_cfg(d: dict) -> NormalizationConfig:
    return NormalizationConfig(scale_reference=ScaleReference(d["scale_reference"]),
                               keep_rotation=d["keep_rotation"], epsilon=d["epsilon"])


def _enc_embedder(model: EmbeddingModel) -> dict:
    return {
        "config": {"input_dim": model.config.input_dim,
                   "hidden_dims": list(model.config.hidden_dims),
                   "embedding_dim": model.config.embedding_dim,
                   "use_batchnorm": model.config.use_batchnorm},
        "version": model.version,
        "affines": [_enc_layer(a) for a in model.affines],
        "batchnorms": [_enc_layer(b) for b in model.batchnorms],
    }


def _dec_embedder(d: dict) -> EmbeddingModel:
    cfg = EmbeddingConfig(input_dim=d["config"]["input_dim"],
                          hidden_dims=tuple(d["config"]["hidden_dims"]),
                          embedding_dim=d["config"]["embedding_dim"],
                          use_batchnorm=d["config"]["use_batchnorm"])
    return EmbeddingModel(config=cfg,
                          affines=[_dec_layer(a) for a in d["affines"]],
                          batchnorms=[_dec_layer(b) for b in d["batchnorms"]],
                          version=d["version"])


def _write(path, kind: str, body: dict, metadata: dict | None) -> None:
    payload = json.dumps({"kind": kind, "metadata": metadata or {}, "body": body},
                         separators=(",", ":"), sort_keys=True).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, len(payload)))
            fh.write(payload)
            fh.write(hashlib.sha256(payload).digest())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_payload(path, expect_kind: str | None = None) -> dict:
    """Validate magic/version/checksum and return the decoded payload."""
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if len(blob) < _HEADER.size + 32:
        raise ChecksumError(f"{path}: file truncated")
    magic, version, length = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise InvalidArgument(f"{path}: not a GFRG model file")
    if version != FORMAT_VERSION:
        raise VersionError(f"{path}: format version {version}, supported {FORMAT_VERSION}")
    payload = blob[_HEADER.size:_HEADER.size + length]
    digest = blob[_HEADER.size + length:_HEADER.size + length + 32]
    if len(payload) != length or hashlib.sha256(payload).digest() != digest:
        raise ChecksumError(f"{path}: payload checksum mismatch")
    decoded = json.loads(payload.decode("utf-8"))
    if expect_kind is not None and decoded["kind"] != expect_kind:
        raise InvalidArgument(f"{path}: expected a {expect_kind} file, got {decoded['kind']}")
    return decoded


def save_model(model: GestureModel, path, metadata: dict | None = None) -> None:
    body = {
        "embedder": _enc_embedder(model.embedder),
        "head": [_enc_layer(h) for h in model.head],
        "head_config": {"num_gestures": model.head_config.num_gestures,
                        "hidden_dims": list(model.head_config.hidden_dims),
                        "dropout_rate": model.head_config.dropout_rate},
        "label_map": {str(i): name for i, name in model.label_map.items()},
        "norm_cfg": _enc_norm_cfg(model.norm_cfg),
    }
    _write(path, "gesture_model", body, metadata)


def load_model(path) -> GestureModel:
    body = read_payload(path, expect_kind="gesture_model")["body"]
    cfg = GestureHeadConfig(num_gestures=body["head_config"]["num_gestures"],
                            hidden_dims=tuple(body["head_config"]["hidden_dims"]),
                            dropout_rate=body["head_config"]["dropout_rate"])
    return GestureModel(
        embedder=_dec_embedder(body["embedder"]),
        head=[_dec_layer(h) for h in body["head"]],
        label_map={int(i): name for i, name in body["label_map"].items()},
        norm_cfg=_dec_norm_cfg(body["norm_cfg"]),
        head_config=cfg,
    )


def save_embedder(model: EmbeddingModel, path, metadata: dict | None = None) -> None:
    _write(path, "embedder", {"embedder": _enc_embedder(model)}, metadata)


def load_embedder(path) -> EmbeddingModel:
    return _dec_embedder(read_payload(path, expect_kind="embedder")["body"]["embedder"])


def save_fingerspell(model: FingerspellModel, path, metadata: dict | None = None) -> None:
    body = {
        "embedder": _enc_embedder(model.embedder),
        "lstm_fw": _enc_layer(model.lstm_fw),
        "lstm_bw": _enc_layer(model.lstm_bw),
        "char_proj": _enc_layer(model.char_proj),
    }
    _write(path, "fingerspell_model", body, metadata)


def load_fingerspell(path) -> FingerspellModel:
    body = read_payload(path, expect_kind="fingerspell_model")["body"]
    return FingerspellModel(
        embedder=_dec_embedder(body["embedder"]),
        lstm_fw=_dec_layer(body["lstm_fw"]),
        lstm_bw=_dec_layer(body["lstm_bw"]),
        char_proj=_dec_layer(body["char_proj"]),
    )
