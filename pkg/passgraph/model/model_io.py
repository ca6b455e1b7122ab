"""
Model file container.

Layout::

    PASSGRAPH-MODEL\\n
    {"format_version": 1, "format": "mpnn", "config": {...}, "params": [[name, shape], ...]}\\n
    <little-endian float64 payload, parameters in header order>
    \\nSHA256 <hex digest of everything above>\\n
"""

import hashlib
import json
from pathlib import Path

import numpy as np

from passgraph.model.mpnn import MpnnConfig, MpnnModel
from passgraph.utils.errors import ChecksumFailure, ShapeMismatch, VersionMismatch
from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)

MAGIC = b"PASSGRAPH-MODEL\n"
FORMAT_VERSION = 1
DTYPE = "<f8"
_TRAILER_PREFIX = b"\nSHA256 "
_TRAILER_LEN = len(_TRAILER_PREFIX) + 64 + 1


def save_params(
    path: str | Path, format_tag: str, config: dict, params: dict[str, np.ndarray]
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format_version": FORMAT_VERSION,
        "format": format_tag,
        "config": config,
        "params": [[name, list(value.shape)] for name, value in params.items()],
        "dtype": DTYPE,
    }
    body = MAGIC + json.dumps(header, sort_keys=True).encode("utf-8") + b"\n"
    body += b"".join(
        np.ascontiguousarray(value, dtype=DTYPE).tobytes() for value in params.values()
    )
    digest = hashlib.sha256(body).hexdigest().encode("ascii")
    path.write_bytes(body + _TRAILER_PREFIX + digest + b"\n")
    logger.info("Saved %s model (%d tensors) to %s", format_tag, len(params), path)
    return path


def load_params(path: str | Path, format_tag: str) -> tuple[dict, dict]:
    """Returns (config, params); verifies checksum, version and tag first."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + _TRAILER_LEN or not raw.startswith(MAGIC):
        raise ChecksumFailure(f"{path}: not a passgraph model file")
    body, trailer = raw[:-_TRAILER_LEN], raw[-_TRAILER_LEN:]
    if not trailer.startswith(_TRAILER_PREFIX):
        raise ChecksumFailure(f"{path}: missing checksum trailer")
    expected = trailer[len(_TRAILER_PREFIX) : -1].decode("ascii", errors="replace")
    if hashlib.sha256(body).hexdigest() != expected:
        raise ChecksumFailure(f"{path}: checksum mismatch")

    header_end = body.index(b"\n", len(MAGIC))
    header = json.loads(body[len(MAGIC) : header_end].decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: format version {header.get('format_version')},"
            f" this build reads {FORMAT_VERSION}"
        )
    if header.get("format") != format_tag:
        raise VersionMismatch(
            f"{path}: holds a {header.get('format')!r} model, expected {format_tag!r}"
        )

    payload = np.frombuffer(body[header_end + 1 :], dtype=DTYPE)
    sizes = [int(np.prod(shape)) for _, shape in header["params"]]
    if sum(sizes) != payload.size:
        raise ShapeMismatch(
            f"{path}: header declares {sum(sizes)} values, payload has {payload.size}"
        )
    params, offset = {}, 0
    for (name, shape), size in zip(header["params"], sizes):
        params[name] = payload[offset : offset + size].reshape(shape).astype(np.float64)
        offset += size
    return header["config"], params


def save_model(model: MpnnModel, path: str | Path) -> Path:
    return save_params(path, "mpnn", model.config.as_dict(), model.params)


def load_model(path: str | Path, expected: MpnnConfig | None = None) -> MpnnModel:
    config_dict, params = load_params(path, "mpnn")
    config = MpnnConfig.from_dict(config_dict)
    if expected is not None:
        for key in ("hidden_dim", "num_layers", "mlp_depth", "node_dim", "edge_dim"):
            if getattr(expected, key) != getattr(config, key):
                raise ShapeMismatch(
                    f"{path}: {key}={getattr(config, key)},"
                    f" expected {getattr(expected, key)}"
                )
    return MpnnModel(config, params)
