"""Binary model checkpoints.

Layout (all integers little-endian):

    bytes 0..7   magic b"EMODACK1"
    uint32       header length in bytes
    header       UTF-8 JSON: format_version, variant, taxonomy, embed_dim,
                 hidden_dim, vocab_size, max_len, tokens (vocabulary in id
                 order, ids >= 2)
    uint32       number of parameters
    per param:   uint16 name length, name UTF-8, uint8 ndim,
                 uint32 x ndim dims, then prod(dims) float64 values

Writing the same model twice yields identical bytes: the header JSON is
key-sorted and parameters serialize in their fixed construction order.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .model import MtlModel, Variant
from .textprep import Vocabulary

MAGIC = b"EMODACK1"
FORMAT_VERSION = 1


def save_checkpoint(path, model: MtlModel, vocab: Vocabulary, max_len: int) -> None:
    if len(vocab) != model.vocab_size:
        raise ValueError(f"vocab size {len(vocab)} does not match model embedding rows {model.vocab_size}")
    header = {
        "format_version": FORMAT_VERSION,
        "variant": model.variant.label,
        "taxonomy": model.variant.emotions,
        "embed_dim": model.embed_dim,
        "hidden_dim": model.hidden_dim,
        "vocab_size": model.vocab_size,
        "max_len": max_len,
        "tokens": vocab.tokens,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    names = model.params.names()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", len(names)))
        for name in names:
            value = model.params.value(name)
            name_bytes = name.encode("utf-8")
            fh.write(struct.pack("<H", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<B", value.ndim))
            fh.write(struct.pack(f"<{value.ndim}I", *value.shape))
            fh.write(np.ascontiguousarray(value, dtype="<f8").tobytes())


def load_checkpoint(path) -> tuple[MtlModel, Vocabulary, int]:
    with open(path, "rb") as fh:
        blob = fh.read()

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise ValueError(f"{path}: truncated checkpoint while reading {what}")
        chunk = blob[pos:pos + n]
        pos += n
        return chunk

    pos = 0
    if take(len(MAGIC), "magic") != MAGIC:
        raise ValueError(f"{path}: not a model checkpoint (bad magic)")
    (header_len,) = struct.unpack("<I", take(4, "header length"))
    header = json.loads(take(header_len, "header").decode("utf-8"))
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('format_version')!r}")

    vocab = Vocabulary(header["tokens"])
    model = MtlModel(
        vocab_size=header["vocab_size"],
        embed_dim=header["embed_dim"],
        hidden_dim=header["hidden_dim"],
        variant=Variant.parse(header["variant"]),
        seed=0,
    )
    if len(vocab) != model.vocab_size:
        raise ValueError(f"{path}: header vocab_size disagrees with token list")

    (n_params,) = struct.unpack("<I", take(4, "parameter count"))
    values = {}
    for _ in range(n_params):
        (name_len,) = struct.unpack("<H", take(2, "name length"))
        name = take(name_len, "name").decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1, "ndim"))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim, "shape"))
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        raw = take(8 * count, f"data for {name!r}")
        values[name] = np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)
    if pos != len(blob):
        raise ValueError(f"{path}: trailing bytes after last parameter")
    model.params.load_values(values)
    return model, vocab, int(header["max_len"])
