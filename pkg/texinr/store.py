"""
TINR model files: the compressed texture asset.

Layout (all little-endian), see docs/tinr_format.md:

    magic "TINR" | version u16 | spec block | header CRC-32 u32 | float32 payload | CRC-32 u32

The header CRC covers everything before it and is checked before any header
field is read: a damaged header raises ChecksumError, a short file with an
intact header raises TruncatedFileError.

The payload holds every layer's W (row-major) then b, in layer order,
followed by the hash table when present.
"""

import logging
import os
import struct
import tempfile
import zlib
from pathlib import Path

import numpy as np

from texinr.autodiff import ActivationKind
from texinr.encoding import FOURIER, HASH, IDENTITY, EncoderConfig, HashConfig
from texinr.errors import (
    BadMagicError,
    ChecksumError,
    NumericError,
    StoreError,
    TruncatedFileError,
    VersionMismatchError,
)
from texinr.network import InrModel, NetworkSpec, param_count

log = logging.getLogger(__name__)

MAGIC = b"TINR"
VERSION = 2

HEADER = struct.Struct("<4sHBBHBBBBdHH")
MAX_BASE_SIDE = 0xFFFF
FOURIER_COUNT = struct.Struct("<H")
HASH_BLOCK = struct.Struct("<BBBHd")
CRC = struct.Struct("<I")

ACTIVATION_CODES = {ActivationKind.IDENTITY: 0, ActivationKind.RELU: 1, ActivationKind.SINE: 2}
ENCODER_CODES = {IDENTITY: 0, FOURIER: 1, HASH: 2}

PAYLOAD_DTYPE = np.dtype("<f4")


def _crc(data):
    return zlib.crc32(data) & 0xFFFFFFFF


def _lookup(table, code, what):
    for key, value in table.items():
        if value == code:
            return key
    raise StoreError(f"unknown {what} code {code}")


# ============================================================
# Encoding
# ============================================================
def _spec_block(model):
    spec = model.spec
    enc = spec.encoder
    head = HEADER.pack(
        MAGIC,
        VERSION,
        spec.input_dim,
        model.lod_levels,
        spec.hidden_width,
        spec.hidden_count,
        spec.output_dim,
        ACTIVATION_CODES[ActivationKind(spec.activation)],
        ENCODER_CODES[enc.variant],
        float(spec.omega0),
        *model.base_size,
    )
    if enc.variant == FOURIER:
        head += FOURIER_COUNT.pack(enc.n_frequencies)
        head += np.asarray(enc.frequencies, dtype="<f8").tobytes()
    elif enc.variant == HASH:
        h = enc.hash
        head += HASH_BLOCK.pack(
            h.levels,
            h.table_size.bit_length() - 1,
            h.features_per_entry,
            h.base_resolution,
            float(h.growth),
        )
    return head


def dumps(model):
    if model.spec.hidden_count < 1:
        raise StoreError("models without a hidden layer are not valid texture assets")
    model.spec.validate()
    if len(model.base_size) != 2 or not all(0 <= s <= MAX_BASE_SIDE for s in model.base_size):
        raise StoreError(f"base size {model.base_size} does not fit the header (0..{MAX_BASE_SIDE} per side)")

    chunks = [_spec_block(model)]
    for name, value in model.params().items():
        if not np.all(np.isfinite(value)):
            raise NumericError(f"cannot store non-finite parameter block {name}", where=name)
        chunks.append(np.ascontiguousarray(value, dtype=PAYLOAD_DTYPE).tobytes())

    chunks.insert(1, CRC.pack(_crc(chunks[0])))
    body = b"".join(chunks)
    return body + CRC.pack(_crc(body))


def save(model, path):
    """Write atomically: temp file in the target directory, then rename."""
    data = dumps(model)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# ============================================================
# Decoding
# ============================================================
def _header_end(data):
    """Offset of the header CRC, from the fixed header and encoder block sizes."""
    if len(data) < HEADER.size:
        raise TruncatedFileError("file ends inside the header")
    enc = data[13]
    if enc not in ENCODER_CODES.values():
        raise ChecksumError(f"header is corrupted (encoder code {enc})")
    variant = _lookup(ENCODER_CODES, enc, "encoder")
    end = HEADER.size
    if variant == FOURIER:
        if len(data) < end + FOURIER_COUNT.size:
            raise TruncatedFileError("file ends inside the encoder block")
        (n_f,) = FOURIER_COUNT.unpack_from(data, end)
        end += FOURIER_COUNT.size + 8 * n_f
    elif variant == HASH:
        end += HASH_BLOCK.size
    if len(data) < end + CRC.size:
        if variant == IDENTITY:
            raise TruncatedFileError("file ends inside the header")
        # unverified sizes: a damaged code or count looks the same as a cut
        raise ChecksumError(f"header declares {end + CRC.size} bytes, file has {len(data)}")
    return end


def _parse_header(data):
    if len(data) < len(MAGIC) or data[: len(MAGIC)] != MAGIC:
        if len(data) < len(MAGIC) and MAGIC.startswith(data):
            raise TruncatedFileError("file ends inside the magic number")
        raise BadMagicError(f"not a TINR file (magic {data[:4]!r})")
    if len(data) >= len(MAGIC) + 2:
        (version,) = struct.unpack_from("<H", data, len(MAGIC))
        if version != VERSION:
            raise VersionMismatchError(f"unsupported TINR version {version} (expected {VERSION})")

    end = _header_end(data)
    (stored,) = CRC.unpack_from(data, end)
    if _crc(data[:end]) != stored:
        raise ChecksumError("header CRC-32 mismatch: file is corrupted")

    (_, _, input_dim, lod_levels, width, depth, out_dim, act, enc, omega0, base_w, base_h) = (
        HEADER.unpack_from(data)
    )

    offset = HEADER.size
    variant = _lookup(ENCODER_CODES, enc, "encoder")
    if variant == FOURIER:
        (n_f,) = FOURIER_COUNT.unpack_from(data, offset)
        offset += FOURIER_COUNT.size
        freqs = np.frombuffer(data, dtype="<f8", count=n_f, offset=offset)
        encoder = EncoderConfig(FOURIER, tuple(float(f) for f in freqs))
    elif variant == HASH:
        levels, log2_size, features, base_res, growth = HASH_BLOCK.unpack_from(data, offset)
        encoder = EncoderConfig(HASH, hash=HashConfig(levels, 2**log2_size, features, base_res, growth))
    else:
        encoder = EncoderConfig.identity()

    spec = NetworkSpec(
        input_dim=input_dim,
        hidden_width=width,
        hidden_count=depth,
        output_dim=out_dim,
        activation=_lookup(ACTIVATION_CODES, act, "activation"),
        encoder=encoder,
        omega0=omega0,
    )
    return spec, (lod_levels, (base_w, base_h)), end + CRC.size


def loads(data):
    spec, (lod_levels, base_size), offset = _parse_header(data)
    n_params = param_count(spec)
    expected = offset + PAYLOAD_DTYPE.itemsize * n_params + CRC.size
    if len(data) < expected:
        raise TruncatedFileError(f"expected {expected} bytes, file has {len(data)}")
    if len(data) > expected:
        raise StoreError(f"{len(data) - expected} unexpected trailing bytes")

    (stored_crc,) = CRC.unpack_from(data, expected - CRC.size)
    if _crc(data[: expected - CRC.size]) != stored_crc:
        raise ChecksumError("CRC-32 mismatch: file is corrupted")

    payload = np.frombuffer(data, dtype=PAYLOAD_DTYPE, count=n_params, offset=offset).astype(np.float64)
    layers = []
    pos = 0
    for d_in, d_out in spec.layer_dims:
        W = payload[pos : pos + d_in * d_out].reshape(d_in, d_out).copy()
        pos += d_in * d_out
        b = payload[pos : pos + d_out].copy()
        pos += d_out
        layers.append((W, b))

    hash_table = None
    if spec.encoder.variant == HASH:
        h = spec.encoder.hash
        hash_table = payload[pos:].reshape(h.levels, h.table_size, h.features_per_entry).copy()

    return InrModel(spec, tuple(layers), hash_table, lod_levels, base_size)


def load(path):
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise StoreError(f"cannot read model file {path}: {e}") from e
    return loads(data)


def asset_size_bits(path):
    """Payload bits only (32 per parameter); header and CRC are not counted."""
    return 32 * load(path).param_count


def describe_asset(path):
    data = Path(path).read_bytes()
    spec, (lod_levels, base_size), header_bytes = _parse_header(data)
    model = loads(data)
    info = {
        "path": str(path),
        "tag": spec.tag,
        "lod_levels": lod_levels,
        "base_size": base_size,
        "params": model.param_count,
        "header_bytes": header_bytes,
        "payload_bits": 32 * model.param_count,
        "crc_bytes": CRC.size,
        "file_bytes": len(data),
    }
    log.debug("asset %s", info)
    return info
