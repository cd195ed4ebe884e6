"""File IO: a minimal NIfTI-1 reader plus PGM/PNG image loading.

NIfTI support is a deliberately small read-only subset: single-file ``.nii``
(optionally gzipped), little-endian, datatypes uint8/int16/uint16/float32,
3D or 4D.  Anything else is rejected loudly with the byte offset at which
parsing gave up.  Writing NIfTI is out of scope.
"""

from __future__ import annotations

import gzip
import json
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionError, FormatError, UnsupportedFormatError
from .imaging import BinaryMask, CineStudy, GrayImage, normalize

__all__ = ["load_image", "load_study", "load_labels", "read_nifti", "save_png", "save_pgm"]

_NIFTI_HDR_SIZE = 348
_NIFTI_DTYPES = {2: np.uint8, 4: np.int16, 16: np.float32, 512: np.uint16}


def _read_bytes(path) -> bytes:
    data = Path(path).read_bytes()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def read_nifti(path):
    """Parse a NIfTI-1 file into (array, pixdim) with the raw stored values.

    The array has shape (nx, ny, nz, nt); trailing axes are 1 for 3D files.
    ``pixdim`` is the (dx, dy, dz) voxel spacing in mm (1.0 where absent).
    """
    data = _read_bytes(path)
    if len(data) < _NIFTI_HDR_SIZE:
        raise FormatError(f"{path}: truncated NIfTI header", offset=len(data))
    (sizeof_hdr,) = struct.unpack_from("<i", data, 0)
    if sizeof_hdr != _NIFTI_HDR_SIZE:
        if struct.unpack_from(">i", data, 0)[0] == _NIFTI_HDR_SIZE:
            raise UnsupportedFormatError(f"{path}: big-endian NIfTI is not supported")
        raise FormatError(f"{path}: bad sizeof_hdr {sizeof_hdr}", offset=0)
    magic = data[344:348]
    if magic != b"n+1\x00":
        raise FormatError(f"{path}: magic {magic!r} is not a single-file NIfTI-1", offset=344)

    dim = struct.unpack_from("<8h", data, 40)
    ndim = dim[0]
    if ndim not in (3, 4):
        raise UnsupportedFormatError(f"{path}: only 3D/4D images supported, got dim[0]={ndim}")
    nx, ny, nz = dim[1], dim[2], dim[3]
    nt = dim[4] if ndim == 4 else 1
    if min(nx, ny, nz, nt) < 1:
        raise FormatError(f"{path}: non-positive dimension in {dim[1:5]}", offset=40)

    (datatype,) = struct.unpack_from("<h", data, 70)
    if datatype not in _NIFTI_DTYPES:
        raise UnsupportedFormatError(f"{path}: unsupported datatype code {datatype}")
    dtype = np.dtype(_NIFTI_DTYPES[datatype]).newbyteorder("<")

    pixdim = struct.unpack_from("<8f", data, 76)
    (vox_offset,) = struct.unpack_from("<f", data, 108)
    scl_slope, scl_inter = struct.unpack_from("<2f", data, 112)

    offset = int(vox_offset)
    if offset < _NIFTI_HDR_SIZE:
        raise FormatError(f"{path}: vox_offset {offset} overlaps the header", offset=108)
    n_vox = nx * ny * nz * nt
    need = offset + n_vox * dtype.itemsize
    if len(data) < need:
        raise FormatError(
            f"{path}: file ends before voxel data ({len(data)} < {need} bytes)",
            offset=len(data),
        )

    raw = np.frombuffer(data, dtype=dtype, count=n_vox, offset=offset)
    arr = raw.reshape((nx, ny, nz, nt), order="F").astype(np.float64)
    if scl_slope not in (0.0, 1.0):
        arr = arr * scl_slope + scl_inter
    elif scl_slope == 1.0 and scl_inter != 0.0:
        arr = arr + scl_inter

    spacing = tuple(float(p) if p > 0 else 1.0 for p in pixdim[1:4])
    return arr, spacing


def _load_pgm(data: bytes, path) -> tuple[np.ndarray, int]:
    # P5 header: magic, width, height, maxval as whitespace-separated ASCII
    # tokens with '#' comments, then one binary whitespace byte and samples.
    pos = 0

    def token():
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: unexpected end of PGM header", offset=pos)
        return data[start:pos]

    if token() != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5)", offset=0)
    try:
        width, height, maxval = int(token()), int(token()), int(token())
    except ValueError:
        raise FormatError(f"{path}: malformed PGM header", offset=pos) from None
    if not (width >= 1 and height >= 1 and 0 < maxval < 65536):
        raise FormatError(f"{path}: bad PGM geometry {width}x{height} maxval {maxval}", offset=pos)
    pos += 1  # single whitespace after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    need = width * height * dtype.itemsize
    if len(data) - pos < need:
        raise FormatError(f"{path}: truncated PGM pixel data", offset=len(data))
    arr = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return arr.reshape((height, width)).astype(np.float64), maxval


def load_image(path, spacing: tuple[float, float] = (1.0, 1.0), normalized: bool = True) -> GrayImage:
    """Load a single 2D image (PGM P5 or 8-bit grayscale PNG).

    Stored values are divided by the format's maximum first; the usual
    percentile normalization then runs unless ``normalized=False``, in which
    case the plain scaled values are kept.
    """
    path = Path(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        arr, maxval = _load_pgm(data, path)
        arr = arr / float(maxval)
    else:
        try:
            with Image.open(path) as im:
                deep = im.mode in ("I;16", "I")
                if not deep and im.mode != "L":
                    im = im.convert("L")
                arr = np.asarray(im, dtype=np.float64)
        except UnidentifiedImageError:
            raise FormatError(f"{path}: not a PGM, PNG, or other readable image", offset=0) from None
        arr = arr / (65535.0 if deep else 255.0)
    if normalized:
        return normalize(arr, spacing_x=spacing[0], spacing_y=spacing[1])
    return GrayImage(np.clip(arr, 0.0, 1.0), spacing_x=spacing[0], spacing_y=spacing[1])


def _phase_sidecar(path) -> dict:
    sidecar = Path(path)
    for suffix in (".phases.json",):
        cand = sidecar.with_name(sidecar.name.split(".")[0] + suffix)
        if cand.exists():
            return json.loads(cand.read_text())
    return {}


def load_study(
    path,
    study_id: str | None = None,
    ed_phase: int | None = None,
    es_phase: int | None = None,
    labels_path=None,
    label_value: int = 1,
) -> CineStudy:
    """Load a 3D/4D NIfTI as a CineStudy; each slice is normalized independently.

    ED/ES phase indices are taken from explicit arguments, else from a
    ``<name>.phases.json`` sidecar ({"ed": i, "es": j}), else default to
    0 and n_phase // 2.
    """
    arr, (dx, dy, dz) = read_nifti(path)
    nx, ny, nz, nt = arr.shape
    sidecar = _phase_sidecar(path)
    if ed_phase is None:
        ed_phase = int(sidecar.get("ed", 0))
    if es_phase is None:
        es_phase = int(sidecar.get("es", nt // 2))
    slices = tuple(
        tuple(
            normalize(arr[:, :, z, t].T, spacing_x=dx, spacing_y=dy)
            for t in range(nt)
        )
        for z in range(nz)
    )
    labels = {}
    if labels_path is not None:
        labels = load_labels(labels_path, label_value=label_value, expect_shape=(nx, ny, nz, nt))
    return CineStudy(
        study_id=study_id or Path(path).name.split(".")[0],
        slices=slices,
        slice_spacing=dz,
        ed_phase=ed_phase,
        es_phase=es_phase,
        labels=labels,
    )


def load_labels(path, label_value: int = 1, expect_shape=None) -> dict:
    """Load a NIfTI label volume into {(z, phase): BinaryMask} for one label value."""
    arr, _ = read_nifti(path)
    if expect_shape is not None and arr.shape[:3] != tuple(expect_shape[:3]):
        raise DimensionError(
            f"label volume shape {arr.shape} does not match study {tuple(expect_shape)}"
        )
    nx, ny, nz, nt = arr.shape
    out = {}
    for z in range(nz):
        for t in range(nt):
            plane = np.rint(arr[:, :, z, t]).astype(np.int64).T
            if np.any(plane == label_value):
                out[(z, t)] = BinaryMask(plane == label_value)
    return out


def save_png(path, img) -> None:
    """Write a GrayImage (or [0,1] array) as 8-bit grayscale PNG."""
    arr = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    q = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(q, mode="L").save(path)


def save_pgm(path, img) -> None:
    """Write a GrayImage (or [0,1] array) as an 8-bit binary PGM."""
    arr = img.pixels if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    q = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    h, w = q.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(q.tobytes())
