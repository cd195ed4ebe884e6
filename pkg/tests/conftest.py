"""Shared fixtures: byte-crafted NIfTI files and phantom studies."""

import struct

import numpy as np
import pytest

from lvdisc.imaging import CineStudy
from lvdisc.phantoms import default_lv_template, ellipsoid_study

NIFTI_DT = {"uint8": 2, "int16": 4, "float32": 16, "uint16": 512}
NIFTI_BITPIX = {"uint8": 8, "int16": 16, "float32": 32, "uint16": 16}


def nifti_bytes(arr, pixdim=(1.0, 1.0, 1.0), dtype="float32", vox_offset=352,
                magic=b"n+1\x00", sizeof_hdr=348, datatype_code=None,
                scl=(0.0, 0.0)) -> bytes:
    """Assemble a single-file little-endian NIfTI-1 blob field by field.

    ``arr`` has shape (nx, ny, nz) or (nx, ny, nz, nt); data is written in
    Fortran order (x fastest) as the format requires.  The knobs exist so
    tests can corrupt individual fields.
    """
    arr = np.asarray(arr)
    ndim = arr.ndim
    dims = list(arr.shape) + [1] * (4 - ndim)
    hdr = bytearray(sizeof_hdr if sizeof_hdr >= 348 else 348)
    struct.pack_into("<i", hdr, 0, sizeof_hdr)
    struct.pack_into("<8h", hdr, 40, ndim, dims[0], dims[1], dims[2], dims[3], 1, 1, 1)
    struct.pack_into("<h", hdr, 70, datatype_code if datatype_code is not None else NIFTI_DT[dtype])
    struct.pack_into("<h", hdr, 72, NIFTI_BITPIX[dtype])
    struct.pack_into("<8f", hdr, 76, 1.0, pixdim[0], pixdim[1], pixdim[2], 0.0, 0.0, 0.0, 0.0)
    struct.pack_into("<f", hdr, 108, float(vox_offset))
    struct.pack_into("<2f", hdr, 112, float(scl[0]), float(scl[1]))
    hdr[344:348] = magic
    body = arr.astype(np.dtype(dtype).newbyteorder("<")).ravel(order="F").tobytes()
    pad = b"\x00" * max(0, int(vox_offset) - len(hdr))
    return bytes(hdr) + pad + body


def study_to_nifti(study: CineStudy, dtype="float32") -> bytes:
    nx, ny = study.width, study.height
    arr = np.zeros((nx, ny, study.n_z, study.n_phase), dtype=np.float64)
    for z in range(study.n_z):
        for t in range(study.n_phase):
            arr[:, :, z, t] = study.slice_at(z, t).pixels.T
    sx = study.slices[0][0].spacing_x
    sy = study.slices[0][0].spacing_y
    return nifti_bytes(arr, pixdim=(sx, sy, study.slice_spacing), dtype=dtype)


def labels_to_nifti(study: CineStudy, label_value=1) -> bytes:
    nx, ny = study.width, study.height
    arr = np.zeros((nx, ny, study.n_z, study.n_phase), dtype=np.uint8)
    for (z, t), mask in study.labels.items():
        arr[:, :, z, t] = mask.bits.T * label_value
    sx = study.slices[0][0].spacing_x
    return nifti_bytes(arr, pixdim=(sx, sx, study.slice_spacing), dtype="uint8")


@pytest.fixture(scope="session")
def lv_template_image():
    return default_lv_template(48)


@pytest.fixture(scope="session")
def small_study():
    """Compact phantom study (5 z, 4 phases, 96 px) for pipeline tests."""
    study, truth = ellipsoid_study(
        n_z=5, n_phase=4, shape=(96, 96), axis_a=15.0, axis_b=12.5,
        es_scale=0.7, spacing=(1.0, 1.0, 8.0), study_id="small", noise_sigma=0.02,
    )
    return study, truth


@pytest.fixture()
def study_files(tmp_path, small_study):
    """The small study written out as NIfTI + labels + config JSON."""
    study, truth = small_study
    study_path = tmp_path / "small.nii"
    labels_path = tmp_path / "small_gt.nii"
    study_path.write_bytes(study_to_nifti(study))
    labels_path.write_bytes(labels_to_nifti(study))
    config_path = tmp_path / "config.json"
    config_path.write_text(
        '{"ed_phase": %d, "es_phase": %d, "labels": "%s", "label_value": 1}'
        % (study.ed_phase, study.es_phase, labels_path)
    )
    return {"study": study_path, "labels": labels_path, "config": config_path, "truth": truth}
