import io

import numpy as np
import pytest
from fastapi.testclient import TestClient

from lvdisc.cardiac import PipelineConfig
from lvdisc.locate import Template
from lvdisc.phantoms import default_lv_template, ellipsoid_study
from lvdisc.service import create_app


@pytest.fixture(scope="module")
def phantom_study():
    study, truth = ellipsoid_study(
        n_z=3, n_phase=2, shape=(96, 96), axis_a=15.0, axis_b=12.5,
        es_scale=0.7, spacing=(1.0, 1.0, 8.0), study_id="ph", noise_sigma=0.0,
    )
    return study, truth


@pytest.fixture()
def client(phantom_study, tmp_path):
    study, _ = phantom_study
    app = create_app(
        {study.study_id: study},
        template=Template(default_lv_template(48)),
        cfg=PipelineConfig(),
        out_dir=tmp_path,
        session_path=tmp_path / "session.json",
    )
    return TestClient(app)


def test_studies_listing(client, phantom_study):
    study, _ = phantom_study
    res = client.get("/api/v1/studies")
    assert res.status_code == 200
    (entry,) = res.json()
    assert entry["id"] == study.study_id
    assert (entry["n_z"], entry["n_phase"]) == (study.n_z, study.n_phase)
    assert entry["has_labels"]


def test_slice_meta_and_image_roundtrip(client, phantom_study):
    from PIL import Image

    study, _ = phantom_study
    meta = client.get("/api/v1/studies/ph/slices/1/0").json()
    assert meta["width"] == study.width and meta["result"] is None

    res = client.get("/api/v1/studies/ph/slices/1/0/image.png")
    assert res.status_code == 200
    assert res.headers["content-type"] == "image/png"
    served = np.asarray(Image.open(io.BytesIO(res.content)))
    expect = np.clip(np.rint(study.slice_at(1, 0).pixels * 255), 0, 255).astype(np.uint8)
    assert np.array_equal(served, expect)


def test_unknown_ids_are_404(client):
    assert client.get("/api/v1/studies/nope/slices/0/0").status_code == 404
    assert client.get("/api/v1/studies/ph/slices/9/0").status_code == 404
    assert client.get("/api/v1/studies/ph/slices/0/7/image.png").status_code == 404


def test_seed_fits_phantom_center(client, phantom_study):
    # z=1 is the mid slice: true pool ellipse (a, b) = (15, 12.5) at the center
    res = client.post("/api/v1/studies/ph/slices/1/0/seed", json={"x": 47.5, "y": 47.5})
    assert res.status_code == 200
    body = res.json()
    assert body["status"] == "ok" and not body["weak"]
    assert body["seq"] >= 1
    pts = np.array(body["contour"])
    assert len(pts) == 129
    # vertex distance from the analytic boundary within 1 px (implicit-value
    # residual scaled by the smaller semi-axis bounds the true distance)
    a_true, b_true = 15.0, 12.5
    u = pts[:, 0] - 47.5
    v = pts[:, 1] - 47.5
    resid = np.sqrt((u / a_true) ** 2 + (v / b_true) ** 2) - 1.0
    assert np.max(np.abs(resid)) * b_true <= 1.0


def test_seed_out_of_bounds_rejected(client):
    res = client.post("/api/v1/studies/ph/slices/0/0/seed", json={"x": 500, "y": 10})
    assert res.status_code == 400
    assert "outside image" in res.json()["detail"]


def test_weak_flag_on_flat_background_seed(client):
    res = client.post("/api/v1/studies/ph/slices/1/0/seed", json={"x": 6.0, "y": 6.0})
    assert res.status_code == 200
    body = res.json()
    assert body["weak"] is True


def test_last_write_wins_with_monotone_seq(client):
    r1 = client.post("/api/v1/studies/ph/slices/2/0/seed", json={"x": 47.5, "y": 47.5}).json()
    r2 = client.post("/api/v1/studies/ph/slices/2/0/seed", json={"x": 46.0, "y": 48.0}).json()
    assert r2["seq"] > r1["seq"]
    meta = client.get("/api/v1/studies/ph/slices/2/0").json()
    assert meta["result"]["seq"] == r2["seq"]


def test_auto_endpoint(client):
    res = client.post("/api/v1/studies/ph/slices/1/0/auto")
    assert res.status_code == 200
    assert res.json()["status"] == "ok"
    assert res.json()["match"]["zeta"] > 0.9


def test_auto_without_template_is_conflict(phantom_study, tmp_path):
    study, _ = phantom_study
    app = create_app({study.study_id: study}, template=None, out_dir=tmp_path)
    res = TestClient(app).post("/api/v1/studies/ph/slices/0/0/auto")
    assert res.status_code == 409


def test_auto_on_degenerate_slice_propagates_failure(phantom_study, tmp_path):
    import numpy as np

    from lvdisc.imaging import CineStudy, GrayImage

    study, _ = phantom_study
    blank = GrayImage(np.zeros((study.width, study.height)))
    slices = [list(row) for row in study.slices]
    slices[0][0] = blank
    broken = CineStudy(
        study_id="ph", slices=tuple(tuple(r) for r in slices),
        slice_spacing=study.slice_spacing,
        ed_phase=study.ed_phase, es_phase=study.es_phase,
    )
    app = create_app({"ph": broken}, template=Template(default_lv_template(48)),
                     out_dir=tmp_path)
    with TestClient(app) as c:
        res = c.post("/api/v1/studies/ph/slices/0/0/auto")
        assert res.status_code == 200
        body = res.json()
        assert body["status"] == "localization_failed"
        assert body["match"]["low_confidence"] is True
        assert body["contour"] is None


def test_report_flow(client, phantom_study):
    study, truth = phantom_study
    res = client.get("/api/v1/studies/ph/report")
    assert res.status_code == 409
    missing = res.json()["detail"]["missing"]
    assert len(missing) == study.n_z * 2

    for z in range(study.n_z):
        for phase in (study.ed_phase, study.es_phase):
            r = client.post(f"/api/v1/studies/ph/slices/{z}/{phase}/auto")
            assert r.json()["status"] == "ok"

    report = client.get("/api/v1/studies/ph/report").json()
    assert report["ef_percent"] == pytest.approx(truth["ef_percent"], abs=2.5)

    # un-accepting one slice reopens the gap
    r = client.post("/api/v1/studies/ph/slices/0/0/accept", json={"accepted": False})
    assert r.status_code == 200
    res = client.get("/api/v1/studies/ph/report")
    assert res.status_code == 409
    assert [0, "ed"] in res.json()["detail"]["missing"]


def test_accept_without_result_is_conflict(client):
    res = client.post("/api/v1/studies/ph/slices/0/1/accept", json={"accepted": True})
    assert res.status_code == 409


def test_session_save_and_restore(phantom_study, tmp_path):
    study, _ = phantom_study
    session = tmp_path / "session.json"
    app = create_app(
        {study.study_id: study}, template=Template(default_lv_template(48)),
        out_dir=tmp_path, session_path=session,
    )
    with TestClient(app) as client1:
        first = client1.post("/api/v1/studies/ph/slices/1/0/seed",
                             json={"x": 47.5, "y": 47.5}).json()
        saved = client1.post("/api/v1/session/save").json()
        assert saved["entries"] == 1 and session.exists()

    app2 = create_app(
        {study.study_id: study}, template=None, out_dir=tmp_path, session_path=session,
    )
    with TestClient(app2) as client2:
        meta = client2.get("/api/v1/studies/ph/slices/1/0").json()
        assert meta["result"] is not None
        assert meta["result"]["params"] == first["params"]
        assert meta["result"]["mask_area_px"] == first["mask_area_px"]
        # sequence numbers continue past the restored ones
        nxt = client2.post("/api/v1/studies/ph/slices/1/1/seed",
                           json={"x": 47.5, "y": 47.5}).json()
        assert nxt["seq"] > first["seq"]


def test_session_restored_into_labelless_server_still_reports(phantom_study, tmp_path):
    # annotate with labels loaded, save, then restart with a label-free copy
    # of the study: the report must assemble without metrics, not crash
    from lvdisc.imaging import CineStudy

    study, _ = phantom_study
    session = tmp_path / "sess.json"
    app = create_app({study.study_id: study},
                     template=Template(default_lv_template(48)),
                     out_dir=tmp_path, session_path=session)
    with TestClient(app) as c:
        for z in range(study.n_z):
            for phase in (study.ed_phase, study.es_phase):
                assert c.post(f"/api/v1/studies/ph/slices/{z}/{phase}/auto").json()["status"] == "ok"
        ef_with_labels = c.get("/api/v1/studies/ph/report").json()["ef_percent"]
        c.post("/api/v1/session/save")

    bare = CineStudy(study_id=study.study_id, slices=study.slices,
                     slice_spacing=study.slice_spacing,
                     ed_phase=study.ed_phase, es_phase=study.es_phase)
    app2 = create_app({bare.study_id: bare}, template=None,
                      out_dir=tmp_path, session_path=session)
    with TestClient(app2) as c2:
        report = c2.get("/api/v1/studies/ph/report").json()
        assert report["aggregate_metrics"] is None
        assert report["ef_percent"] == pytest.approx(ef_with_labels, abs=1e-9)


def test_identical_request_sequences_reproduce_reports(phantom_study, tmp_path):
    study, truth = phantom_study
    reports = []
    for run in range(2):
        app = create_app({study.study_id: study},
                         template=Template(default_lv_template(48)),
                         out_dir=tmp_path / str(run))
        with TestClient(app) as c:
            for z in range(study.n_z):
                for phase in (study.ed_phase, study.es_phase):
                    c.post(f"/api/v1/studies/ph/slices/{z}/{phase}/auto")
            reports.append(c.get("/api/v1/studies/ph/report").json())
    assert reports[0] == reports[1]
