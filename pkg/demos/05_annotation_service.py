"""The seed-click annotation service, driven headlessly end to end.

Spins the FastAPI app up in-process, walks the exact HTTP conversation the
browser UI has with it (list studies, fetch a slice, post a click, accept,
pull the report), and prints each exchange. To run the same thing against
a real server:

    lvdisc serve --input demos/out/demo_study.nii --template demos/out/template.pgm --port 8080

then open http://127.0.0.1:8080/ for the browser UI (after building
frontend/, see README) or replay the calls below with curl.
"""

import json
import pathlib

from fastapi.testclient import TestClient

from lvdisc import PipelineConfig, Template
from lvdisc.imgio import save_pgm
from lvdisc.phantoms import default_lv_template, ellipsoid_study
from lvdisc.service import create_app

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

study, truth = ellipsoid_study(n_z=3, n_phase=2, shape=(96, 96), axis_a=15.0,
                               axis_b=12.5, es_scale=0.7, spacing=(1.0, 1.0, 8.0),
                               study_id="demo", noise_sigma=0.02)
save_pgm(OUT / "template.pgm", default_lv_template(48))

app = create_app({"demo": study}, template=Template(default_lv_template(48)),
                 cfg=PipelineConfig(), out_dir=OUT, session_path=OUT / "session.json")
client = TestClient(app)

print("GET /api/v1/studies")
print("  ->", json.dumps(client.get("/api/v1/studies").json(), indent=2)[:220], "...\n")

print("GET /api/v1/studies/demo/slices/1/0  (metadata before any work)")
meta = client.get("/api/v1/studies/demo/slices/1/0").json()
print(f"  -> {meta['width']}x{meta['height']} px, result: {meta['result']}\n")

print("POST /api/v1/studies/demo/slices/1/0/seed  {x: 47.5, y: 47.5}  (the click)")
res = client.post("/api/v1/studies/demo/slices/1/0/seed", json={"x": 47.5, "y": 47.5}).json()
print(f"  -> status={res['status']} energy={res['energy']:+.3f} weak={res['weak']} "
      f"contour={len(res['contour'])} points seq={res['seq']}\n")

print("POST .../auto on every remaining slice (template-driven localization)")
for z in range(study.n_z):
    for phase in (study.ed_phase, study.es_phase):
        r = client.post(f"/api/v1/studies/demo/slices/{z}/{phase}/auto").json()
        print(f"  z={z} phase={phase}: {r['status']} zeta={r['match']['zeta']:.3f}")

print("\nGET /api/v1/studies/demo/report")
report = client.get("/api/v1/studies/demo/report").json()
print(f"  -> EDV {report['edv_mm3']:.0f}  ESV {report['esv_mm3']:.0f}  "
      f"EF {report['ef_percent']:.2f}%  (analytic {truth['ef_percent']:.2f}%)")

print("\nPOST /api/v1/session/save")
print("  ->", client.post("/api/v1/session/save").json())
