import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gestureforge.embedder import EmbeddingModel
from gestureforge.landmarks import frame_to_record
from gestureforge.service.app import WS_MODEL_NOT_FOUND, create_app
from gestureforge.service.bench import LatencyStats, bench_latency
from gestureforge.synth import GenSpec, gen_gesture_dataset

JOB_TIMEOUT_S = 120


def make_client(tmp_path, token=None, embedder_seed=0):
    app = create_app(tmp_path / "data", embedder=EmbeddingModel.create(seed=embedder_seed),
                     token=token, workers=1)
    return TestClient(app)


def upload_dataset(client, project_id, classes, per_class=12, seed=5, noise=0.01):
    data = gen_gesture_dataset(classes, per_class=per_class, background_count=per_class,
                               gen=GenSpec(seed=seed, noise_sigma=noise))
    by_class = {}
    for frame, label in data:
        by_class.setdefault(label, []).append(frame_to_record(frame))
    for label, records in by_class.items():
        r = client.post(f"/api/v1/projects/{project_id}/samples",
                        json={"class_name": label, "samples": records})
        assert r.status_code == 200, r.text
    return data


def wait_for_job(client, job_id, timeout=JOB_TIMEOUT_S):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/v1/jobs/{job_id}").json()
        if job["state"] in ("succeeded", "failed"):
            return job
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


def start_job(client, project_id, **overrides):
    body = {"regime": "frozen", "k": 8, "seed": 7, "epochs": 3}
    body.update(overrides)
    r = client.post(f"/api/v1/projects/{project_id}/jobs", json=body)
    assert r.status_code == 202, r.text
    return r.json()


class TestProjects:
    def test_create_and_get(self, tmp_path):
        client = make_client(tmp_path)
        r = client.post("/api/v1/projects", json={"name": "demo", "classes": ["fist"]})
        assert r.status_code == 201
        project = r.json()
        assert project["classes"] == ["background", "fist"]
        assert client.get(f"/api/v1/projects/{project['id']}").json()["name"] == "demo"
        assert len(client.get("/api/v1/projects").json()) == 1

    def test_unknown_project_404(self, tmp_path):
        client = make_client(tmp_path)
        r = client.get("/api/v1/projects/nope")
        assert r.status_code == 404
        assert r.json()["detail"]["code"] == "NotFound"

    def test_duplicate_class_409(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p"}).json()["id"]
        assert client.post(f"/api/v1/projects/{pid}/classes",
                           json={"name": "wave"}).status_code == 200
        r = client.post(f"/api/v1/projects/{pid}/classes", json={"name": "wave"})
        assert r.status_code == 409
        assert r.json()["detail"]["code"] == "Conflict"

    def test_invalid_frame_400_names_invariant(self, tmp_path, rng):
        from .conftest import random_frame
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p", "classes": ["a"]}).json()["id"]
        record = frame_to_record(random_frame(rng))
        record["pts"] = record["pts"][:20]
        r = client.post(f"/api/v1/projects/{pid}/samples",
                        json={"class_name": "a", "samples": [record]})
        assert r.status_code == 400
        detail = r.json()["detail"]
        assert detail["code"] == "invalid_frame"
        assert "21" in detail["message"]

    def test_upload_dedup_key(self, tmp_path, rng):
        from .conftest import random_frame
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p", "classes": ["a"]}).json()["id"]
        record = frame_to_record(random_frame(rng))
        body = {"class_name": "a", "samples": [record], "key": "upload-1"}
        first = client.post(f"/api/v1/projects/{pid}/samples", json=body).json()
        again = client.post(f"/api/v1/projects/{pid}/samples", json=body).json()
        assert first == {"added": 1, "deduplicated": False, "sample_counts": {"background": 0, "a": 1}}
        assert again["deduplicated"] is True
        assert again["sample_counts"]["a"] == 1

    def test_unknown_class_rejected(self, tmp_path, rng):
        from .conftest import random_frame
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p"}).json()["id"]
        r = client.post(f"/api/v1/projects/{pid}/samples",
                        json={"class_name": "ghost",
                              "samples": [frame_to_record(random_frame(rng))]})
        assert r.status_code == 400
        assert "ghost" in r.json()["detail"]["message"]


class TestJobs:
    def test_training_flow_and_determinism(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects",
                          json={"name": "p", "classes": ["fist", "victory"]}).json()["id"]
        upload_dataset(client, pid, ["fist", "victory"])
        job1 = wait_for_job(client, start_job(client, pid)["id"])
        assert job1["state"] == "succeeded", job1["error"]
        assert job1["result_model_id"]
        blob1 = client.get(f"/api/v1/models/{job1['result_model_id']}/file").content
        # identical flow -> bit-identical model file (and same content id)
        job2 = wait_for_job(client, start_job(client, pid)["id"])
        assert job2["result_model_id"] == job1["result_model_id"]
        blob2 = client.get(f"/api/v1/models/{job2['result_model_id']}/file").content
        assert blob1 == blob2
        info = client.get(f"/api/v1/models/{job1['result_model_id']}").json()
        assert info["project_id"] == pid
        assert info["metadata"]["k"] == 8
        assert set(info["labels"]) == {"background", "fist", "victory"}

    def test_k_too_large_fails_with_reason(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p", "classes": ["fist"]}).json()["id"]
        upload_dataset(client, pid, ["fist"], per_class=4)
        job = wait_for_job(client, start_job(client, pid, k=50)["id"])
        assert job["state"] == "failed"
        assert "InsufficientData" in job["error"]

    def test_declared_class_without_samples_fails(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects",
                          json={"name": "p", "classes": ["fist", "empty_one"]}).json()["id"]
        upload_dataset(client, pid, ["fist"], per_class=10)
        job = wait_for_job(client, start_job(client, pid, k=5)["id"])
        assert job["state"] == "failed"
        assert "empty_one" in job["error"]

    def test_invalid_regime_400(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects", json={"name": "p"}).json()["id"]
        r = client.post(f"/api/v1/projects/{pid}/jobs",
                        json={"regime": "warp", "k": 5})
        assert r.status_code == 400
        assert r.json()["detail"]["code"] == "invalid_regime"

    def test_concurrent_jobs_on_different_projects(self, tmp_path):
        app = create_app(tmp_path / "data", embedder=EmbeddingModel.create(seed=0),
                         workers=2)
        client = TestClient(app)
        jobs = []
        for seed, classes in ((17, ["fist", "victory"]), (23, ["open_palm", "point"])):
            pid = client.post("/api/v1/projects",
                              json={"name": "-".join(classes), "classes": classes}).json()["id"]
            upload_dataset(client, pid, classes, per_class=10, seed=seed)
            jobs.append((classes, start_job(client, pid, k=6, epochs=4)))
        for classes, job in jobs:
            done = wait_for_job(client, job["id"])
            assert done["state"] == "succeeded", done["error"]
            info = client.get(f"/api/v1/models/{done['result_model_id']}").json()
            assert set(info["labels"]) == {"background", *classes}


class TestEvalEndpoint:
    def test_eval_against_uploaded_split(self, tmp_path):
        client = make_client(tmp_path)
        pid = client.post("/api/v1/projects",
                          json={"name": "p", "classes": ["fist", "victory"]}).json()["id"]
        upload_dataset(client, pid, ["fist", "victory"], per_class=10)
        job = wait_for_job(client, start_job(client, pid, k=6, epochs=8)["id"])
        assert job["state"] == "succeeded"
        eval_data = gen_gesture_dataset(["fist", "victory"], per_class=10,
                                        background_count=10, gen=GenSpec(seed=99, noise_sigma=0.01))
        body = {"samples": [{"label": label, "frame": frame_to_record(frame)}
                            for frame, label in eval_data]}
        r = client.post(f"/api/v1/models/{job['result_model_id']}/eval", json=body)
        assert r.status_code == 200
        report = r.json()
        assert report["complementary_ss_f1"] + report["ss_f1"] == 1.0
        assert np.asarray(report["confusion"]).sum() == len(eval_data)


class TestStream:
    def _trained_model(self, client, classes=("fist", "victory")):
        pid = client.post("/api/v1/projects",
                          json={"name": "p", "classes": list(classes)}).json()["id"]
        upload_dataset(client, pid, list(classes), per_class=12)
        job = wait_for_job(client, start_job(client, pid, k=8, epochs=8)["id"])
        assert job["state"] == "succeeded", job["error"]
        return job["result_model_id"]

    def test_stream_replies_in_order_for_1000_frame_burst(self, tmp_path):
        client = make_client(tmp_path)
        model_id = self._trained_model(client)
        frames = gen_gesture_dataset(["fist"], per_class=50, background_count=0,
                                     gen=GenSpec(seed=31, noise_sigma=0.01))
        records = [frame_to_record(f) for f, _ in frames]
        with client.websocket_connect(f"/api/v1/stream/{model_id}") as ws:
            for i in range(1000):
                rec = dict(records[i % len(records)])
                rec["t_ms"] = i + 1
                ws.send_json(rec)
            for i in range(1000):
                reply = ws.receive_json()
                assert reply["t_ms"] == i + 1
                assert len(reply["top"]) == 3  # 2 gestures + background
                probs = [t["p"] for t in reply["top"]]
                assert abs(sum(probs) - 1.0) < 1e-6

    def test_order_preserved_across_concurrent_connections(self, tmp_path):
        client = make_client(tmp_path)
        model_id = self._trained_model(client)
        frames = gen_gesture_dataset(["fist"], per_class=10, background_count=0,
                                     gen=GenSpec(seed=32, noise_sigma=0.01))
        records = [frame_to_record(f) for f, _ in frames]
        with client.websocket_connect(f"/api/v1/stream/{model_id}") as ws_a, \
             client.websocket_connect(f"/api/v1/stream/{model_id}") as ws_b:
            for i in range(30):  # interleave sends across the two connections
                rec_a = dict(records[i % len(records)])
                rec_a["t_ms"] = 10 * (i + 1)
                ws_a.send_json(rec_a)
                rec_b = dict(records[(i + 3) % len(records)])
                rec_b["t_ms"] = 10 * (i + 1) + 1
                ws_b.send_json(rec_b)
            for i in range(30):
                assert ws_a.receive_json()["t_ms"] == 10 * (i + 1)
            for i in range(30):
                assert ws_b.receive_json()["t_ms"] == 10 * (i + 1) + 1

    def test_out_of_order_error_keeps_connection(self, tmp_path, rng):
        from .conftest import random_frame
        client = make_client(tmp_path)
        model_id = self._trained_model(client)
        with client.websocket_connect(f"/api/v1/stream/{model_id}") as ws:
            rec = frame_to_record(random_frame(rng))
            rec["t_ms"] = 10
            ws.send_json(rec)
            assert "top" in ws.receive_json()
            rec["t_ms"] = 5  # goes backwards
            ws.send_json(rec)
            err = ws.receive_json()
            assert err["error"]["code"] == "out_of_order"
            rec["t_ms"] = 11
            ws.send_json(rec)
            assert "top" in ws.receive_json()

    def test_malformed_record_error_frame(self, tmp_path):
        client = make_client(tmp_path)
        model_id = self._trained_model(client)
        with client.websocket_connect(f"/api/v1/stream/{model_id}") as ws:
            ws.send_json({"t_ms": 1, "handedness": "right", "loc": [0.5, 0.5, 0.3],
                          "pts": [[0, 0, 0]] * 20})
            err = ws.receive_json()
            assert err["error"]["code"] == "invalid_frame"

    def test_unknown_model_closes_with_code(self, tmp_path):
        from starlette.websockets import WebSocketDisconnect
        client = make_client(tmp_path)
        with client.websocket_connect("/api/v1/stream/doesnotexist") as ws:
            with pytest.raises(WebSocketDisconnect) as excinfo:
                ws.receive_json()
            assert excinfo.value.code == WS_MODEL_NOT_FOUND


class TestAuth:
    def test_token_required_when_configured(self, tmp_path):
        client = make_client(tmp_path, token="sekrit")
        assert client.get("/api/v1/projects").status_code == 401
        ok = client.get("/api/v1/projects", headers={"Authorization": "Bearer sekrit"})
        assert ok.status_code == 200

    def test_no_token_open_access(self, tmp_path):
        client = make_client(tmp_path)
        assert client.get("/api/v1/status").status_code == 200

    def test_stream_requires_token(self, tmp_path):
        from starlette.websockets import WebSocketDisconnect
        client = make_client(tmp_path, token="sekrit")
        with client.websocket_connect("/api/v1/stream/any") as ws:
            with pytest.raises(WebSocketDisconnect) as excinfo:
                ws.receive_json()
            assert excinfo.value.code == 4401


def quick_model():
    from gestureforge.gesture import GestureHeadConfig, GestureModel
    from gestureforge.landmarks import NormalizationConfig
    from gestureforge.nn import AffineParams
    rng = np.random.default_rng(0)
    return GestureModel(
        embedder=EmbeddingModel.create(seed=0),
        head=[AffineParams.create(128, 64, rng), AffineParams.create(64, 3, rng)],
        label_map={0: "background", 1: "fist", 2: "victory"},
        norm_cfg=NormalizationConfig(),
        head_config=GestureHeadConfig(num_gestures=2))


class TestBenchLatency:
    def test_zero_repetitions_empty_stats(self, rng):
        from .conftest import random_frame
        stats = bench_latency(quick_model(), [random_frame(rng)], repetitions=0)
        assert stats == LatencyStats.empty()

    def test_measures_and_orders_percentiles(self, rng):
        from .conftest import random_frame
        frames = [random_frame(rng) for _ in range(10)]
        stats = bench_latency(quick_model(), frames, repetitions=3)
        assert stats.count == 30
        assert 0.0 < stats.p50_ms <= stats.p95_ms <= stats.max_ms

    def test_percentile_ordering(self):
        stats = LatencyStats.from_samples_ms([0.5, 1.0, 2.0, 8.0, 3.0])
        assert stats.p50_ms <= stats.p95_ms <= stats.max_ms
        assert stats.count == 5
