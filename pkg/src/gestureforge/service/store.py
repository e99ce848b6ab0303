"""Single-directory persistence: one manifest + sample file per project, one
content-addressed model file per trained model."""

from __future__ import annotations

import hashlib
import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import GestureForgeError, InvalidArgument
from ..gesture import BACKGROUND, GestureModel, Sample
from ..landmarks import FrameLandmarks, frame_to_record, parse_sequence_record
from ..modelfile import load_model, read_payload, save_model


class NotFound(GestureForgeError):
    """Unknown project, job or model id."""


class Conflict(GestureForgeError):
    """Duplicate class name or similar uniqueness violation."""


def _now_ms() -> int:
    return int(time.time() * 1000)


@dataclass
class Project:
    id: str
    name: str
    classes: list[str]
    created_ms: int
    updated_ms: int
    sample_counts: dict[str, int] = field(default_factory=dict)
    upload_keys: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "classes": self.classes,
                "created_ms": self.created_ms, "updated_ms": self.updated_ms,
                "sample_counts": self.sample_counts}


class ProjectStore:
    """Append-only sample storage with an in-process lock per project."""

    def __init__(self, data_dir: Path):
        self.root = Path(data_dir)
        (self.root / "projects").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, project_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(project_id, threading.Lock())

    def _dir(self, project_id: str) -> Path:
        return self.root / "projects" / project_id

    def _manifest_path(self, project_id: str) -> Path:
        return self._dir(project_id) / "manifest.json"

    def _samples_path(self, project_id: str) -> Path:
        return self._dir(project_id) / "samples.lmk.jsonl"

    def _load(self, project_id: str) -> Project:
        path = self._manifest_path(project_id)
        if not path.exists():
            raise NotFound(f"project {project_id!r} not found")
        return Project(**json.loads(path.read_text()))

    def _save(self, project: Project):
        project.updated_ms = _now_ms()
        self._manifest_path(project.id).write_text(json.dumps(project.__dict__, indent=1))

    def create(self, name: str, classes: list[str] | None = None) -> Project:
        classes = list(classes or [])
        if len(set(classes)) != len(classes):
            raise Conflict("class names must be unique")
        if BACKGROUND not in classes:
            classes = [BACKGROUND, *classes]
        project = Project(id=uuid.uuid4().hex[:12], name=name, classes=classes,
                          created_ms=_now_ms(), updated_ms=_now_ms(),
                          sample_counts={c: 0 for c in classes})
        self._dir(project.id).mkdir(parents=True)
        self._samples_path(project.id).touch()
        self._save(project)
        return project

    def get(self, project_id: str) -> Project:
        return self._load(project_id)

    def list(self) -> list[Project]:
        out = []
        for manifest in sorted((self.root / "projects").glob("*/manifest.json")):
            out.append(Project(**json.loads(manifest.read_text())))
        return out

    def add_class(self, project_id: str, name: str) -> Project:
        if not name or not name.strip():
            raise InvalidArgument("class name must be non-empty")
        with self._lock(project_id):
            project = self._load(project_id)
            if name in project.classes:
                raise Conflict(f"class {name!r} already exists")
            project.classes.append(name)
            project.sample_counts.setdefault(name, 0)
            self._save(project)
            return project

    def add_samples(self, project_id: str, class_name: str,
                    frames: list[FrameLandmarks], key: str | None = None) -> tuple[Project, int, bool]:
        """Append labeled frames; a repeated upload key is a deduplicated no-op.

        Returns (project, frames added, deduplicated).
        """
        with self._lock(project_id):
            project = self._load(project_id)
            if class_name not in project.classes:
                raise InvalidArgument(f"class {class_name!r} not declared in the project")
            if key is not None and key in project.upload_keys:
                return project, 0, True
            with open(self._samples_path(project_id), "a", encoding="utf-8") as fh:
                for frame in frames:
                    rec = {"label": class_name, "frames": [frame_to_record(frame)]}
                    fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
            project.sample_counts[class_name] = project.sample_counts.get(class_name, 0) + len(frames)
            if key is not None:
                project.upload_keys.append(key)
            self._save(project)
            return project, len(frames), False

    def snapshot_samples(self, project_id: str) -> list[Sample]:
        """All samples in upload order, decoded; a consistent point-in-time view."""
        with self._lock(project_id):
            self._load(project_id)  # existence check
            lines = self._samples_path(project_id).read_text().splitlines()
        samples: list[Sample] = []
        for lineno, raw in enumerate(lines, start=1):
            if not raw.strip():
                continue
            seq = parse_sequence_record(raw, line=lineno)
            samples.extend((frame, seq.label) for frame in seq.frames)
        return samples


class ModelRegistry:
    """Content-addressed model files: id = sha256 prefix of the file bytes,
    so identical training inputs yield identical ids."""

    def __init__(self, data_dir: Path):
        self.root = Path(data_dir) / "models"
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"
        self._guard = threading.Lock()

    def _index(self) -> dict:
        if self._index_path.exists():
            return json.loads(self._index_path.read_text())
        return {}

    def save(self, model: GestureModel, metadata: dict, project_id: str | None = None) -> str:
        import tempfile
        with tempfile.NamedTemporaryFile(dir=self.root, suffix=".tmp", delete=False) as tmp:
            tmp_path = Path(tmp.name)
        save_model(model, tmp_path, metadata=metadata)
        blob = tmp_path.read_bytes()
        model_id = hashlib.sha256(blob).hexdigest()[:16]
        final = self.root / f"{model_id}.gfrg"
        with self._guard:
            if not final.exists():
                tmp_path.rename(final)
            else:
                tmp_path.unlink()
            index = self._index()
            index[model_id] = {"project_id": project_id, "created_ms": _now_ms(),
                               "metadata": metadata}
            self._index_path.write_text(json.dumps(index, indent=1))
        return model_id

    def path(self, model_id: str) -> Path:
        p = self.root / f"{model_id}.gfrg"
        if not p.exists():
            raise NotFound(f"model {model_id!r} not found")
        return p

    def load(self, model_id: str) -> GestureModel:
        return load_model(self.path(model_id))

    def info(self, model_id: str) -> dict:
        path = self.path(model_id)
        payload = read_payload(path, expect_kind="gesture_model")
        entry = self._index().get(model_id, {})
        return {"id": model_id, "project_id": entry.get("project_id"),
                "created_ms": entry.get("created_ms"),
                "metadata": payload["metadata"],
                "labels": list(payload["body"]["label_map"].values()),
                "file_bytes": path.stat().st_size,
                "digest": hashlib.sha256(path.read_bytes()).hexdigest()}

    def list(self) -> list[dict]:
        ids = sorted(p.stem for p in self.root.glob("*.gfrg"))
        return [self.info(i) for i in ids]
