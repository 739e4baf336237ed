"""Backend for the interactive segmentation annotator: serves images at
multiple integer scales, persists masks and timed click trails, exports the
masked dataset.

Filesystem layout under the store root (the on-disk state is the source of
truth): images/<id>.png, masks/<id>.png (+ timestamped audit copies),
clicks/<id>.log, labels.tsv.  Click log lines are `t x y tool button`.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import imaging
from .errors import (
    BadScale,
    DimensionMismatch,
    MalformedStream,
    NothingToExport,
    StoreUnavailable,
    TimestampRegression,
    UnknownId,
)

MAX_SCALE = 8
TOOLS = ("brush", "eraser", "polygon")


@dataclass(frozen=True)
class ClickEvent:
    t: int          # milliseconds since session start
    x: int          # native-resolution pixels
    y: int
    tool: str
    button: int

    def line(self) -> str:
        return f"{self.t} {self.x} {self.y} {self.tool} {self.button}"

    @classmethod
    def parse(cls, line: str) -> "ClickEvent":
        parts = line.split()
        if len(parts) != 5 or parts[3] not in TOOLS:
            raise ValueError(f"bad click line: {line!r}")
        return cls(int(parts[0]), int(parts[1]), int(parts[2]), parts[3], int(parts[4]))


class SessionStore:
    """One annotation record per image id; writes to a given id are
    serialized, distinct ids may proceed concurrently."""

    def __init__(self, root: str | Path, create: bool = False):
        self.root = Path(root)
        if create:
            for sub in ("images", "masks", "clicks"):
                (self.root / sub).mkdir(parents=True, exist_ok=True)
        if not (self.root / "images").is_dir():
            raise StoreUnavailable(f"{self.root} is not an annotation store")
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, image_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(image_id, threading.Lock())

    # -- population ---------------------------------------------------------

    def add_image(self, image_id: str, image: np.ndarray, label: int = 0) -> None:
        if "/" in image_id or image_id in self.list_ids():
            raise ValueError(f"bad or duplicate image id {image_id!r}")
        (self.root / "images" / f"{image_id}.png").write_bytes(imaging.encode_image(image))
        labels = self._labels()
        labels[image_id] = label
        self._write_labels(labels)

    def _labels(self) -> dict[str, int]:
        path = self.root / "labels.tsv"
        if not path.is_file():
            return {}
        out = {}
        for line in path.read_text().splitlines():
            if line:
                sid, lbl = line.split("\t")
                out[sid] = int(lbl)
        return out

    def _write_labels(self, labels: dict[str, int]) -> None:
        text = "".join(f"{sid}\t{lbl}\n" for sid, lbl in sorted(labels.items()))
        (self.root / "labels.tsv").write_text(text)

    # -- queries --------------------------------------------------------------

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.root / "images").glob("*.png"))

    def list_images(self) -> list[tuple[str, str]]:
        return [(i, "done" if (self.root / "masks" / f"{i}.png").is_file() else "pending")
                for i in self.list_ids()]

    def _image_path(self, image_id: str) -> Path:
        path = self.root / "images" / f"{image_id}.png"
        if not path.is_file():
            raise UnknownId(image_id)
        return path

    def get_image(self, image_id: str, scale: int = 1) -> bytes:
        """PNG at an integer nearest-neighbor upscale (pixel blocks stay
        exact, so UI clicks map back to native pixels losslessly)."""
        if not isinstance(scale, int) or not 1 <= scale <= MAX_SCALE:
            raise BadScale(f"scale must be an integer in 1..{MAX_SCALE}, got {scale}")
        data = self._image_path(image_id).read_bytes()
        if scale == 1:
            return data
        img = imaging.decode_image(data)
        up = img.repeat(scale, axis=0).repeat(scale, axis=1)
        return imaging.encode_image(up)

    def get_mask(self, image_id: str) -> bytes:
        self._image_path(image_id)
        path = self.root / "masks" / f"{image_id}.png"
        if not path.is_file():
            raise UnknownId(f"{image_id} has no mask")
        return path.read_bytes()

    # -- mutations -----------------------------------------------------------

    def put_mask(self, image_id: str, png: bytes) -> None:
        image = imaging.decode_image(self._image_path(image_id).read_bytes())
        mask = imaging.decode_mask(png)
        if mask.shape != image.shape[:2]:
            raise DimensionMismatch(f"mask {mask.shape} vs image {image.shape[:2]}")
        with self._lock(image_id):
            path = self.root / "masks" / f"{image_id}.png"
            if path.is_file():
                audit = self.root / "masks" / f"{image_id}.{time.time_ns()}.prev.png"
                audit.write_bytes(path.read_bytes())
            path.write_bytes(png)

    def append_clicks(self, image_id: str, batch: list[ClickEvent]) -> int:
        self._image_path(image_id)
        with self._lock(image_id):
            path = self.root / "clicks" / f"{image_id}.log"
            last = self._last_timestamp(path)
            for event in batch:
                if event.t < last:
                    raise TimestampRegression(
                        f"{image_id}: timestamp {event.t} < last {last}")
                last = event.t
            with path.open("a") as fh:
                for event in batch:
                    fh.write(event.line() + "\n")
        return len(batch)

    def read_clicks(self, image_id: str) -> list[ClickEvent]:
        self._image_path(image_id)
        path = self.root / "clicks" / f"{image_id}.log"
        if not path.is_file():
            return []
        return [ClickEvent.parse(line) for line in path.read_text().splitlines() if line]

    @staticmethod
    def _last_timestamp(path: Path) -> int:
        if not path.is_file():
            return 0
        lines = [l for l in path.read_text().splitlines() if l]
        return ClickEvent.parse(lines[-1]).t if lines else 0

    def export(self, out_dir: str | Path) -> int:
        """Write every completed record as a masked-example directory entry
        (image PNG + mask PNG + labels.tsv) for the compose pipeline."""
        done = [i for i, status in self.list_images() if status == "done"]
        if not done:
            raise NothingToExport("no completed annotations")
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        labels = self._labels()
        rows = []
        for image_id in done:
            (out / f"{image_id}.png").write_bytes(self._image_path(image_id).read_bytes())
            (out / f"{image_id}_mask.png").write_bytes(self.get_mask(image_id))
            rows.append((image_id, labels.get(image_id, 0)))
        (out / "labels.tsv").write_text("".join(f"{sid}\t{lbl}\n" for sid, lbl in rows))
        return len(done)


def parse_click_batch(text: str) -> list[ClickEvent]:
    try:
        return [ClickEvent.parse(line) for line in text.splitlines() if line.strip()]
    except ValueError as exc:
        raise MalformedStream(str(exc)) from exc


def create_app(store: SessionStore) -> FastAPI:
    """FastAPI app over the store; the UI consumes exactly these endpoints."""
    app = FastAPI(title="ctxaug annotator")

    @app.exception_handler(UnknownId)
    async def _unknown(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=404)

    for err in (BadScale, DimensionMismatch, MalformedStream, TimestampRegression):
        @app.exception_handler(err)
        async def _bad_request(_, exc):
            return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(NothingToExport)
    async def _nothing(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=409)

    @app.get("/images")
    def list_images():
        return [{"id": i, "status": status} for i, status in store.list_images()]

    @app.get("/images/{image_id}")
    def get_image(image_id: str, scale: int = 1):
        return Response(store.get_image(image_id, scale), media_type="image/png")

    @app.get("/images/{image_id}/mask")
    def get_mask(image_id: str):
        return Response(store.get_mask(image_id), media_type="image/png")

    @app.put("/images/{image_id}/mask")
    async def put_mask(image_id: str, request: Request):
        store.put_mask(image_id, await request.body())
        return {"ok": True}

    @app.post("/images/{image_id}/clicks")
    async def post_clicks(image_id: str, request: Request):
        batch = parse_click_batch((await request.body()).decode())
        return {"appended": store.append_clicks(image_id, batch)}

    @app.post("/export")
    async def export(request: Request):
        body = await request.json()
        return {"count": store.export(body["out_dir"])}

    ui_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    if ui_dir.is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
