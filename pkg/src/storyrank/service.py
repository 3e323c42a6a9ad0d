"""HTTP JSON API for human annotation sessions.

A session wraps one backlog: a deterministic queue of item pairs, an
append-only judgment log, and optionally a model trained from those
judgments. Judgments are durably journaled (flush + fsync) before the
request is acknowledged, and sessions are rebuilt from their journals on
startup, so a process restart loses nothing that was acked.

Story points stay server-side: annotators only ever see titles and
descriptions. There is no tie choice; a skip re-queues the pair at the
end of the serving order.

Error bodies are {"code": ..., "message": ...} with conventional HTTP
status codes (404 unknown resource, 409 state conflict, 422 bad input).
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import models as md
from .dataset import ProjectDataset, item_text
from .features import HashedTfidfModel, embed, embed_items, fit_hashed_tfidf
from .pairing import ComparativePair, PairSet, generate_annotation_pairs

log = logging.getLogger(__name__)

STATUS_COLLECTING = "collecting"
STATUS_TRAINED = "trained"


class ServiceError(Exception):
    def __init__(self, status_code: int, code: str, message: str):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


class CreateSessionBody(BaseModel):
    dataset: str
    k: int = Field(ge=1)
    seed: int = 0


class JudgmentBody(BaseModel):
    pair_index: int = Field(ge=0)
    choice: str = Field(pattern="^[AB]$")
    annotator: str = "anonymous"


class SkipBody(BaseModel):
    pair_index: int = Field(ge=0)


class TrainBody(BaseModel):
    config: dict = Field(default_factory=dict)


class NewItemBody(BaseModel):
    id: str = Field(min_length=1)
    title: str = ""
    description: str = ""


class RankingBody(BaseModel):
    new_items: list[NewItemBody] = Field(default_factory=list)


@dataclass
class Session:
    session_id: str
    dataset_name: str
    k: int
    seed: int
    queue: list[tuple[str, str]]
    order: list[int]
    judgments: dict[int, dict] = field(default_factory=dict)
    model: md.TrainedModel | None = None
    status: str = STATUS_COLLECTING
    lock: threading.Lock = field(default_factory=threading.Lock)

    def next_unjudged(self) -> int | None:
        for idx in self.order:
            if idx not in self.judgments:
                return idx
        return None

    def progress(self) -> dict:
        return {"judged": len(self.judgments), "total": len(self.queue)}

    def summary(self) -> dict:
        return {
            "session_id": self.session_id,
            "dataset": self.dataset_name,
            "k": self.k,
            "seed": self.seed,
            "status": self.status,
            "progress": self.progress(),
        }


class SessionStore:
    """All live sessions plus their journals under one directory."""

    def __init__(self, datasets: dict[str, ProjectDataset], journal_dir, tfidf_dim: int = 384):
        self.datasets = dict(datasets)
        self.journal_dir = Path(journal_dir)
        self.journal_dir.mkdir(parents=True, exist_ok=True)
        self.tfidf_dim = tfidf_dim
        self.sessions: dict[str, Session] = {}
        # one featurizer per dataset, fit on the full backlog text
        self._tfidf: dict[str, HashedTfidfModel] = {}
        self._embeddings: dict[str, dict] = {}
        self._replay_all()

    def featurizer(self, dataset_name: str) -> HashedTfidfModel:
        if dataset_name not in self._tfidf:
            dataset = self.datasets[dataset_name]
            texts = [item_text(it) for it in dataset.items]
            self._tfidf[dataset_name] = fit_hashed_tfidf(texts, dim=self.tfidf_dim)
        return self._tfidf[dataset_name]

    def embeddings(self, dataset_name: str):
        if dataset_name not in self._embeddings:
            dataset = self.datasets[dataset_name]
            texts = {it.id: item_text(it) for it in dataset.items}
            self._embeddings[dataset_name] = embed_items(self.featurizer(dataset_name), texts)
        return self._embeddings[dataset_name]

    def _journal_path(self, session_id: str) -> Path:
        return self.journal_dir / f"{session_id}.jsonl"

    def _append(self, session_id: str, event: dict) -> None:
        line = json.dumps(event, sort_keys=True)
        with open(self._journal_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def get(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError(404, "unknown-session", f"no session {session_id!r}")
        return session

    def create(self, dataset_name: str, k: int, seed: int) -> Session:
        dataset = self.datasets.get(dataset_name)
        if dataset is None:
            known = sorted(self.datasets)
            raise ServiceError(404, "unknown-dataset",
                               f"no dataset {dataset_name!r}; loaded: {known}")
        session_id = uuid.uuid4().hex
        queue = generate_annotation_pairs(list(dataset.items), k, seed)
        session = Session(session_id=session_id, dataset_name=dataset_name,
                          k=k, seed=seed, queue=queue, order=list(range(len(queue))))
        self.sessions[session_id] = session
        self._append(session_id, {"event": "created", "session_id": session_id,
                                  "dataset": dataset_name, "k": k, "seed": seed})
        return session

    def submit_judgment(self, session: Session, pair_index: int, choice: str,
                        annotator: str) -> dict:
        with session.lock:
            if not 0 <= pair_index < len(session.queue):
                raise ServiceError(404, "unknown-pair",
                                   f"pair_index {pair_index} outside queue of "
                                   f"{len(session.queue)} pairs")
            if pair_index in session.judgments:
                raise ServiceError(409, "duplicate-judgment",
                                   f"pair {pair_index} already judged")
            y = 1 if choice == "A" else -1
            record = {"pair_index": pair_index, "choice": choice, "y": y,
                      "annotator": annotator, "at": time.time()}
            self._append(session.session_id, {"event": "judgment", **record})
            session.judgments[pair_index] = record
            return record

    def skip(self, session: Session, pair_index: int) -> None:
        with session.lock:
            if not 0 <= pair_index < len(session.queue):
                raise ServiceError(404, "unknown-pair",
                                   f"pair_index {pair_index} outside queue of "
                                   f"{len(session.queue)} pairs")
            if pair_index in session.judgments:
                raise ServiceError(409, "already-judged",
                                   f"pair {pair_index} already judged, cannot skip")
            self._append(session.session_id,
                         {"event": "skip", "pair_index": pair_index, "at": time.time()})
            session.order.remove(pair_index)
            session.order.append(pair_index)

    def train(self, session: Session, overrides: dict) -> dict:
        with session.lock:
            if not session.judgments:
                raise ServiceError(409, "no-judgments",
                                   "at least one judgment is required before training")
            # sessions train the no-validation comparative regime only
            forbidden = {"loss", "patience"} & overrides.keys()
            if forbidden:
                raise ServiceError(422, "invalid-config",
                                   f"overrides not allowed here: {sorted(forbidden)}")
            try:
                config = md.default_config(md.LOSS_COMPARATIVE, **overrides)
            except (TypeError, ValueError) as exc:
                raise ServiceError(422, "invalid-config", str(exc)) from exc
            pairs = [ComparativePair(*session.queue[i], record["y"])
                     for i, record in sorted(session.judgments.items())]
            pair_set = PairSet(pairs=tuple(pairs), k=session.k, dropped=0)
            emb = self.embeddings(session.dataset_name)
            started = time.perf_counter()
            trained = md.train_comparative(pair_set, emb, None, config)
            elapsed = time.perf_counter() - started
            self._append(session.session_id,
                         {"event": "trained", "at": time.time(),
                          "elapsed_s": elapsed, "model": trained.to_dict()})
            session.model = trained
            session.status = STATUS_TRAINED
            return {
                "status": session.status,
                "judgments_used": len(pairs),
                "epochs_run": len(trained.history.train_loss),
                "best_epoch": trained.best_epoch,
                "final_train_loss": (trained.history.train_loss[-1]
                                     if trained.history.train_loss else None),
                "history": {"train_loss": list(trained.history.train_loss)},
                "elapsed_s": elapsed,
                "config": _config_echo(config),
            }

    def ranking(self, session: Session, new_items: list[NewItemBody]) -> list[dict]:
        if session.model is None:
            raise ServiceError(409, "not-trained",
                               "train the session before requesting a ranking")
        dataset = self.datasets[session.dataset_name]
        emb = self.embeddings(session.dataset_name)
        head = session.model.head
        scored: list[tuple[str, float]] = []
        seen = set()
        for it in dataset.items:
            scored.append((it.id, md.score(head, emb.get(it.id))))
            seen.add(it.id)
        featurizer = self.featurizer(session.dataset_name)
        for item in new_items:
            if item.id in seen:
                raise ServiceError(409, "duplicate-item-id",
                                   f"item id {item.id!r} already present")
            seen.add(item.id)
            text = " ".join(part for part in (item.title, item.description) if part)
            scored.append((item.id, md.score(head, embed(featurizer, text))))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return [{"id": item_id, "score": score, "rank": rank}
                for rank, (item_id, score) in enumerate(scored, start=1)]

    def _replay_all(self) -> None:
        for path in sorted(self.journal_dir.glob("*.jsonl")):
            try:
                self._replay_one(path)
            except (OSError, ValueError, KeyError) as exc:
                log.warning("skipping journal %s: %s", path.name, exc)

    def _replay_one(self, path: Path) -> None:
        session: Session | None = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                kind = event["event"]
                if kind == "created":
                    name = event["dataset"]
                    if name not in self.datasets:
                        raise ValueError(f"references unloaded dataset {name!r}")
                    dataset = self.datasets[name]
                    queue = generate_annotation_pairs(list(dataset.items),
                                                      event["k"], event["seed"])
                    session = Session(session_id=event["session_id"], dataset_name=name,
                                      k=event["k"], seed=event["seed"], queue=queue,
                                      order=list(range(len(queue))))
                elif session is None:
                    raise ValueError("journal does not start with a created event")
                elif kind == "judgment":
                    session.judgments[event["pair_index"]] = {
                        key: event[key] for key in ("pair_index", "choice", "y",
                                                    "annotator", "at")}
                elif kind == "skip":
                    session.order.remove(event["pair_index"])
                    session.order.append(event["pair_index"])
                elif kind == "trained":
                    session.model = md.TrainedModel.from_dict(event["model"])
                    session.status = STATUS_TRAINED
        if session is not None:
            self.sessions[session.session_id] = session


def _config_echo(config: md.TrainConfig) -> dict:
    return {
        "loss": config.loss,
        "max_epochs": config.max_epochs,
        "lr_start": config.lr_start,
        "lr_end": config.lr_end,
        "batch_size": config.batch_size,
        "optimizer": config.optimizer,
        "l2_penalty": config.l2_penalty,
        "patience": config.patience,
        "seed": config.seed,
    }


def _item_card(dataset: ProjectDataset, item_id: str) -> dict:
    item = dataset.by_id(item_id)
    return {"id": item.id, "title": item.title, "description": item.description}


def create_app(datasets: dict[str, ProjectDataset], journal_dir,
               tfidf_dim: int = 384) -> FastAPI:
    """Build the API around a set of loaded backlogs and a journal directory."""
    app = FastAPI(title="storyrank annotation service")
    # the browser client is served from elsewhere (static files); the API
    # carries no credentials, so a permissive CORS policy is fine
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(datasets, journal_dir, tfidf_dim)
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(RequestValidationError)
    async def validation_error_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"code": "validation-error", "message": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "datasets": sorted(store.datasets)}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        session = store.create(body.dataset, body.k, body.seed)
        return session.summary()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store.get(session_id).summary()

    @app.get("/sessions/{session_id}/next-pair")
    def next_pair(session_id: str):
        session = store.get(session_id)
        idx = session.next_unjudged()
        if idx is None:
            return {"done": True}
        dataset = store.datasets[session.dataset_name]
        id_a, id_b = session.queue[idx]
        return {"done": False, "pair_index": idx,
                "item_a": _item_card(dataset, id_a),
                "item_b": _item_card(dataset, id_b)}

    @app.post("/sessions/{session_id}/judgments", status_code=201)
    def submit_judgment(session_id: str, body: JudgmentBody):
        session = store.get(session_id)
        record = store.submit_judgment(session, body.pair_index, body.choice,
                                       body.annotator)
        return {"recorded": True, "pair_index": record["pair_index"],
                "y": record["y"], "progress": session.progress()}

    @app.post("/sessions/{session_id}/skip")
    def skip_pair(session_id: str, body: SkipBody):
        session = store.get(session_id)
        store.skip(session, body.pair_index)
        return {"skipped": True, "pair_index": body.pair_index,
                "progress": session.progress()}

    @app.post("/sessions/{session_id}/train")
    def train_session(session_id: str, body: TrainBody):
        session = store.get(session_id)
        return store.train(session, body.config)

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str):
        session = store.get(session_id)
        return {"ranking": store.ranking(session, [])}

    @app.post("/sessions/{session_id}/ranking")
    def post_ranking(session_id: str, body: RankingBody):
        session = store.get(session_id)
        return {"ranking": store.ranking(session, body.new_items)}

    return app


def load_datasets(paths) -> dict[str, ProjectDataset]:
    """Load every given CSV/JSONL backlog file, keyed by file stem."""
    from .dataset import guess_format, load_project

    datasets = {}
    for raw in paths:
        path = Path(raw)
        dataset = load_project(path, guess_format(path))
        if dataset.name in datasets:
            raise ValueError(f"duplicate dataset name {dataset.name!r}")
        datasets[dataset.name] = dataset
    return datasets


def serve(datasets: dict[str, ProjectDataset], journal_dir, listen: str = "127.0.0.1:8000",
          tfidf_dim: int = 384) -> None:
    import uvicorn

    host, _, port = listen.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"--listen expects host:port, got {listen!r}")
    app = create_app(datasets, journal_dir, tfidf_dim)
    uvicorn.run(app, host=host, port=int(port), log_level="info")
