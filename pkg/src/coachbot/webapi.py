"""HTTP serving layer over a loaded engine bundle.

The bundle is immutable and shared across requests; the session store is
the only mutable state. Cross-origin headers are permissive so the chat
page can be served from anywhere.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bundle import EngineBundle
from .engine import InvalidQuery, SessionStore, answer


class ChatRequest(BaseModel):
    session_id: str
    utterance: str
    policy: str | None = Field(default=None, pattern="^(argmax|sample)$")
    temperature: float | None = Field(default=None, gt=0)
    seed: int | None = None


def create_app(bundle: EngineBundle, sessions: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="coachbot", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = sessions or SessionStore()

    @app.post("/v1/chat")
    def chat(request: ChatRequest):
        try:
            response = answer(
                request.utterance,
                bundle,
                seed=request.seed,
                policy=request.policy,
                temperature=request.temperature,
            )
        except InvalidQuery:
            return JSONResponse(status_code=400, content={"error": "invalid_query"})
        store.record(request.session_id, request.utterance, response.response_text)
        trace = response.trace
        return {
            "response_text": response.response_text,
            "session_id": request.session_id,
            "trace": {
                "retrieved": [
                    {"post_id": pid, "similarity": sim}
                    for pid, sim in trace.retrieved
                ],
                "candidates": [
                    {
                        "post_id": c.post_id,
                        "reply_index": c.reply_index,
                        "match_score": c.match_score,
                        "probability": c.probability,
                        "text": c.text,
                    }
                    for c in trace.candidates
                ],
                "selected_index": trace.selected_index,
                "policy": trace.policy,
                "seed": trace.seed,
                "fallback": trace.fallback,
            },
        }

    @app.get("/v1/sessions/{session_id}")
    def session_history(session_id: str):
        session = store.get(session_id)
        if session is None:
            return JSONResponse(status_code=404, content={"error": "unknown_session"})
        return {
            "session_id": session.session_id,
            "created_at": session.created_at,
            "history": [
                {"utterance": u, "response": r, "timestamp": ts}
                for u, r, ts in session.history
            ],
        }

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "corpus_posts": len(bundle.posts),
            "corpus_replies": sum(len(p.replies) for p in bundle.posts),
            "model_dims": {
                "titles": bundle.title_model.dims,
                "replies": bundle.reply_model.dims,
            },
        }

    return app
