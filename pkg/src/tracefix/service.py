"""HTTP API for tracing and interactive repair sessions.

Sessions are in-memory with a TTL; a session holds the original program,
the state edit, and the proposal history.  Rejecting a proposal (by patch
or by location) re-runs the search excluding it and returns the next-best
distinct repair; a session closes once no further repair exists.  Results
returned here are identical to what the CLI prints for the same inputs.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor, TimeoutError as FutureTimeout
from dataclasses import dataclass, field, replace

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .cli import (InputError, decode_input, decode_manipulation,
                  result_to_json)
from .extfun import DEFAULT_REGISTRY, external_names
from .lang import ParseError, TypecheckError, parse_program
from .solver import RepairOptions, RepairResult
from .tracer import RuntimeFault, Trace, execute, trace_to_json

SESSION_TTL = 3600.0
DEFAULT_SOLVER_TIMEOUT = 60.0


class TraceRequest(BaseModel):
    program: str
    input: dict
    fuel: int = 100_000
    entry: str | None = None


class SessionRequest(BaseModel):
    program: str
    manipulation: dict
    options: dict = {}
    entry: str | None = None


class RejectRequest(BaseModel):
    kind: str  # "patch" | "location"
    location: int | None = None


@dataclass
class SessionRecord:
    id: str
    source: str
    program: object
    manipulation: object
    tests: tuple
    options: RepairOptions
    state: str = "open"
    proposals: list = field(default_factory=list)
    rejected_patches: list = field(default_factory=list)
    disallowed: set = field(default_factory=set)
    created: float = field(default_factory=time.monotonic)
    touched: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def to_json(self) -> dict:
        return {
            "session_id": self.id,
            "state": self.state,
            "program": self.source,
            "proposals": list(self.proposals),
            "disallowed_locations": sorted(self.disallowed),
        }


def _options_from_doc(doc: dict, tests) -> RepairOptions:
    kwargs = {}
    if "mode" in doc:
        kwargs["mode"] = doc["mode"]
    if "max_const" in doc:
        bound = int(doc["max_const"])
        schedule = tuple(b for b in (1, 2, 4, 8, 16) if b <= bound)
        if not schedule or schedule[-1] < bound:
            schedule = schedule + (bound,)
        kwargs["const_bound_schedule"] = schedule
    if "fuel_factor" in doc:
        kwargs["fuel_factor"] = float(doc["fuel_factor"])
    if "allow_lines" in doc and doc["allow_lines"] is not None:
        kwargs["allowed_locations"] = frozenset(doc["allow_lines"])
    if "disallow_lines" in doc:
        kwargs["disallowed_locations"] = frozenset(doc["disallow_lines"])
    if "use_slicing" in doc:
        kwargs["use_slicing"] = bool(doc["use_slicing"])
    if "max_candidates" in doc:
        kwargs["max_candidates"] = int(doc["max_candidates"])
    return RepairOptions(tests=tuple(tests), **kwargs)


def create_app(static_dir: str | None = None,
               solver_timeout: float = DEFAULT_SOLVER_TIMEOUT,
               session_ttl: float = SESSION_TTL) -> FastAPI:
    app = FastAPI(title="tracefix")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    sessions: dict[str, SessionRecord] = {}
    registry_lock = threading.Lock()
    pool = ThreadPoolExecutor(max_workers=4)

    def expire_sessions() -> None:
        now = time.monotonic()
        with registry_lock:
            stale = [sid for sid, s in sessions.items()
                     if now - s.touched > session_ttl]
            for sid in stale:
                del sessions[sid]

    def parse_or_400(source: str, entry):
        try:
            return parse_program(source, entry=entry)
        except (ParseError, TypecheckError) as e:
            raise HTTPException(status_code=400, detail=str(e))

    def solve_with_timeout(fn):
        future = pool.submit(fn)
        try:
            return future.result(timeout=solver_timeout)
        except FutureTimeout:
            return None

    @app.get("/api/health")
    def health():
        return {"ok": True}

    @app.post("/api/trace")
    def api_trace(req: TraceRequest):
        program = parse_or_400(req.program, req.entry)
        try:
            initial = decode_input(program, req.input)
        except InputError as e:
            raise HTTPException(status_code=400, detail=str(e))
        externals = DEFAULT_REGISTRY if external_names(program) else None
        try:
            trace = execute(program, initial, req.fuel, externals=externals)
        except RuntimeFault as e:
            doc = trace_to_json(e.trace or Trace([], False))
            doc["fault"] = {"loc": e.location, "reason": e.reason}
            return JSONResponse(status_code=422, content=doc)
        return trace_to_json(trace)

    def run_session_solve(record: SessionRecord):
        options = record.options
        if record.disallowed:
            options = replace(options, disallowed_locations=frozenset(
                set(options.disallowed_locations) | record.disallowed))
        excluded = set(map(tuple, record.rejected_patches)) or None

        def solve():
            if external_names(record.program):
                from .extfun import cegis_repair, CegisResult

                out = cegis_repair(record.program, record.manipulation, options)
                if isinstance(out, CegisResult):
                    return out.result
                return out
            from .solver import repair

            return repair(record.program, record.manipulation, options,
                          excluded_patches=excluded)

        result = solve_with_timeout(solve)
        if result is None:
            record.proposals.append({"status": "timeout"})
            return {"status": "timeout"}
        doc = result_to_json(result, record.source)
        record.proposals.append(doc)
        if not isinstance(result, RepairResult):
            record.state = "closed"
        return doc

    @app.post("/api/session")
    def api_session(req: SessionRequest):
        expire_sessions()
        program = parse_or_400(req.program, req.entry)
        externals = DEFAULT_REGISTRY if external_names(program) else None
        try:
            manipulation, tests = decode_manipulation(program, req.manipulation,
                                                      externals=externals)
            options = _options_from_doc(req.options, tests)
        except (InputError, ValueError) as e:
            raise HTTPException(status_code=422, detail=str(e))
        except RuntimeFault as e:
            raise HTTPException(status_code=422, detail=str(e))
        record = SessionRecord(id=uuid.uuid4().hex, source=req.program,
                               program=program, manipulation=manipulation,
                               tests=tests, options=options)
        with record.lock:
            try:
                doc = run_session_solve(record)
            except (ValueError, RuntimeFault) as e:
                raise HTTPException(status_code=422, detail=str(e))
        with registry_lock:
            sessions[record.id] = record
        return {"session_id": record.id, "result": doc}

    def get_session(session_id: str) -> SessionRecord:
        with registry_lock:
            record = sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown session")
        record.touched = time.monotonic()
        return record

    @app.post("/api/session/{session_id}/reject")
    def api_reject(session_id: str, req: RejectRequest):
        record = get_session(session_id)
        with record.lock:
            if record.state != "open":
                raise HTTPException(status_code=409, detail="session is closed")
            if req.kind == "location":
                if req.location is None:
                    raise HTTPException(status_code=400,
                                        detail="location required")
                record.disallowed.add(req.location)
            elif req.kind == "patch":
                current = record.proposals[-1] if record.proposals else None
                if current and current.get("status") == "repaired":
                    fp = tuple((e["line"], e["after"])
                               for e in current["patch"])
                    record.rejected_patches.append(fp)
            else:
                raise HTTPException(status_code=400,
                                    detail="kind must be 'patch' or 'location'")
            doc = run_session_solve(record)
        return {"result": doc}

    @app.get("/api/session/{session_id}")
    def api_get_session(session_id: str):
        return get_session(session_id).to_json()

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")
    return app
