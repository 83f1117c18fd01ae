"""HTTP service exposing the same operations as the command line.

Each endpoint accepts an experiment file as text plus the usual overrides
and returns the deterministic text report together with the status that the
CLI would use as its exit code.  Run with::

    uvicorn gaugelab.service:app
"""

from __future__ import annotations

import contextlib
import io
from typing import Optional

from fastapi import FastAPI
from pydantic import BaseModel, Field

from . import cli
from .errors import ParseError

app = FastAPI(title="gaugelab",
              description="Gauge fields on finite oriented graphs")


class ExperimentRequest(BaseModel):
    text: str = Field(description="experiment file contents")
    seed: Optional[int] = None
    tol: Optional[float] = None
    budget: Optional[int] = Field(default=None,
                                  description="cap on any level's dimension")


class SampleRequest(ExperimentRequest):
    count: int = Field(default=1, ge=1)


class Report(BaseModel):
    status: int = Field(description="0 ok, 1 law failure, 2 bad input, 3 budget")
    ok: bool
    report: str
    error: Optional[str] = None


def _run(command: str, req: ExperimentRequest, extra_args: Optional[list] = None) -> Report:
    import tempfile

    argv = [command]
    if req.seed is not None:
        argv += ["--seed", str(req.seed)]
    if req.tol is not None:
        argv += ["--tol", repr(req.tol)]
    if req.budget is not None:
        argv += ["--budget", str(req.budget)]
    argv += extra_args or []

    with tempfile.NamedTemporaryFile("w", suffix=".exp", encoding="utf-8",
                                     delete=False) as fh:
        fh.write(req.text)
        path = fh.name
    argv.insert(1, path)

    out = io.StringIO()
    err = io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            status = cli.main(argv)
    finally:
        import os
        with contextlib.suppress(OSError):
            os.unlink(path)
    error = err.getvalue().strip() or None
    return Report(status=status, ok=status == 0, report=out.getvalue(), error=error)


@app.get("/healthz")
def healthz() -> dict:
    from . import __version__
    return {"status": "ok", "version": __version__}


@app.post("/validate", response_model=Report)
def validate(req: ExperimentRequest) -> Report:
    return _run("validate", req)


@app.post("/verify", response_model=Report)
def verify(req: ExperimentRequest) -> Report:
    return _run("verify", req)


@app.post("/spectrum", response_model=Report)
def spectrum(req: ExperimentRequest) -> Report:
    return _run("spectrum", req)


@app.post("/orbits", response_model=Report)
def orbits(req: ExperimentRequest) -> Report:
    return _run("orbits", req)


@app.post("/sample", response_model=Report)
def sample(req: SampleRequest) -> Report:
    return _run("sample", req, ["--count", str(req.count)])
