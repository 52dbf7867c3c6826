"""FastAPI front end: every CLI subcommand is also an HTTP endpoint.

Run with:  uvicorn flatcat.service.app:app
Input errors map to 422, mathematical failures stay in the report body
(exit_code 1) so CI clients can read them without parsing exceptions.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers
from .models import (
    AinftyVerifyRequest,
    DtRequest,
    ExtRequest,
    IdentitiesRequest,
    QuiverDtRequest,
    Report,
    ScEnumRequest,
    WallcrossRequest,
)

app = FastAPI(title="flatcat",
              description="Exact verification service: arc-system "
                          "A-infinity categories, flat-surface geodesic "
                          "counts and refined DT invariants.")


def _run(fn, *args, **kwargs) -> Report:
    try:
        code, report = fn(*args, **kwargs)
    except handlers.InputError as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    return Report(exit_code=code, report=report)


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/identities", response_model=Report)
def identities(req: IdentitiesRequest):
    return _run(handlers.run_identities, req.order)


@app.post("/quiver-dt", response_model=Report)
def quiver_dt(req: QuiverDtRequest):
    return _run(handlers.run_quiver_dt, req.order)


@app.post("/ainfty-verify", response_model=Report)
def ainfty_verify(req: AinftyVerifyRequest):
    return _run(handlers.run_ainfty_verify, req.arc_system, req.max_n,
                req.eta_cap, req.max_len, req.threads)


@app.post("/ext", response_model=Report)
def ext(req: ExtRequest):
    return _run(handlers.run_ext, req.arc_system, req.arc_x, req.arc_y)


@app.post("/sc-enum", response_model=Report)
def sc_enum(req: ScEnumRequest):
    return _run(handlers.run_sc_enum, req.surface, req.lmax, req.lmax2,
                req.direction)


@app.post("/dt", response_model=Report)
def dt(req: DtRequest):
    return _run(handlers.run_dt, req.surface, req.lmax, req.lmax2)


@app.post("/wallcross", response_model=Report)
def wallcross(req: WallcrossRequest):
    return _run(handlers.run_wallcross, req.surface_a, req.surface_b,
                req.lmax, req.lmax2, req.order, req.sector, req.weights)
