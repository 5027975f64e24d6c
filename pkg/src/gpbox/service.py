"""HTTP service wrapping the toolkit: experiment runs, the acceptance
battery, the symbol registry, and field-level analysis helpers.

The CLI talks to this app (in-process by default); every numeric operation
lives in the core modules, the service only marshals pydantic models.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from . import __version__
from .acceptance import acceptance_suite
from .analysis import j_h1_aggregate, norm_X
from .experiments import RunConfig, RunManifest, output_root, run
from .fieldio import field_from_json
from .multilinear import SymbolBi, SymbolTri, get_symbol, list_symbols
from .spectral import h1_norm

app = FastAPI(title="gpbox", version=__version__)


class HealthResponse(BaseModel):
    status: str
    version: str


class SymbolInfo(BaseModel):
    name: str
    kind: str
    note: str


class SymbolListResponse(BaseModel):
    symbols: list


class SymbolEvalRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    xi1: list
    xi2: list
    xi3: Optional[list] = None


class SymbolEvalResponse(BaseModel):
    values: list  # [re, im] pairs


class AcceptRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    level: str = "fast"
    criteria: Optional[list] = None  # subset of ids, default all


class AcceptResponse(BaseModel):
    level: str
    criteria: list
    all_pass: bool


class XNormRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    field: dict
    t: float = 0.0


class XNormResponse(BaseModel):
    h1: float
    j_h1: float
    x_norm: float


class RunListResponse(BaseModel):
    runs: list


@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(status="ok", version=__version__)


@app.get("/symbols", response_model=SymbolListResponse)
def symbols():
    return SymbolListResponse(symbols=list_symbols())


@app.post("/symbols/eval", response_model=SymbolEvalResponse)
def symbols_eval(req: SymbolEvalRequest):
    try:
        obj = get_symbol(req.name)
    except KeyError as e:
        raise HTTPException(status_code=404, detail=str(e))
    xi1 = np.asarray(req.xi1, dtype=float)
    xi2 = np.asarray(req.xi2, dtype=float)
    try:
        if isinstance(obj, SymbolTri):
            if req.xi3 is None:
                raise HTTPException(status_code=400,
                                    detail=f"{req.name} is trilinear; xi3 required")
            vals = obj.value(xi1, xi2, np.asarray(req.xi3, dtype=float))
        elif isinstance(obj, SymbolBi):
            vals = obj.value(xi1, xi2)
        else:
            raise HTTPException(status_code=400,
                                detail=f"{req.name} is a factory or unavailable; "
                                       "instantiate it through a resonance scan")
        vals = np.atleast_1d(np.asarray(vals, dtype=complex))
    except HTTPException:
        raise
    except Exception as e:
        raise HTTPException(status_code=400, detail=f"evaluation failed: {e}")
    return SymbolEvalResponse(values=[[float(v.real), float(v.imag)] for v in vals])


@app.post("/runs", response_model=RunManifest)
def post_run(config: RunConfig):
    try:
        return run(config)
    except Exception as e:
        raise HTTPException(status_code=400, detail=f"{type(e).__name__}: {e}")


@app.get("/runs", response_model=RunListResponse)
def list_runs():
    root = output_root()
    out = []
    if root.exists():
        for mf in sorted(root.glob("*/manifest.json")):
            out.append(json.loads(mf.read_text()))
    return RunListResponse(runs=out)


@app.post("/accept", response_model=AcceptResponse)
def accept(req: AcceptRequest):
    if req.level not in ("fast", "full"):
        raise HTTPException(status_code=400, detail=f"unknown level {req.level!r}")
    results = acceptance_suite(req.level, criteria=req.criteria)
    return AcceptResponse(level=req.level,
                          criteria=[r.as_dict() for r in results],
                          all_pass=all(r.verdict == "PASS" for r in results))


@app.post("/analysis/xnorm", response_model=XNormResponse)
def xnorm(req: XNormRequest):
    try:
        f = field_from_json(req.field)
    except Exception as e:
        raise HTTPException(status_code=400, detail=f"bad field payload: {e}")
    h1 = h1_norm(f)
    j = j_h1_aggregate(f, req.t)
    return XNormResponse(h1=h1, j_h1=j, x_norm=h1 + j)
