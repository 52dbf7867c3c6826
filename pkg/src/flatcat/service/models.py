"""Pydantic request/response models of the verification service."""

from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class IdentitiesRequest(BaseModel):
    order: int = 8


class QuiverDtRequest(BaseModel):
    order: int = 6


class AinftyVerifyRequest(BaseModel):
    arc_system: Dict[str, Any]
    max_n: int = 6
    eta_cap: int = 3
    max_len: int = 12
    threads: int = 1


class ExtRequest(BaseModel):
    arc_system: Dict[str, Any]
    arc_x: int
    arc_y: int


class ScEnumRequest(BaseModel):
    surface: Dict[str, Any]
    lmax: Optional[str] = None
    lmax2: Optional[str] = None
    direction: Optional[str] = None


class DtRequest(BaseModel):
    surface: Dict[str, Any]
    lmax: Optional[str] = None
    lmax2: Optional[str] = None


class WallcrossRequest(BaseModel):
    surface_a: Dict[str, Any]
    surface_b: Dict[str, Any]
    lmax: Optional[str] = None
    lmax2: Optional[str] = None
    order: int = 6
    sector: Optional[List[List[List[str]]]] = None
    weights: Optional[List[int]] = None


class Report(BaseModel):
    exit_code: int = Field(description="0 pass, 1 math failure")
    report: Dict[str, Any]
