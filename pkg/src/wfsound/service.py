"""HTTP service wrapping the analysis pipelines.

Nets travel in the native JSON shape; verdicts are returned exactly as
the CLI's ``--format json`` output. Run with
``uvicorn wfsound.service:app``.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import generators, nets, reductions
from .nets import NetError
from .pipelines import PROPERTIES, analyze_property
from .smt.driver import SolverError


class TransitionModel(BaseModel):
    id: str
    pre: dict[str, int] = Field(default_factory=dict)
    post: dict[str, int] = Field(default_factory=dict)


class NetModel(BaseModel):
    name: str = "net"
    places: list[str]
    transitions: list[TransitionModel]
    initial_place: str | None = None
    final_place: str | None = None

    def to_net(self) -> nets.Net:
        return nets.Net(
            self.name, self.places, [t.id for t in self.transitions],
            {t.id: t.pre for t in self.transitions},
            {t.id: t.post for t in self.transitions},
            self.initial_place, self.final_place,
        )

    @classmethod
    def from_net(cls, net: nets.Net) -> "NetModel":
        return cls(
            name=net.name, places=list(net.places),
            transitions=[TransitionModel(id=t, pre=net.pre[t],
                                         post=net.post[t])
                         for t in net.transitions],
            initial_place=net.initial_place, final_place=net.final_place,
        )


class AnalyzeRequest(BaseModel):
    net: NetModel
    property: str = "gen-sound"
    k: int = 1
    reduce: bool = False
    timeout: float | None = None


class GenerateRequest(BaseModel):
    family: str
    c: int | None = None
    dnf: str | None = None
    expand_weights: bool = False


app = FastAPI(title="wfsound", version="0.1.0")


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/analyze")
def analyze(request: AnalyzeRequest) -> dict:
    if request.property not in PROPERTIES:
        raise HTTPException(422, f"unknown property {request.property!r}")
    try:
        net = request.net.to_net()
    except NetError as exc:
        raise HTTPException(422, str(exc))
    kwargs = {}
    if request.property in ("gen-sound", "struct-sound", "cont-sound"):
        kwargs["timeout"] = request.timeout
    if request.property == "gen-sound":
        kwargs["reduce"] = request.reduce
    try:
        verdict = analyze_property(net, request.property, k=request.k,
                                   **kwargs)
    except TimeoutError:
        raise HTTPException(504, "analysis deadline exceeded")
    except NetError as exc:
        raise HTTPException(422, str(exc))
    except SolverError as exc:
        raise HTTPException(502, f"solver error: {exc}")
    return json.loads(verdict.to_json())


@app.post("/generate")
def generate(request: GenerateRequest) -> dict:
    try:
        if request.family == "dnf":
            if request.dnf is None:
                raise HTTPException(422, "dnf formula required")
            net = generators.gen_dnf_net(generators.parse_dnf(request.dnf))
        elif request.c is None:
            raise HTTPException(422, "family parameter c required")
        else:
            net = generators.gen_family(request.family, request.c)
        if request.expand_weights:
            net = generators.expand_weights(net)
    except NetError as exc:
        raise HTTPException(422, str(exc))
    return NetModel.from_net(net).model_dump()


@app.post("/reduce")
def reduce(net_model: NetModel) -> dict:
    try:
        reduced, trace = reductions.reduce_fixpoint(net_model.to_net())
    except NetError as exc:
        raise HTTPException(422, str(exc))
    return {
        "net": NetModel.from_net(reduced).model_dump(),
        "trace": [{"rule": s.rule, "removed_places": s.removed_places,
                   "removed_transitions": s.removed_transitions,
                   "merged": s.merged} for s in trace.steps],
    }
