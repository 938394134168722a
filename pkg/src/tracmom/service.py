"""FastAPI service wrapping the solver package.

All endpoints are stateless: a moment sequence goes in as JSON, a report
comes back.  The CLI drives this same app in-process.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import __version__
from .flat import RELATIONS, flat_search
from .linalg import kernel_relations, numerical_rank
from .moments import (
    MomentError,
    MomentSequence,
    build_moment_matrix,
    classify_sequence,
)
from .pipeline import (
    GENERATOR_CASES,
    PipelineInputError,
    gen_random,
    solve_pipeline,
    verify_measure,
)
from .schemas import (
    FlatCheckRequest,
    FlatCheckResponse,
    GenRandomRequest,
    GenRandomResponse,
    ReduceRequest,
    ReduceResponse,
    SolveRequest,
    SolveResponse,
    VerifyRequest,
    VerifyResponse,
)
from .transforms import (
    MeasureObstruction,
    ReductionError,
    reduce_rank4,
    reduce_rank5,
    reduce_rank6,
)

app = FastAPI(
    title="tracmom",
    version=__version__,
    description="Solver for the singular bivariate quartic tracial "
                "moment problem",
)


def _sequence(beta: dict) -> MomentSequence:
    try:
        return MomentSequence.from_json({"beta": beta})
    except MomentError as err:
        raise HTTPException(status_code=400, detail=str(err)) from err


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=SolveResponse)
def solve(request: SolveRequest) -> dict:
    seq = _sequence(request.beta)
    try:
        report = solve_pipeline(seq, request.tolerances.to_config(),
                                request.budget.to_budget())
    except PipelineInputError as err:
        raise HTTPException(status_code=400, detail=str(err)) from err
    return report.to_json()


@app.post("/verify", response_model=VerifyResponse)
def verify(request: VerifyRequest) -> dict:
    seq = _sequence(request.beta)
    try:
        return verify_measure(seq, request.measure.model_dump(),
                              request.tolerances.to_config())
    except (PipelineInputError, MomentError) as err:
        raise HTTPException(status_code=400, detail=str(err)) from err


@app.post("/reduce", response_model=ReduceResponse)
def reduce(request: ReduceRequest) -> dict:
    seq = _sequence(request.beta)
    cfg = request.tolerances.to_config()
    try:
        normalized, kind = classify_sequence(seq, cfg.match_tol)
        rank = numerical_rank(build_moment_matrix(normalized), cfg)
        if kind == "cm":
            raise HTTPException(status_code=400,
                                detail="commutative sequence: no canonical "
                                       "nc reduction applies")
        if rank == 4:
            a, chain, _ = reduce_rank4(normalized, cfg)
            case = "RANK4"
        elif rank == 5:
            case, chain = reduce_rank5(normalized, cfg)
        elif rank == 6:
            case, chain = reduce_rank6(normalized, cfg)
        else:
            raise HTTPException(status_code=400,
                                detail=f"no reduction for rank {rank}")
    except MeasureObstruction as err:
        raise HTTPException(status_code=400,
                            detail=f"no measure: {err}") from err
    except (ReductionError, MomentError) as err:
        raise HTTPException(status_code=400, detail=str(err)) from err
    canonical = chain.apply(normalized)
    return {
        "kind": kind,
        "rank": rank,
        "case": case,
        "chain": chain.to_json(),
        "canonical_beta": canonical.to_json()["beta"],
    }


_SHAPE_TO_RELATION = {"X2+Y2=1": "REL1", "Y2-X2=1": "REL2",
                      "XY+YX=0": "REL3", "Y2=1": "REL4"}


@app.post("/flat-check", response_model=FlatCheckResponse)
def flat_check(request: FlatCheckRequest) -> dict:
    seq = _sequence(request.beta)
    cfg = request.tolerances.to_config()
    relation = request.relation
    if relation is None:
        normalized, _ = seq.normalized()
        _, shapes = kernel_relations(build_moment_matrix(normalized), cfg)
        hits = [_SHAPE_TO_RELATION[s] for s in shapes
                if s in _SHAPE_TO_RELATION]
        if not hits:
            raise HTTPException(
                status_code=400,
                detail="no canonical rank-6 relation in the kernel; reduce "
                       "the sequence first or pass the relation explicitly")
        relation = hits[0]
    if relation not in RELATIONS:
        raise HTTPException(status_code=400,
                            detail=f"relation must be one of {RELATIONS}")
    try:
        result = flat_search(seq, relation, request.residual_tol, cfg)
    except (ValueError, MomentError) as err:
        raise HTTPException(status_code=400, detail=str(err)) from err
    return {
        "relation": relation,
        "feasible": result.feasible,
        "params": list(result.params),
        "residuals": {name: value for name, value in result.residuals},
        "objective": result.objective,
        "m3_rank": result.diagnostics.get("M3_rank"),
        "m3_psd_margin": result.diagnostics.get("M3_psd_margin"),
    }


@app.post("/gen-random", response_model=GenRandomResponse)
def gen_random_endpoint(request: GenRandomRequest) -> dict:
    if request.case.lower() not in GENERATOR_CASES:
        raise HTTPException(status_code=400,
                            detail=f"case must be one of {GENERATOR_CASES}")
    mu, seq = gen_random(request.case, request.seed)
    return {
        "case": request.case.lower(),
        "seed": request.seed,
        "beta": seq.to_json()["beta"],
        "measure": mu.to_json(),
    }
