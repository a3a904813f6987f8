"""HTTP service exposing the samplers, formulas, and experiments.

The command-line client drives this app in-process through an ASGI
transport by default, so the service is also the single place where domain
objects become wire-format JSON.  Domain validation errors surface as 400s;
schema violations are FastAPI's usual 422s.
"""

from __future__ import annotations

import functools
import math
import os

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__, densities, moments, schemas, serialize, stats
from .ensembles import TruncationSpec, haar_unitary, haar_unitary_qr, sample_truncation
from .rng import RngStream

app = FastAPI(title="haarlab", version=__version__)


def _domain_errors(fn):
    @functools.wraps(fn)
    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, FloatingPointError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

    return wrapped


def _streams_or_default(streams):
    return streams if streams is not None else (os.cpu_count() or 1)


def _pair(z) -> tuple:
    z = complex(z)
    return (z.real, z.imag)


def _experiment_response(result: stats.ExperimentResult) -> schemas.ExperimentResponse:
    return schemas.ExperimentResponse(
        name=result.name,
        passed=result.passed,
        reports=[
            schemas.ReportModel(
                statistic=r.statistic, n=r.n, N=r.N, estimate=_pair(r.estimate),
                std_error=r.std_error, se_re=r.se_re, se_im=r.se_im,
                reference=_pair(r.reference), reference_kind=r.reference_kind,
                z_score=r.z_score,
            )
            for r in result.reports
        ],
        checks=[schemas.CheckModel(**c.as_dict()) for c in result.checks],
        meta=result.meta,
    )


@app.get("/api/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/api/sample", response_model=schemas.SampleResponse)
@_domain_errors
def sample(req: schemas.SampleRequest) -> schemas.SampleResponse:
    stream = RngStream(req.seed, req.stream)
    if req.m is not None:
        spec = TruncationSpec(req.n, req.m, scaled=req.scaled)
        blocks = sample_truncation(stream, spec, req.count)
    else:
        if req.scaled:
            raise ValueError("scaled applies only to truncations (pass m)")
        sampler = haar_unitary if req.method == "gs" else haar_unitary_qr
        blocks = sampler(stream, req.n, req.count)
    matrices = [schemas.MatrixModel(**serialize.matrix_to_dict(b)) for b in blocks]
    meta = {"n": req.n, "m": req.m, "count": req.count, "seed": req.seed,
            "stream": req.stream, "method": req.method, "scaled": req.scaled}
    return schemas.SampleResponse(matrices=matrices, meta=meta)


@app.post("/api/entries", response_model=schemas.ExperimentResponse)
@_domain_errors
def entries(req: schemas.EntriesRequest) -> schemas.ExperimentResponse:
    result = stats.entry_experiment(
        req.n, req.samples, k_list=tuple(req.k_list), seed=req.seed,
        streams=_streams_or_default(req.streams), workers=req.workers,
    )
    return _experiment_response(result)


@app.post("/api/correlation", response_model=schemas.ExperimentResponse)
@_domain_errors
def correlation(req: schemas.CorrelationRequest) -> schemas.ExperimentResponse:
    result = stats.correlation_experiment(
        req.n, req.samples, seed=req.seed,
        streams=_streams_or_default(req.streams), workers=req.workers,
    )
    return _experiment_response(result)


@app.post("/api/traces", response_model=schemas.ExperimentResponse)
@_domain_errors
def traces(req: schemas.TracesRequest) -> schemas.ExperimentResponse:
    pairs = tuple((k, l) for k in range(1, req.k_max + 1) for l in req.powers)
    mixed = tuple(moments.LimitMomentQuery(q.a, q.b) for q in req.mixed)
    cfg = stats.ExperimentConfig(
        seed=req.seed, streams=_streams_or_default(req.streams),
        n_list=tuple(req.n_list), samples=req.samples, pairs=pairs, mixed=mixed,
        workers=req.workers, method=req.method,
    )
    return _experiment_response(stats.trace_experiment(cfg))


@app.post("/api/eigenpowers", response_model=schemas.ExperimentResponse)
@_domain_errors
def eigenpowers(req: schemas.EigenpowersRequest) -> schemas.ExperimentResponse:
    result = stats.eigenpower_experiment(
        req.n, req.m, req.samples, seed=req.seed,
        streams=_streams_or_default(req.streams), workers=req.workers,
        method=req.method, allow_low_power=req.allow_low_power,
    )
    return _experiment_response(result)


@app.post("/api/truncate", response_model=schemas.ExperimentResponse)
@_domain_errors
def truncate_experiment(req: schemas.TruncateRequest) -> schemas.ExperimentResponse:
    streams = _streams_or_default(req.streams)
    if len(req.n_list) == 1:
        result = stats.truncation_experiment(
            req.n_list[0], req.m, req.samples, scaled=req.scaled, seed=req.seed,
            streams=streams, workers=req.workers,
        )
    else:
        if not req.scaled:
            raise ValueError("convergence comparisons run in the scaled frame")
        result = stats.truncation_convergence(
            tuple(req.n_list), req.m, req.samples, seed=req.seed,
            streams=streams, workers=req.workers,
        )
    return _experiment_response(result)


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


@app.post("/api/density", response_model=schemas.DensityResponse)
@_domain_errors
def density(req: schemas.DensityRequest) -> schemas.DensityResponse:
    meta: dict = {"kind": req.kind}
    if req.kind == "entry_cdf":
        if req.n is None or req.x is None:
            raise ValueError("entry_cdf needs n and x")
        values = [schemas.CdfValueModel(x=float(x), value=densities.entry_radial_cdf(req.n, float(x)))
                  for x in req.x]
        meta["n"] = req.n
        return schemas.DensityResponse(kind=req.kind, cdf=values, meta=meta)

    evaluated: list[densities.DensityPoint] = []
    if req.kind == "weyl":
        if req.n is None or req.angles is None:
            raise ValueError("weyl needs n and angles")
        meta["n"] = req.n
        for tup in req.angles:
            evaluated.append(densities.weyl_density(tup, req.n))
    elif req.kind == "truncated":
        if req.n is None or req.m is None or req.points is None:
            raise ValueError("truncated needs n, m and points")
        meta["n"], meta["m"] = req.n, req.m
        meta["constant"] = densities.truncation_constant(req.n, req.m)
        for tup in req.points:
            zeta = [complex(re, im) for re, im in tup]
            evaluated.append(densities.truncated_jpdf(req.n, req.m, zeta))
    elif req.kind == "ginibre":
        if req.m is None or req.points is None:
            raise ValueError("ginibre needs m and points")
        meta["m"] = req.m
        for tup in req.points:
            zeta = [complex(re, im) for re, im in tup]
            evaluated.append(densities.ginibre_limit_density(req.m, zeta))
    models = [
        schemas.DensityPointModel(
            points=[_pair(z) for z in p.points], value=p.value,
            measure=p.measure.value, log_value=_finite_or_none(p.log_value),
        )
        for p in evaluated
    ]
    return schemas.DensityResponse(kind=req.kind, points=models, meta=meta)


@app.post("/api/formulas", response_model=schemas.FormulasResponse)
@_domain_errors
def formulas(req: schemas.FormulasRequest) -> schemas.FormulasResponse:
    rows = moments.formula_rows(req.ns, req.ks, req.ls)
    models = [schemas.FormulaRowModel(n=n, k=k, l=l, value=value, kind=kind)
              for n, k, l, value, kind in rows]
    return schemas.FormulasResponse(rows=models, meta={"ns": req.ns, "ks": req.ks, "ls": req.ls})


@app.post("/api/verify", response_model=schemas.VerifyResponse)
@_domain_errors
def verify(req: schemas.VerifyRequest) -> schemas.VerifyResponse:
    tree = stats.verify_suite(
        seed=req.seed, samples_base=req.samples,
        streams=_streams_or_default(req.streams), workers=req.workers,
        method=req.method,
    )
    criteria = []
    for crit in tree["criteria"]:
        criteria.append(schemas.ExperimentResponse(
            name=crit["name"],
            passed=crit["passed"],
            reports=[
                schemas.ReportModel(
                    statistic=r["statistic"], n=r["n"], N=r["N"],
                    estimate=_pair(r["estimate"]), std_error=r["std_error"],
                    se_re=r["se_re"], se_im=r["se_im"],
                    reference=_pair(r["reference"]),
                    reference_kind=r["reference_kind"], z_score=r["z_score"],
                )
                for r in crit["reports"]
            ],
            checks=[schemas.CheckModel(**c) for c in crit["checks"]],
            meta=crit["meta"],
        ))
    return schemas.VerifyResponse(suite=tree["suite"], passed=tree["passed"],
                                  criteria=criteria, meta=tree["meta"])
