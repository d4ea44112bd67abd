"""FastAPI application exposing the analysis endpoints."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..fdalgebra import DomainError, ShapeError
from ..groups import GroupTableError
from ..io import SchemaError
from ..qgroup import QGValidationError
from ..wedderburn import DecompositionError
from . import handlers
from .models import (
    AnalysisResponse,
    BuildRequest,
    CesaroRequest,
    FourierRequest,
    FreeprodVerifyRequest,
    HaarRequest,
    HealthResponse,
    HopfImageRequest,
    ImproveRequest,
    IrrepsRequest,
    RitterRequest,
    SchurRequest,
    SelftestRequest,
    ValidateRequest,
)

_INPUT_ERRORS = (SchemaError, DomainError, ShapeError, GroupTableError, KeyError)


def _run(fn, *args, **kwargs):
    try:
        status, report = fn(*args, **kwargs)
    except _INPUT_ERRORS as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except QGValidationError as exc:
        detail = {"message": str(exc)}
        if exc.report is not None:
            detail["checks"] = [c.as_dict() for c in exc.report.failures()]
        raise HTTPException(status_code=400, detail=detail) from exc
    except DecompositionError as exc:
        raise HTTPException(status_code=500, detail=str(exc)) from exc
    return AnalysisResponse(status=status, report=report)


def create_app():
    app = FastAPI(
        title="qglp",
        description=(
            "Noncommutative L_p analysis on finite quantum groups: Fourier "
            "transforms, spectral gaps, L_p-improving certification, Cesaro "
            "limits, Hopf images, and free-product verification."
        ),
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/qgroup/validate", response_model=AnalysisResponse)
    def validate(req: ValidateRequest):
        return _run(handlers.handle_validate, req.qgroup.as_dict())

    @app.post("/qgroup/haar", response_model=AnalysisResponse)
    def haar(req: HaarRequest):
        return _run(handlers.handle_haar, req.qgroup.as_dict())

    @app.post("/qgroup/irreps", response_model=AnalysisResponse)
    def irreps(req: IrrepsRequest):
        return _run(
            handlers.handle_irreps, req.qgroup.as_dict(), include_entries=req.include_entries
        )

    @app.post("/qgroup/build", response_model=AnalysisResponse)
    def build(req: BuildRequest):
        return _run(handlers.handle_build, req.cayley, kind=req.kind, name=req.name)

    @app.post("/fourier", response_model=AnalysisResponse)
    def fourier(req: FourierRequest):
        return _run(
            handlers.handle_fourier,
            req.qgroup.as_dict(),
            req.input.as_dict(),
            kind=req.kind,
        )

    @app.post("/improve", response_model=AnalysisResponse)
    def improve(req: ImproveRequest):
        return _run(
            handlers.handle_improve,
            req.qgroup.as_dict(),
            req.state.as_dict(),
            samples=req.samples,
            seed=req.seed,
            tol=req.tol,
        )

    @app.post("/ritter", response_model=AnalysisResponse)
    def ritter(req: RitterRequest):
        return _run(handlers.handle_ritter, req.cayley, req.support)

    @app.post("/schur", response_model=AnalysisResponse)
    def schur(req: SchurRequest):
        return _run(
            handlers.handle_schur,
            req.cayley,
            req.values,
            cross_check_samples=req.cross_check_samples,
            seed=req.seed,
        )

    @app.post("/cesaro", response_model=AnalysisResponse)
    def cesaro(req: CesaroRequest):
        return _run(
            handlers.handle_cesaro,
            req.qgroup.as_dict(),
            req.state.as_dict(),
            iterations=req.iterations,
        )

    @app.post("/hopf-image", response_model=AnalysisResponse)
    def hopf(req: HopfImageRequest):
        return _run(
            handlers.handle_hopf_image,
            req.qgroup.as_dict(),
            req.hom.as_dict(),
            state_payload=req.state.as_dict() if req.state is not None else None,
        )

    @app.post("/freeprod/verify", response_model=AnalysisResponse)
    def freeprod_verify(req: FreeprodVerifyRequest):
        return _run(
            handlers.handle_freeprod_verify,
            [c.as_dict() for c in req.components],
            [m.as_dict() for m in req.maps],
            q=req.q,
            max_len=req.max_len,
            samples=req.samples,
            seed=req.seed,
        )

    @app.post("/selftest", response_model=AnalysisResponse)
    def run_selftest(req: SelftestRequest):
        return _run(handlers.handle_selftest, seed=req.seed, samples=req.samples)

    return app
