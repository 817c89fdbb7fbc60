"""HTTP service exposing the pricer, oracles, smoother and study harness.

The CLI is a thin client of these endpoints; request and response bodies are
pydantic models, and every endpoint is deterministic for a fixed payload. File
artefacts (field CSV, study CSV/SVG) are returned inline as text so the caller
decides where to put them.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .config import RunConfig
from .errors import BasketFDError, NumericalError
from .grid import GridField
from .harness import ConvergenceReport, report_csv_text, report_svg_text, run_study_suite
from .model import payoff_transformed
from .oracle import OracleConfig, mc_basket_put, quadrature_basket_put
from .smoothing import smooth_initial_condition
from .solver import price_at_spots, run
from .stencil import coefficients_for, dump_text


class PriceRequest(BaseModel):
    config: RunConfig = RunConfig()


class PriceResponse(BaseModel):
    price: float
    u: float
    s1: float
    s2: float
    n_steps: int
    dtau: float
    field_csv: str


class OracleRequest(BaseModel):
    config: RunConfig = RunConfig()
    method: Literal["quadrature", "mc"] = "quadrature"


class OracleResponse(BaseModel):
    price: float
    std_error: float | None
    method: str


class StudyRowModel(BaseModel):
    scheme: str
    rho: float
    n: int
    h: float
    dtau: float
    linf: float
    rel_l2: float
    seconds: float


class StudyOrderModel(BaseModel):
    scheme: str
    rho: float
    order_linf: float
    order_rel_l2: float


class ConvergeRequest(BaseModel):
    config: RunConfig = RunConfig()


class ConvergeResponse(BaseModel):
    rows: list[StudyRowModel]
    orders: list[StudyOrderModel]
    csv: str
    svg: str


class SmoothCheckRequest(BaseModel):
    config: RunConfig = RunConfig()


class SmoothCheckResponse(BaseModel):
    csv: str
    max_delta: float
    band_nodes: int


class StencilDumpRequest(BaseModel):
    config: RunConfig = RunConfig()


class StencilDumpResponse(BaseModel):
    scheme: str
    h: float
    k_hat: list[list[float]]
    m_hat: list[list[float]]
    text: str


def _reports_payload(reports: list[ConvergenceReport]) -> ConvergeResponse:
    rows = [
        StudyRowModel(scheme=rep.scheme, rho=rep.rho, n=row.n, h=row.h,
                      dtau=row.dtau, linf=row.linf, rel_l2=row.rel_l2,
                      seconds=row.seconds)
        for rep in reports for row in rep.rows
    ]
    orders = [
        StudyOrderModel(scheme=rep.scheme, rho=rep.rho,
                        order_linf=rep.order_linf, order_rel_l2=rep.order_rel_l2)
        for rep in reports
    ]
    return ConvergeResponse(rows=rows, orders=orders,
                            csv=report_csv_text(reports),
                            svg=report_svg_text(reports))


def create_app() -> FastAPI:
    app = FastAPI(title="basketfd", version=__version__)

    @app.exception_handler(BasketFDError)
    async def _domain_error(request: Request, exc: BasketFDError):
        status = 500 if isinstance(exc, NumericalError) else 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/price", response_model=PriceResponse)
    def price(req: PriceRequest) -> PriceResponse:
        cfg = req.config
        p = cfg.market_params()
        grid = cfg.grid()
        result = run(p, grid, cfg.solve_config())
        value = price_at_spots(result.field, p, cfg.s1, cfg.s2)
        u = value * np.exp(p.r * p.T) / p.K
        return PriceResponse(price=value, u=float(u), s1=cfg.s1, s2=cfg.s2,
                             n_steps=result.n_steps, dtau=result.dtau,
                             field_csv=result.field.to_csv_text())

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(req: OracleRequest) -> OracleResponse:
        cfg = req.config
        p = cfg.market_params()
        if req.method == "mc":
            ocfg = OracleConfig(mc_paths=cfg.mc_paths, mc_seed=cfg.mc_seed,
                                confidence=cfg.confidence)
            value, stderr = mc_basket_put(p, cfg.s1, cfg.s2, ocfg)
            return OracleResponse(price=value, std_error=stderr, method="mc")
        value = quadrature_basket_put(p, cfg.s1, cfg.s2, tol=cfg.quad_tol)
        return OracleResponse(price=value, std_error=None, method="quadrature")

    @app.post("/converge", response_model=ConvergeResponse)
    def converge(req: ConvergeRequest) -> ConvergeResponse:
        cfg = req.config
        extra = ("second_order",) if cfg.study_baseline and cfg.scheme == "hoc" else ()
        reports = run_study_suite(
            cfg.market_params(), cfg.solve_config(), cfg.study_ns,
            cfg.reference_n, cfg.study_rhos, bounds=cfg.study_bounds(),
            extra_schemes=extra, workers=cfg.workers,
            reference_mesh_ratio=cfg.reference_mesh_ratio,
        )
        return _reports_payload(reports)

    @app.post("/smooth-check", response_model=SmoothCheckResponse)
    def smooth_check(req: SmoothCheckRequest) -> SmoothCheckResponse:
        cfg = req.config
        p = cfg.market_params()
        grid = cfg.grid()
        smoothed = smooth_initial_condition(grid, p)
        x1 = grid.coords1()[:, None]
        x2 = grid.coords2()[None, :]
        raw = np.asarray(payoff_transformed(x1, x2, p))
        delta = smoothed.values - raw
        lines = ["x1,x2,u0,u0_smoothed,delta"]
        c1 = grid.coords1()
        c2 = grid.coords2()
        for i1 in range(grid.n1 + 1):
            for i2 in range(grid.n2 + 1):
                lines.append(
                    f"{c1[i1]:.17g},{c2[i2]:.17g},{raw[i1, i2]:.17g},"
                    f"{smoothed.values[i1, i2]:.17g},{delta[i1, i2]:.17g}"
                )
        return SmoothCheckResponse(
            csv="\n".join(lines) + "\n",
            max_delta=float(np.abs(delta).max()),
            band_nodes=int(np.count_nonzero(delta)),
        )

    @app.post("/stencil-dump", response_model=StencilDumpResponse)
    def stencil_dump(req: StencilDumpRequest) -> StencilDumpResponse:
        cfg = req.config
        pair = coefficients_for(cfg.scheme, cfg.market_params(), cfg.grid().h)
        return StencilDumpResponse(
            scheme=cfg.scheme, h=pair.h,
            k_hat=pair.k_hat.tolist(), m_hat=pair.m_hat.tolist(),
            text=dump_text(pair),
        )

    return app


app = create_app()
