"""HTTP face of the package.

Every endpoint is a thin wrapper over one core entry point; the CLI
talks to this app in-process, so command behavior and service behavior
cannot drift apart.  Input problems surface as 422 with a message,
domain verdicts (a failed validation, a failed check) stay 200 with
ok=False so the caller decides the exit code.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from .. import quorum as Q
from ..scheduling import (AnchorShortageError, build_schedule,
                          export_schedule, validate_schedule)
from ..sim import (ConfigError, TopologySpec, load_config, run_config,
                   rows_to_csv, run_baseline_comparison, summarize_medians)
from ..sim.config import resolve_topology
from ..sim.sweep import (load_matrix, trend_large_slot_advantage,
                         trend_prr_monotone, trend_small_slot_baseline,
                         trend_throughput_ranges)
from ..topology import (DisconnectedTopologyError, InterferenceModel,
                        Topology, TopologyParseError, build_tree)
from ..verify import run_verification
from .models import (ClosureInfo, HealthResponse, LoadInfo, QsRequest,
                     QsResponse, QuorumInfo, ScheduleRequest,
                     ScheduleResponse, SimulateRequest, SimulateResponse,
                     SweepRequest, SweepResponse, ValidationInfo,
                     VerifyRequest, VerifyResponse)

_INPUT_ERRORS = (ConfigError, TopologyParseError, DisconnectedTopologyError,
                 AnchorShortageError, Q.AnchorRangeError,
                 Q.PeriodMismatchError, ValueError)


def _reject(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


def create_app() -> FastAPI:
    app = FastAPI(title="adc", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/qs", response_model=QsResponse)
    def qs(req: QsRequest) -> QsResponse:
        try:
            system = Q.build_grid_qs(req.m)
            demand = Q.Demand(req.demand) if req.demand is not None else None
            rows = Q.demand_rows(demand, req.m) if demand else 1
            quorum = system.quorum(req.anchor, rows)
            pool = [system.quorum(a, rows) for a in system.anchors(rows)]
        except _INPUT_ERRORS as exc:
            raise _reject(exc)
        closure = None
        if req.verify_closure:
            everything = system.all_cross_quorums()
            ok, witness = Q.verify_rotation_closure(everything)
            closure = ClosureInfo(quorums=len(everything), shifts=req.m,
                                  ok=ok, witness=witness)
        profile = Q.compute_load(pool, [1.0 / len(pool)] * len(pool))
        load = LoadInfo(max_load=profile.max_load,
                        max_access_frequency=profile.max_access_frequency,
                        floor=min(len(q) for q in pool) / req.m)
        return QsResponse(
            m=req.m, side=system.side, demand=req.demand,
            quorum=QuorumInfo(anchor=req.anchor, rows=rows,
                              cardinality=len(quorum),
                              slots=quorum.sorted_slots()),
            closure=closure, load=load)

    @app.post("/schedule", response_model=ScheduleResponse)
    def schedule(req: ScheduleRequest) -> ScheduleResponse:
        if (req.topology_text is None) == (req.topology is None):
            raise HTTPException(
                status_code=422,
                detail="give exactly one of topology_text or topology")
        try:
            if req.topology_text is not None:
                topo = Topology.from_edge_list(req.topology_text)
            else:
                topo = resolve_topology(
                    TopologySpec.model_validate(req.topology))
            tree = build_tree(topo)
            model = InterferenceModel.rts_cts()
            built = build_schedule(topo, model=model, m=req.m,
                                   selection=req.selection,
                                   k_retries=req.k_retries, seed=req.seed)
        except _INPUT_ERRORS as exc:
            raise _reject(exc)
        verdict = validate_schedule(built, topo, tree, model)
        return ScheduleResponse(
            m=built.m, phi=built.phi, nodes=len(topo.nodes), sink=tree.sink,
            schedule_text=export_schedule(built),
            validation=ValidationInfo(ok=verdict.ok,
                                      violations=verdict.violations))

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        try:
            cfg = load_config(req.config)
            report = run_config(cfg)
        except _INPUT_ERRORS as exc:
            raise _reject(exc)
        return SimulateResponse(report=report.to_dict())

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        try:
            matrix = load_matrix(req.matrix)
            rows = run_baseline_comparison(matrix, jobs=req.jobs)
        except _INPUT_ERRORS as exc:
            raise _reject(exc)
        med = summarize_medians(rows, "throughput")
        trends: dict = {}
        if set(matrix.macs) == {"adc", "lpl"}:
            large = [s for s in matrix.slot_sizes_ms if s >= 1000]
            small = min(matrix.slot_sizes_ms)
            if large:
                trends["large_slot_advantage"] = trend_large_slot_advantage(
                    med, slots=tuple(large))
            trends["small_slot_baseline"] = trend_small_slot_baseline(
                med, slot=small)
            trends["prr_spearman"] = trend_prr_monotone(
                summarize_medians(rows, "prr"))
        trends["throughput_range"] = trend_throughput_ranges(med)
        return SweepResponse(rows=rows, csv=rows_to_csv(rows), trends=trends)

    @app.post("/verify", response_model=VerifyResponse)
    def verify(req: VerifyRequest) -> VerifyResponse:
        report = run_verification(fast=req.fast)
        return VerifyResponse(**report.to_dict())

    return app
