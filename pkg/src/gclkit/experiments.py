"""Benchmark driver wiring cases, methods and harmonic sweeps together.

One evaluation point is a (case, N) pair: the motion is sampled, increments
and IFMV fields built for the requested methods, and the error metrics
reduced into :class:`~gclkit.metrics.ErrorReport` rows.  The CLI and the
acceptance suite both run through this module so they cannot drift apart.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import flow, gcl, metrics
from .hexmesh import HexMesh, build_box_mesh
from .motion import MotionCase, MotionTrajectory, sample_motion
from .spectral import SpectralOperator

__all__ = [
    "METHOD_ALIASES",
    "MeshConfig",
    "FreestreamOptions",
    "CasePoint",
    "prepare_point",
    "evaluate_point",
    "run_sweep",
    "worker_count",
]

# CLI-facing names -> canonical method ids.
METHOD_ALIASES = {
    "lvi": "nlfd-lvi",
    "aevi": "nlfd-aevi",
    "avg": "avg",
    "trimap": "trimap",
    "ts-lvi": "ts-lvi",
    "ts-aevi": "ts-aevi",
}


@dataclass(frozen=True)
class MeshConfig:
    nx: int = 10
    ny: int = 10
    nz: int = 10
    lx: float = 3.2
    ly: float = 2.8
    lz: float = 2.4

    def build(self) -> HexMesh:
        return build_box_mesh(self.nx, self.ny, self.nz, self.lx, self.ly, self.lz)


@dataclass(frozen=True)
class FreestreamOptions:
    enabled: bool = False
    state: flow.FreestreamState = field(default_factory=flow.FreestreamState)
    cfl: float = 1.5
    max_iterations: int = 20000
    convergence_drop: float = 1e-12
    kappa2: float = 1.0
    kappa4: float = 1.0 / 32.0


@dataclass
class CasePoint:
    """Everything shared by the methods at one (case, N) evaluation point."""

    mesh: HexMesh
    case: MotionCase
    n_harmonics: int
    trajectory: MotionTrajectory
    spectral: SpectralOperator
    volumes: np.ndarray  # (n_cells, Nts)
    exact_rates: np.ndarray  # (n_cells, Nts)
    reference: gcl.IfmvField  # trimap
    fd1: float
    fd2: float
    _series: dict = field(default_factory=dict)

    def increments(self, kind: str) -> gcl.IncrementSeries:
        if kind not in self._series:
            maker = gcl.lvi_increments if kind == "lvi" else gcl.aevi_increments
            self._series[kind] = gcl.extract_linear_and_periodic(
                maker(self.mesh, self.trajectory)
            )
        return self._series[kind]

    def field_for(self, method: str) -> gcl.IfmvField:
        if method == "trimap":
            return self.reference
        if method == "avg":
            return gcl.ifmv_avg(self.mesh, self.trajectory)
        transform, kind = method.split("-")
        series = self.increments(kind)
        if transform == "nlfd":
            return gcl.ifmv_nlfd(series, self.spectral)
        return gcl.ifmv_ts(series, self.spectral)


def prepare_point(mesh: HexMesh, case: MotionCase, n_harmonics: int) -> CasePoint:
    trajectory = sample_motion(mesh, case, n_harmonics)
    spectral = SpectralOperator(n_harmonics, case.period)
    volumes = gcl.cell_volumes(mesh, trajectory)
    exact_rates = gcl.exact_volume_rates(mesh, trajectory)
    reference = gcl.trimap_field(mesh, trajectory)
    fd1, fd2 = metrics.fd_reference_errors(volumes, exact_rates, case.period)
    return CasePoint(
        mesh, case, n_harmonics, trajectory, spectral, volumes, exact_rates,
        reference, fd1, fd2,
    )


def evaluate_point(
    point: CasePoint,
    methods: list[str],
    freestream: FreestreamOptions | None = None,
    timing: bool = False,
) -> list[metrics.ErrorReport]:
    """Error reports for the requested methods at one evaluation point."""
    rows = []
    for method in methods:
        start = time.perf_counter()
        ifmv = point.field_for(method)
        err1 = metrics.abs_err_sum_vs_dvoldt(ifmv, point.volumes, point.spectral)
        err2 = {
            d: metrics.abs_err_ifmv_vs_reference(ifmv, point.reference, d)
            for d in ("x", "y", "z")
        }
        rel_err = None
        if freestream is not None and freestream.enabled:
            result = flow.run_freestream(
                point.mesh,
                point.trajectory,
                point.spectral,
                ifmv,
                freestream.state,
                kappa2=freestream.kappa2,
                kappa4=freestream.kappa4,
                cfl=freestream.cfl,
                max_iterations=freestream.max_iterations,
                convergence_drop=freestream.convergence_drop,
            )
            if result.diverged:
                raise flow.FreestreamDivergence(
                    point.case.case_id, method, point.n_harmonics
                )
            rel_err = result.rel_err
        wall_ms = (time.perf_counter() - start) * 1e3 if timing else 0.0
        rows.append(
            metrics.ErrorReport(
                case_id=point.case.case_id,
                method=method,
                n_harmonics=point.n_harmonics,
                nts=point.spectral.nts,
                abs_err1=err1,
                abs_err2_x=err2["x"],
                abs_err2_y=err2["y"],
                abs_err2_z=err2["z"],
                fd1_ref=point.fd1,
                fd2_ref=point.fd2,
                rel_err_freestream=rel_err,
                wall_ms=wall_ms,
                metadata=dict(point.trajectory.metadata),
            )
        )
    return rows


def worker_count(n_jobs: int) -> int:
    """Worker pool size, honouring the GCLKIT_THREADS cap."""
    cap = os.environ.get("GCLKIT_THREADS")
    workers = os.cpu_count() or 1
    if cap:
        workers = max(1, int(cap))
    return max(1, min(workers, n_jobs))


def run_sweep(
    mesh_config: MeshConfig,
    case: MotionCase,
    harmonic_range: list[int],
    methods: list[str],
    freestream: FreestreamOptions | None = None,
    timing: bool = False,
) -> list[metrics.ErrorReport]:
    """Evaluate all methods over a harmonic sweep; rows ordered by (N, method)."""
    mesh = mesh_config.build()

    def job(n):
        point = prepare_point(mesh, case, n)
        return evaluate_point(point, methods, freestream, timing)

    workers = worker_count(len(harmonic_range))
    if workers == 1:
        batches = [job(n) for n in harmonic_range]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(job, harmonic_range))
    return [row for batch in batches for row in batch]
