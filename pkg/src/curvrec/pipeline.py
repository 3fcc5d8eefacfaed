"""End-to-end reconstruction: cloud -> adaptive UDF lattice -> mesh.

Stages: read, normalize, index, curvature field over the coarse lattice,
percentile-driven radius schedule, hot-region refinement, patch building,
UDF estimation with far-field capping, hierarchical fill, offset-level
marching cubes, denormalize. Timing splits into patch_time (curvature,
radius modulation, query addition, extraction, resampling) and udf_time
(estimation plus fill interpolation).

baseline_mode instead evaluates every fine vertex with a fixed radius:
the uniform-grid setup the adaptive strategy is measured against.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, replace

import numpy as np

from . import io
from .curvature import CurvatureField, curvature_field
from .errors import ReconstructionError
from .estimator import FAR_CAP_DEFAULT, make_estimator
from .extract import IsoSpec, marching_cubes
from .fixtures import make_fixture
from .grid import (AdaptiveGrid, LatticeSpec, MARGIN_CELLS_DEFAULT, coarse_queries,
                   hierarchical_fill, refine_with_parents, save_field, select_hot)
from .metrics import MetricReport, evaluate, sample_mesh
from .model import PointCloud, TriangleMesh, denormalize_mesh, normalize_cloud
from .patch import ResamplePolicy, resample
from .schedule import (ALPHA_DEFAULT, BETA_DEFAULT, R0_DEFAULT, S_MAX_DEFAULT,
                       S_MIN_DEFAULT, RadiusSchedule, radius as schedule_radius)
from .spatial import build_index

# Queries are streamed through fixed-size blocks; constant so that results
# never depend on the worker count.
_CHUNK = 8192


@dataclass
class PipelineConfig:
    input_path: str | None = None
    output_path: str | None = None
    coarse_cells: int = 128
    margin_cells: int = MARGIN_CELLS_DEFAULT
    r0: float = R0_DEFAULT
    s_max: float = S_MAX_DEFAULT
    s_min: float = S_MIN_DEFAULT
    alpha: float = ALPHA_DEFAULT
    beta: float = BETA_DEFAULT
    refine_threshold: str | float = "p60"
    resample_threshold: str | float = "p60"
    target_count: int = 64
    estimator: str = "plane"
    far_cap: float = FAR_CAP_DEFAULT
    iso_eps: float | None = None      # default: half a fine cell edge
    sample_count: int = 100000
    seed: int = 0
    baseline_mode: bool = False
    workers: int = 1
    dump_field: str | None = None


@dataclass
class TimingReport:
    patch_time: float
    udf_time: float
    evaluated_queries: int
    filled_queries: int
    total_fine_vertices: int

    def lines(self):
        return [f"patch_time={self.patch_time:.3f}",
                f"udf_time={self.udf_time:.3f}",
                f"evaluated_queries={self.evaluated_queries}",
                f"filled_queries={self.filled_queries}",
                f"total_fine_vertices={self.total_fine_vertices}"]


@dataclass
class PipelineResult:
    mesh: TriangleMesh            # in input coordinates
    norm_mesh: TriangleMesh       # in normalized coordinates
    timing: TimingReport
    transform: object
    spec: LatticeSpec
    curvature: CurvatureField | None = None


@contextmanager
def _stage(name):
    try:
        yield
    except ReconstructionError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


class _Stopwatch:
    """Accumulates wall time into named buckets around code sections."""

    def __init__(self):
        self.buckets = {"patch": 0.0, "udf": 0.0}

    @contextmanager
    def section(self, bucket):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.buckets[bucket] += time.perf_counter() - t0


def _load_cloud(config, cloud):
    if cloud is not None:
        return cloud
    if config.input_path is None:
        raise ValueError("config.input_path is required when no cloud is passed")
    with _stage("read"):
        return io.read_point_cloud(config.input_path)


def _sigma_lookup(cf: CurvatureField, query_ids, default=0.0):
    """(sigma, found) per query id; queries without an entry get the default."""
    ids = np.asarray(query_ids, dtype=np.int64)
    if cf is None or len(cf) == 0:
        return np.full(ids.shape, default), np.zeros(ids.shape, dtype=bool)
    pos = np.searchsorted(cf.ids, ids)
    pos = np.minimum(pos, cf.ids.size - 1)
    hit = cf.ids[pos] == ids
    out = np.full(ids.shape, default)
    out[hit] = cf.sigma[pos[hit]]
    return out, hit


def _evaluate_queries(index, cloud, positions, radii, sigmas, query_ids,
                      policy, estimator, far_cap, watch, workers):
    """UDF value per query: patch pipeline inside the radius, capped
    nearest distance outside. Returns (values, near_count)."""
    n = positions.shape[0]
    values = np.empty(n)

    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (n,))
    with watch.section("patch"):
        nn = index.nearest_distance_many(positions, workers=workers)
        near = nn <= radii
        near_rows = np.flatnonzero(near)
        neighborhoods = index.radius_query_many(
            positions[near_rows], radii[near_rows],
            workers=workers) if near_rows.size else []

    with watch.section("udf"):
        values[~near] = np.minimum(nn[~near], far_cap)

    target = policy.target_count
    for start in range(0, near_rows.size, _CHUNK):
        rows = near_rows[start:start + _CHUNK]
        block = np.empty((rows.size, target, 3))
        with watch.section("patch"):
            for j, row in enumerate(rows):
                raw = cloud.points[neighborhoods[start + j]]
                block[j] = resample(raw, sigmas[row], policy,
                                    query_id=int(query_ids[row]))
        with watch.section("udf"):
            values[rows] = estimator.estimate_batch(positions[rows], block)
    return values, int(near_rows.size)


def run_pipeline(config: PipelineConfig, cloud: PointCloud | None = None) -> PipelineResult:
    cloud = _load_cloud(config, cloud)
    with _stage("normalize"):
        norm_cloud, transform = normalize_cloud(cloud)
    with _stage("index"):
        index = build_index(norm_cloud)

    spec = LatticeSpec(coarse_cells=config.coarse_cells, margin_cells=config.margin_cells)
    estimator = make_estimator(config.estimator, far_cap=config.far_cap)
    watch = _Stopwatch()
    cf = None

    if config.baseline_mode:
        with _stage("evaluate"):
            n = spec.fine_n
            ijk = np.stack(np.meshgrid(np.arange(n), np.arange(n), np.arange(n),
                                       indexing="ij"), axis=-1).reshape(-1, 3)
            positions = spec.fine_position(ijk)
            ids = spec.flat_id(ijk)
            # fixed radius, no curvature conditioning: always centroid-pad
            policy = ResamplePolicy(target_count=config.target_count,
                                    curvature_threshold=np.inf, rng_seed=config.seed)
            values, _ = _evaluate_queries(
                index, norm_cloud, positions, np.full(ids.size, config.r0),
                np.zeros(ids.size), ids, policy, estimator, config.far_cap,
                watch, config.workers)
            dense = values.reshape(n, n, n)
        evaluated = spec.total_fine_vertices
        filled = 0
    else:
        grid = AdaptiveGrid(spec)
        with _stage("curvature"):
            with watch.section("patch"):
                ids, positions = coarse_queries(spec)
                grid.mark_coarse(ids)
                cf = curvature_field(norm_cloud, index, positions, config.r0,
                                     query_ids=ids, workers=config.workers)
                sched = RadiusSchedule.from_field(
                    cf, s_max=config.s_max, s_min=config.s_min,
                    alpha=config.alpha, beta=config.beta, r0=config.r0)
        with _stage("refine"):
            with watch.section("patch"):
                hot = select_hot(cf, cf.percentile_value(config.refine_threshold))
                new_ids, parents = refine_with_parents(grid, hot)
        with _stage("evaluate"):
            sig_coarse, has_sigma = _sigma_lookup(cf, ids)
            sig_refined, _ = _sigma_lookup(cf, parents)  # hot parents always have entries
            sigmas = np.concatenate([sig_coarse, sig_refined])
            eval_ids = np.concatenate([ids, new_ids])
            eval_pos = np.vstack([positions, spec.position_of_id(new_ids)])
            with watch.section("patch"):
                radii = schedule_radius(sched, sigmas)
                # Queries whose initial region was empty carry no curvature
                # evidence; extracting wider than r0 there can only reach
                # geometry the curvature stage never saw (and can straddle
                # close layers), so they keep the nominal radius.
                radii[:ids.size][~has_sigma] = np.minimum(
                    radii[:ids.size][~has_sigma], config.r0)
            policy = ResamplePolicy(
                target_count=config.target_count,
                curvature_threshold=cf.percentile_value(config.resample_threshold),
                rng_seed=config.seed)
            values, _ = _evaluate_queries(
                index, norm_cloud, eval_pos, radii, sigmas, eval_ids,
                policy, estimator, config.far_cap, watch, config.workers)
            grid.set_values(eval_ids, values)
        with _stage("fill"):
            with watch.section("udf"):
                hierarchical_fill(grid)
            dense = grid.dense_values()
        evaluated = grid.evaluated_count
        filled = grid.filled_count

    if config.dump_field:
        with _stage("dump"):
            save_field(dense, spec, config.dump_field)

    with _stage("extract"):
        iso = IsoSpec(config.iso_eps) if config.iso_eps else IsoSpec.half_cell(spec)
        norm_mesh = marching_cubes(dense, spec, iso)
    with _stage("denormalize"):
        mesh = denormalize_mesh(norm_mesh, transform)
    if config.output_path:
        with _stage("write"):
            io.write_mesh(mesh, config.output_path)

    timing = TimingReport(
        patch_time=watch.buckets["patch"], udf_time=watch.buckets["udf"],
        evaluated_queries=evaluated, filled_queries=filled,
        total_fine_vertices=spec.total_fine_vertices)
    return PipelineResult(mesh=mesh, norm_mesh=norm_mesh, timing=timing,
                          transform=transform, spec=spec, curvature=cf)


def reconstruct(config: PipelineConfig, cloud: PointCloud | None = None):
    """Run the full pipeline; returns (mesh in input coordinates, timing)."""
    result = run_pipeline(config, cloud)
    return result.mesh, result.timing


@dataclass
class BenchResult:
    adaptive_timing: TimingReport
    baseline_timing: TimingReport
    adaptive_metrics: MetricReport
    baseline_metrics: MetricReport
    query_ratio: float

    def lines(self):
        out = []
        for tag, timing, report in (("adaptive", self.adaptive_timing, self.adaptive_metrics),
                                    ("baseline", self.baseline_timing, self.baseline_metrics)):
            out += [f"{tag}.{line}" for line in timing.lines()]
            out += [f"{tag}.{line}" for line in report.lines()]
        out.append(f"query_ratio={self.query_ratio:.6f}")
        return out


def bench(config: PipelineConfig, cloud: PointCloud | None = None,
          reference: PointCloud | None = None) -> BenchResult:
    """Adaptive vs uniform-fine baseline on identical input.

    Metrics are computed in normalized coordinates (where the distance
    thresholds are meaningful fractions of object extent) against the
    reference cloud, which defaults to the input cloud itself.
    """
    cloud = _load_cloud(config, cloud)
    adaptive = run_pipeline(replace(config, baseline_mode=False), cloud)
    baseline = run_pipeline(replace(config, baseline_mode=True), cloud)

    ref = reference if reference is not None else cloud
    with _stage("metrics"):
        ref_norm = PointCloud(adaptive.transform.apply(ref.points), ref.normals)
        reports = []
        for result in (adaptive, baseline):
            samples = sample_mesh(result.norm_mesh, config.sample_count, config.seed)
            reports.append(evaluate(samples, ref_norm, config.sample_count,
                                    config.seed, workers=config.workers))
    ratio = adaptive.timing.evaluated_queries / baseline.timing.evaluated_queries
    return BenchResult(adaptive_timing=adaptive.timing, baseline_timing=baseline.timing,
                       adaptive_metrics=reports[0], baseline_metrics=reports[1],
                       query_ratio=ratio)


def curvature_summary(config: PipelineConfig, cloud: PointCloud | None = None):
    """Curvature field over the coarse lattice, for the text dump."""
    cloud = _load_cloud(config, cloud)
    with _stage("normalize"):
        norm_cloud, _ = normalize_cloud(cloud)
    with _stage("index"):
        index = build_index(norm_cloud)
    spec = LatticeSpec(coarse_cells=config.coarse_cells, margin_cells=config.margin_cells)
    ids, positions = coarse_queries(spec)
    with _stage("curvature"):
        cf = curvature_field(norm_cloud, index, positions, config.r0,
                             query_ids=ids, workers=config.workers)
    return cf, spec


def generate_fixture(shape, path, count=50000, seed=0, **kwargs) -> PointCloud:
    cloud = make_fixture(shape, count=count, seed=seed, **kwargs)
    io.write_point_cloud(cloud, path)
    return cloud
