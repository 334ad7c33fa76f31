"""Synthetic benchmark generators and the replication harness.

Covariance structures place five correlated 5-blocks on the first 25
coordinates; four example models produce distributional, spherical, and
scalar responses with known active set and structural dimension.  All paper
indices are 1-based and translated to 0-based here, at the generator
boundary.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import ConfigurationError, DegenerateDirectionsError, GwireError
from .graph import (
    NeighborhoodGraph,
    default_glasso_penalty,
    glasso,
    neighborhoods_from_precision,
)
from .kernels import estimate_kernels
from .linalg import cholesky_sample
from .metrics import GaussianLocation, SpherePoint, pairwise_distances
from .selection import cross_validate, ladle
from .solver import (
    AdmmConfig,
    ElementwiseL1,
    GraphicalPenalty,
    RowGroup,
    admm_fit,
    extract_directions,
)

BLOCK_DIM = 25  # structured leading block of both covariance designs


@dataclass(frozen=True)
class ScenarioSpec:
    example_id: int
    n: int = 300
    p: int = 200
    covariance_kind: str = "sigma1"  # "sigma1" | "sigma2"
    seed: int = 0
    replicate_count: int = 20

    def __post_init__(self):
        if self.example_id not in (1, 2, 3, 4):
            raise ConfigurationError("example_id must be 1..4")
        if self.p < BLOCK_DIM:
            raise ConfigurationError(f"p must be at least {BLOCK_DIM}")
        if self.n < 2:
            raise ConfigurationError("n must be at least 2")
        if self.covariance_kind not in ("sigma1", "sigma2"):
            raise ConfigurationError("covariance_kind must be 'sigma1' or 'sigma2'")


def _block25() -> np.ndarray:
    return np.kron(np.eye(5), 0.16 * np.eye(5) + np.ones((5, 5)))


def make_sigma1(p: int) -> np.ndarray:
    if p < BLOCK_DIM:
        raise ConfigurationError(f"p must be at least {BLOCK_DIM}")
    sigma = np.eye(p)
    sigma[:BLOCK_DIM, :BLOCK_DIM] = _block25()
    return sigma


def make_omega1(p: int) -> np.ndarray:
    if p < BLOCK_DIM:
        raise ConfigurationError(f"p must be at least {BLOCK_DIM}")
    omega = np.eye(p)
    omega[:BLOCK_DIM, :BLOCK_DIM] = np.kron(
        np.eye(5), np.linalg.inv(0.16 * np.eye(5) + np.ones((5, 5)))
    )
    return omega


def make_omega2(p: int) -> np.ndarray:
    """Omega1 with extra edges 5-6 and 10-11 (1-based) of weight 0.1."""
    omega = make_omega1(p)
    for i, j in ((4, 5), (9, 10)):  # 0-based translations of (5,6) and (10,11)
        omega[i, j] = omega[j, i] = 0.1
    return omega


def make_sigma2(p: int) -> np.ndarray:
    return np.linalg.inv(make_omega2(p))


def covariance_and_precision(kind: str, p: int) -> tuple[np.ndarray, np.ndarray]:
    if kind == "sigma1":
        return make_sigma1(p), make_omega1(p)
    if kind == "sigma2":
        return make_sigma2(p), make_omega2(p)
    raise ConfigurationError(f"unknown covariance kind {kind!r}")


@dataclass(frozen=True)
class GeneratedData:
    x: np.ndarray
    responses: list | None  # metric-space responses (examples 1-2)
    y: np.ndarray | None    # scalar responses (examples 3-4)
    beta_true: np.ndarray   # p x d
    active_set: np.ndarray
    d: int
    apply_bound: bool       # whether distances are bounded-transformed


def _basis_sum(p: int, lo: int, hi: int, scale: float = 1.0) -> np.ndarray:
    """scale * (e_lo + ... + e_hi) with 1-based inclusive bounds."""
    v = np.zeros(p)
    v[lo - 1 : hi] = scale
    return v


def gen_example1(spec: ScenarioSpec, rng: np.random.Generator) -> GeneratedData:
    """Distributional responses N(mu_Y, 1) with mu_Y = beta'X + 0.1 noise."""
    sigma, _ = covariance_and_precision(spec.covariance_kind, spec.p)
    x = cholesky_sample(sigma, spec.n, rng)
    beta = _basis_sum(spec.p, 1, 10)
    mu = x @ beta + 0.1 * rng.standard_normal(spec.n)
    responses = [GaussianLocation(mu=float(m), sigma=1.0) for m in mu]
    return GeneratedData(
        x=x, responses=responses, y=None, beta_true=beta[:, None],
        active_set=np.arange(10), d=1, apply_bound=True,
    )


def gen_example2(spec: ScenarioSpec, rng: np.random.Generator) -> GeneratedData:
    """Unit-sphere responses in R^4 driven by two indices."""
    sigma, _ = covariance_and_precision(spec.covariance_kind, spec.p)
    x = cholesky_sample(sigma, spec.n, rng)
    beta1 = _basis_sum(spec.p, 1, 5, 0.2)
    beta2 = _basis_sum(spec.p, 6, 10, 0.2)
    shifted = x + 1.0
    a = shifted @ beta1
    b = shifted @ beta2
    eps = 0.1 * rng.standard_normal(spec.n)
    y = np.column_stack([
        np.cos(eps) * np.sin(a) * np.sin(b),
        np.cos(eps) * np.sin(a) * np.cos(b),
        np.cos(eps) * np.cos(a),
        np.sin(eps),
    ])
    responses = [SpherePoint(row) for row in y]
    return GeneratedData(
        x=x, responses=responses, y=None, beta_true=np.column_stack([beta1, beta2]),
        active_set=np.arange(10), d=2, apply_bound=False,
    )


def gen_example3(spec: ScenarioSpec, rng: np.random.Generator) -> GeneratedData:
    """Scalar single-index response exp(beta'X + 0.5 eps)."""
    sigma, _ = covariance_and_precision(spec.covariance_kind, spec.p)
    x = cholesky_sample(sigma, spec.n, rng)
    beta = _basis_sum(spec.p, 1, 10)
    y = np.exp(x @ beta + 0.5 * rng.standard_normal(spec.n))
    return GeneratedData(
        x=x, responses=None, y=y, beta_true=beta[:, None],
        active_set=np.arange(10), d=1, apply_bound=False,
    )


def gen_example4(spec: ScenarioSpec, rng: np.random.Generator) -> GeneratedData:
    """Scalar two-index response exp(beta1'X) sign(beta2'X) + 0.2 eps."""
    sigma, _ = covariance_and_precision(spec.covariance_kind, spec.p)
    x = cholesky_sample(sigma, spec.n, rng)
    beta1 = _basis_sum(spec.p, 1, 5)
    beta2 = _basis_sum(spec.p, 6, 10)
    y = np.exp(x @ beta1) * np.sign(x @ beta2) + 0.2 * rng.standard_normal(spec.n)
    return GeneratedData(
        x=x, responses=None, y=y, beta_true=np.column_stack([beta1, beta2]),
        active_set=np.arange(10), d=2, apply_bound=False,
    )


_GENERATORS = {1: gen_example1, 2: gen_example2, 3: gen_example3, 4: gen_example4}


def generate(spec: ScenarioSpec, rng: np.random.Generator | int | None = None) -> GeneratedData:
    rng = np.random.default_rng(spec.seed if rng is None else rng)
    return _GENERATORS[spec.example_id](spec, rng)


def _orthonormal(beta: np.ndarray) -> np.ndarray:
    beta = np.atleast_2d(np.asarray(beta, dtype=float))
    if beta.shape[0] < beta.shape[1]:
        raise DegenerateDirectionsError("more columns than rows")
    q, r = np.linalg.qr(beta)
    if np.min(np.abs(np.diag(r))) < 1e-12:
        raise DegenerateDirectionsError("direction matrix is rank deficient")
    return q


def general_loss(beta_hat: np.ndarray, beta_true: np.ndarray) -> float:
    """Frobenius distance between the projections onto the two column spans."""
    bh = _orthonormal(beta_hat)
    bt = _orthonormal(beta_true)
    if bh.shape[0] != bt.shape[0] or bh.shape[1] != bt.shape[1]:
        raise ConfigurationError("direction matrices must share p and d")
    return float(np.linalg.norm(bh @ bh.T - bt @ bt.T))


def selection_metrics(s_hat, s_true, p: int) -> tuple[int, int, int]:
    """(true_recovery, false_positive, false_negative)."""
    s_hat = set(int(i) for i in s_hat)
    s_true = set(int(i) for i in s_true)
    fp = len(s_hat - s_true)
    fn = len(s_true - s_hat)
    return (1 if fp == 0 and fn == 0 else 0, fp, fn)


_PENALTY_NAMES = ("gwire", "swire1", "swire2", "gsir", "gcume")


@dataclass
class ReplicateRecord:
    replicate: int
    general_loss: float
    true_recovery: int
    false_positive: int
    false_negative: int
    chosen_lambda: float
    d_true: int
    d_used: int
    d_hat: int | None
    converged: bool
    wall_time: float
    error: str | None = None


@dataclass
class ExperimentReport:
    spec: ScenarioSpec
    method: str
    graph_source: str
    use_true_d: bool
    records: list[ReplicateRecord] = field(default_factory=list)

    def aggregate(self) -> dict:
        ok = [r for r in self.records if r.error is None]
        out = {"replicates": len(self.records), "failed": len(self.records) - len(ok)}
        for name in ("general_loss", "true_recovery", "false_positive", "false_negative"):
            vals = np.array([getattr(r, name) for r in ok], dtype=float)
            out[name + "_mean"] = float(vals.mean()) if len(vals) else float("nan")
            out[name + "_sd"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
        if any(r.d_hat is not None for r in ok):
            hits = [int(r.d_hat == r.d_true) for r in ok if r.d_hat is not None]
            out["d_correct_proportion"] = float(np.mean(hits)) if hits else float("nan")
        return out


def _method_setup(method: str, graph: NeighborhoodGraph):
    """Penalty spec and kernel arguments for one method."""
    if method in ("gwire", "gsir", "gcume"):
        penalty = GraphicalPenalty(graph)
    elif method == "swire1":
        penalty = ElementwiseL1()
    elif method == "swire2":
        penalty = RowGroup()
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    if method == "gsir":
        kind = "sir"
    elif method == "gcume":
        kind = "cume"
    else:
        kind = "wire"
    return penalty, kind


def run_replicate(
    spec: ScenarioSpec,
    method: str,
    replicate: int,
    child_seed: np.random.SeedSequence,
    *,
    graph_source: str = "oracle",
    use_true_d: bool = True,
    glasso_penalty: float | None = None,
    ladle_boot: int = 100,
    config: AdmmConfig = AdmmConfig(),
) -> ReplicateRecord:
    start = time.perf_counter()
    rng = np.random.default_rng(child_seed)
    data = generate(spec, rng)
    if data.responses is not None:
        distances = pairwise_distances(data.responses, apply_bound=data.apply_bound)
        y = None
    else:
        distances, y = None, data.y

    if graph_source == "oracle":
        _, omega = covariance_and_precision(spec.covariance_kind, spec.p)
        graph = neighborhoods_from_precision(omega)
    elif graph_source == "glasso":
        from .kernels import sample_covariance

        sigma_hat = sample_covariance(data.x)
        pen = glasso_penalty if glasso_penalty is not None else default_glasso_penalty(sigma_hat)
        graph = neighborhoods_from_precision(glasso(sigma_hat, pen).omega)
    else:
        raise ConfigurationError(f"unknown graph source {graph_source!r}")

    penalty, kind = _method_setup(method, graph)
    slices = 10

    d_hat = None
    if use_true_d:
        d = data.d
    else:
        lad = ladle(
            data.x, graph=graph, kernel_kind=kind, distances=distances, y=y,
            slices=slices, boot=ladle_boot, seed=rng, config=config,
        )
        d_hat = lad.d_hat
        d = max(lad.d_hat, 1)

    cv = cross_validate(
        data.x, penalty=penalty, d=d, kernel_kind=kind, distances=distances, y=y,
        slices=slices, seed=rng, config=config,
    )
    if cv.chosen_fit is not None:
        fit = cv.chosen_fit
    else:
        kernels = estimate_kernels(
            data.x, kind=kind, distances=distances, y=y, slices=slices
        )
        fit = admm_fit(kernels, penalty, cv.chosen_lambda, config)
    recovery, fp, fn = selection_metrics(fit.active_set, data.active_set, spec.p)
    try:
        beta_hat, _ = extract_directions(fit.b_hat, data.beta_true.shape[1])
        loss = general_loss(beta_hat, data.beta_true)
    except DegenerateDirectionsError:
        loss = float(np.sqrt(2 * data.beta_true.shape[1]))  # maximal subspace distance
    return ReplicateRecord(
        replicate=replicate,
        general_loss=loss,
        true_recovery=recovery,
        false_positive=fp,
        false_negative=fn,
        chosen_lambda=cv.chosen_lambda,
        d_true=data.d,
        d_used=d,
        d_hat=d_hat,
        converged=fit.converged,
        wall_time=time.perf_counter() - start,
    )


def run_scenario(
    spec: ScenarioSpec,
    method: str,
    *,
    graph_source: str = "oracle",
    use_true_d: bool = True,
    glasso_penalty: float | None = None,
    ladle_boot: int = 100,
    config: AdmmConfig = AdmmConfig(),
    jobs: int = 1,
) -> ExperimentReport:
    """Run all replicates of a scenario and collect per-replicate records.

    Per-replicate seeds are spawned from the scenario seed, so serial and
    parallel runs produce identical results.
    """
    if method not in _PENALTY_NAMES:
        raise ConfigurationError(f"unknown method {method!r}")
    seeds = np.random.SeedSequence(spec.seed).spawn(spec.replicate_count)

    def one(r):
        try:
            return run_replicate(
                spec, method, r, seeds[r],
                graph_source=graph_source, use_true_d=use_true_d,
                glasso_penalty=glasso_penalty, ladle_boot=ladle_boot, config=config,
            )
        except GwireError as exc:
            warnings.warn(f"replicate {r} failed: {exc}", stacklevel=2)
            return ReplicateRecord(
                replicate=r, general_loss=float("nan"), true_recovery=0,
                false_positive=0, false_negative=0, chosen_lambda=float("nan"),
                d_true=0, d_used=0, d_hat=None, converged=False, wall_time=0.0,
                error=str(exc),
            )

    if jobs == 1:
        records = [one(r) for r in range(spec.replicate_count)]
    else:
        records = Parallel(n_jobs=jobs)(
            delayed(one)(r) for r in range(spec.replicate_count)
        )
    report = ExperimentReport(
        spec=spec, method=method, graph_source=graph_source, use_true_d=use_true_d
    )
    report.records = list(records)
    return report
