"""Command-line front end.

Subcommands: ``fit`` (penalized subspace estimation), ``dim`` (ladle
dimension selection), ``simulate`` (synthetic benchmark sweeps), and
``glasso`` (precision-matrix estimation).  Matrices travel as CSV, structured
results as JSON; every JSON artifact embeds a run manifest.  Exit codes:
0 success, 1 numerical failure, 2 input error.
"""

from __future__ import annotations

import csv
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import GwireError, NumericalFailureError
from .graph import (
    NeighborhoodGraph,
    default_glasso_penalty,
    glasso as run_glasso,
    graph_from_neighbor_lists,
    neighborhoods_from_precision,
)
from .kernels import estimate_kernels
from .metrics import EuclideanVector, pairwise_distances, response_from_json
from .report import adjacency_figure, eigen_scree_figure, ladle_figure, simulation_figure
from .selection import cross_validate, ladle as run_ladle
from .solver import (
    AdmmConfig,
    ElementwiseL1,
    GraphicalPenalty,
    RowGroup,
    admm_fit,
    extract_directions,
)
from .synthetic import ScenarioSpec, run_scenario


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _manifest(command: str, config: dict, inputs: dict[str, Path], seed, started: float) -> dict:
    return {
        "command": command,
        "config": config,
        "input_digests": {name: _digest(p) for name, p in inputs.items()},
        "seed": seed,
        "version": __version__,
        "wall_time": time.perf_counter() - started,
    }


def _read_x(path: Path) -> np.ndarray:
    try:
        x = np.genfromtxt(path, delimiter=",", skip_header=1)
    except OSError as exc:
        raise GwireError(f"cannot read {path}: {exc}") from exc
    x = np.atleast_2d(x)
    if x.ndim != 2 or not np.all(np.isfinite(x)):
        raise GwireError(f"{path}: expected a numeric n x p CSV with header")
    return x


def _read_responses(path: Path) -> list:
    try:
        records = json.loads(path.read_text())
    except OSError as exc:
        raise GwireError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise GwireError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(records, list):
        raise GwireError(f"{path}: expected a JSON array of response records")
    try:
        return [response_from_json(r) for r in records]
    except GwireError as exc:
        raise GwireError(f"{path}: {exc}") from exc


def _read_graph(path: Path, p: int) -> NeighborhoodGraph:
    if path.suffix.lower() == ".json":
        data = json.loads(path.read_text())
        lists = data["neighbors"] if isinstance(data, dict) else data
        graph = graph_from_neighbor_lists(lists, p=len(lists))
    else:
        omega = np.genfromtxt(path, delimiter=",")
        graph = neighborhoods_from_precision(np.atleast_2d(omega))
    if graph.p != p:
        raise GwireError(f"{path}: graph has {graph.p} predictors, data has {p}")
    return graph


def _scalar_y(responses) -> np.ndarray:
    ys = []
    for i, r in enumerate(responses):
        if not (isinstance(r, EuclideanVector) and r.values.size == 1):
            raise GwireError(
                f"response {i}: scalar kernels need 1-dimensional euclidean responses"
            )
        ys.append(float(r.values[0]))
    return np.array(ys)


def _write_triplets(path: Path, matrix: np.ndarray) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "value"])
        for i, j in zip(*np.nonzero(matrix)):
            writer.writerow([int(i), int(j), repr(float(matrix[i, j]))])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _prepare_inputs(x_csv, responses_json, graph_path, kernel, bound, slices):
    x = _read_x(Path(x_csv))
    responses = _read_responses(Path(responses_json))
    if len(responses) != x.shape[0]:
        raise GwireError(
            f"{responses_json}: {len(responses)} responses for {x.shape[0]} rows of X"
        )
    if kernel == "wire":
        distances = pairwise_distances(responses, apply_bound=bound)
        y = None
    else:
        distances, y = None, _scalar_y(responses)
    graph = _read_graph(Path(graph_path), x.shape[1]) if graph_path else None
    return x, responses, distances, y, graph


@click.group()
def main():
    """Sparse Frechet SDR with graphical structure among predictors."""


@main.command()
@click.argument("x_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("responses_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
              help="Precision CSV or neighbor-list JSON (required for gwire).")
@click.option("--bound/--no-bound", default=False, help="Apply m/(1+m) to distances.")
@click.option("--lambda", "lam", type=float, default=None, help="Fixed penalty level.")
@click.option("--cv", is_flag=True, help="Choose lambda by 10-fold cross-validation.")
@click.option("--d", type=int, default=None, help="Structural dimension.")
@click.option("--ladle", is_flag=True, help="Estimate d with the ladle estimator.")
@click.option("--penalty", "penalty_name",
              type=click.Choice(["gwire", "swire1", "swire2"]), default="gwire")
@click.option("--kernel", type=click.Choice(["wire", "sir", "cume"]), default="wire")
@click.option("--slices", type=int, default=10)
@click.option("--boot", type=int, default=100, help="Ladle bootstrap replicates.")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(file_okay=False), default="gwire-fit")
def fit(x_csv, responses_json, graph_path, bound, lam, cv, d, ladle, penalty_name,
        kernel, slices, boot, seed, out):
    """Fit the penalized subspace estimate from data files."""
    started = time.perf_counter()
    try:
        x, responses, distances, y, graph = _prepare_inputs(
            x_csv, responses_json, graph_path, kernel, bound, slices
        )
        if penalty_name == "gwire":
            if graph is None:
                raise GwireError("--graph is required for the gwire penalty")
            penalty = GraphicalPenalty(graph)
        else:
            penalty = ElementwiseL1() if penalty_name == "swire1" else RowGroup()
        if d is None and not ladle:
            d = 1
        if ladle:
            if graph is None:
                raise GwireError("--ladle requires --graph")
            lad = run_ladle(x, graph=graph, kernel_kind=kernel, distances=distances,
                            y=y, slices=slices, boot=boot, seed=seed)
            d = max(lad.d_hat, 1)
        result = None
        if cv or lam is None:
            cv_res = cross_validate(x, penalty=penalty, d=d, kernel_kind=kernel,
                                    distances=distances, y=y, slices=slices, seed=seed)
            lam = cv_res.chosen_lambda
            result = cv_res.chosen_fit  # warm-started full-data path fit
        if result is None:
            kernels = estimate_kernels(x, kind=kernel, distances=distances, y=y,
                                       slices=slices)
            result = admm_fit(kernels, penalty, lam, AdmmConfig())
        directions, eigenvalues = extract_directions(result.b_hat, d)
    except NumericalFailureError as exc:
        _fail(1, str(exc))
    except (GwireError, OSError) as exc:
        _fail(2, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_triplets(out_dir / "B_hat.csv", result.b_hat)
    np.savetxt(out_dir / "directions.csv", directions, delimiter=",",
               header=",".join(f"beta{j + 1}" for j in range(directions.shape[1])),
               comments="")
    eigen_scree_figure(np.asarray(eigenvalues), out_dir / "eigen_scree.png")
    inputs = {"x_csv": Path(x_csv), "responses_json": Path(responses_json)}
    if graph_path:
        inputs["graph"] = Path(graph_path)
    _write_json(out_dir / "result.json", {
        "active_set": [int(i) for i in result.active_set],
        "eigenvalues": [float(v) for v in eigenvalues],
        "lambda": lam,
        "d": d,
        "iterations": result.iterations,
        "converged": result.converged,
        "kkt_residual": result.kkt_residual,
        "manifest": _manifest(
            "fit",
            {"penalty": penalty_name, "kernel": kernel, "bound": bound,
             "slices": slices, "cv": cv, "ladle": ladle},
            inputs, seed, started,
        ),
    })
    click.echo(f"wrote {out_dir}/result.json (|S|={len(result.active_set)})")


@main.command()
@click.argument("x_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("responses_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--graph", "graph_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--bound/--no-bound", default=False)
@click.option("--kernel", type=click.Choice(["wire", "sir", "cume"]), default="wire")
@click.option("--slices", type=int, default=10)
@click.option("--boot", type=int, default=100)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(file_okay=False), default="gwire-dim")
def dim(x_csv, responses_json, graph_path, bound, kernel, slices, boot, seed, out):
    """Estimate the structural dimension with the ladle estimator."""
    started = time.perf_counter()
    try:
        x, responses, distances, y, graph = _prepare_inputs(
            x_csv, responses_json, graph_path, kernel, bound, slices
        )
        lad = run_ladle(x, graph=graph, kernel_kind=kernel, distances=distances,
                        y=y, slices=slices, boot=boot, seed=seed)
    except NumericalFailureError as exc:
        _fail(1, str(exc))
    except (GwireError, OSError) as exc:
        _fail(2, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "ladle_curves.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "f", "h", "f_plus_h"])
        for k, (fv, hv) in enumerate(zip(lad.f_values, lad.h_values)):
            writer.writerow([k, repr(float(fv)), repr(float(hv)), repr(float(fv + hv))])
    ladle_figure(lad.f_values, lad.h_values, lad.d_hat, out_dir / "ladle.png")
    _write_json(out_dir / "ladle.json", {
        "d_hat": lad.d_hat,
        "f": [float(v) for v in lad.f_values],
        "h": [float(v) for v in lad.h_values],
        "bootstrap_count": lad.bootstrap_count,
        "manifest": _manifest(
            "dim", {"kernel": kernel, "bound": bound, "slices": slices, "boot": boot},
            {"x_csv": Path(x_csv), "responses_json": Path(responses_json),
             "graph": Path(graph_path)},
            seed, started,
        ),
    })
    click.echo(f"wrote {out_dir}/ladle.json (d_hat={lad.d_hat})")


def _read_scenario_config(path: Path) -> dict:
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise GwireError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="key=value scenario file (example, n, p, cov, seed, reps).")
@click.option("--example", type=int, default=None)
@click.option("--n", type=int, default=None)
@click.option("--p", type=int, default=None)
@click.option("--cov", type=click.Choice(["sigma1", "sigma2"]), default=None)
@click.option("--reps", type=int, default=None)
@click.option("--method", type=click.Choice(["gwire", "swire1", "swire2", "gsir", "gcume"]),
              default="gwire")
@click.option("--graph", "graph_source", type=click.Choice(["oracle", "glasso"]),
              default="oracle")
@click.option("--true-d/--ladle-d", "use_true_d", default=True)
@click.option("--seed", type=int, default=None)
@click.option("--jobs", type=int, default=1)
@click.option("--out", type=click.Path(file_okay=False), default="gwire-sim")
def simulate(config_path, example, n, p, cov, reps, method, graph_source, use_true_d,
             seed, jobs, out):
    """Run a synthetic benchmark scenario and aggregate replicate metrics."""
    started = time.perf_counter()
    try:
        base = _read_scenario_config(Path(config_path)) if config_path else {}
        spec = ScenarioSpec(
            example_id=example if example is not None else int(base.get("example", 1)),
            n=n if n is not None else int(base.get("n", 300)),
            p=p if p is not None else int(base.get("p", 200)),
            covariance_kind=cov if cov is not None else base.get("cov", "sigma1"),
            seed=seed if seed is not None else int(base.get("seed", 0)),
            replicate_count=reps if reps is not None else int(base.get("reps", 20)),
        )
        report = run_scenario(spec, method, graph_source=graph_source,
                              use_true_d=use_true_d, jobs=jobs)
    except NumericalFailureError as exc:
        _fail(1, str(exc))
    except (GwireError, OSError, ValueError) as exc:
        _fail(2, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fields = ["replicate", "general_loss", "true_recovery", "false_positive",
              "false_negative", "chosen_lambda", "d_true", "d_used", "d_hat",
              "converged", "wall_time", "error"]
    with (out_dir / "replicates.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for record in report.records:
            writer.writerow({k: asdict(record)[k] for k in fields})
    losses = [r.general_loss for r in report.records if r.error is None]
    simulation_figure({method: losses}, out_dir / "loss_boxplot.png")
    manifest = {
        "command": "simulate",
        "config": {"spec": asdict(spec), "method": method,
                   "graph_source": graph_source, "use_true_d": use_true_d},
        "input_digests": {},
        "seed": spec.seed,
        "version": __version__,
        "wall_time": time.perf_counter() - started,
    }
    _write_json(out_dir / "report.json",
                {"aggregate": report.aggregate(), "manifest": manifest})
    agg = report.aggregate()
    click.echo(
        f"wrote {out_dir}/report.json "
        f"(loss {agg['general_loss_mean']:.3f}, recovery {agg['true_recovery_mean']:.2f})"
    )


@main.command(name="glasso")
@click.argument("x_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--penalty", type=float, default=None,
              help="l1 penalty; default 0.3 * max off-diagonal |sigma_ij|.")
@click.option("--out", type=click.Path(file_okay=False), default="gwire-glasso")
def glasso_cmd(x_csv, penalty, out):
    """Estimate a sparse precision matrix from predictor data."""
    started = time.perf_counter()
    try:
        x = _read_x(Path(x_csv))
        from .kernels import sample_covariance

        sigma_hat = sample_covariance(x)
        if penalty is None:
            penalty = default_glasso_penalty(sigma_hat)
        result = run_glasso(sigma_hat, penalty)
        graph = neighborhoods_from_precision(result.omega)
    except NumericalFailureError as exc:
        _fail(1, str(exc))
    except (GwireError, OSError) as exc:
        _fail(2, str(exc))

    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    np.savetxt(out_dir / "precision.csv", result.omega, delimiter=",")
    adjacency_figure(result.omega, 1e-8, out_dir / "pattern.png")
    _write_json(out_dir / "adjacency.json", {
        "neighbors": [sorted(ni) for ni in graph.neighbors],
        "converged": result.converged,
        "penalty": penalty,
        "manifest": _manifest("glasso", {"penalty": penalty},
                              {"x_csv": Path(x_csv)}, None, started),
    })
    click.echo(f"wrote {out_dir}/adjacency.json "
               f"(converged={result.converged}, penalty={penalty:.4g})")


if __name__ == "__main__":
    main()
