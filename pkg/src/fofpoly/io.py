"""Serialization: reports, tables, plots and estimate/dataset bundles."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InvalidArgumentError
from .functional import FunctionalData, read_csv, write_csv

__all__ = [
    "to_jsonable",
    "write_json",
    "write_table",
    "read_table",
    "loglog_svg",
    "save_estimate",
    "load_estimate",
    "export_dataset",
    "load_dataset",
    "export_oracle",
]


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(to_jsonable(obj), indent=2) + "\n")
    return path


def write_table(rows, header, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                             for v in row])
    return path


def read_table(path) -> list:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def loglog_svg(path, series, title="", xlabel="n", ylabel="error", logx=True, logy=True):
    """Line plot to SVG with no timestamp and a fixed id salt.

    ``series`` is a list of ``(label, x, y, style)``; ``style`` is a matplotlib
    format string such as ``"o-"`` or ``"--"``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "fofpoly", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 4.2))
        for label, x, y, style in series:
            ax.plot(x, y, style, label=label)
        if logx:
            ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        if series:
            ax.legend(fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return Path(path)


# -- estimate / dataset bundles ---------------------------------------------

def save_estimate(est, directory) -> Path:
    """Write ``manifest.json``, training CSVs and the dual coefficients ``coef.csv``.

    The bundle is enough to refit the estimate bit-for-bit.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if est.scalar_response_:
        raise InvalidArgumentError("bundles store functional responses only")
    write_csv(FunctionalData(est.x_grid_, est.X_fit_), directory / "inputs.csv")
    write_csv(FunctionalData(est.y_grid_, est.Y_fit_), directory / "responses.csv")
    np.savetxt(directory / "coef.csv", est.dual_, delimiter=",", fmt="%.17g")
    manifest = {
        "degree": int(est.degree),
        "alpha": float(est.alpha),
        "family": est.family_.name,
        "scale": float(est.scale_),
        "x_grid": est.x_grid_.to_dict(),
        "y_grid": est.y_grid_.to_dict(),
        "inputs": "inputs.csv",
        "responses": "responses.csv",
        "coef": "coef.csv",
    }
    return write_json(manifest, directory / "manifest.json")


def load_estimate(directory):
    """Refit the estimate stored by :func:`save_estimate` and check its coefficients."""
    from .estimator import SpectralPolyRegressor

    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    X = read_csv(directory / manifest["inputs"])
    Y = read_csv(directory / manifest["responses"])
    est = SpectralPolyRegressor(
        degree=manifest["degree"], alpha=manifest["alpha"], family=manifest["family"],
        x_grid=X.grid, y_grid=Y.grid,
    ).fit(X.values, Y.values)
    stored = np.loadtxt(directory / manifest["coef"], delimiter=",", ndmin=2)
    if stored.shape != est.dual_.shape or not np.allclose(stored, est.dual_, rtol=1e-10,
                                                          atol=1e-12):
        raise InvalidArgumentError("stored coefficients do not match the refitted estimate")
    return est


def export_dataset(X: FunctionalData, Y: FunctionalData, directory, meta=None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_csv(X, directory / "inputs.csv")
    write_csv(Y, directory / "responses.csv")
    manifest = {"n": len(X), "inputs": "inputs.csv", "responses": "responses.csv"}
    manifest.update(meta or {})
    return write_json(manifest, directory / "manifest.json")


def load_dataset(directory):
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    return read_csv(directory / manifest["inputs"]), read_csv(directory / manifest["responses"])


def export_oracle(oracle, directory) -> Path:
    """Eigenvalues, eigenfunction weights and the oracle inputs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    np.savetxt(directory / "eigenvalues.csv", oracle.eigenvalues, delimiter=",", fmt="%.17g")
    np.savetxt(directory / "weights.csv", oracle.weights, delimiter=",", fmt="%.17g")
    write_csv(oracle.inputs, directory / "inputs.csv")
    return write_json(
        {"N": oracle.N, "degree": oracle.degree, "rank": oracle.rank, "decay": oracle.decay,
         "grid": oracle.grid.to_dict()},
        directory / "manifest.json",
    )

