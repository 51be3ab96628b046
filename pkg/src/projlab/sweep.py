"""Parameter sweeps over projection grids and their on-disk outputs."""

from __future__ import annotations

import itertools
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

from . import lsp, tsne
from .dataset import DistanceKind, load_csv, standardize_columns
from .metrics import DEFAULT_K_MAX, Embedding, neighborhood_hit_curve, silhouette
from .report import (
    ReportRow,
    emit_embedding_csv,
    emit_hit_curve_csv,
    emit_report_csv,
    emit_svg_scatter,
)

log = logging.getLogger(__name__)

METHODS = ("tsne", "lsp")
THREADS_ENV = "PROJLAB_THREADS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    input: str
    method: str
    label_column: str = "label"
    output: str = "out"
    distance: str = "euclidean"
    seed: int = 0
    k_max: int = DEFAULT_K_MAX
    standardize: bool = False
    record_seconds: bool = False
    # lsp grid
    control_points: tuple[int, ...] = (25,)
    neighbors: tuple[int, ...] = (10,)
    # tsne grid
    perplexity: tuple[float, ...] = (30.0,)
    iterations: tuple[int, ...] = (1000,)
    pca_dims: tuple[int | None, ...] = (None,)
    # tsne optimizer
    learning_rate: float = tsne.TsneConfig.learning_rate
    momentum_initial: float = tsne.TsneConfig.momentum_initial
    momentum_final: float = tsne.TsneConfig.momentum_final
    momentum_switch_iter: int = tsne.TsneConfig.momentum_switch_iter
    exaggeration_factor: float = tsne.TsneConfig.exaggeration_factor
    exaggeration_iters: int = tsne.TsneConfig.exaggeration_iters
    init_scale: float = tsne.TsneConfig.init_scale

    def cells(self) -> list[Cell]:
        """Grid cells in declared order (last listed parameter varies fastest)."""
        if self.method == "lsp":
            return [
                Cell("lsp", {"control_points": cp, "neighbors": nn})
                for cp, nn in itertools.product(self.control_points, self.neighbors)
            ]
        return [
            Cell("tsne", {"perplexity": perp, "iterations": it, "pca_dims": pd})
            for pd, it, perp in itertools.product(self.pca_dims, self.iterations, self.perplexity)
        ]


@dataclass(frozen=True)
class Cell:
    method: str
    params: dict = field(hash=False)

    @property
    def name(self) -> str:
        p = self.params
        if self.method == "lsp":
            return f"lsp_cp{p['control_points']}_nn{p['neighbors']}"
        perp = p["perplexity"]
        perp = int(perp) if float(perp).is_integer() else perp
        pca = "none" if p["pca_dims"] is None else p["pca_dims"]
        return f"tsne_perp{perp}_it{p['iterations']}_pca{pca}"


_LIST_KEYS = {"control_points": int, "neighbors": int, "perplexity": float, "iterations": int, "pca_dims": int}
_SCALAR_KEYS = {
    "input": str, "method": str, "label_column": str, "output": str, "distance": str,
    "seed": int, "k_max": int, "standardize": bool, "record_seconds": bool,
    "learning_rate": float, "momentum_initial": float, "momentum_final": float,
    "momentum_switch_iter": int, "exaggeration_factor": float, "exaggeration_iters": int,
    "init_scale": float,
}
KNOWN_KEYS = set(_LIST_KEYS) | set(_SCALAR_KEYS)


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _convert(key: str, raw):
    if key in _LIST_KEYS:
        items = raw if isinstance(raw, (list, tuple)) else [s for s in str(raw).split(",")]
        items = [str(s).strip() for s in items]
        if not items or any(s == "" for s in items):
            raise ConfigError(f"{key}: grid list is empty or has an empty entry")
        out = []
        for s in items:
            if key == "pca_dims" and s.lower() in ("none", "off"):
                out.append(None)
                continue
            try:
                v = float(s) if _LIST_KEYS[key] is float else int(s)
            except ValueError:
                raise ConfigError(f"{key}: invalid value {s!r}") from None
            out.append(v)
        return tuple(out)
    kind = _SCALAR_KEYS[key]
    try:
        if kind is bool:
            return raw if isinstance(raw, bool) else _parse_bool(str(raw))
        return kind(str(raw).strip()) if kind is not str else str(raw).strip()
    except ValueError:
        raise ConfigError(f"{key}: invalid value {raw!r}") from None


def read_config_file(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    entries: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = value
    return entries


def parse_config(path=None, overrides: dict | None = None) -> SweepConfig:
    """Build a validated :class:`SweepConfig` from a file and/or overrides (overrides win)."""
    entries: dict = dict(read_config_file(path)) if path is not None else {}
    entries.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(entries) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key {unknown[0]!r}")
    for required in ("input", "method"):
        if required not in entries:
            raise ConfigError(f"missing required key {required!r}")
    values = {k: _convert(k, v) for k, v in entries.items()}
    if path is not None and "input" in values:
        inp = Path(values["input"])
        beside = Path(path).parent / inp
        # relative inputs resolve next to the config file when they exist there
        if not inp.is_absolute() and "input" not in (overrides or {}) and beside.is_file():
            values["input"] = str(beside)
    config = SweepConfig(**values)
    validate(config)
    return config


def validate(config: SweepConfig) -> None:
    if config.method not in METHODS:
        raise ConfigError(f"method: expected one of {METHODS}, got {config.method!r}")
    try:
        DistanceKind(config.distance)
    except ValueError:
        raise ConfigError(f"distance: expected euclidean or cosine, got {config.distance!r}") from None
    if config.k_max < 1:
        raise ConfigError("k_max: must be positive")
    if config.method == "lsp":
        grids = {"control_points": config.control_points, "neighbors": config.neighbors}
        for name, grid in grids.items():
            if not grid:
                raise ConfigError(f"{name}: grid is empty")
        for cp in config.control_points:
            if cp < 3:
                raise ConfigError(f"control_points: {cp} is below 3 (2-D MDS needs out_dim + 1)")
        for nn in config.neighbors:
            if nn < 1:
                raise ConfigError(f"neighbors: {nn} must be at least 1")
    else:
        for name in ("perplexity", "iterations", "pca_dims"):
            if not getattr(config, name):
                raise ConfigError(f"{name}: grid is empty")
        for p in config.perplexity:
            if not p > 1:
                raise ConfigError(f"perplexity: {p} must exceed 1")
        for it in config.iterations:
            if it < config.exaggeration_iters:
                raise ConfigError(f"iterations: {it} is below exaggeration_iters={config.exaggeration_iters}")
        for d in config.pca_dims:
            if d is not None and d < 1:
                raise ConfigError(f"pca_dims: {d} must be positive")
        try:
            _tsne_config(config, config.perplexity[0], config.iterations[0]).validate()
        except ValueError as err:
            raise ConfigError(str(err)) from None


def _tsne_config(config: SweepConfig, perplexity: float, iterations: int) -> tsne.TsneConfig:
    shared = {f.name: getattr(config, f.name) for f in fields(tsne.TsneConfig) if hasattr(config, f.name)}
    shared.update(perplexity=perplexity, iterations=iterations, seed=config.seed)
    return tsne.TsneConfig(**shared)


def run_cell(cell: Cell, config: SweepConfig, X, labels, label_names) -> tuple[ReportRow, Embedding | None]:
    """Execute one grid cell; failures are captured in the row instead of raised."""
    p = cell.params
    start = time.perf_counter()
    emb = None
    error = None
    score = None
    curve: list[float] = []
    try:
        if cell.method == "lsp":
            cfg = lsp.LspConfig(p["control_points"], p["neighbors"], DistanceKind(config.distance), 2, config.seed)
            emb = lsp.run(X, cfg, labels, label_names=label_names)
        else:
            cfg = _tsne_config(config, p["perplexity"], p["iterations"])
            emb = tsne.run(
                X, cfg, p["pca_dims"], labels, label_names=label_names, distance=config.distance
            )
        curve = [float(h) for h in neighborhood_hit_curve(emb, min(config.k_max, emb.n - 1))]
        score = silhouette(emb)
    except Exception as err:  # noqa: BLE001 - recorded per cell
        error = f"{type(err).__name__}: {err}"
        log.warning("cell %s failed: %s", cell.name, error)
    seconds = time.perf_counter() - start
    row = ReportRow(
        cell.method,
        dict(p),
        score,
        seconds if config.record_seconds else None,
        config.seed,
        error,
        curve,
    )
    return row, emb


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n


def load_input(config: SweepConfig):
    data = load_csv(config.input, config.label_column)
    X = standardize_columns(data.X) if config.standardize else data.X
    return X, data.labels, data.label_names


def run_sweep(config: SweepConfig, data=None) -> list[tuple[ReportRow, Embedding | None]]:
    """Run every grid cell with the shared seed and return rows in grid order.

    ``data`` may supply ``(X, labels, label_names)`` in place of reading
    ``config.input``. Cells run on up to ``PROJLAB_THREADS`` threads
    (unset or 0 means one per CPU); output order never depends on scheduling.
    """
    validate(config)
    X, labels, names = data if data is not None else load_input(config)
    cells = config.cells()
    workers = min(thread_count(), len(cells))
    if workers <= 1:
        return [run_cell(c, config, X, labels, names) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_cell(c, config, X, labels, names), cells))


def write_outputs(config: SweepConfig, results, out_dir=None) -> Path:
    """Emit ``report.csv``, per-cell embedding CSVs and scatter SVGs, and ``hitcurve.csv``."""
    out = Path(out_dir if out_dir is not None else config.output)
    out.mkdir(parents=True, exist_ok=True)
    cells = config.cells()
    emit_report_csv([row for row, _ in results], out / "report.csv")
    curves = {}
    for cell, (row, emb) in zip(cells, results):
        if emb is None:
            continue
        emit_embedding_csv(emb, out / f"embedding_{cell.name}.csv")
        emit_svg_scatter(emb, out / f"scatter_{cell.name}.svg", title=cell.name)
        if row.hit_curve:
            curves[cell.name] = row.hit_curve
    if curves:
        emit_hit_curve_csv(curves, out / "hitcurve.csv")
    return out


def sweep(config: SweepConfig, data=None) -> list[tuple[ReportRow, Embedding | None]]:
    results = run_sweep(config, data)
    write_outputs(config, results)
    return results


__all__ = [
    "Cell",
    "ConfigError",
    "SweepConfig",
    "parse_config",
    "run_sweep",
    "sweep",
    "write_outputs",
]
