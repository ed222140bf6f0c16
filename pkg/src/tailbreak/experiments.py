"""Config-driven Monte Carlo harness for rejection-rate tables.

Each cell simulates `reps` independent LMSV paths, runs the change-point
test on every path, and reports the rejection frequency. Replication i
always uses seed mix64(master_seed, i), so results are byte-identical
whatever the worker count or execution order.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from itertools import product
from pathlib import Path

from . import __version__
from .changepoint import decide, mc_critical_value, resolve_t0
from .errors import DomainError, ParseError, ValidationError
from .estimators import VARIANTS
from .lmsv import FAMILIES, LmsvSpec, simulate_lmsv
from .seeding import mix64


@dataclass(frozen=True)
class ExperimentConfig:
    """One table cell: model parameters plus test and replication set-up."""

    n: int
    hurst: float
    alpha: float
    change_height: float = 0.0
    change_fraction: float = 0.5
    p: float = 0.1
    reps: int = 1000
    level: float = 0.05
    variant: str = "hill"
    t0: str | float = "auto-min"
    family: str = "generalized_pareto"
    master_seed: int = 0

    def __post_init__(self):
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")
        if not 0.0 < self.p < 1.0:
            raise ValidationError("proportion p must lie in (0, 1)")
        if not 0.0 < self.level < 1.0:
            raise ValidationError("level must lie in (0, 1)")
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.family not in FAMILIES:
            raise ValidationError(f"family must be one of {FAMILIES}")
        if self.k_n < 1 or self.k_n > self.n - 1:
            raise ValidationError("floor(n p) must lie in 1..n-1")

    @property
    def k_n(self) -> int:
        return int(self.n * self.p + 1e-9)

    def spec_for_rep(self, i: int) -> LmsvSpec:
        return LmsvSpec(
            n=self.n,
            hurst=self.hurst,
            alpha=self.alpha,
            change_height=self.change_height,
            change_fraction=self.change_fraction,
            family=self.family,
            seed=mix64(self.master_seed, i),
        )

    def sort_key(self):
        return (
            self.hurst, self.p, self.n, self.alpha,
            self.change_height, self.change_fraction,
        )


@dataclass(frozen=True)
class CellResult:
    """Rejection frequency of one cell with its Monte Carlo uncertainty."""

    rejection_rate: float
    reps: int
    mc_standard_error: float
    mean_change_fraction: float
    errors: dict[str, int]
    config: ExperimentConfig

    @property
    def error_count(self) -> int:
        return sum(self.errors.values())


@dataclass(frozen=True)
class LocationAccuracy:
    """Fraction of replications locating the break within a tolerance."""

    fraction: float
    tolerance: float
    reps: int
    errors: dict[str, int]
    config: ExperimentConfig


def _one_rep(task):
    """Worker: one simulated path, one test decision."""
    config, i, t0f, critical_value = task
    x = simulate_lmsv(config.spec_for_rep(i))
    try:
        report = decide(
            x,
            config.k_n,
            t0=t0f,
            level=config.level,
            variant=config.variant,
            critval_source="user",
            critical_value=critical_value,
        )
    except DomainError as exc:
        return i, None, None, type(exc).__name__
    return i, report.reject, report.change_fraction, None


def _run_reps(config: ExperimentConfig, workers: int):
    t0f = resolve_t0(config.n, config.k_n, config.t0)
    critical_value = mc_critical_value(1.0 - config.level, t0f)
    tasks = [(config, i, t0f, critical_value) for i in range(config.reps)]
    if workers <= 1:
        results = [_one_rep(t) for t in tasks]
    else:
        chunk = max(1, config.reps // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_rep, tasks, chunksize=chunk))
    results.sort(key=lambda r: r[0])
    return results


def rejection_rate(config: ExperimentConfig, workers: int = 1) -> CellResult:
    """Fraction of replications in which the test rejects.

    Replications that fail with NoExceedances under the auto-min t0
    policy are dropped from the denominator (a practitioner would rerun
    them); every error is still counted and reported.
    """
    results = _run_reps(config, workers)
    errors: dict[str, int] = {}
    rejections = 0
    fractions = []
    for _, reject, frac, err in results:
        if err is not None:
            errors[err] = errors.get(err, 0) + 1
            continue
        if reject:
            rejections += 1
            fractions.append(frac)
    excluded = errors.get("NoExceedances", 0) if config.t0 == "auto-min" else 0
    denom = config.reps - excluded
    if denom < 1:
        raise DomainError("every replication errored; nothing to aggregate")
    rate = rejections / denom
    se = math.sqrt(rate * (1.0 - rate) / denom)
    mean_frac = sum(fractions) / len(fractions) if fractions else float("nan")
    return CellResult(
        rejection_rate=rate,
        reps=config.reps,
        mc_standard_error=se,
        mean_change_fraction=mean_frac,
        errors=errors,
        config=config,
    )


def location_accuracy(
    config: ExperimentConfig, tolerance: float = 0.05, workers: int = 1
) -> LocationAccuracy:
    """How often the argmax lands within `tolerance` of the true break."""
    if config.change_height == 0.0 or not 0.0 < config.change_fraction < 1.0:
        raise ValidationError("location accuracy needs an active break")
    results = _run_reps(config, workers)
    errors: dict[str, int] = {}
    hits = 0
    ok = 0
    for _, _, frac, err in results:
        if err is not None:
            errors[err] = errors.get(err, 0) + 1
            continue
        ok += 1
        if abs(frac - config.change_fraction) <= tolerance:
            hits += 1
    if ok == 0:
        raise DomainError("every replication errored; nothing to aggregate")
    return LocationAccuracy(
        fraction=hits / ok,
        tolerance=tolerance,
        reps=config.reps,
        errors=errors,
        config=config,
    )


def _cell_key(config: ExperimentConfig) -> str:
    payload = asdict(config)
    payload["version"] = __version__
    return json.dumps(payload, sort_keys=True)


def _format_row(result: CellResult) -> str:
    c = result.config
    return (
        f"{c.hurst:g},{c.p:g},{c.n},{c.alpha:g},{c.change_height:g},"
        f"{c.change_fraction:g},{c.reps},{result.rejection_rate:.6f},"
        f"{result.mc_standard_error:.6f},{result.error_count}"
    )


def run_table(
    grid: list[ExperimentConfig],
    out_path,
    journal_path=None,
    workers: int = 1,
) -> list[CellResult]:
    """Evaluate every cell and write a delimited table.

    An optional append-only journal records finished cells so an
    interrupted run can resume without recomputation. The table itself
    carries no timestamps: reruns with the same configs and master seed
    are byte-identical.
    """
    journal: dict[str, dict] = {}
    if journal_path is not None:
        journal_path = Path(journal_path)
        if journal_path.exists():
            with open(journal_path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        entry = json.loads(line)
                        journal[entry["key"]] = entry["row"]
    results = []
    for config in grid:
        key = _cell_key(config)
        if key in journal:
            row = journal[key]
            result = CellResult(
                rejection_rate=row["rate"],
                reps=row["reps"],
                mc_standard_error=row["se"],
                mean_change_fraction=row["mean_change_fraction"],
                errors=row["errors"],
                config=config,
            )
        else:
            result = rejection_rate(config, workers=workers)
            if journal_path is not None:
                entry = {
                    "key": key,
                    "row": {
                        "rate": result.rejection_rate,
                        "reps": result.reps,
                        "se": result.mc_standard_error,
                        "mean_change_fraction": result.mean_change_fraction,
                        "errors": result.errors,
                    },
                    "finished_at": time.strftime("%Y-%m-%dT%H:%M:%S"),
                }
                with open(journal_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, sort_keys=True) + "\n")
        results.append(result)
    results.sort(key=lambda r: r.config.sort_key())
    seeds = {c.master_seed for c in (r.config for r in results)}
    seed_note = str(seeds.pop()) if len(seeds) == 1 else "mixed"
    lines = [
        "# tailbreak rejection-rate table",
        f"# version={__version__} master_seed={seed_note}",
        "H,p,n,alpha,h,tau,reps,rate,se,errors",
    ]
    lines.extend(_format_row(r) for r in results)
    out_path = Path(out_path)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return results


_GRID_KEYS = {
    "n": ("n", int),
    "hurst": ("hurst", float),
    "alpha": ("alpha", float),
    "h": ("change_height", float),
    "change_height": ("change_height", float),
    "tau": ("change_fraction", float),
    "change_fraction": ("change_fraction", float),
    "p": ("p", float),
    "reps": ("reps", int),
    "level": ("level", float),
    "variant": ("variant", str),
    "t0": ("t0", None),
    "family": ("family", str),
    "master_seed": ("master_seed", int),
}

_FAMILY_ALIASES = {"pareto": "standard_pareto", "gpd": "generalized_pareto"}


def _convert(key: str, raw: str):
    field_name, caster = _GRID_KEYS[key]
    raw = raw.strip()
    if field_name == "t0":
        if raw in ("auto", "auto-min"):
            return raw
        return float(raw)
    if field_name == "family":
        return _FAMILY_ALIASES.get(raw, raw)
    return caster(raw)


def load_grid(path) -> list[ExperimentConfig]:
    """Parse a key-value grid file into a list of configs.

    Lines are `key = value[, value...]`; `#` starts a comment. Optional
    `[section]` headers open new blocks; keys listed before the first
    section act as defaults for every block. Multi-valued keys expand to
    their cartesian product within a block.
    """
    path = Path(path)
    defaults: dict[str, list] = {}
    blocks: list[dict[str, list]] = []
    current = defaults
    with open(path, encoding="utf-8") as fh:
        for lineno, raw_line in enumerate(fh, start=1):
            line = raw_line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                blocks.append({})
                current = blocks[-1]
                continue
            if "=" not in line:
                raise ParseError("expected key = value", lineno)
            key, _, value = line.partition("=")
            key = key.strip().lower()
            if key not in _GRID_KEYS:
                raise ParseError(f"unknown key {key!r}", lineno)
            try:
                values = [_convert(key, v) for v in value.split(",")]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            field_name = _GRID_KEYS[key][0]
            current[field_name] = values
    if not blocks:
        blocks = [{}]
    configs = []
    for block in blocks:
        merged = dict(defaults)
        merged.update(block)
        if "master_seed" in merged and len(merged["master_seed"]) != 1:
            raise ValidationError("master_seed must be single-valued")
        names = list(merged)
        for combo in product(*(merged[name] for name in names)):
            configs.append(ExperimentConfig(**dict(zip(names, combo))))
    return configs
