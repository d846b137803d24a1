"""Perturbation sweeps: one parameter varied over a grid, rest fixed.

A sweep runs the chosen sampler once per replicate with the baseline
config, once per (grid value, replicate) with a single scalar field
replaced, and reduces every run to a SampleSummary.  Comparing the
baseline summary of a replicate against each perturbed summary of the
same replicate yields one MeasureTriple per grid value; quantile bands
over replicates quantify the Monte Carlo noise of the measures at
selected grid values.

Seeds are derived from the base seed so that replicate r depends only on
(base seed, r).  Adding replicates or grid values never changes results
already computed for earlier replicates.
"""

from __future__ import annotations

import dataclasses
import math
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, UnknownModelError, UnknownParameterError
from .measures import (
    DEFAULT_N_COMPONENTS,
    MeasureTriple,
    SampleSummary,
    replicate_band,
    summarize_sample,
    triple_from_summaries,
)
from .samplers import (
    CcvConfig,
    Dataset,
    DcvConfig,
    DpConfig,
    DpgmmConfig,
    McmcControl,
    ccv_posterior,
    dcv_posterior,
    derived_seed,
    dp_posterior,
    dpgmm_posterior,
)

__all__ = [
    "BandTriple",
    "GRID_POINTS",
    "MODEL_TAGS",
    "SweepResult",
    "SweepSpec",
    "get_config_value",
    "model_sampler",
    "run_sweep",
    "set_config_value",
    "sweep_grid_presets",
]

#: Number of grid values in every preset ladder.
GRID_POINTS = 15

_MODELS = {
    "dp": (DpConfig, dp_posterior),
    "dpgmm": (DpgmmConfig, dpgmm_posterior),
    "ccv": (CcvConfig, ccv_posterior),
    "dcv": (DcvConfig, dcv_posterior),
}

MODEL_TAGS = tuple(sorted(_MODELS))


def model_sampler(model: str):
    """The posterior sampler callable registered for a model tag."""
    if model not in _MODELS:
        raise UnknownModelError(
            f"unknown model tag {model!r}; expected one of " + ", ".join(MODEL_TAGS)
        )
    return _MODELS[model][1]


def _field_names(config) -> set:
    return {f.name for f in dataclasses.fields(config)}


def get_config_value(config, parameter: str) -> float:
    """Read a numeric scalar field, following dots into nested configs."""
    obj = config
    for part in parameter.split("."):
        if not dataclasses.is_dataclass(obj) or part not in _field_names(obj):
            raise UnknownParameterError(
                f"{type(obj).__name__} has no field {part!r} "
                f"(while resolving {parameter!r})"
            )
        obj = getattr(obj, part)
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise UnknownParameterError(
            f"{parameter!r} is not a numeric scalar field "
            f"(found {type(obj).__name__})"
        )
    return float(obj)


def set_config_value(config, parameter: str, value: float):
    """Return a copy of the config with one scalar field replaced.

    Integer fields stay integers; handing them a non-integer value is an
    error rather than a silent truncation.
    """
    head, _, rest = parameter.partition(".")
    if head not in _field_names(config):
        raise UnknownParameterError(
            f"{type(config).__name__} has no field {head!r}"
        )
    current = getattr(config, head)
    if rest:
        if not dataclasses.is_dataclass(current):
            raise UnknownParameterError(
                f"{head!r} has no sub-fields (while resolving {parameter!r})"
            )
        inner = set_config_value(current, rest, value)
        return dataclasses.replace(config, **{head: inner})
    if dataclasses.is_dataclass(current) or isinstance(current, bool):
        raise UnknownParameterError(f"{parameter!r} is not a numeric scalar field")
    if isinstance(current, int):
        if not float(value).is_integer():
            raise ConfigError(
                "CONFIG_BAD_VALUE",
                f"{parameter!r} takes integer values, got {value!r}",
            )
        return dataclasses.replace(config, **{head: int(value)})
    return dataclasses.replace(config, **{head: float(value)})


@dataclass(frozen=True)
class SweepSpec:
    """Description of one perturbation experiment.

    `parameter` names a numeric scalar field of the model's config, with
    dots for nested fields (e.g. "g0.b" for a Beta base measure shape).
    The baseline's own value of that field must appear among `values`.
    `band_values` lists the grid values at which replicate bands are
    computed; it needs at least two replicates to be meaningful.
    """

    model: str
    baseline: object
    parameter: str
    values: tuple
    replicates: int = 25
    band_values: tuple = ()
    mcmc: McmcControl = McmcControl()
    d_components: int = DEFAULT_N_COMPONENTS

    def __post_init__(self):
        if self.model not in _MODELS:
            raise UnknownModelError(
                f"unknown model tag {self.model!r}; expected one of "
                + ", ".join(MODEL_TAGS)
            )
        cfg_cls = _MODELS[self.model][0]
        if not isinstance(self.baseline, cfg_cls):
            raise ConfigError(
                "CONFIG_BAD_MODEL",
                f"model {self.model!r} needs a {cfg_cls.__name__} baseline, "
                f"got {type(self.baseline).__name__}",
            )
        values = tuple(float(v) for v in self.values)
        if len(values) == 0:
            raise ConfigError("CONFIG_BAD_GRID", "values grid is empty")
        if any(not math.isfinite(v) for v in values):
            raise ConfigError(
                "CONFIG_BAD_GRID", "values grid contains non-finite entries"
            )
        if len(set(values)) != len(values):
            raise ConfigError("CONFIG_BAD_GRID", "values grid contains duplicates")
        object.__setattr__(self, "values", values)

        base_val = get_config_value(self.baseline, self.parameter)
        if base_val not in values:
            raise ConfigError(
                "CONFIG_BAD_GRID",
                f"baseline {self.parameter}={base_val!r} is not on the grid",
            )
        if not isinstance(self.replicates, int) or self.replicates < 1:
            raise ConfigError(
                "CONFIG_BAD_REPLICATES",
                f"replicates must be >= 1, got {self.replicates}",
            )
        band_values = tuple(float(v) for v in self.band_values)
        for v in band_values:
            if v not in values:
                raise ConfigError(
                    "CONFIG_BAD_GRID", f"band value {v!r} is not on the grid"
                )
        if len(set(band_values)) != len(band_values):
            raise ConfigError("CONFIG_BAD_GRID", "band_values contains duplicates")
        if band_values and self.replicates < 2:
            raise ConfigError(
                "CONFIG_BAD_REPLICATES",
                "replicate bands need at least 2 replicates",
            )
        object.__setattr__(self, "band_values", band_values)

        if not isinstance(self.mcmc, McmcControl):
            raise ConfigError("CONFIG_BAD_MCMC", "mcmc must be an McmcControl")
        if not isinstance(self.d_components, int) or self.d_components < 2:
            raise ConfigError(
                "CONFIG_BAD_COMPONENTS",
                f"d_components must be an integer >= 2, got {self.d_components}",
            )
        if self.mcmc.n_samples <= self.d_components:
            raise ConfigError(
                "CONFIG_BAD_MCMC",
                f"n_samples={self.mcmc.n_samples} must exceed "
                f"d_components={self.d_components}",
            )

    @property
    def baseline_value(self) -> float:
        return get_config_value(self.baseline, self.parameter)

    @property
    def baseline_index(self) -> int:
        return self.values.index(self.baseline_value)

    def config_for(self, value: float):
        """Baseline config with the swept field set to `value`."""
        if value == self.baseline_value:
            return self.baseline
        return set_config_value(self.baseline, self.parameter, value)


@dataclass(frozen=True)
class BandTriple:
    """(lo, hi) replicate band for each of the three measures."""

    d_shift: tuple
    v_spread: tuple
    e_covshape: tuple


@dataclass(frozen=True)
class SweepResult:
    """Measured curves plus provenance for one sweep.

    `triples` holds one MeasureTriple per grid value: replicate 1's when
    aggregate is "first", the field-wise replicate mean when "mean".
    `replicate_triples[r - 1]` is the full curve of replicate r.  `bands`
    maps each declared band value to its BandTriple.
    """

    spec: SweepSpec
    aggregate: str
    triples: tuple
    replicate_triples: tuple
    bands: dict
    base_seed: int
    wall_clock: float

    def band_at(self, value: float) -> BandTriple:
        return self.bands[float(value)]


def _mean_triple(column: Sequence, d: int) -> MeasureTriple:
    return MeasureTriple(
        d_shift=float(np.mean([t.d_shift for t in column])),
        v_spread=float(np.mean([t.v_spread for t in column])),
        e_covshape=float(np.mean([t.e_covshape for t in column])),
        d_components=d,
    )


def _annotate(exc: Exception, where: str) -> None:
    # Keep the original exception type; just extend its message so the
    # failing grid point is visible wherever the error surfaces.
    if exc.args and isinstance(exc.args[0], str):
        exc.args = (f"{exc.args[0]} [{where}]",) + exc.args[1:]
    else:
        exc.args = exc.args + (where,)


def run_sweep(
    data: Dataset,
    spec: SweepSpec,
    *,
    aggregate: str = "first",
    n_workers: int = 1,
    grid=None,
    karcher_eps1: float = 1e-6,
    karcher_step: float = 0.5,
    karcher_max_iter: int = 200,
) -> SweepResult:
    """Run all (value, replicate) tasks and assemble curves and bands.

    The task matrix is embarrassingly parallel; with n_workers > 1 it runs
    on a thread pool and results are assembled in grid order regardless of
    completion order.  Output is a pure function of (data, spec, aggregate)
    and the geometry settings; the worker count never changes it.
    """
    if aggregate not in ("first", "mean"):
        raise ValueError(f"aggregate must be 'first' or 'mean', got {aggregate!r}")
    if n_workers < 1:
        raise ValueError(f"n_workers must be >= 1, got {n_workers}")
    start = time.perf_counter()
    sampler = _MODELS[spec.model][1]
    base_seed = spec.mcmc.seed

    jobs = []
    for r in range(1, spec.replicates + 1):
        jobs.append((r, None))
        for idx in range(len(spec.values)):
            jobs.append((r, idx))

    def run_one(job) -> SampleSummary:
        r, idx = job
        if idx is None:
            label = "the baseline"
        else:
            label = f"{spec.parameter}={spec.values[idx]:g}"
        try:
            if idx is None:
                config = spec.baseline
                ctl = dataclasses.replace(
                    spec.mcmc, seed=derived_seed(base_seed, r)
                )
            else:
                config = spec.config_for(spec.values[idx])
                ctl = dataclasses.replace(
                    spec.mcmc, seed=derived_seed(base_seed, r, idx)
                )
            sample = sampler(data, config, ctl, grid=grid)
            return summarize_sample(
                sample,
                spec.d_components,
                eps1=karcher_eps1,
                eps2=karcher_step,
                max_iter=karcher_max_iter,
            )
        except Exception as exc:
            _annotate(exc, f"sweep task failed at {label}, replicate {r}")
            raise

    if n_workers == 1:
        summaries = {job: run_one(job) for job in jobs}
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            summaries = dict(zip(jobs, pool.map(run_one, jobs)))

    per_replicate = []
    for r in range(1, spec.replicates + 1):
        base_summary = summaries[(r, None)]
        row = []
        for idx, value in enumerate(spec.values):
            try:
                row.append(triple_from_summaries(base_summary, summaries[(r, idx)]))
            except Exception as exc:
                _annotate(
                    exc,
                    f"measures failed at {spec.parameter}={value:g}, replicate {r}",
                )
                raise
        per_replicate.append(tuple(row))

    if aggregate == "first":
        triples = per_replicate[0]
    else:
        triples = tuple(
            _mean_triple([row[idx] for row in per_replicate], spec.d_components)
            for idx in range(len(spec.values))
        )

    bands = {}
    for value in spec.band_values:
        idx = spec.values.index(value)
        column = [row[idx] for row in per_replicate]
        bands[value] = BandTriple(
            d_shift=replicate_band([t.d_shift for t in column]),
            v_spread=replicate_band([t.v_spread for t in column]),
            e_covshape=replicate_band([t.e_covshape for t in column]),
        )

    return SweepResult(
        spec=spec,
        aggregate=aggregate,
        triples=triples,
        replicate_triples=tuple(per_replicate),
        bands=bands,
        base_seed=base_seed,
        wall_clock=time.perf_counter() - start,
    )


def _geometric_grid(lo: float, hi: float, baseline: float) -> tuple:
    grid = np.geomspace(lo, hi, GRID_POINTS)
    snap = int(np.argmin(np.abs(np.log(grid) - math.log(baseline))))
    grid[snap] = baseline
    return tuple(float(v) for v in grid)


def _linear_grid(lo: float, hi: float, baseline: float) -> tuple:
    grid = np.linspace(lo, hi, GRID_POINTS)
    snap = int(np.argmin(np.abs(grid - baseline)))
    grid[snap] = baseline
    return tuple(float(v) for v in grid)


def _preset(model, baseline, parameter, values) -> SweepSpec:
    base_val = get_config_value(baseline, parameter)
    marks = tuple(dict.fromkeys((values[0], base_val, values[-1])))
    return SweepSpec(
        model=model,
        baseline=baseline,
        parameter=parameter,
        values=values,
        band_values=marks,
    )


def sweep_grid_presets(model: str) -> list:
    """Standard 15-point ladders for a model, bands at min/baseline/max.

    Scale-like positive parameters get geometric spacing, location-like
    ones linear spacing.  Every ladder contains the baseline value
    exactly (the nearest grid point is snapped onto it).
    """
    if model == "dp":
        dp = DpConfig()
        return [
            _preset(
                "dp", dp, "alpha", _geometric_grid(0.1, 15.0, dp.alpha)
            ),
        ]
    if model == "dpgmm":
        gm = DpgmmConfig()
        return [
            _preset("dpgmm", gm, "alpha", _geometric_grid(0.1, 15.0, gm.alpha)),
            _preset("dpgmm", gm, "m", _linear_grid(-8.0, 8.0, gm.m)),
            _preset("dpgmm", gm, "r", _geometric_grid(1.0 / 18.0, 6.0, gm.r)),
            _preset("dpgmm", gm, "nu", _linear_grid(1.0, 15.0, gm.nu)),
            _preset("dpgmm", gm, "s", _geometric_grid(0.1, 12.0, gm.s)),
        ]
    if model == "ccv":
        cc = CcvConfig()
        return [
            _preset("ccv", cc, "a0", _linear_grid(1.0, 20.0, cc.a0)),
            _preset("ccv", cc, "a1", _linear_grid(1.0, 20.0, cc.a1)),
            _preset("ccv", cc, "eta", _linear_grid(1.0, 20.0, cc.eta)),
            _preset("ccv", cc, "gamma", _geometric_grid(1.0, 20.0, cc.gamma)),
        ]
    if model == "dcv":
        dc = DcvConfig()
        return [
            _preset("dcv", dc, "a0", _linear_grid(1.0, 20.0, dc.a0)),
            _preset("dcv", dc, "a1", _linear_grid(1.0, 20.0, dc.a1)),
            _preset("dcv", dc, "eta", _linear_grid(1.0, 20.0, dc.eta)),
            _preset("dcv", dc, "gamma", _geometric_grid(1.0, 20.0, dc.gamma)),
            _preset("dcv", dc, "phi", _geometric_grid(1.5, 20.0, dc.phi)),
        ]
    raise UnknownModelError(
        f"unknown model tag {model!r}; expected one of " + ", ".join(MODEL_TAGS)
    )
