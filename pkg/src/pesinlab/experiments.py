"""Batch experiment runner: config validation, seeded deterministic sweeps,
CSV/JSON emission.

Config documents are single JSON objects:

    {
      "system": {"system": "perturbed_cat", "epsilon": 0.05},
      "experiment": "lyapunov",
      "seed": 12345,
      "output": "run1",            # optional file prefix
      "params": {"n": 1000}
    }

Unknown keys are rejected everywhere. CSV bodies contain no timestamps and
all floats are written with %.17g, so reruns with the same config and seed
are byte-identical regardless of the thread count: every parallel sweep is
reduced by task index and each task derives its own seed from (root seed,
index).
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import livshitz, manifolds, pesin, shadowing
from ._util import task_seed_sequence
from .errors import ConfigInvalid, PesinLabError
from .systems import MapSystem, available_systems, make_system

SCHEMA_VERSION = 1

EXPERIMENTS = (
    "lyapunov",
    "pesin-block",
    "shadow",
    "close",
    "census",
    "manifolds",
    "coverage",
    "livshitz",
)

# Required / optional numeric parameters per experiment. Values are
# (kind, predicate) with kind one of int, float, list, str, point.
_PARAM_SPECS: dict[str, dict[str, dict]] = {
    "lyapunov": {
        "required": {"n": ("int", lambda v: v >= 10)},
        "optional": {"x": ("point", None)},
    },
    "pesin-block": {
        "required": {
            "K": ("int", lambda v: v >= 1),
            "zeta": ("float", lambda v: v > 0),
            "k": ("int", lambda v: v >= 1),
            "count": ("int", lambda v: v >= 100),
        },
        "optional": {
            "burn_in": ("int", lambda v: v >= 0),
            "k_max": ("int", lambda v: v >= 1),
            "horizon": ("int", lambda v: v >= 1),
        },
    },
    "shadow": {
        "required": {
            "delta": ("list", lambda v: len(v) >= 1 and all(d > 0 for d in v)),
            "piece": ("int", lambda v: v >= 2),
            "pieces": ("int", lambda v: v >= 2),
        },
        "optional": {
            "tol": ("float", lambda v: v > 0),
            "theta_factor": ("float", lambda v: 0 < v < 1),
        },
    },
    "close": {
        "required": {
            "beta": ("float", lambda v: v > 0),
            "n_min": ("int", lambda v: v >= 2),
            "n_max": ("int", lambda v: v >= 2),
            "events": ("int", lambda v: v >= 1),
        },
        "optional": {
            "tol": ("float", lambda v: v > 0),
            "dev_floor": ("float", lambda v: v > 0),
        },
    },
    "census": {
        "required": {"max_period": ("int", lambda v: v >= 1)},
        "optional": {"grid_side": ("int", lambda v: v >= 2), "tol": ("float", lambda v: v > 0)},
    },
    "manifolds": {
        "required": {
            "kind": ("str", lambda v: v in ("stable", "unstable")),
            "target_length": ("float", lambda v: v > 0),
            "h": ("float", lambda v: v > 0),
            "n_max": ("int", lambda v: 0 <= v <= 60),
        },
        "optional": {"anchor": ("point", None), "anchor_period": ("int", lambda v: v >= 1)},
    },
    "coverage": {
        "required": {
            "target_length": ("float", lambda v: v > 0),
            "h": ("float", lambda v: v > 0),
            "grid_n": ("int", lambda v: v >= 1),
        },
        "optional": {"doublings": ("int", lambda v: v >= 0)},
    },
    "livshitz": {
        "required": {
            "observable": ("str", None),
            "N": ("int", lambda v: v >= 1),
            "radius_grid": ("list", lambda v: len(v) >= 3 and all(r > 0 for r in v)),
            "max_period": ("int", lambda v: v >= 1),
        },
        "optional": {"x": ("point", None)},
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: MapSystem
    experiment: str
    seed: int
    output: str
    params: dict
    raw: dict


@dataclass
class RunReport:
    config: dict
    passes: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    csv_files: list = field(default_factory=list)
    duration_seconds: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.passes.values())

    def to_json(self) -> str:
        doc = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "passed": self.passed,
            "passes": self.passes,
            "scalars": self.scalars,
            "csv_files": self.csv_files,
            "duration_seconds": self.duration_seconds,
            "error": self.error,
        }
        return json.dumps(doc, indent=2, sort_keys=True)


def _fail(msg: str) -> ConfigInvalid:
    return ConfigInvalid(msg)


def _check_value(name: str, kind: str, pred, value):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise _fail(f"parameter {name!r} must be an integer")
    elif kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _fail(f"parameter {name!r} must be a number")
        value = float(value)
    elif kind == "list":
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise _fail(f"parameter {name!r} must be a list of numbers")
        value = [float(v) for v in value]
    elif kind == "str":
        if not isinstance(value, str):
            raise _fail(f"parameter {name!r} must be a string")
    elif kind == "point":
        if (
            not isinstance(value, list)
            or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            raise _fail(f"parameter {name!r} must be a two-element point [x1, x2]")
        value = [float(v) for v in value]
    else:  # pragma: no cover
        raise AssertionError(kind)
    if pred is not None and not pred(value):
        raise _fail(f"parameter {name!r} value {value!r} out of range")
    return value


def validate_config(doc: dict) -> ExperimentConfig:
    """Validate a config document and construct the system it names."""
    if not isinstance(doc, dict):
        raise _fail("config must be a JSON object")
    allowed = {"system", "experiment", "seed", "output", "params"}
    unknown = set(doc) - allowed
    if unknown:
        raise _fail(f"unknown config keys: {sorted(unknown)}")
    for key in ("system", "experiment", "seed", "params"):
        if key not in doc:
            raise _fail(f"missing config key {key!r}")

    sys_spec = doc["system"]
    if not isinstance(sys_spec, dict) or "system" not in sys_spec:
        raise _fail('config "system" must be an object with a "system" name')
    sys_name = sys_spec["system"]
    sys_params = {k: v for k, v in sys_spec.items() if k != "system"}
    if sys_name not in available_systems():
        raise _fail(f"unknown system {sys_name!r}")
    unknown = set(sys_params) - set(available_systems()[sys_name])
    if unknown:
        raise _fail(f"unknown parameters for system {sys_name!r}: {sorted(unknown)}")
    try:
        system = make_system(sys_name, **sys_params)
    except ValueError as exc:
        raise _fail(str(exc)) from exc

    experiment = doc["experiment"]
    if experiment not in EXPERIMENTS:
        raise _fail(f"unknown experiment {experiment!r}; known: {list(EXPERIMENTS)}")

    seed = doc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise _fail("seed must be an integer in [0, 2^64)")

    output = doc.get("output", experiment)
    if not isinstance(output, str) or not output:
        raise _fail("output must be a non-empty string")

    raw_params = doc["params"]
    if not isinstance(raw_params, dict):
        raise _fail('config "params" must be an object')
    spec = _PARAM_SPECS[experiment]
    unknown = set(raw_params) - set(spec["required"]) - set(spec["optional"])
    if unknown:
        raise _fail(f"unknown parameters for {experiment!r}: {sorted(unknown)}")
    params = {}
    for name, (kind, pred) in spec["required"].items():
        if name not in raw_params:
            raise _fail(f"experiment {experiment!r} requires parameter {name!r}")
        params[name] = _check_value(name, kind, pred, raw_params[name])
    for name, (kind, pred) in spec["optional"].items():
        if name in raw_params:
            params[name] = _check_value(name, kind, pred, raw_params[name])

    if experiment == "close" and params["n_min"] > params["n_max"]:
        raise _fail("close experiment needs n_min <= n_max")
    if experiment == "pesin-block":
        k_max = params.get("k_max", max(params["k"], 8))
        horizon = params.get("horizon", max(k_max, 8))
        if params["k"] > k_max:
            raise _fail("pesin-block needs k <= k_max")
        if horizon < k_max:
            raise _fail("pesin-block needs horizon >= k_max")
    if experiment == "livshitz":
        names = livshitz.builtin_observables(system)
        if params["observable"] not in names:
            raise _fail(
                f"unknown observable {params['observable']!r}; known: {sorted(names)}"
            )

    return ExperimentConfig(
        system=system,
        experiment=experiment,
        seed=seed,
        output=output,
        params=params,
        raw=doc,
    )


# ---------------------------------------------------------------------------
# Deterministic parallel map
# ---------------------------------------------------------------------------


def run_indexed(fn, items, threads: int):
    """Map fn over items, reducing by index; the result is independent of the
    thread count because every task is pure and separately seeded."""
    if threads <= 1 or len(items) <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, i, item) for i, item in enumerate(items)]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# CSV helpers
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


class _CsvSink:
    """Collects CSV files, writing .partial files that are renamed into place
    only when the whole experiment succeeds."""

    def __init__(self, out_dir: str, prefix: str):
        self.out_dir = out_dir
        self.prefix = prefix
        self.partials: list[tuple[str, str]] = []

    def write(self, name: str, header: list[str], rows) -> str:
        final = os.path.join(self.out_dir, f"{self.prefix}_{name}.csv")
        partial = final + ".partial"
        os.makedirs(self.out_dir, exist_ok=True)
        with open(partial, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self.partials.append((partial, final))
        return final

    def commit(self) -> list[str]:
        outs = []
        for partial, final in self.partials:
            os.replace(partial, final)
            outs.append(final)
        return outs


# ---------------------------------------------------------------------------
# Experiment implementations
# ---------------------------------------------------------------------------


def _seed_point(system: MapSystem, seed: int, index: int = 0) -> np.ndarray:
    rng = np.random.default_rng(task_seed_sequence(seed, index))
    if system.domain == "torus":
        return rng.random(2)
    return getattr(system, "attractor_point")() + 1e-3 * (rng.random(2) - 0.5)


def _run_lyapunov(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    from . import cocycle

    x = np.asarray(cfg.params.get("x", _seed_point(cfg.system, cfg.seed)), dtype=float)
    n = cfg.params["n"]
    spec = cocycle.finite_time_exponents(cfg.system, x, n)
    product = cocycle.cocycle_product(cfg.system, x, n)
    sink.write(
        "exponents",
        ["rank", "exponent"],
        [(i, e) for i, e in enumerate(spec.exponents)],
    )
    # Finite-horizon volume identity: exponents sum to the mean log |det Df|.
    vol_gap = abs(float(np.sum(spec.exponents)) * n - product.log_abs_det())
    passes = {"volume_identity": vol_gap < 1e-6}
    if cfg.system.name == "cat":
        lam = cfg.system.log_expansion
        passes["cat_spectrum_analytic"] = bool(
            np.allclose(spec.exponents, [-lam, lam], atol=1e-9)
        )
    scalars = {
        "exponents": [float(e) for e in spec.exponents],
        "multiplicities": list(spec.multiplicities),
        "horizon": n,
        "volume_gap": vol_gap,
    }
    return scalars, passes


def _run_pesin_block(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    params = pesin.PesinParams(
        K=cfg.params["K"],
        zeta=cfg.params["zeta"],
        k_max=cfg.params.get("k_max", max(cfg.params["k"], 8)),
        horizon=cfg.params.get("horizon", max(cfg.params.get("k_max", 8), cfg.params["k"], 8)),
    )
    sampler = pesin.Sampler(
        count=cfg.params["count"],
        burn_in=cfg.params.get("burn_in", 0),
        seed=cfg.seed,
    )
    pts, escaped = pesin._draw_samples(cfg.system, sampler)
    k_arr, ma, mb, mc = pesin.classify_batch(cfg.system, pts, params)
    sink.write(
        "verdicts",
        ["sample", "x1", "x2", "k", "margin_a", "margin_b", "margin_c"],
        [
            (i, p[0], p[1], int(k), a, b, c)
            for i, (p, k, a, b, c) in enumerate(zip(pts, k_arr, ma, mb, mc))
        ],
    )
    k = cfg.params["k"]
    fractions = [
        float(np.mean((k_arr > 0) & (k_arr <= level)))
        for level in range(1, params.k_max + 1)
    ]
    fraction = fractions[k - 1] if k <= params.k_max else fractions[-1]
    passes = {
        "fraction_in_unit_interval": 0.0 <= fraction <= 1.0,
        "nesting_monotone": all(a <= b + 1e-15 for a, b in zip(fractions, fractions[1:])),
    }
    scalars = {
        "fraction": fraction,
        "fractions_by_k": fractions,
        "classified": int(np.sum((k_arr > 0) & (k_arr <= k))),
        "total": int(pts.shape[0]),
        "escaped": escaped,
    }
    return scalars, passes


def _run_shadow(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    deltas = cfg.params["delta"]
    piece = cfg.params["piece"]
    pieces = cfg.params["pieces"]
    tol = cfg.params.get("tol", 1e-12)
    theta_factor = cfg.params.get("theta_factor", 0.9)
    x0 = _seed_point(cfg.system, cfg.seed)

    def task(i, delta):
        po = shadowing.single_jump_pseudo_orbit(cfg.system, x0, piece, pieces, delta, tol=tol)
        res = shadowing.newton_shadow(cfg.system, po, tol=tol)
        return po, res

    results = run_indexed(task, deltas, threads)
    rows = []
    for (po, res), delta in zip(results, deltas):
        for i, devs in enumerate(res.deviations):
            n_i = po.segments[i][1]
            for j, d in enumerate(devs):
                rows.append((delta, i, j, min(j, n_i - j), d))
    sink.write("deviations", ["delta", "segment", "j", "separation", "deviation"], rows)
    lip = shadowing.fit_lipschitz(
        [(d, res.max_deviation) for (po, res), d in zip(results, deltas)]
    )
    iteration_counts = [res.newton_iterations for _, res in results]
    worst_margin = np.inf
    for (po, res), delta in zip(results, deltas):
        ver = shadowing.verify_exponential_shadowing(
            cfg.system,
            res,
            eta=2.0 * lip.constant * delta,
            theta=theta_factor * max(res.theta, 1e-9),
        )
        worst_margin = min(worst_margin, ver.worst_margin)
    passes = {
        "converged": all(res.converged for _, res in results),
        "lipschitz_r2": lip.r2 > 0.999,
        "exponential_bound": worst_margin > 0.0,
    }
    scalars = {
        "lipschitz_constant": lip.constant,
        "lipschitz_r2": lip.r2,
        "newton_iterations": iteration_counts,
        "worst_margin": float(worst_margin),
        "max_deviations": [res.max_deviation for _, res in results],
    }
    return scalars, passes


def _run_close(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    beta = cfg.params["beta"]
    tol = cfg.params.get("tol", 1e-12)
    dev_floor = cfg.params.get("dev_floor", 10.0 * tol)
    x0 = _seed_point(cfg.system, cfg.seed)
    events = shadowing.find_recurrences(
        cfg.system, x0, cfg.params["n_min"], cfg.params["n_max"], beta,
        max_events=cfg.params["events"],
    )

    def task(i, event):
        pt, n = event
        return shadowing.close_orbit(cfg.system, pt, n, tol=tol)

    closed = run_indexed(task, events, threads)
    rows = []
    samples = []
    for i, p in enumerate(closed):
        n = p.period
        for j, d in enumerate(p.closing_deviations):
            rows.append((i, n, min(j, n - j), d))
            # Deviations below the solver resolution are linear-algebra noise
            # and carry no rate information.
            if d > dev_floor:
                samples.append((min(j, n - j), d))
    sink.write("closing_deviations", ["event", "n", "separation", "deviation"], rows)
    fit = shadowing.fit_rates(samples)
    passes = {
        "enough_events": len(closed) >= cfg.params["events"],
        "positive_rate": fit.theta > 0.0,
        "all_hyperbolic": all(p.hyperbolic for p in closed),
    }
    scalars = {
        "events": len(closed),
        "theta_hat": fit.theta,
        "eta_hat": fit.eta,
        "r2": fit.r2,
        "samples": fit.samples,
    }
    return scalars, passes


def _census_grid(system: MapSystem, n: int) -> int:
    growth = np.exp(0.5 * n * min(system.derivative_bound, 1.1))
    return int(np.ceil(3.0 * growth)) + 4


def _run_census(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    max_period = cfg.params["max_period"]
    tol = cfg.params.get("tol", 1e-10)

    def task(i, n):
        side = cfg.params.get("grid_side", _census_grid(cfg.system, n))
        return shadowing.periodic_census(cfg.system, n, grid_side=side, tol=tol)

    per_n = run_indexed(task, list(range(1, max_period + 1)), threads)
    rows = []
    counts = {}
    for n, found in zip(range(1, max_period + 1), per_n):
        counts[str(n)] = len(found)
        for p in found:
            rows.append(
                (n, p.z[0], p.z[1], p.floquet_log_moduli[0], p.floquet_log_moduli[-1])
            )
    sink.write(
        "census", ["period", "x1", "x2", "floquet_low", "floquet_high"], rows
    )
    passes = {
        "residuals_below_tol": all(p.residual < tol for found in per_n for p in found),
    }
    if cfg.system.name == "cat":
        matrix = cfg.system.matrix
        power = np.eye(2)
        expected = {}
        for n in range(1, max_period + 1):
            power = power @ matrix
            expected[str(n)] = int(round(np.trace(power))) - 2
        passes["cat_counts_match_trace"] = counts == expected
    scalars = {"counts": counts, "count": len(rows)}
    return scalars, passes


def _default_anchor(system: MapSystem) -> tuple[np.ndarray, int]:
    if system.domain == "torus":
        return np.zeros(2), 1
    # Quadratic-map fixed point on the attractor side.
    a = system.parameters["a"]
    b = system.parameters["b"]
    x = (-(1.0 - b) + np.sqrt((1.0 - b) ** 2 + 4.0 * a)) / (2.0 * a)
    return np.array([x, b * x]), 1


def _anchor_from_config(cfg: ExperimentConfig) -> shadowing.PeriodicPoint:
    if "anchor" in cfg.params:
        anchor = np.asarray(cfg.params["anchor"], dtype=float)
        period = cfg.params.get("anchor_period", 1)
    else:
        anchor, period = _default_anchor(cfg.system)
    return shadowing.periodic_point_at(cfg.system, anchor, period, tol=1e-8)


def _run_manifolds(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    anchor = _anchor_from_config(cfg)
    patch = manifolds.grow_manifold(
        cfg.system, anchor, cfg.params["kind"], cfg.params["target_length"], cfg.params["h"]
    )
    ns, ratios = manifolds.contraction_profile(cfg.system, patch, cfg.params["n_max"])
    fit = manifolds.fit_contraction_bound(ns, ratios)
    sink.write("profile", ["n", "ratio"], list(zip(ns, ratios)))
    sink.write(
        "polyline",
        ["index", "x", "y"],
        [(i, p[0], p[1]) for i, p in enumerate(patch.polyline)],
    )
    passes = {
        "contraction_rate_positive": fit.zeta_bar > 0.0,
        "bound_covers_profile": bool(
            np.all(ratios[1:] <= fit.c_bar * np.exp(-fit.zeta_bar * ns[1:]) * (1 + 1e-12))
        ),
        "reached_target": patch.total_length >= cfg.params["target_length"]
        or patch.curvature_flag,
    }
    scalars = {
        "c_bar": fit.c_bar,
        "zeta_bar": fit.zeta_bar,
        "fit_r2": fit.r2,
        "total_length": patch.total_length,
        "generation": patch.generation,
        "vertices": int(patch.polyline.shape[0]),
        "curvature_flag": bool(patch.curvature_flag),
    }
    return scalars, passes


def _run_coverage(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    anchor = _anchor_from_config(cfg)
    target = cfg.params["target_length"]
    doublings = cfg.params.get("doublings", 4)
    lengths = [target / (2**j) for j in range(doublings, -1, -1)]
    grid_n = cfg.params["grid_n"]

    def task(i, length):
        patch = manifolds.grow_manifold(
            cfg.system, anchor, "unstable", length, cfg.params["h"]
        )
        return length, manifolds.closure_coverage(patch, grid_n)

    rows = run_indexed(task, lengths, threads)
    sink.write("coverage", ["length", "coverage"], rows)
    covs = [c for _, c in rows]
    passes = {
        "monotone_in_length": all(a <= b + 1e-15 for a, b in zip(covs, covs[1:])),
        "within_unit_interval": all(0.0 <= c <= 1.0 for c in covs),
    }
    scalars = {"coverage": covs[-1], "lengths": [l for l, _ in rows], "coverages": covs}
    return scalars, passes


def _run_livshitz(cfg: ExperimentConfig, sink: _CsvSink, threads: int):
    phi = livshitz.builtin_observables(cfg.system)[cfg.params["observable"]]
    x0 = np.asarray(cfg.params.get("x", _seed_point(cfg.system, cfg.seed)), dtype=float)
    scan = livshitz.obstruction_scan(cfg.system, phi, cfg.params["max_period"])
    sink.write(
        "obstructions",
        ["period", "x1", "x2", "orbit_sum"],
        [(p.period, p.z[0], p.z[1], s) for p, s in scan.items],
    )
    table = livshitz.reconstruct_transfer(cfg.system, phi, x0, cfg.params["N"])
    sink.write(
        "transfer",
        ["n", "x1", "x2", "psi"],
        [
            (n, table.points[n][0], table.points[n][1], table.psi[n])
            for n in range(len(table))
        ],
    )
    radii = sorted(cfg.params["radius_grid"], reverse=True)
    residuals = []
    for r in radii:
        residuals.append((r, livshitz.coboundary_residual(cfg.system, phi, table, r)))
    sink.write("residuals", ["radius", "residual"], residuals)
    is_coboundary = phi.name.startswith("cb_")
    passes = {"scan_complete": scan.complete}
    if is_coboundary:
        passes["obstructions_vanish"] = scan.all_zero()
        if phi.holder is not None:
            c, kappa = phi.holder
            passes["residual_bounded_by_modulus"] = all(
                res <= c * r**kappa for r, res in residuals
            )
    else:
        passes["obstruction_found"] = not scan.all_zero()
    scalars = {
        "worst_obstruction_per_period": scan.worst(),
        "orbits_scanned": len(scan.items),
        "residuals": {f"{r:g}": res for r, res in residuals},
    }
    return scalars, passes


_RUNNERS = {
    "lyapunov": _run_lyapunov,
    "pesin-block": _run_pesin_block,
    "shadow": _run_shadow,
    "close": _run_close,
    "census": _run_census,
    "manifolds": _run_manifolds,
    "coverage": _run_coverage,
    "livshitz": _run_livshitz,
}


def run(config: ExperimentConfig, out_dir: str = ".", threads: int = 1) -> RunReport:
    """Execute a validated experiment; always returns a report.

    CSV files are committed (renamed from .partial) only on success, so a
    failing run never leaves a bare partial CSV behind.
    """
    report = RunReport(config=config.raw)
    sink = _CsvSink(out_dir, config.output)
    start = time.perf_counter()
    try:
        scalars, passes = _RUNNERS[config.experiment](config, sink, threads)
        report.scalars = scalars
        report.passes = passes
        report.csv_files = sink.commit()
    except (PesinLabError, ValueError) as exc:
        report.error = f"{type(exc).__name__}: {exc}"
    report.duration_seconds = time.perf_counter() - start
    return report


def write_report(report: RunReport, out_dir: str, prefix: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{prefix}_report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    return path
