"""Declarative experiment runner with seeded, file-reproducible output.

An experiment is a JSON config naming a space, a dictionary, a signal model,
an algorithm and a budget; the runner sweeps trials x parameter values and
writes result.csv plus summary.json.  Every random draw flows from the config
seed through a per-(parameter, trial) substream, so reruns reproduce the
files byte for byte, apart from the wall-time fields.
"""
from __future__ import annotations

import ast
import csv
import json
import math
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import analyze_dictionary, ell1_incoherence_V, ell1_incoherence_V_signal
from .bilinear import Matrix2D, greedy_rank_one, load_csv, theta_M
from .dictionary import Dictionary, build_from_descriptor
from .errors import ConfigurationError, SolverError
from .greedy import WeaknessPolicy, sparse_decay_bound, tga, wcga, womp
from .oracle import _RESIDUAL_ZERO, _SIGMA_ZERO, OracleConfig, sigma_m_exact
from .space import GridSpace, norm, smoothness_constants

_KINDS = ("recovery", "lebesgue", "rate_bound", "bilinear", "analyze", "decay_demo")
_RECOVERY_TOL = 1e-9


# ---------------------------------------------------------------- budgets

_BIN_OPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.FloorDiv: lambda a, b: a // b,
}
_CALLS = {"ceil": math.ceil, "log": math.log}


def _eval_budget_node(node, m):
    if isinstance(node, ast.Expression):
        return _eval_budget_node(node.body, m)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.Name) and node.id == "m":
        return m
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        val = _eval_budget_node(node.operand, m)
        return -val if isinstance(node.op, ast.USub) else val
    if isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        left = _eval_budget_node(node.left, m)
        right = _eval_budget_node(node.right, m)
        return _BIN_OPS[type(node.op)](left, right)
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _CALLS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _CALLS[node.func.id](_eval_budget_node(node.args[0], m))
    raise ConfigurationError(f"unsupported construct in budget expression: {ast.dump(node)}")


def _validate_budget_node(node):
    if isinstance(node, ast.Expression):
        _validate_budget_node(node.body)
    elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        pass
    elif isinstance(node, ast.Name) and node.id == "m":
        pass
    elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        _validate_budget_node(node.operand)
    elif isinstance(node, ast.BinOp) and type(node.op) in _BIN_OPS:
        _validate_budget_node(node.left)
        _validate_budget_node(node.right)
    elif (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _CALLS
        and len(node.args) == 1
        and not node.keywords
    ):
        _validate_budget_node(node.args[0])
    else:
        raise ConfigurationError(
            f"unsupported construct in budget expression: {ast.dump(node)}"
        )


def compile_budget(expr: str):
    """Turn a budget expression over m into a callable m -> iteration count.

    The language is integer arithmetic over the single name m with + - * /
    // and the functions ceil and log; "4m" style juxtaposition is accepted.
    The result is ceiled to an integer and must come out >= 1.
    """
    if not isinstance(expr, str) or not expr.strip():
        raise ConfigurationError(f"budget must be a nonempty string, got {expr!r}")
    text = re.sub(r"(\d)\s*([a-zA-Z(])", r"\1*\2", expr)
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as err:
        raise ConfigurationError(f"budget expression {expr!r} does not parse: {err}") from None

    def budget(m: int) -> int:
        try:
            value = _eval_budget_node(tree, int(m))
        except (ValueError, ZeroDivisionError) as err:
            raise ConfigurationError(f"budget {expr!r} failed at m={m}: {err}") from None
        count = int(math.ceil(value - 1e-9))
        if count < 1:
            raise ConfigurationError(f"budget {expr!r} evaluates to {value} at m={m}; need >= 1")
        return count

    _validate_budget_node(tree)
    return budget


# ---------------------------------------------------------------- config

@dataclass
class ExperimentConfig:
    """Parsed experiment description; echoed verbatim into every result."""

    kind: str = None
    seed: int = None
    trials: int = 1
    space: dict = field(default_factory=dict)
    dictionary: dict = field(default_factory=dict)
    signal: dict = field(default_factory=dict)
    algorithm: str = "wcga"
    policy: dict = field(default_factory=dict)
    budget: str = "m"
    m_values: list = field(default_factory=list)
    analysis: dict = field(default_factory=dict)
    bilinear: dict = field(default_factory=dict)
    decay: dict = field(default_factory=dict)
    out: str = None

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigurationError(f"config must be a JSON object, got {type(data).__name__}")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        if cfg.kind is not None and cfg.kind not in _KINDS:
            raise ConfigurationError(f"kind must be one of {_KINDS}, got {cfg.kind!r}")
        if cfg.seed is None:
            raise ConfigurationError("config must carry an explicit seed")
        cfg.seed = int(cfg.seed)
        if cfg.seed < 0:
            raise ConfigurationError(f"seed must be nonnegative, got {cfg.seed}")
        cfg.trials = int(cfg.trials)
        if cfg.trials < 1:
            raise ConfigurationError(f"trials must be >= 1, got {cfg.trials}")
        compile_budget(cfg.budget)
        cfg.m_values = [int(m) for m in cfg.m_values]
        if any(m < 0 for m in cfg.m_values):
            raise ConfigurationError(f"m_values must be nonnegative, got {cfg.m_values}")
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ConfigurationError(f"config {path} is not valid JSON: {err}") from None
    return ExperimentConfig.from_dict(data)


def _build_space(desc: dict) -> GridSpace:
    if not desc:
        raise ConfigurationError("config needs a space descriptor")
    p = desc.get("p")
    if p is None:
        raise ConfigurationError("space descriptor needs p")
    if "dim" in desc:
        return GridSpace.uniform(int(desc["dim"]), float(p))
    if "grid" in desc:
        d = int(desc.get("d", 1))
        return GridSpace.uniform(int(desc["grid"]) ** d, float(p))
    raise ConfigurationError("space descriptor needs dim, or grid (+ optional d)")


def _build_dictionary(desc: dict, space: GridSpace) -> Dictionary:
    if not desc:
        raise ConfigurationError("config needs a dictionary descriptor")
    if "params" not in desc:
        params = {k: v for k, v in desc.items() if k not in ("kind", "seed", "csv")}
        desc = {"kind": desc.get("kind"), "params": params, "seed": desc.get("seed", 0)}
        if "csv" in params:
            desc["csv"] = params.pop("csv")
    return build_from_descriptor(desc, space=space)


def _draw_signal(space: GridSpace, dictionary: Dictionary, signal: dict, rng):
    """Planted signal per the config's model; returns (f0, planted or None).

    uniform_gap: K-sparse with coefficients uniform on +-[0.1, 1] (bounded
    away from zero so support recovery is well posed), plus optional noise
    of exact weighted norm eps.  dense: a normalized Gaussian sample.
    """
    law = signal.get("law", "uniform_gap")
    if law == "dense":
        f0 = rng.standard_normal(space.dim)
        return f0 / norm(space, f0), None
    if law != "uniform_gap":
        raise ConfigurationError(f"unknown signal law {law!r}")
    K = int(signal.get("K", 1))
    if not 1 <= K <= dictionary.count:
        raise ConfigurationError(f"signal K={K} outside 1..{dictionary.count}")
    support = np.sort(rng.choice(dictionary.count, size=K, replace=False))
    x = rng.uniform(0.1, 1.0, size=K) * rng.choice([-1.0, 1.0], size=K)
    f0 = dictionary.elements[:, support] @ x
    eps = float(signal.get("noise", 0.0))
    if eps < 0:
        raise ConfigurationError(f"noise must be nonnegative, got {eps}")
    if eps > 0.0:
        g = rng.standard_normal(space.dim)
        f0 = f0 + eps * g / norm(space, g)
    return f0, (support, x)


def _rng_for(seed: int, param_idx: int, trial_idx: int):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(param_idx, trial_idx))
    )


def _run_algorithm(name: str, f0, dictionary: Dictionary, policy: WeaknessPolicy, budget: int):
    if name == "womp":
        return womp(f0, dictionary, policy, max_m=budget)
    if name == "wcga":
        return wcga(f0, dictionary, policy, max_m=budget)
    if name == "tga":
        return tga(f0, dictionary, budget)
    raise ConfigurationError(f"unknown algorithm {name!r}")


def _policy_from(cfg: ExperimentConfig) -> WeaknessPolicy:
    return WeaknessPolicy(
        t=float(cfg.policy.get("t", 1.0)),
        mode=cfg.policy.get("mode", "strict_max"),
    )


# ---------------------------------------------------------------- results

def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isnan(val):
            return "nan"
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        return val
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@dataclass
class ExperimentResult:
    """Rows plus aggregates from one experiment run."""

    kind: str
    columns: list
    rows: list
    summary: dict
    config: dict
    violations: list = field(default_factory=list)

    def save(self, out_dir) -> dict:
        """Write result.csv and summary.json under out_dir; returns the paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "result.csv"
        with open(csv_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([_cell(v) for v in row])
        summary_path = out / "summary.json"
        payload = {
            "kind": self.kind,
            "version": __version__,
            "rows": len(self.rows),
            "summary": _json_safe(self.summary),
            "violations": list(self.violations),
            "config": _json_safe(self.config),
            "wall_time_s": self.summary.get("wall_time_s"),
        }
        with open(summary_path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return {"result": str(csv_path), "summary": str(summary_path)}


def _run_tasks(task, keys, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(task, keys))
    else:
        outputs = [task(key) for key in keys]
    return dict(zip(keys, outputs))


def _median(values):
    finite = [v for v in values if math.isfinite(v)]
    return statistics.median(finite) if finite else math.nan


# ---------------------------------------------------------------- runners

def run_recovery(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Planted-sparse recovery sweep; recovered means the residual vanished
    and the selected set covers the planted support."""
    t_start = time.perf_counter()
    space = _build_space(cfg.space)
    dictionary = _build_dictionary(cfg.dictionary, space)
    policy = _policy_from(cfg)
    budget = compile_budget(cfg.budget)
    if float(cfg.signal.get("noise", 0.0)) != 0.0:
        raise ConfigurationError("recovery experiments require noise = 0")
    K_raw = cfg.signal.get("K", 1)
    K_list = [int(k) for k in (K_raw if isinstance(K_raw, list) else [K_raw])]

    def task(key):
        trial, pi = key
        K = K_list[pi]
        rng = _rng_for(cfg.seed, pi, trial)
        signal = dict(cfg.signal, K=K, law="uniform_gap")
        f0, planted = _draw_signal(space, dictionary, signal, rng)
        t0 = time.perf_counter()
        try:
            trace = _run_algorithm(cfg.algorithm, f0, dictionary, policy, budget(K))
        except SolverError as err:
            wall = time.perf_counter() - t0
            return [cfg.seed, K, None, math.nan, 0.0, math.inf, False, wall, str(err)], []
        wall = time.perf_counter() - t0
        res0 = trace.residual_norms[0]
        residual = trace.residual_norms[-1]
        recovered = residual <= _RECOVERY_TOL * res0 and set(planted[0]).issubset(trace.selected)
        ratio = 1.0 if recovered else math.inf
        row = [cfg.seed, K, trace.iterations, residual, 0.0, ratio, recovered, wall, ""]
        return row, trace.check()

    keys = [(t, pi) for t in range(cfg.trials) for pi in range(len(K_list))]
    outputs = _run_tasks(task, keys, threads)
    rows = [outputs[k][0] for k in keys]
    violations = [v for k in keys for v in outputs[k][1]]
    ratios = [row[5] for row in rows]
    flags = [row[6] for row in rows]
    summary = {
        "success_rate": sum(bool(f) for f in flags) / len(flags),
        "per_param": {
            str(K): sum(bool(r[6]) for r in rows if r[1] == K) / cfg.trials for K in K_list
        },
        "max_ratio": max(ratios),
        "median_ratio": _median(ratios),
        "wall_time_s": time.perf_counter() - t_start,
    }
    columns = [
        "seed", "K", "iterations_used", "residual_norm",
        "sigma_m", "lebesgue_ratio", "recovered", "wall_time", "error",
    ]
    return ExperimentResult("recovery", columns, rows, summary, cfg.to_dict(), violations)


def run_lebesgue(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Residual over exact sigma_m at a configured iteration budget."""
    t_start = time.perf_counter()
    space = _build_space(cfg.space)
    dictionary = _build_dictionary(cfg.dictionary, space)
    policy = _policy_from(cfg)
    budget = compile_budget(cfg.budget)
    if not cfg.m_values:
        raise ConfigurationError("lebesgue experiments need m_values")
    oracle_cfg = OracleConfig()
    for m in cfg.m_values:
        k = min(m, dictionary.count)
        if k > 0 and math.comb(dictionary.count, k) > oracle_cfg.cap:
            raise ConfigurationError(
                f"sigma_{m} enumeration over {math.comb(dictionary.count, k)} supports "
                f"exceeds the oracle cap {oracle_cfg.cap}; shrink the dictionary or m"
            )

    def task(key):
        trial, pi = key
        m = cfg.m_values[pi]
        rng = _rng_for(cfg.seed, pi, trial)
        signal = dict(cfg.signal) if cfg.signal else {"law": "dense"}
        f0, planted = _draw_signal(space, dictionary, signal, rng)
        t0 = time.perf_counter()
        try:
            trace = _run_algorithm(cfg.algorithm, f0, dictionary, policy, budget(m))
        except SolverError as err:
            wall = time.perf_counter() - t0
            return [cfg.seed, m, None, math.nan, math.nan, math.nan, False, wall, str(err)], []
        sigma, _ = sigma_m_exact(f0, dictionary, m, oracle_cfg)
        wall = time.perf_counter() - t0
        res0 = trace.residual_norms[0]
        residual = trace.residual_norms[-1]
        if sigma <= _SIGMA_ZERO * res0:
            ratio = 1.0 if residual <= _RESIDUAL_ZERO * res0 else math.inf
        else:
            ratio = residual / sigma
        recovered = residual <= _RECOVERY_TOL * res0 and (
            planted is None or set(planted[0]).issubset(trace.selected)
        )
        row = [cfg.seed, m, trace.iterations, residual, sigma, ratio, recovered, wall, ""]
        return row, trace.check()

    keys = [(t, pi) for t in range(cfg.trials) for pi in range(len(cfg.m_values))]
    outputs = _run_tasks(task, keys, threads)
    rows = [outputs[k][0] for k in keys]
    violations = [v for k in keys for v in outputs[k][1]]
    ratios = [row[5] for row in rows if not math.isnan(row[5])]
    summary = {
        "max_ratio": max(ratios) if ratios else math.nan,
        "median_ratio": _median(ratios),
        "n_infinite": sum(math.isinf(r) for r in ratios),
        "per_m": {
            str(m): _median([r[5] for r in rows if r[1] == m and not math.isnan(r[5])])
            for m in cfg.m_values
        },
        "wall_time_s": time.perf_counter() - t_start,
    }
    columns = [
        "seed", "m", "iterations_used", "residual_norm",
        "sigma_m", "lebesgue_ratio", "recovered", "wall_time", "error",
    ]
    return ExperimentResult("lebesgue", columns, rows, summary, cfg.to_dict(), violations)


def run_rate_bound(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Check the exponential decay bound row by row against measured residuals.

    The incoherence constant is exact: enumerated over the dictionary when it
    is small, otherwise restricted to the planted-plus-selected universe of
    each run (mode "signal"), which is the set of supports the decay argument
    actually touches.
    """
    t_start = time.perf_counter()
    space = _build_space(cfg.space)
    dictionary = _build_dictionary(cfg.dictionary, space)
    policy = _policy_from(cfg)
    if not cfg.m_values:
        raise ConfigurationError("rate_bound experiments need m_values")
    if cfg.signal.get("law", "uniform_gap") != "uniform_gap":
        raise ConfigurationError("rate_bound experiments need a planted sparse signal")
    K = int(cfg.signal.get("K", 1))
    eps = float(cfg.signal.get("noise", 0.0))
    r = float(cfg.analysis.get("r", 0.5))
    mode = cfg.analysis.get("mode", "auto")
    if mode == "auto":
        mode = "dictionary" if dictionary.count <= 16 else "signal"
    if mode not in ("dictionary", "signal"):
        raise ConfigurationError(f"analysis mode must be dictionary/signal/auto, got {mode!r}")
    sc = smoothness_constants(space.p)
    if mode == "dictionary":
        m_values = [m for m in cfg.m_values if K + m <= dictionary.count]
        V_dict, method = ell1_incoherence_V(dictionary, K, dictionary.count, r)
        if method != "exact":
            raise ConfigurationError("dictionary-mode rate_bound needs the exact enumeration")
    else:
        m_values = list(cfg.m_values)
        V_dict = None
    if not m_values:
        raise ConfigurationError(f"no m in {cfg.m_values} satisfies K + m <= {dictionary.count}")
    max_m = max(m_values)

    def task(trial):
        rng = _rng_for(cfg.seed, 0, trial)
        f0, planted = _draw_signal(space, dictionary, cfg.signal, rng)
        t0 = time.perf_counter()
        trace = _run_algorithm(cfg.algorithm, f0, dictionary, policy, max_m)
        if V_dict is not None:
            V = V_dict
        else:
            V, _ = ell1_incoherence_V_signal(
                dictionary, planted[0], planted[1], extra=trace.selected, r=r
            )
        wall = time.perf_counter() - t0
        res0 = trace.residual_norms[0]
        out = []
        bad = list(trace.check())
        for m in m_values:
            measured = trace.residual_norms[min(m, trace.iterations)]
            bound = sparse_decay_bound(res0, 0, m, K, r, sc, V, policy.t, eps)
            violated = measured > bound + 1e-8
            if violated:
                bad.append(f"trial {trial} m={m}: residual {measured!r} above bound {bound!r}")
            out.append([cfg.seed, m, trace.iterations, measured, bound, V, violated, wall, ""])
        return out, bad

    outputs = _run_tasks(task, list(range(cfg.trials)), threads)
    rows = [row for t in range(cfg.trials) for row in outputs[t][0]]
    violations = [v for t in range(cfg.trials) for v in outputs[t][1]]
    margins = [row[4] - row[3] for row in rows if math.isfinite(row[4])]
    summary = {
        "n_violations": sum(bool(r[6]) for r in rows),
        "min_margin": min(margins) if margins else math.nan,
        "V_mode": mode,
        "wall_time_s": time.perf_counter() - t_start,
    }
    columns = [
        "seed", "m", "iterations_used", "residual_norm",
        "bound", "V", "violation", "wall_time", "error",
    ]
    return ExperimentResult("rate_bound", columns, rows, summary, cfg.to_dict(), violations)


def run_decay_demo(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Qualitative residual-decay slope on targets with prescribed coefficient
    decay; reports the fitted log-log slope, asserts nothing."""
    t_start = time.perf_counter()
    space = _build_space(cfg.space)
    dictionary = _build_dictionary(cfg.dictionary, space)
    policy = _policy_from(cfg)
    budget = compile_budget(cfg.budget)
    if not cfg.m_values:
        raise ConfigurationError("decay_demo experiments need m_values")
    decay_r = float(cfg.decay.get("r", 1.0))
    scale = float(cfg.decay.get("scale", 1.0))
    max_iters = max(budget(m) for m in cfg.m_values)

    def task(trial):
        rng = _rng_for(cfg.seed, 0, trial)
        signs = rng.choice([-1.0, 1.0], size=dictionary.count)
        coeff = scale * signs * (1.0 + np.arange(dictionary.count)) ** (-(decay_r + 0.5))
        f0 = dictionary.elements @ coeff
        t0 = time.perf_counter()
        if norm(space, f0) == 0.0:
            wall = time.perf_counter() - t0
            out = [[cfg.seed, m, 0, 0.0, wall, ""] for m in cfg.m_values]
            return out, [], math.nan
        trace = _run_algorithm(cfg.algorithm, f0, dictionary, policy, max_iters)
        wall = time.perf_counter() - t0
        xs, ys, out = [], [], []
        for m in cfg.m_values:
            it = min(budget(m), trace.iterations)
            residual = trace.residual_norms[it]
            out.append([cfg.seed, m, it, residual, wall, ""])
            if residual > 0.0 and m > 0:
                xs.append(math.log(m))
                ys.append(math.log(residual))
        if len(set(xs)) >= 2:
            slope = float(np.polyfit(xs, ys, 1)[0])
        else:
            slope = math.nan
        return out, trace.check(), slope

    outputs = _run_tasks(task, list(range(cfg.trials)), threads)
    rows = [row for t in range(cfg.trials) for row in outputs[t][0]]
    violations = [v for t in range(cfg.trials) for v in outputs[t][1]]
    slopes = [outputs[t][2] for t in range(cfg.trials)]
    finite = [s for s in slopes if not math.isnan(s)]
    summary = {
        "slopes": slopes,
        "median_slope": statistics.median(finite) if finite else math.nan,
        "wall_time_s": time.perf_counter() - t_start,
    }
    columns = ["seed", "m", "iterations_used", "residual_norm", "wall_time", "error"]
    return ExperimentResult("decay_demo", columns, rows, summary, cfg.to_dict(), violations)


def run_bilinear(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Rank-one deflation audited against the exact truncation error."""
    t_start = time.perf_counter()
    bl = cfg.bilinear
    M = int(bl.get("M", 1))
    tol = float(bl.get("tol", 1e-10))
    csv_path = bl.get("csv")
    if csv_path is None and not ("rows" in bl and "cols" in bl):
        raise ConfigurationError("bilinear config needs rows and cols, or a csv path")

    def task(trial):
        rng = _rng_for(cfg.seed, 0, trial)
        if csv_path is not None:
            matrix = load_csv(csv_path)
        else:
            matrix = Matrix2D(rng.standard_normal((int(bl["rows"]), int(bl["cols"]))))
        t0 = time.perf_counter()
        try:
            _, norms = greedy_rank_one(matrix, M, tol)
        except SolverError as err:
            wall = time.perf_counter() - t0
            return [[cfg.seed, 0, math.nan, math.nan, math.nan, False, wall, str(err)]], []
        wall = time.perf_counter() - t0
        out, bad = [], []
        for k, residual in enumerate(norms):
            theta = theta_M(matrix, k)
            deviation = abs(residual - theta)
            violated = deviation > 1e-8
            if violated:
                bad.append(f"trial {trial} step {k}: deflation residual off by {deviation!r}")
            out.append([cfg.seed, k, residual, theta, deviation, violated, wall, ""])
        return out, bad

    outputs = _run_tasks(task, list(range(cfg.trials)), threads)
    rows = [row for t in range(cfg.trials) for row in outputs[t][0]]
    violations = [v for t in range(cfg.trials) for v in outputs[t][1]]
    deviations = [row[4] for row in rows if not math.isnan(row[4])]
    summary = {
        "max_deviation": max(deviations) if deviations else math.nan,
        "n_violations": sum(bool(r[5]) for r in rows),
        "wall_time_s": time.perf_counter() - t_start,
    }
    columns = ["seed", "step", "residual_norm", "theta", "deviation", "violation", "wall_time", "error"]
    return ExperimentResult("bilinear", columns, rows, summary, cfg.to_dict(), violations)


def run_analyze(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Dictionary constant report as rows plus the full JSON summary."""
    t_start = time.perf_counter()
    space = _build_space(cfg.space)
    dictionary = _build_dictionary(cfg.dictionary, space)
    a = cfg.analysis
    if "K" not in a or "D" not in a:
        raise ConfigurationError("analyze config needs analysis.K and analysis.D")
    report = analyze_dictionary(
        dictionary,
        K=int(a["K"]),
        D=int(a["D"]),
        r=float(a.get("r", 0.5)),
        rip_sizes=a.get("rip_sizes"),
        cap=int(a.get("cap", 200_000)),
        seed=cfg.seed,
    )
    rows = [[cfg.seed, "coherence", "", report.coherence, "exact"]]
    for s, (val, method) in sorted(report.rip.items()):
        rows.append([cfg.seed, "rip_delta", str(s), val, method])
    for key, (val, method) in sorted(report.unconditionality.items()):
        rows.append([cfg.seed, "unconditionality_U", ",".join(map(str, key)), val, method])
    for key, (val, method) in sorted(report.nikolskii.items()):
        rows.append([cfg.seed, "nikolskii_C1", ",".join(map(str, key)), val, method])
    for key, (val, method) in sorted(report.ell1_incoherence.items()):
        rows.append([cfg.seed, "ell1_incoherence_V", ",".join(map(str, key)), val, method])
    violations = report.check()
    summary = dict(report.to_json_dict())
    summary["wall_time_s"] = time.perf_counter() - t_start
    columns = ["seed", "constant", "key", "value", "method"]
    return ExperimentResult("analyze", columns, rows, summary, cfg.to_dict(), violations)


_RUNNERS = {
    "recovery": run_recovery,
    "lebesgue": run_lebesgue,
    "rate_bound": run_rate_bound,
    "bilinear": run_bilinear,
    "analyze": run_analyze,
    "decay_demo": run_decay_demo,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Dispatch a parsed config to its runner."""
    if cfg.kind not in _RUNNERS:
        raise ConfigurationError(f"config kind must be one of {_KINDS}, got {cfg.kind!r}")
    if threads < 1:
        raise ConfigurationError(f"threads must be >= 1, got {threads}")
    return _RUNNERS[cfg.kind](cfg, threads=threads)
