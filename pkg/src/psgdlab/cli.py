"""Experiment orchestration: config files, subcommands, CSV/JSON output.

Subcommands: ``run`` (PSGD grid with estimate and bound columns),
``scaling`` (log-log slope tables), ``counterexample`` (dimension
dependence experiments), ``verify`` (property suites, exit code 2 on
failure) and ``bounds`` (print-only).  Every run is fully determined by
the config plus CLI overrides; reruns are byte-identical.

Exit codes: 0 success, 1 usage/config error, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bounds_mod
from . import estimators as est
from .geometry import Ball, Box, check_projection_lemma, gaussian_noise_sampler
from .losses import (
    CounterexampleLoss,
    Dataset,
    LossModel,
    OneSidedQuadraticLoss,
    PerturbedCounterexampleLoss,
    QuadraticLoss,
    detect_event_I,
    estimate_sigma_star,
    sample_labeled_dataset,
    sample_rademacher_dataset,
)
from .numerics import RngStream
from .optimizer import (
    GaussianNoise,
    MinibatchNoise,
    NoNoise,
    PerturbationSpec,
    StepSchedule,
    run_perturbed_psgd,
    run_psgd,
)


class CliUsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _aslist(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


@dataclass
class ExperimentConfig:
    """Everything a subcommand needs; JSON (de)serializable, flat keys."""

    loss: str = "one_sided_quadratic"
    margin: float = 1.0
    eps: float = 1e-3
    mu: float = 1.0
    flip_prob: float = 0.2
    n: list = field(default_factory=lambda: [100])
    d: list = field(default_factory=lambda: [5])
    t: list = field(default_factory=lambda: [1000])
    schedule: str = "inverse_sqrt:1.0"
    noise: str = "none"
    trials: int = 50
    seed: int = 0
    radius: float = 1.0
    constant_c: float = 1.0
    constant_C: float = 1.0
    sigma_star: float = 0.0
    eps_grid: list = field(default_factory=lambda: [1e-1, 1e-2, 1e-3, 1e-4])
    solver_steps: int = 100000
    out: str | None = None
    format: str = "csv"

    def __post_init__(self):
        self.n = [int(x) for x in _aslist(self.n)]
        self.d = [int(x) for x in _aslist(self.d)]
        self.t = [int(x) for x in _aslist(self.t)]
        self.eps_grid = [float(x) for x in _aslist(self.eps_grid)]
        if self.format not in ("csv", "json"):
            raise CliUsageError(f"unknown output format {self.format!r}")

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        obj = json.loads(text)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - names
        if unknown:
            raise CliUsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_json(fh.read())
        except OSError as exc:
            raise CliUsageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliUsageError(f"config {path} is not valid JSON: {exc}") from exc


def build_loss(cfg: ExperimentConfig) -> LossModel:
    if cfg.loss == "one_sided_quadratic":
        return OneSidedQuadraticLoss(margin=cfg.margin, gradient_bound_B=None)
    if cfg.loss == "counterexample":
        return CounterexampleLoss()
    if cfg.loss == "counterexample_perturbed":
        return PerturbedCounterexampleLoss(eps=cfg.eps)
    if cfg.loss == "quadratic":
        return QuadraticLoss(mu=cfg.mu)
    raise CliUsageError(f"unknown loss family {cfg.loss!r}")


def build_sampler(cfg: ExperimentConfig, d: int):
    if cfg.loss == "one_sided_quadratic":
        return lambda n, gen: sample_labeled_dataset(n, d, gen,
                                                     flip_prob=cfg.flip_prob)
    return lambda n, gen: sample_rademacher_dataset(n, d, gen)


def build_schedule(cfg: ExperimentConfig, L: float) -> StepSchedule:
    parts = cfg.schedule.split(":")
    kind = parts[0]
    try:
        c = float(parts[1]) if len(parts) > 1 else 1.0
        cap = float(parts[2]) if len(parts) > 2 else min(c, 1.0 / L)
    except ValueError as exc:
        raise CliUsageError(f"bad schedule spec {cfg.schedule!r}") from exc
    if kind not in ("constant", "inverse_sqrt", "inverse_t"):
        raise CliUsageError(f"unknown schedule kind {kind!r}")
    return StepSchedule(kind, c, cap)


def build_noise(cfg: ExperimentConfig):
    parts = cfg.noise.split(":")
    if parts[0] == "none":
        return NoNoise()
    if parts[0] == "gaussian":
        return GaussianNoise(float(parts[1]) if len(parts) > 1 else 1.0)
    if parts[0] == "minibatch":
        return MinibatchNoise(int(parts[1]) if len(parts) > 1 else 1)
    raise CliUsageError(f"unknown noise spec {cfg.noise!r}")


def noise_sigma(cfg: ExperimentConfig) -> float:
    noise = build_noise(cfg)
    return math.sqrt(noise.sigma_sq) if noise.sigma_sq is not None else 0.0


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


def write_rows(rows: list[dict], fieldnames: list[str], out: str | None,
               fmt: str) -> None:
    """Write rows atomically (tmp file + rename); stdout when out is None."""
    if fmt == "json":
        text = json.dumps(rows, indent=2, default=float) + "\n"
    else:
        import io

        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in fieldnames})
        text = buf.getvalue()
    if out is None:
        sys.stdout.write(text)
        return
    tmp = out + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, out)


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig) -> list[dict]:
    model = build_loss(cfg)
    schedule = build_schedule(cfg, model.smoothness_L)
    noise = build_noise(cfg)
    sigma = noise_sigma(cfg)
    d = cfg.d[0]
    ball = Ball(np.zeros(d), cfg.radius)
    sampler = build_sampler(cfg, d)
    rows = []
    for n in cfg.n:
        for T in cfg.t:
            master = RngStream(cfg.seed)
            exp = est.gen_error_experiment(model, ball, sampler, n, T,
                                           schedule, noise, cfg.trials, master)
            opt = bounds_mod.opt_error_bound(T, schedule, 2.0 * cfg.radius, sigma)
            main = bounds_mod.main_theorem_bound(
                T, schedule, 2.0 * cfg.radius, sigma, cfg.sigma_star,
                model.smoothness_L, cfg.radius, d, n, cfg.constant_C)
            stab = (bounds_mod.stability_bound(n, schedule, T, model.gradient_bound_B)
                    if model.gradient_bound_B is not None else None)
            rows.append({
                "n": n, "t": T,
                "gen_mean": exp.gen_error.mean,
                "gen_stderr": exp.gen_error.stderr,
                "train_loss_mean": exp.train_loss.mean,
                "train_loss_stderr": exp.train_loss.stderr,
                "opt_bound": opt.value,
                "stability_bound": None if stab is None else stab.value,
                "main_bound": main.value,
                "plateau": main.inputs["plateau"],
                "seed": cfg.seed,
            })
    fields = ["n", "t", "gen_mean", "gen_stderr", "train_loss_mean",
              "train_loss_stderr", "opt_bound", "stability_bound",
              "main_bound", "plateau", "seed"]
    write_rows(rows, fields, cfg.out, cfg.format)
    return rows


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def cmd_scaling(cfg: ExperimentConfig) -> list[dict]:
    if len(cfg.n) < 3:
        raise CliUsageError("scaling needs at least 3 points on the n grid")
    model = build_loss(cfg)
    schedule = build_schedule(cfg, model.smoothness_L)
    noise = build_noise(cfg)
    d = cfg.d[0]
    ball = Ball(np.zeros(d), cfg.radius)
    sampler = build_sampler(cfg, d)
    t_max = max(cfg.t)
    rows = []
    gen_at_tmax = {}
    for n in cfg.n:
        for T in sorted(cfg.t):
            master = RngStream(cfg.seed)
            e = est.estimate_gen_error(model, ball, sampler, n, T, schedule,
                                       noise, cfg.trials, master)
            stab = (bounds_mod.stability_bound(n, schedule, T,
                                               model.gradient_bound_B).value
                    if model.gradient_bound_B is not None else None)
            rows.append({"row_type": "gen_error", "n": n, "t": T,
                         "mean": e.mean, "stderr": e.stderr,
                         "stability_bound": stab, "slope": None,
                         "seed": cfg.seed})
            if T == t_max:
                gen_at_tmax[n] = e.mean
        delta = est.estimate_delta_mean(model, sampler, n, ball,
                                        est.SupSearchConfig(), cfg.trials,
                                        RngStream(cfg.seed, 1))
        rows.append({"row_type": "delta_mean", "n": n, "t": None,
                     "mean": delta.mean, "stderr": delta.stderr,
                     "stability_bound": None, "slope": None,
                     "seed": cfg.seed})
    delta_means = [r["mean"] for r in rows if r["row_type"] == "delta_mean"]
    slope_gen = est.fit_loglog_slope(cfg.n, [gen_at_tmax[n] for n in cfg.n]) \
        if all(v > 0 for v in gen_at_tmax.values()) else None
    slope_delta = est.fit_loglog_slope(cfg.n, delta_means)
    rows.append({"row_type": "slope_gen_vs_n", "n": None, "t": t_max,
                 "mean": None, "stderr": None, "stability_bound": None,
                 "slope": slope_gen, "seed": cfg.seed})
    rows.append({"row_type": "slope_delta_vs_n", "n": None, "t": None,
                 "mean": None, "stderr": None, "stability_bound": None,
                 "slope": slope_delta, "seed": cfg.seed})
    fields = ["row_type", "n", "t", "mean", "stderr", "stability_bound",
              "slope", "seed"]
    write_rows(rows, fields, cfg.out, cfg.format)
    return rows


# ---------------------------------------------------------------------------
# counterexample
# ---------------------------------------------------------------------------


def _event_I_dataset(n: int, d: int, rng: RngStream, attempts: int = 64):
    for k in range(attempts):
        S = sample_rademacher_dataset(n, d, rng.child(k))
        if detect_event_I(S).holds:
            return S
    return None


def cmd_counterexample(cfg: ExperimentConfig) -> list[dict]:
    if cfg.loss not in ("counterexample", "counterexample_perturbed"):
        raise CliUsageError("counterexample subcommand needs a counterexample loss")
    model = CounterexampleLoss()
    n = cfg.n[0]
    rows = []
    for d in cfg.d:
        sampler = build_sampler(cfg, d)
        report = est.gen_error_at_minimizer(model, sampler, n, d, cfg.trials,
                                            RngStream(cfg.seed))
        row = {
            "d": d, "n": n,
            "p_event_I": est.event_I_probability(n, d),
            "gen_mean": report.estimate.mean,
            "gen_stderr": report.estimate.stderr,
            "fallback_trials": report.fallback_trials,
            "seed": cfg.seed,
        }
        S = _event_I_dataset(n, d, RngStream(cfg.seed, 99))
        if S is not None:
            limit = est.perturbed_minimizer_limit_check(
                S, cfg.eps_grid, solver_steps=cfg.solver_steps,
                rng=RngStream(cfg.seed, 7))
            for k, eps in enumerate(cfg.eps_grid):
                row[f"dist_eps_{k}"] = float(limit.distances[k])
            row["risk_at_smallest_eps"] = float(limit.population_risks[-1])
        rows.append(row)
    fields = ["d", "n", "p_event_I", "gen_mean", "gen_stderr",
              "fallback_trials"]
    fields += [f"dist_eps_{k}" for k in range(len(cfg.eps_grid))]
    fields += ["risk_at_smallest_eps", "seed"]
    write_rows(rows, fields, cfg.out, cfg.format)
    return rows


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    bound: float


def check_rng_determinism(seed: int = 0) -> CheckResult:
    a = RngStream(seed, 3).generator().standard_normal(10_000)
    b = RngStream(seed, 3).generator().standard_normal(10_000)
    same = float(np.max(np.abs(a - b)))
    return CheckResult("rng_determinism", same == 0.0, same, 0.0)


def check_projection_properties(convex_set, rng: RngStream,
                                pairs: int = 1000) -> CheckResult:
    """Idempotence, fixed points, nonexpansiveness and optimality on
    random pairs."""
    gen = rng.generator()
    d = convex_set.dim
    worst = 0.0
    scale = 3.0 * convex_set.enclosing_radius_R
    for _ in range(pairs):
        a = scale * gen.standard_normal(d)
        b = scale * gen.standard_normal(d)
        pa, pb = convex_set.project(a), convex_set.project(b)
        worst = max(worst, float(np.linalg.norm(convex_set.project(pa) - pa)))
        expansion = (np.linalg.norm(pa - pb) - np.linalg.norm(a - b))
        worst = max(worst, float(expansion))
        u = convex_set.sample_point(gen)
        worst = max(worst, float(np.linalg.norm(pa - a) - np.linalg.norm(u - a)))
        # feasible points are fixed points of the projection
        worst = max(worst, float(np.linalg.norm(convex_set.project(u) - u)))
    return CheckResult("projection_properties", worst <= 1e-10, worst, 1e-10)


def _verify_instances(rng: RngStream):
    gen = rng.generator()
    models = [
        (CounterexampleLoss(), sample_rademacher_dataset(30, 8, gen)),
        (PerturbedCounterexampleLoss(1e-3), sample_rademacher_dataset(30, 8, gen)),
        (OneSidedQuadraticLoss(), sample_labeled_dataset(30, 8, gen)),
        (QuadraticLoss(mu=0.7), sample_rademacher_dataset(30, 8, gen)),
    ]
    return models


def check_convexity(rng: RngStream, triples: int = 200) -> CheckResult:
    gen = rng.generator()
    worst = -np.inf
    for model, S in _verify_instances(rng.child(0)):
        for _ in range(triples):
            w1 = gen.standard_normal(S.d)
            w2 = gen.standard_normal(S.d)
            lam = gen.random()
            mid = lam * w1 + (1 - lam) * w2
            gap = (model.empirical_loss(mid, S)
                   - lam * model.empirical_loss(w1, S)
                   - (1 - lam) * model.empirical_loss(w2, S))
            worst = max(worst, gap)
    return CheckResult("convexity", worst <= 1e-10, float(worst), 1e-10)


def check_smoothness(rng: RngStream, pairs: int = 200) -> CheckResult:
    gen = rng.generator()
    worst = -np.inf
    for model, S in _verify_instances(rng.child(0)):
        for _ in range(pairs):
            w1 = gen.standard_normal(S.d)
            w2 = gen.standard_normal(S.d)
            lhs = np.linalg.norm(model.empirical_grad(w1, S)
                                 - model.empirical_grad(w2, S))
            ratio = lhs / (model.smoothness_L * np.linalg.norm(w1 - w2))
            worst = max(worst, float(ratio) - 1.0)
    return CheckResult("smoothness", worst <= 1e-10, float(worst), 1e-10)


def check_gradient_fd(rng: RngStream, points: int = 20,
                      h: float = 1e-6) -> CheckResult:
    """Central differences of the empirical loss vs the analytic gradient,
    at points nudged away from the kink sets."""
    gen = rng.generator()
    worst = 0.0
    for model, S in _verify_instances(rng.child(0)):
        for _ in range(points):
            w = 0.5 * gen.standard_normal(S.d) + 0.25 * np.sign(gen.standard_normal(S.d))
            g = model.empirical_grad(w, S)
            fd = np.empty(S.d)
            for k in range(S.d):
                e = np.zeros(S.d)
                e[k] = h
                fd[k] = (model.empirical_loss(w + e, S)
                         - model.empirical_loss(w - e, S)) / (2 * h)
            rel = np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1.0)
            worst = max(worst, float(rel))
    return CheckResult("gradient_finite_difference", worst <= 1e-6, worst, 1e-6)


def check_running_average(rng: RngStream) -> CheckResult:
    gen = rng.generator()
    S = sample_labeled_dataset(40, 6, gen)
    model = OneSidedQuadraticLoss()
    schedule = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    traj = run_psgd(model, S, Ball.unit(6), np.zeros(6), schedule,
                    GaussianNoise(0.3), 500, rng.child(1), keep_history=True)
    alphas = schedule.alphas(500)
    direct = (alphas[:, None] * np.stack(traj.history)).sum(axis=0) / alphas.sum()
    err = float(np.linalg.norm(direct - traj.average))
    return CheckResult("running_average_identity", err <= 1e-10, err, 1e-10)


def check_minibatch_unbiased(rng: RngStream, resamples: int = 10_000) -> CheckResult:
    gen = rng.generator()
    S = sample_labeled_dataset(50, 5, gen)
    model = OneSidedQuadraticLoss()
    w = Ball.unit(5).sample_point(gen)
    full = model.empirical_grad(w, S)
    noise = MinibatchNoise(5)
    eps = np.stack([noise.sample(gen, w, full, model, S)
                    for _ in range(resamples)])
    mean_norm = float(np.linalg.norm(eps.mean(axis=0)))
    stderr = float(np.linalg.norm(eps.std(axis=0, ddof=1)) / np.sqrt(resamples))
    return CheckResult("minibatch_unbiased", mean_norm <= 3 * stderr,
                       mean_norm, 3 * stderr)


def check_projection_lemma_suite(rng: RngStream, trials: int = 20_000) -> CheckResult:
    ball = Ball.unit(5)
    worst_excess = -np.inf
    i = 0
    for alpha in (0.0, 0.05, 0.2):
        for v in (np.zeros(5), np.array([1.0, 0, 0, 0, 0])):
            rep = check_projection_lemma(ball, v, gaussian_noise_sampler,
                                         alpha, trials, rng.child(i))
            i += 1
            excess = rep.lhs_mean - (rep.rhs + 3 * (rep.lhs_stderr + rep.rhs_stderr))
            worst_excess = max(worst_excess, excess)
    return CheckResult("projection_lemma", worst_excess <= 0.0,
                       float(worst_excess), 0.0)


def check_lemma7(rng: RngStream, trials: int = 1000) -> CheckResult:
    model = CounterexampleLoss()
    gen = rng.generator()
    w = Ball.unit(10).sample_point(gen)
    rep = est.check_delta_at_w(
        model, lambda n, g: sample_rademacher_dataset(n, 10, g), 100, w,
        trials, rng.child(0), sigma_star=0.0, L=1.0, R=1.0)
    return CheckResult("single_w_gradient_difference", rep.passed,
                       rep.estimate.mean, rep.bound)


def check_increment_tail_calibration(rng: RngStream,
                                     trials: int = 20_000) -> CheckResult:
    model = CounterexampleLoss()
    gen = rng.generator()
    d, n = 10, 100
    w1 = Ball.unit(d).sample_point(gen)
    w2 = Ball.unit(d).sample_point(gen)
    u_grid = np.linspace(0.01, 0.4, 8)
    rep = est.check_increment_tail(
        model, lambda m, g: sample_rademacher_dataset(m, d, g), n, w1, w2,
        u_grid, trials, rng.child(0))
    ok = math.isfinite(rep.calibrated_c)
    return CheckResult("increment_tail_calibration", ok, rep.calibrated_c, math.inf)


def check_inexact_bound(rng: RngStream, trials: int = 20) -> CheckResult:
    model = QuadraticLoss(mu=1.0)
    gen = rng.generator()
    S = sample_rademacher_dataset(20, 5, gen)
    ball = Ball.unit(5)
    schedule = StepSchedule.inverse_sqrt(1.0, cap=1.0)
    T = 2000
    delta = 0.05
    pert = PerturbationSpec.constant(np.array([delta, 0, 0, 0, 0]))
    w_star = ball.project(S.points.mean(axis=0))
    l_star = model.empirical_loss(w_star, S)
    w0 = np.zeros(5)
    vals = []
    for i in range(trials):
        traj = run_perturbed_psgd(model, S, ball, w0, schedule,
                                  GaussianNoise(0.3), T, rng.child(i),
                                  perturbation=pert)
        vals.append(model.empirical_loss(traj.average, S) - l_star)
    sample = est.Estimate.from_samples(vals)
    bound = bounds_mod.inexact_bound(T, schedule, float(np.linalg.norm(w0 - w_star)),
                                     0.3, 1.0, np.full(T, delta)).value
    return CheckResult("inexact_psgd_bound",
                       sample.mean <= bound + 3 * sample.stderr,
                       sample.mean, bound)


def run_verify(cfg: ExperimentConfig) -> list[CheckResult]:
    rng = RngStream(cfg.seed)
    checks = [
        check_rng_determinism(cfg.seed),
        check_projection_properties(Ball.unit(6), rng.child(1)),
        check_projection_properties(
            Box(-0.5 * np.ones(4), np.arange(1.0, 5.0)), rng.child(2)),
        check_convexity(rng.child(3)),
        check_smoothness(rng.child(4)),
        check_gradient_fd(rng.child(5)),
        check_running_average(rng.child(6)),
        check_minibatch_unbiased(rng.child(7)),
        check_projection_lemma_suite(rng.child(8)),
        check_lemma7(rng.child(9)),
        check_increment_tail_calibration(rng.child(10)),
        check_inexact_bound(rng.child(11)),
    ]
    return checks


def cmd_verify(cfg: ExperimentConfig) -> int:
    results = run_verify(cfg)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: measured={_fmt(r.measured)} "
              f"bound={_fmt(r.bound)}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 2 if failed else 0


# ---------------------------------------------------------------------------
# bounds (print-only)
# ---------------------------------------------------------------------------


def cmd_bounds(cfg: ExperimentConfig) -> list[dict]:
    model = build_loss(cfg)
    schedule = build_schedule(cfg, model.smoothness_L)
    sigma = noise_sigma(cfg)
    n, d, T = cfg.n[0], cfg.d[0], cfg.t[0]
    R = cfg.radius
    reports = [
        bounds_mod.opt_error_bound(T, schedule, 2 * R, sigma),
        bounds_mod.main_theorem_bound(T, schedule, 2 * R, sigma,
                                      cfg.sigma_star, model.smoothness_L, R,
                                      d, n, cfg.constant_C),
        bounds_mod.dudley_gradient_concentration(R, model.smoothness_L, n, d,
                                                 cfg.constant_c),
    ]
    if model.gradient_bound_B is not None:
        reports.append(bounds_mod.stability_bound(n, schedule, T,
                                                  model.gradient_bound_B))
        reports.append(bounds_mod.strongly_convex_bound(
            n, model.gradient_bound_B, cfg.mu))
    rows = [{"name": r.name, "value": r.value, "divergent": r.divergent,
             "inputs": json.dumps(r.inputs, sort_keys=True, default=float),
             "notes": r.notes} for r in reports]
    write_rows(rows, ["name", "value", "divergent", "inputs", "notes"],
               cfg.out, cfg.format)
    return rows


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="psgdlab",
                     description="Projected SGD generalization laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "scaling", "counterexample", "verify", "bounds"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", type=str, default=None,
                       choices=("csv", "json"))
        p.add_argument("--n", type=_int_list, default=None)
        p.add_argument("--d", type=_int_list, default=None)
        p.add_argument("--t", type=_int_list, default=None)
        p.add_argument("--loss", type=str, default=None)
        p.add_argument("--schedule", type=str, default=None)
        p.add_argument("--noise", type=str, default=None)
        p.add_argument("--sigma", type=float, default=None,
                       help="shorthand for --noise gaussian:SIGMA")
        p.add_argument("--constant-c", dest="constant_c", type=float,
                       default=None)
        p.add_argument("--constant-C", dest="constant_C", type=float,
                       default=None)
    return parser


_OVERRIDES = ("seed", "trials", "out", "format", "n", "d", "t", "loss",
              "schedule", "noise", "constant_c", "constant_C")


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = (ExperimentConfig.from_file(args.config) if args.config
           else ExperimentConfig())
    for key in _OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    if getattr(args, "sigma", None) is not None:
        cfg.noise = f"gaussian:{args.sigma}"
    cfg.__post_init__()
    return cfg


_COMMANDS = {
    "run": cmd_run,
    "scaling": cmd_scaling,
    "counterexample": cmd_counterexample,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        _COMMANDS[args.command](cfg)
        return 0
    except CliUsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
