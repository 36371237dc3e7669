"""Simulation and data-analysis recipes behind the command line.

Every recipe is a pure function of its :class:`ExperimentConfig`: all
randomness flows from ``config.seed`` through seeds derived per replication
(and per grid cell), so changing the number of replications or restricting
a grid never changes the draws of the cells that remain.  Wall-clock timings
are collected separately from the deterministic tables.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .datagen import C2Config, c1_covariance, c2_covariance, count_nonzero_offdiag, sample_gaussian_data
from .diagnostics import median_ess, mnorm, rmse, seconds_per_kilo_ess
from .io import DataFormatError, LabeledDataset, fmt_float, ingest_csv, write_rows
from .lda import ESTIMATORS, EstimatorSettings, loocv_predictions, planted_dataset
from .rand_dist import make_rng
from .shrinkage_gibbs import PosteriorSummary, SamplerConfig, ShrinkageHyperparams, run_chain
from .sssl_gibbs import SsslHyperparams, run_sssl_chain

EXPERIMENTS = ("c1", "c2", "ess-bench", "lda", "contraction", "fit")

# per-experiment replication defaults when the config leaves them unset
DEFAULT_REPLICATIONS = {"c1": 50, "c2": 50, "ess-bench": 1, "lda": 1, "contraction": 10, "fit": 1}
QUICK_PROFILE = {"burn_in": 500, "n_samples": 500, "replications": 5}

# stream keys separating the experiments' seed trees
_KEY = {"c1": 101, "c2": 102, "ess-bench": 103, "contraction": 104, "lda": 105, "fit": 106}


class ConfigError(ValueError):
    pass


def derive_seed(seed: int, *keys: int) -> int:
    return int(make_rng(seed, *keys).integers(2**63))


# --------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    """Flat experiment configuration.

    ``replications=None`` means the experiment's own default (50 for the
    simulation tables, 10 seeds for the contraction study, 1 otherwise).
    Hyperparameters left at ``None`` resolve to the samplers' defaults,
    which depend on ``n`` and ``p``.
    """

    experiment: str
    seed: int = 0
    replications: int | None = None
    quick: bool = False
    jobs: int = 1
    out: str | None = None
    # chain
    burn_in: int = 5000
    n_samples: int = 5000
    thin: int = 1
    # shrinkage prior
    tau1_sq: float | None = None
    a: float = 0.5
    b: float = 0.5
    lam: float = 1.0
    tau: float = math.inf
    # spike-and-slab prior
    nu0_sq: float = 0.02**2
    nu1_sq: float = 1.0
    pi_mix: float | None = None
    sssl_lam: float = 1.0
    # designs
    n: int = 250
    p: int = 50
    sparsity_frac: float = 0.2
    c2_n: tuple[int, ...] = (50, 100)
    c2_mu: tuple[float, ...] = (0.02, 0.1, 0.5, 1.0)
    contraction_n: tuple[int, ...] = (100, 200, 400, 800)
    # data analysis
    data: str | None = None
    k_features: int = 50
    estimators: tuple[str, ...] = ESTIMATORS
    sampler: str = "shrinkage"
    full_data_selection: bool = False
    welch: bool = False
    center: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {', '.join(EXPERIMENTS)}")
        if self.replications is not None and self.replications < 1:
            raise ConfigError("replications must be a positive integer")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for name in ("n", "p", "k_features", "n_samples", "thin"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be non-negative")
        if not 0 <= self.seed < 2**63:
            raise ConfigError("seed must lie in [0, 2^63)")
        bad = [e for e in self.estimators if e not in ESTIMATORS]
        if bad or not self.estimators:
            raise ConfigError(f"estimators must be drawn from {ESTIMATORS}, got {self.estimators}")
        if self.sampler not in ESTIMATORS:
            raise ConfigError(f"sampler must be one of {ESTIMATORS}, got {self.sampler!r}")
        if any(n < 2 for n in self.c2_n + self.contraction_n) or not self.c2_n or not self.contraction_n:
            raise ConfigError("sample-size grids need values >= 2")
        if not self.c2_mu or any(mu <= 0 for mu in self.c2_mu):
            raise ConfigError("c2_mu values must be positive")
        if self.experiment in ("lda", "fit") and self.data is None:
            raise ConfigError(f"experiment {self.experiment!r} needs a data path (use 'planted' for the synthetic set)")
        try:
            self.shrinkage_hyper()
            self.sssl_hyper()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    @property
    def n_replications(self) -> int:
        return self.replications if self.replications is not None else DEFAULT_REPLICATIONS[self.experiment]

    def shrinkage_hyper(self) -> ShrinkageHyperparams:
        return ShrinkageHyperparams(tau1_sq=self.tau1_sq, a=self.a, b=self.b, lam=self.lam, tau=self.tau)

    def sssl_hyper(self) -> SsslHyperparams:
        return SsslHyperparams(nu0_sq=self.nu0_sq, nu1_sq=self.nu1_sq, pi_mix=self.pi_mix, lam=self.sssl_lam, tau=self.tau)

    def sampler_config(self, seed: int, *, store_full_chain: bool = False) -> SamplerConfig:
        return SamplerConfig(
            burn_in=self.burn_in, n_samples=self.n_samples, thin=self.thin, seed=seed,
            store_full_chain=store_full_chain,
        )

    def echo(self) -> list[str]:
        """``key = value`` lines with the replication default resolved.

        ``out`` and ``jobs`` do not influence any result and are left out, so
        the same run written to two directories gives identical files.
        """
        out = []
        for f in fields(self):
            if f.name in ("out", "jobs"):
                continue
            val = getattr(self, f.name)
            if f.name == "replications":
                val = self.n_replications
            out.append(f"{f.name} = {_render(val)}")
        return out


def _render(val) -> str:
    if val is None:
        return "none"
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, tuple):
        return ",".join(_render(v) for v in val)
    if isinstance(val, float):
        return fmt_float(val)
    return str(val)


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def convert_value(name: str, text: str):
    """Parse the text form of config field ``name``."""
    text = text.strip()
    kind = _FIELD_KINDS[name]
    if text.lower() in ("none", "") and kind[1]:
        return None
    base = kind[0]
    try:
        if base is bool:
            low = text.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(text)
        if base is tuple:
            elem = kind[2]
            return tuple(elem(t.strip()) for t in text.split(",") if t.strip())
        if base is int:
            return int(text)
        if base is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {name}: {text!r}") from None


def _field_kinds():
    # (base type, optional?, tuple element type)
    kinds = {}
    for f in fields(ExperimentConfig):
        t = str(f.type)
        optional = "None" in t
        if t.startswith("tuple"):
            elem = int if "int" in t else float if "float" in t else str
            kinds[f.name] = (tuple, optional, elem)
        elif t.startswith("bool"):
            kinds[f.name] = (bool, optional, None)
        elif t.startswith("int"):
            kinds[f.name] = (int, optional, None)
        elif t.startswith("float"):
            kinds[f.name] = (float, optional, None)
        else:
            kinds[f.name] = (str, optional, None)
    return kinds


_FIELD_KINDS = _field_kinds()
FIELD_NAMES = tuple(_FIELD_KINDS)


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys may use ``-`` or ``_``."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}: line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _FIELD_KINDS:
            raise ConfigError(f"{source}: line {lineno}: unknown key {key!r}")
        values[key] = convert_value(key, val)
    return values


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text, str(path))


def build_config(experiment: str | None = None, file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the quick profile (if requested), then the file, then overrides."""
    file_values = dict(file_values or {})
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    merged = {**file_values, **overrides}
    exp = experiment or merged.get("experiment")
    if exp is None:
        raise ConfigError("no experiment given")
    values = {}
    if merged.get("quick"):
        values.update(QUICK_PROFILE)
    values.update(merged)
    values["experiment"] = exp
    return ExperimentConfig(**values).validate()


# --------------------------------------------------------------------------
# reports


@dataclass
class Table:
    header: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *row) -> None:
        self.rows.append(list(row))

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


@dataclass
class Report:
    config: ExperimentConfig
    replications: Table
    summary: Table
    long: Table
    timing: Table
    text: str

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        echo = self.config.echo()
        (out / "config.txt").write_text("\n".join(echo) + "\n")
        for name in ("replications", "summary", "long", "timing"):
            t = getattr(self, name)
            write_rows(out / f"{name}.csv", t.header, t.rows)
        head = "\n".join("# " + line for line in echo)
        (out / "report.txt").write_text(head + "\n\n" + self.text.rstrip("\n") + "\n")
        return out


def mean_sd_se(values) -> tuple[float, float | None, float | None]:
    x = np.asarray(values, dtype=float)
    m = float(x.mean())
    if x.size < 2:
        return m, None, None
    sd = float(x.std(ddof=1))
    return m, sd, sd / math.sqrt(x.size)


def fmt_cell(mean: float, se: float | None, digits: int = 4) -> str:
    if se is None:
        return f"{mean:.{digits}f}"
    return f"{mean:.{digits}f} ({se:.{digits}f})"


def _cell_legend(R: int) -> str:
    return "mean (se)" if R > 1 else "single replication"


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in header]] + [[c if isinstance(c, str) else fmt_float(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _pmap(fn: Callable, items: list, jobs: int) -> list:
    """Ordered map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items), os.cpu_count() or 1)) as pool:
        return list(pool.map(fn, items))


def sample_covariance(X) -> np.ndarray:
    """Unbiased sample covariance (column means removed, divisor ``n - 1``)."""
    return np.cov(np.asarray(X, dtype=float), rowvar=False, ddof=1)


def _fit_all(cfg: ExperimentConfig, X, seed: int, which=ESTIMATORS) -> tuple[dict, dict, dict]:
    """Point estimates, wall seconds and posterior summaries for each estimator."""
    est, wall, post = {}, {}, {}
    if "shrinkage" in which:
        s = run_chain(X, cfg.shrinkage_hyper(), cfg.sampler_config(derive_seed(seed, 1)))
        est["shrinkage"], wall["shrinkage"], post["shrinkage"] = s.mean, s.wall_seconds, s
    if "sssl" in which:
        s = run_sssl_chain(X, cfg.sssl_hyper(), cfg.sampler_config(derive_seed(seed, 2)))
        est["sssl"], wall["sssl"], post["sssl"] = s.mean, s.wall_seconds, s
    if "sample" in which:
        est["sample"], wall["sample"] = sample_covariance(X), 0.0
    return est, wall, post


def _clamps(post: dict) -> int:
    return sum(s.chi_clamps + s.shrinkage_clamps for s in post.values())


# --------------------------------------------------------------------------
# C1: fixed sparse design


def _c1_rep(args):
    cfg, r = args
    seed_r = derive_seed(cfg.seed, _KEY["c1"], r)
    Sigma0 = c1_covariance()
    X = sample_gaussian_data(Sigma0, cfg.n, seed_r)
    est, wall, post = _fit_all(cfg, X, seed_r, cfg.estimators)
    rows = [[r, e, rmse(est[e], Sigma0), mnorm(est[e], Sigma0)] for e in cfg.estimators]
    return rows, wall, _clamps(post)


def _metric_summary(rep_rows, keys: Sequence[str], estimators: Sequence[str], summary: Table, text_rows: list, metrics=("rmse", "mnorm")):
    """Group ``rep_rows`` (dicts) by ``keys`` + estimator and add mean/sd/se rows."""
    groups = {}
    for row in rep_rows:
        groups.setdefault(tuple(row[k] for k in keys), {}).setdefault(row["estimator"], []).append(row)
    for gkey, by_est in groups.items():
        for metric in metrics:
            cells = []
            for e in estimators:
                m, sd, se = mean_sd_se([row[metric] for row in by_est[e]])
                summary.add(*gkey, e, metric, m, sd, se)
                cells.append(fmt_cell(m, se))
            text_rows.append([*(str(k) for k in gkey), metric, *cells])


def run_c1(cfg: ExperimentConfig) -> Report:
    R = cfg.n_replications
    results = _pmap(_c1_rep, [(cfg, r) for r in range(R)], cfg.jobs)
    reps = Table(["rep", "estimator", "rmse", "mnorm"])
    timing = Table(["rep", "estimator", "wall_seconds"])
    long = Table(["rep", "estimator", "metric", "value"])
    clamps = 0
    dict_rows = []
    for r, (rows, wall, cl) in enumerate(results):
        clamps += cl
        for row in rows:
            reps.add(*row)
            long.add(row[0], row[1], "rmse", row[2])
            long.add(row[0], row[1], "mnorm", row[3])
            dict_rows.append(dict(zip(reps.header, row)))
        for e, w in wall.items():
            timing.add(r, e, w)
    summary = Table(["estimator", "metric", "mean", "sd", "se"])
    text_rows: list = []
    _metric_summary(dict_rows, [], cfg.estimators, summary, text_rows)
    text = (
        f"C1 design: p = 12, n = {cfg.n}, replications = {R}; {_cell_legend(R)}\n\n"
        + format_table(["metric", *cfg.estimators], text_rows)
        + f"\n\nfloored chi-terms and clamped local scales: {clamps}\n"
    )
    return Report(cfg, reps, summary, long, timing, text)


# --------------------------------------------------------------------------
# C2: random sparse design over an (n, mu) grid


def _mu_key(mu: float) -> int:
    return int(round(mu * 1e9))


def _c2_rep(args):
    cfg, n, mu, r = args
    seed_r = derive_seed(cfg.seed, _KEY["c2"], n, _mu_key(mu), r)
    Sigma0, repaired = c2_covariance(
        C2Config(p=cfg.p, mu=mu, sparsity_frac=cfg.sparsity_frac, seed=seed_r), return_repaired=True
    )
    X = sample_gaussian_data(Sigma0, n, seed_r)
    est, wall, post = _fit_all(cfg, X, seed_r, cfg.estimators)
    rows = [[n, mu, r, int(repaired), e, rmse(est[e], Sigma0), mnorm(est[e], Sigma0)] for e in cfg.estimators]
    return rows, wall, _clamps(post)


def run_c2(cfg: ExperimentConfig) -> Report:
    R = cfg.n_replications
    jobs = [(cfg, n, mu, r) for n in cfg.c2_n for mu in cfg.c2_mu for r in range(R)]
    results = _pmap(_c2_rep, jobs, cfg.jobs)
    reps = Table(["n", "mu", "rep", "repaired", "estimator", "rmse", "mnorm"])
    timing = Table(["n", "mu", "rep", "estimator", "wall_seconds"])
    long = Table(["n", "mu", "rep", "estimator", "metric", "value"])
    dict_rows = []
    clamps = 0
    repairs = {}
    for (_, n, mu, r), (rows, wall, cl) in zip(jobs, results):
        clamps += cl
        repairs[(n, mu)] = repairs.get((n, mu), 0) + rows[0][3]
        for row in rows:
            reps.add(*row)
            long.add(n, mu, r, row[4], "rmse", row[5])
            long.add(n, mu, r, row[4], "mnorm", row[6])
            dict_rows.append(dict(zip(reps.header, row)))
        for e, w in wall.items():
            timing.add(n, mu, r, e, w)
    summary = Table(["n", "mu", "estimator", "metric", "mean", "sd", "se"])
    text_rows: list = []
    _metric_summary(dict_rows, ["n", "mu"], cfg.estimators, summary, text_rows)
    rep_lines = "\n".join(f"  n = {n}, mu = {mu:g}: {k} of {R}" for (n, mu), k in repairs.items())
    text = (
        f"C2 design: p = {cfg.p}, sparsity {cfg.sparsity_frac:g}, replications = {R}; {_cell_legend(R)}\n\n"
        + format_table(["n", "mu", "metric", *cfg.estimators], text_rows)
        + "\n\ndiagonal shifted for positive definiteness:\n" + rep_lines
        + f"\n\nfloored chi-terms and clamped local scales: {clamps}\n"
    )
    return Report(cfg, reps, summary, long, timing, text)


# --------------------------------------------------------------------------
# ESS benchmark on C1


def _ess_rep(args):
    cfg, r = args
    seed_r = derive_seed(cfg.seed, _KEY["ess-bench"], r)
    X = sample_gaussian_data(c1_covariance(), cfg.n, seed_r)
    _, wall, post = _fit_all(cfg, X, seed_r, ("shrinkage", "sssl"))
    return {k: (s.ess, s.n_kept) for k, s in post.items()}, wall


def run_ess_bench(cfg: ExperimentConfig) -> Report:
    R = cfg.n_replications
    results = _pmap(_ess_rep, [(cfg, r) for r in range(R)], cfg.jobs)
    samplers = ("shrinkage", "sssl")
    reps = Table(["rep", "j", "k", "ess_shrinkage", "ess_sssl", "n_kept"])
    long = Table(["rep", "entry", "sampler", "ess"])
    timing = Table(["rep", "sampler", "wall_seconds", "seconds_per_1000_ess"])
    per_rep = {s: [] for s in samplers}
    ratios = []
    for r, (res, wall) in enumerate(results):
        p = res["shrinkage"][0].shape[0]
        iu = np.triu_indices(p)
        for j, k in zip(*iu):
            reps.add(r, int(j), int(k), res["shrinkage"][0][j, k], res["sssl"][0][j, k], res["shrinkage"][1])
            for s in samplers:
                long.add(r, f"{j + 1}-{k + 1}", s, res[s][0][j, k])
        for s in samplers:
            med = median_ess(res[s][0])
            per_rep[s].append(med)
            timing.add(r, s, wall[s], seconds_per_kilo_ess(wall[s], res[s][0][iu]))
        ratios.append(per_rep["shrinkage"][-1] / per_rep["sssl"][-1])
    summary = Table(["quantity", "mean", "sd", "se"])
    for s in samplers:
        summary.add(f"median_ess_{s}", *mean_sd_se(per_rep[s]))
    summary.add("median_ess_ratio", *mean_sd_se(ratios))
    m, _, se = mean_sd_se(ratios)
    text = (
        f"ESS on C1: n = {cfg.n}, {cfg.n_samples} retained draws per sampler, replications = {R}\n\n"
        + format_table(
            ["quantity", "value"],
            [[f"median ESS {s}", fmt_cell(*mean_sd_se(per_rep[s])[::2], digits=1)] for s in samplers]
            + [["ratio shrinkage / sssl", fmt_cell(m, se, digits=3)]],
        )
        + "\n"
    )
    return Report(cfg, reps, summary, long, timing, text)


# --------------------------------------------------------------------------
# posterior contraction on C1


def contraction_rate(p: int, s0: int, n) -> float:
    """``(p + s0) log p / n``."""
    return (p + s0) * math.log(p) / n


def posterior_frobenius_sq(post: PosteriorSummary, Sigma0) -> float:
    """Posterior mean of ``||Sigma - Sigma0||_F^2`` from the stored upper-triangle trace."""
    p = Sigma0.shape[0]
    iu = np.triu_indices(p)
    weight = np.where(iu[0] == iu[1], 1.0, 2.0)
    diff = post.trace - Sigma0[iu]
    return float(np.mean((diff * diff) @ weight))


def loglog_slope(ns, errs) -> float:
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errs, float)), 1)[0])


def _contraction_rep(args):
    cfg, r, n = args
    seed_r = derive_seed(cfg.seed, _KEY["contraction"], r, n)
    Sigma0 = c1_covariance()
    X = sample_gaussian_data(Sigma0, n, seed_r)
    s = run_chain(X, cfg.shrinkage_hyper(), cfg.sampler_config(derive_seed(seed_r, 1), store_full_chain=True))
    return posterior_frobenius_sq(s, Sigma0), s.wall_seconds


def run_contraction(cfg: ExperimentConfig) -> Report:
    R = cfg.n_replications
    ns = tuple(sorted(cfg.contraction_n))
    Sigma0 = c1_covariance()
    p = Sigma0.shape[0]
    s0 = 2 * count_nonzero_offdiag(Sigma0)
    jobs = [(cfg, r, n) for r in range(R) for n in ns]
    results = _pmap(_contraction_rep, jobs, cfg.jobs)
    reps = Table(["rep", "n", "posterior_frobenius_sq", "rate"])
    timing = Table(["rep", "n", "wall_seconds"])
    long = Table(["rep", "n", "series", "value"])
    errs = np.empty((R, len(ns)))
    for (_, r, n), (err, wall) in zip(jobs, results):
        errs[r, ns.index(n)] = err
        reps.add(r, n, err, contraction_rate(p, s0, n))
        long.add(r, n, "posterior", err)
        timing.add(r, n, wall)
    for n in ns:
        long.add("", n, "rate", contraction_rate(p, s0, n))
    decreasing = [bool(np.all(np.diff(errs[r]) < 0)) for r in range(R)]
    slopes = [loglog_slope(ns, errs[r]) for r in range(R)]
    mean_err = errs.mean(axis=0)
    pooled_slope = loglog_slope(ns, mean_err)
    summary = Table(["quantity", "n", "mean", "sd", "se"])
    for i, n in enumerate(ns):
        summary.add("posterior_frobenius_sq", n, *mean_sd_se(errs[:, i]))
        summary.add("rate", n, contraction_rate(p, s0, n), None, None)
    summary.add("slope_of_mean", "", pooled_slope, None, None)
    summary.add("slope_per_seed", "", *mean_sd_se(slopes))
    summary.add("fraction_decreasing", "", float(np.mean(decreasing)), None, None)
    text = (
        f"Contraction on C1 (p = {p}, s0 = {s0}), seeds = {R}\n\n"
        + format_table(
            ["n", "E||Sigma - Sigma0||_F^2", "(p+s0) log p / n"],
            [[str(n), fmt_cell(*mean_sd_se(errs[:, i])[::2]), f"{contraction_rate(p, s0, n):.4f}"] for i, n in enumerate(ns)],
        )
        + f"\n\nlog-log slope of the mean error: {pooled_slope:.3f}"
        + f"\nseeds with strictly decreasing error: {sum(decreasing)} of {R}\n"
    )
    return Report(cfg, reps, summary, long, timing, text)


# --------------------------------------------------------------------------
# LDA with LOOCV


def load_labeled(cfg: ExperimentConfig) -> tuple[str, LabeledDataset]:
    if cfg.data == "planted":
        return "planted", planted_dataset(seed=cfg.seed)
    data = ingest_csv(cfg.data, require_label=True)
    return Path(cfg.data).stem, data


def _lda_settings(cfg: ExperimentConfig) -> EstimatorSettings:
    return EstimatorSettings(
        sampler=cfg.sampler_config(0), shrinkage=cfg.shrinkage_hyper(), sssl=cfg.sssl_hyper()
    )


def run_lda(cfg: ExperimentConfig) -> Report:
    name, data = load_labeled(cfg)
    if cfg.k_features > data.p:
        raise ConfigError(f"k_features = {cfg.k_features} exceeds the {data.p} available features")
    settings = _lda_settings(cfg)
    reps = Table(["dataset", "k", "estimator", "errors", "folds", "error_rate"])
    long = Table(["dataset", "estimator", "sample", "label", "predicted"])
    timing = Table(["dataset", "estimator", "wall_seconds"])
    text_cells = []
    with ProcessPoolExecutor(max_workers=cfg.jobs) if cfg.jobs > 1 else _NullPool() as pool:
        for e in cfg.estimators:
            t0 = time.perf_counter()
            pred = loocv_predictions(
                data, cfg.k_features, e, settings, seed=derive_seed(cfg.seed, _KEY["lda"]),
                full_data_selection=cfg.full_data_selection, welch=cfg.welch, map_fn=pool.map,
            )
            timing.add(name, e, time.perf_counter() - t0)
            done = pred > 0
            n_err = int(np.sum(pred[done] != data.labels[done]))
            rate = n_err / int(done.sum())
            reps.add(name, cfg.k_features, e, n_err, int(done.sum()), rate)
            for i in range(data.n):
                long.add(name, e, i, int(data.labels[i]), int(pred[i]))
            text_cells.append(f"{rate:.3f}")
    summary = Table(["dataset", "estimator", "error_rate"])
    for row in reps.rows:
        summary.add(row[0], row[2], row[5])
    text = (
        f"LOOCV error, {name}: n = {data.n}, k = {cfg.k_features} features selected "
        + ("once on all samples" if cfg.full_data_selection else "inside each fold")
        + "\n\n" + format_table(["dataset", *cfg.estimators], [[name, *text_cells]]) + "\n"
    )
    return Report(cfg, reps, summary, long, timing, text)


class _NullPool:
    map = staticmethod(map)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


# --------------------------------------------------------------------------
# fit a single data set


def run_fit(cfg: ExperimentConfig) -> Report:
    loaded = ingest_csv(cfg.data)
    X = loaded.X if isinstance(loaded, LabeledDataset) else loaded
    if cfg.center:
        X = X - X.mean(axis=0)
    if X.shape[0] < 2 or X.shape[1] < 2:
        raise DataFormatError(f"{cfg.data}: need at least 2 rows and 2 columns")
    est, wall, post = _fit_all(cfg, X, derive_seed(cfg.seed, _KEY["fit"]), (cfg.sampler,))
    mean = est[cfg.sampler]
    p = mean.shape[0]
    reps = Table(["j", "k", "mean", "lower95", "upper95", "ess"])
    s = post.get(cfg.sampler)
    for j, k in zip(*np.triu_indices(p)):
        if s is None:
            reps.add(int(j), int(k), mean[j, k], None, None, None)
        else:
            reps.add(int(j), int(k), mean[j, k], s.lower95[j, k], s.upper95[j, k], s.ess[j, k])
    long = Table(["row", *[f"x{k + 1}" for k in range(p)]])
    for j in range(p):
        long.add(j, *mean[j])
    summary = Table(["quantity", "value"])
    summary.add("n", X.shape[0])
    summary.add("p", p)
    if s is not None:
        summary.add("median_ess", median_ess(s.ess))
        summary.add("chi_clamps", s.chi_clamps)
        summary.add("shrinkage_clamps", s.shrinkage_clamps)
    timing = Table(["sampler", "wall_seconds"])
    timing.add(cfg.sampler, wall[cfg.sampler])
    text = f"{cfg.sampler} estimate for {cfg.data}: n = {X.shape[0]}, p = {p}\n\n" + format_table(
        ["quantity", "value"], summary.rows
    ) + "\n"
    return Report(cfg, reps, summary, long, timing, text)


RECIPES: dict[str, Callable[[ExperimentConfig], Report]] = {
    "c1": run_c1,
    "c2": run_c2,
    "ess-bench": run_ess_bench,
    "lda": run_lda,
    "contraction": run_contraction,
    "fit": run_fit,
}


def run_experiment(cfg: ExperimentConfig) -> Report:
    return RECIPES[cfg.validate().experiment](cfg)
