"""Dataset ingestion, run configuration and result serialisation.

All output files start with a schema-versioned header line and format
floats with shortest round-trip repr, so a fixed seed reproduces every
file byte for byte (wall-clock timings live only in the run summary).
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .linalg import RngStream
from .model import estimate_reduced_form
from .posterior import (
    JointDrawRecord,
    PlausibilityFloor,
    conditional_posterior_check,
    fit_niw,
    posterior_plausibility,
    run_joint_sampler,
)
from .restrictions import RestrictionSet, parse_restrictions
from .robust import (
    iso_draw_curve,
    required_draws,
    summarize_robust,
)
from .samplers import AcceptRejectConfig, SliceConfig, efficiency_report, soft_sign_sample
from .soft_target import resample

SCHEMA_PREFIX = "svarsoft"

MODES = ("standard", "robust", "conditional-check", "bivariate-demo", "benchmark")
TRANSFORMS = ("none", "log", "growth-rate", "diff")


class ParseError(ValueError):
    pass


class GapInDates(ParseError):
    pass


class NonPositiveForLog(ParseError):
    pass


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dataset


def _month_ord(date: str, where: str = "") -> int:
    parts = date.strip().split("-")
    if len(parts) < 2:
        raise ParseError(f"{where}: expected ISO month YYYY-MM, got {date!r}")
    try:
        year, month = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"{where}: bad date {date!r}") from None
    if not (1 <= month <= 12):
        raise ParseError(f"{where}: month out of range in {date!r}")
    return year * 12 + (month - 1)


def _month_str(ord_: int) -> str:
    return f"{ord_ // 12:04d}-{ord_ % 12 + 1:02d}"


@dataclass(frozen=True)
class Dataset:
    """Monthly multivariate series with strictly contiguous dates."""

    names: tuple[str, ...]
    dates: tuple[str, ...]
    values: np.ndarray  # (T, n)

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.dates), len(self.names)):
            raise ParseError("dataset dimensions are inconsistent")

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def index_of(self, date: str) -> int:
        target = _month_ord(date, "episode date")
        first = _month_ord(self.dates[0])
        idx = target - first
        if idx < 0 or idx >= self.T:
            raise ParseError(f"date {date} outside sample {self.dates[0]}..{self.dates[-1]}")
        return idx

    def innovation_index_map(self, p: int) -> dict[str, int]:
        """Map 'YYYY-MM' to an index into the length T-p innovation series."""
        return {d: t - p for t, d in enumerate(self.dates) if t >= p}


def apply_transforms(dataset: Dataset, transforms: dict[str, str] | None) -> Dataset:
    """Columnwise transforms; differencing drops the first observation."""
    if not transforms:
        return dataset
    vals = dataset.values.copy()
    needs_drop = False
    for name, tag in transforms.items():
        if tag not in TRANSFORMS:
            raise ConfigError(f"unknown transform {tag!r} for {name!r}")
        if name not in dataset.names:
            raise ConfigError(f"transform names unknown variable {name!r}")
        col = dataset.names.index(name)
        x = vals[:, col]
        if tag in ("log", "growth-rate"):
            if np.any(x <= 0):
                raise NonPositiveForLog(f"variable {name} has values <= 0")
        if tag == "log":
            vals[:, col] = np.log(x)
        elif tag == "growth-rate":
            lx = np.log(x)
            vals[1:, col] = 100.0 * np.diff(lx)
            vals[0, col] = np.nan
            needs_drop = True
        elif tag == "diff":
            vals[1:, col] = np.diff(x)
            vals[0, col] = np.nan
            needs_drop = True
    if needs_drop:
        vals = vals[1:]
        dates = dataset.dates[1:]
    else:
        dates = dataset.dates
    if np.any(~np.isfinite(vals)):
        raise ParseError("missing values remain after transformation")
    return Dataset(names=dataset.names, dates=tuple(dates), values=vals)


def load_dataset(path: str | Path, transforms: dict[str, str] | None = None) -> Dataset:
    """Read a `date,<var1>,...` CSV, validate contiguity, apply transforms."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in lines[0].split(",")]
    if header[0] != "date" or len(header) < 2:
        raise ParseError(f"{path}:1: header must be 'date,<var1>,...'")
    names = tuple(header[1:])
    dates: list[str] = []
    rows: list[list[float]] = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(f"{path}:{ln}: expected {len(header)} fields")
        ord_ = _month_ord(cells[0], f"{path}:{ln}")
        dates.append(_month_str(ord_))
        try:
            rows.append([float(c) for c in cells[1:]])
        except ValueError:
            raise ParseError(f"{path}:{ln}: non-numeric value") from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    ords = [_month_ord(d) for d in dates]
    for prev, cur, ln in zip(ords, ords[1:], range(3, len(ords) + 2)):
        if cur != prev + 1:
            raise GapInDates(f"{path}:{ln}: dates not contiguous monthly")
    ds = Dataset(names=names, dates=tuple(dates), values=np.array(rows))
    return apply_transforms(ds, transforms)


def save_dataset(path: str | Path, dataset: Dataset) -> None:
    lines = ["date," + ",".join(dataset.names)]
    for d, row in zip(dataset.dates, dataset.values):
        lines.append(d + "," + ",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


# episode months used by the shipped oil restriction fixture
OIL_EPISODES = (
    "1978-12", "1979-01", "1980-09", "1980-10",
    "1990-08", "2002-12", "2003-03", "2011-02",
)
OIL_QUIET_DEMAND = ("1980-09", "1980-10", "1990-08")


def synthetic_dataset(
    seed: int = 0,
    T: int = 540,
    start: str = "1971-01",
    names: tuple[str, ...] = ("REA", "PROD", "RPO"),
) -> Dataset:
    """Stand-in for the oil dataset, simulated from a structural VAR whose
    truth satisfies the shipped oil restriction fixture.

    The impact matrix carries the fixture's sign pattern with a supply
    elasticity inside the 0.0258 bound, and large positive supply shocks
    (with quiet demand shocks where required) are injected in the fixture's
    narrative episode months. Dimensions and date span mimic the real
    data; the values do not.
    """
    n = len(names)
    rng = RngStream(seed, 424242).generator()
    first = _month_ord(start)
    dates = tuple(_month_str(first + t) for t in range(T))

    # columns: aggregate demand, oil-specific demand, oil supply
    impact = np.array(
        [
            [0.50, -0.20, -0.30],
            [0.010, 0.005, -0.80],
            [0.50, 0.70, 0.90],
        ]
    )[:n, :n]
    B1 = np.diag([0.55, 0.30, 0.60])[:n, :n]

    eps = rng.standard_normal((T, n))
    episode_rows = {d: dates.index(d) for d in OIL_EPISODES if d in dates}
    for d, t in episode_rows.items():
        eps[t, -1] = 3.0 + rng.uniform(0.0, 1.0)  # disruption: big supply shock
        if d in OIL_QUIET_DEMAND and n >= 2:
            eps[t, 0] = 0.02 * rng.standard_normal()

    y = np.zeros((T, n))
    for t in range(T):
        prev = y[t - 1] if t > 0 else np.zeros(n)
        y[t] = B1 @ prev + impact @ eps[t]
    return Dataset(names=names, dates=dates, values=y)


# ---------------------------------------------------------------------------
# run configuration


@dataclass
class RunConfig:
    mode: str = "standard"
    dataset: str | None = None
    transforms: dict[str, str] | None = None
    restrictions: str | dict | None = None
    lags: int = 12
    horizon_max: int = 20
    sampler: str = "soft-sign"
    delta: float = 1e-5
    init_delta: float | None = None
    m_draws: int = 1000
    k_draws: int | None = None
    n_phi_kept: int = 1000
    ar_max_attempts: int = 1000
    alpha_levels: tuple[float, ...] = (0.68,)
    seed: int = 0
    out_dir: str = "runs/out"
    threads: int = 1
    burn_in: int = 0
    thin: int = 1
    max_phi_attempts: int = 100_000
    bivariate: dict | None = None
    benchmark: dict | None = None

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.sampler not in ("accept-reject", "soft-sign"):
            raise ConfigError(f"unknown sampler {self.sampler!r}")
        if self.m_draws < 1 or self.n_phi_kept < 1 or self.lags < 0:
            raise ConfigError("m_draws, n_phi_kept and lags must be positive")
        if self.horizon_max < 0:
            raise ConfigError("horizon_max must be nonnegative")
        if not all(0.0 < a <= 1.0 for a in self.alpha_levels):
            raise ConfigError("alpha levels must lie in (0, 1]")
        needs_data = self.mode in ("standard", "robust", "conditional-check")
        if needs_data:
            if self.dataset is None or not Path(self.dataset).exists():
                raise ConfigError(f"dataset file not found: {self.dataset!r}")
            if self.restrictions is None:
                raise ConfigError("restriction config required")
            if isinstance(self.restrictions, str) and not Path(self.restrictions).exists():
                raise ConfigError(f"restriction file not found: {self.restrictions!r}")
        if self.mode == "bivariate-demo" and not self.bivariate:
            raise ConfigError("bivariate-demo mode needs a 'bivariate' section")
        if self.mode == "benchmark" and not self.benchmark:
            raise ConfigError("benchmark mode needs a 'benchmark' section")

    def slice_config(self) -> SliceConfig:
        return SliceConfig(
            m_draws=self.m_draws,
            delta=self.delta,
            init_delta=self.init_delta,
            burn_in=self.burn_in,
            thin=self.thin,
        )

    def ar_config(self) -> AcceptRejectConfig:
        return AcceptRejectConfig(max_attempts=self.ar_max_attempts)

    def effective_threads(self) -> int:
        cap = os.environ.get("SVARSOFT_THREADS")
        if cap is not None:
            return max(1, min(self.threads, int(cap)))
        return max(1, self.threads)


def load_run_config(path: str | Path) -> RunConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: run config must be a mapping")
    known = {f for f in RunConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    if "alpha_levels" in raw:
        raw["alpha_levels"] = tuple(float(a) for a in raw["alpha_levels"])
    return RunConfig(**raw)


# ---------------------------------------------------------------------------
# writers


def _fmt(x) -> str:
    return repr(float(x))


def _write(path: Path, schema: str, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = [f"# schema={SCHEMA_PREFIX}.{schema}"] + lines
    path.write_text("\n".join(body) + "\n")


def write_draws(path: Path, records: list[JointDrawRecord]) -> None:
    """Resampled Q draws for every kept phi; weight 1 and feasible 1 by
    construction after the importance step."""
    n = next(r.phi.n for r in records if not r.empty)
    header = "phi_index,draw_index,weight,feasible," + ",".join(
        f"q_{i}_{j}" for i in range(n) for j in range(n)
    )
    lines = [header]
    for rec in records:
        if rec.empty:
            continue
        for d, Q in enumerate(rec.Q_resampled):
            flat = ",".join(_fmt(v) for v in Q.ravel())
            lines.append(f"{rec.phi_index},{d},1.0,1,{flat}")
    _write(path, "draws.v1", lines)


def write_irf_summary(
    path: Path,
    records: list[JointDrawRecord],
    horizons: int,
    alphas: tuple[float, ...],
    names: tuple[str, ...],
    shocks: tuple[str, ...],
) -> None:
    from .model import compute_irf_coefficients

    kept = [r for r in records if not r.empty]
    resp = []
    for r in kept:
        irf = compute_irf_coefficients(r.phi, horizons)
        resp.append(np.einsum("hik,fkj->fhij", irf.coeffs, r.Q_resampled))
    pooled = np.concatenate(resp, axis=0)
    lines = ["variable,shock,horizon,alpha,median,cr_lo,cr_hi"]
    med = np.median(pooled, axis=0)
    for alpha in alphas:
        lo = np.quantile(pooled, (1 - alpha) / 2, axis=0)
        hi = np.quantile(pooled, 1 - (1 - alpha) / 2, axis=0)
        for h in range(horizons + 1):
            for i, vname in enumerate(names):
                for j, sname in enumerate(shocks):
                    lines.append(
                        f"{vname},{sname},{h},{_fmt(alpha)},"
                        f"{_fmt(med[h, i, j])},{_fmt(lo[h, i, j])},{_fmt(hi[h, i, j])}"
                    )
    _write(path, "irf.v1", lines)


def write_robust_summary(path: Path, summary, names, shocks) -> None:
    lines = [
        "variable,shock,horizon,is_lower,is_upper,med_set_lo,med_set_hi,"
        "rci_lo,rci_hi,std_lo,std_hi,prior_informativeness"
    ]
    for h in range(summary.horizons + 1):
        for i, vname in enumerate(names):
            for j, sname in enumerate(shocks):
                cells = [
                    summary.is_lower[h, i, j], summary.is_upper[h, i, j],
                    summary.med_set_lo[h, i, j], summary.med_set_hi[h, i, j],
                    summary.rci_lo[h, i, j], summary.rci_hi[h, i, j],
                    summary.std_lo[h, i, j], summary.std_hi[h, i, j],
                    summary.informativeness[h, i, j],
                ]
                lines.append(
                    f"{vname},{sname},{h}," + ",".join(_fmt(c) for c in cells)
                )
    _write(path, "robust.v1", lines)


def write_run_summary(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"schema": f"{SCHEMA_PREFIX}.run-summary.v1"}
    doc.update(payload)
    path.write_text(yaml.safe_dump(doc, sort_keys=True))


def write_benchmark(path: Path, rows: list[dict]) -> None:
    lines = ["algorithm,omega_bar,delta,seconds,ess_percent,effective_draws_per_second"]
    for r in rows:
        lines.append(
            f"{r['algorithm']},{_fmt(r['omega_bar'])},"
            f"{'' if r['delta'] is None else _fmt(r['delta'])},"
            f"{_fmt(r['seconds'])},{_fmt(r['ess_percent'])},"
            f"{_fmt(r['effective_draws_per_second'])}"
        )
    _write(path, "benchmark.v1", lines)


def write_theta_draws(
    path: Path,
    thetas: np.ndarray,
    branches: list[str],
    weights: np.ndarray | None,
    intervals: tuple[tuple[float, float], ...],
) -> None:
    lines = [f"# interval={_fmt(lo)},{_fmt(hi)}" for lo, hi in intervals]
    if weights is None:
        lines.append("draw_index,theta,branch")
        for d, (t, b) in enumerate(zip(thetas, branches)):
            lines.append(f"{d},{_fmt(t)},{b}")
    else:
        lines.append("draw_index,theta,branch,weight,feasible")
        for d, (t, b, w) in enumerate(zip(thetas, branches, weights)):
            lines.append(f"{d},{_fmt(t)},{b},{_fmt(w)},{1 if w > 0 else 0}")
    _write(path, "theta-draws.v1", lines)


def write_condcheck(
    path_stats: Path,
    path_draws: Path,
    report: dict,
    names: tuple[str, ...],
    shocks: tuple[str, ...],
) -> None:
    lines = ["variable,shock,ks_stat,ks_pvalue,n_soft,n_ar"]
    n_soft = report["impact_soft"].shape[0]
    n_ar = report["impact_ar"].shape[0]
    for (i, j), t in sorted(report["tests"].items()):
        lines.append(
            f"{names[i]},{shocks[j]},{_fmt(t['ks_stat'])},{_fmt(t['ks_pvalue'])},"
            f"{n_soft},{n_ar}"
        )
    _write(path_stats, "condcheck.v1", lines)

    dlines = ["variable,shock,sampler,draw_index,value"]
    for label, arr in (("soft-sign", report["impact_soft"]), ("accept-reject", report["impact_ar"])):
        for i, vname in enumerate(names):
            for j, sname in enumerate(shocks):
                for d, v in enumerate(arr[:, i, j]):
                    dlines.append(f"{vname},{sname},{label},{d},{_fmt(v)}")
    _write(path_draws, "conddraws.v1", dlines)


def write_isodraw(path: Path, d: int, m_draws: int, deltas: np.ndarray, eps: np.ndarray) -> None:
    lines = [f"# d={d}", f"# m_draws={m_draws}", "delta,epsilon"]
    for dl, ep in zip(deltas, eps):
        lines.append(f"{_fmt(dl)},{_fmt(ep)}")
    _write(path, "isodraw.v1", lines)


def write_error(path: Path, exc: BaseException) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        yaml.safe_dump(
            {
                "schema": f"{SCHEMA_PREFIX}.error.v1",
                "error": type(exc).__name__,
                "message": str(exc),
            },
            sort_keys=True,
        )
    )


# ---------------------------------------------------------------------------
# run orchestration

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_PLAUSIBILITY_FLOOR = 3


def run(config: RunConfig) -> int:
    """Execute the configured mode; returns the process exit status."""
    out = Path(config.out_dir)
    try:
        config.validate()
    except ConfigError as exc:
        write_error(out / "error.yaml", exc)
        return EXIT_CONFIG
    try:
        if config.mode in ("standard", "robust"):
            _run_posterior_mode(config, out)
        elif config.mode == "conditional-check":
            _run_conditional_check(config, out)
        elif config.mode == "bivariate-demo":
            _run_bivariate_demo(config, out)
        elif config.mode == "benchmark":
            _run_benchmark(config, out)
        return EXIT_OK
    except PlausibilityFloor as exc:
        write_error(out / "error.yaml", exc)
        return EXIT_PLAUSIBILITY_FLOOR
    except Exception as exc:  # error record + nonzero exit, per contract
        write_error(out / "error.yaml", exc)
        return EXIT_ERROR


def _run_posterior_mode(config: RunConfig, out: Path) -> None:
    dataset = load_dataset(config.dataset, config.transforms)
    rset = parse_restrictions(config.restrictions)
    if tuple(rset.variables) != dataset.names:
        raise ConfigError(
            f"restriction variables {rset.variables} do not match dataset "
            f"columns {dataset.names}"
        )
    _, stats = estimate_reduced_form(dataset.values, config.lags)
    post = fit_niw(stats)
    date_map = dataset.innovation_index_map(config.lags)

    t0 = time.perf_counter()
    records = run_joint_sampler(
        post,
        rset,
        config.sampler,
        config.n_phi_kept,
        RngStream(config.seed),
        stats=stats,
        date_to_index=date_map,
        slice_cfg=config.slice_config(),
        ar_cfg=config.ar_config(),
        k_draws=config.k_draws,
        keep_feasible=(config.mode == "robust"),
        max_phi_attempts=config.max_phi_attempts,
        threads=config.effective_threads(),
    )
    wall = time.perf_counter() - t0

    write_draws(out / "draws.csv", records)
    write_irf_summary(
        out / "irf_summary.csv", records, config.horizon_max,
        config.alpha_levels, dataset.names, rset.shocks,
    )
    kept = [r for r in records if not r.empty]
    mean_ess = float(np.mean([r.ess_percent for r in kept]))
    effective = sum(r.ess_percent / 100.0 * len(r.Q_resampled) for r in kept)
    write_run_summary(
        out / "run_summary.yaml",
        {
            "mode": config.mode,
            "sampler": config.sampler,
            "delta": config.delta,
            "m_draws": config.m_draws,
            "kept_phi": len(kept),
            "phi_attempts": len(records),
            "plausibility_percent": posterior_plausibility(records),
            "mean_ess_percent": mean_ess,
            "wall_time_seconds": wall,
            "effective_draws_per_hour": effective / wall * 3600.0 if wall > 0 else 0.0,
            "seed": config.seed,
        },
    )
    if config.mode == "robust":
        alpha = config.alpha_levels[0]
        summary = summarize_robust(records, config.horizon_max, alpha)
        write_robust_summary(out / "robust_summary.csv", summary, dataset.names, rset.shocks)
        d = dataset.n * dataset.n * (config.horizon_max + 1)
        m_req = required_draws(d, 0.05, 0.05)
        deltas = np.linspace(0.01, 0.5, 50)
        write_isodraw(
            out / "isodraw.csv", d, m_req, deltas, iso_draw_curve(d, m_req, deltas)
        )


def _run_conditional_check(config: RunConfig, out: Path) -> None:
    from .posterior import _build_context

    dataset = load_dataset(config.dataset, config.transforms)
    rset = parse_restrictions(config.restrictions)
    _, stats = estimate_reduced_form(dataset.values, config.lags)
    post = fit_niw(stats)
    phi_star = post.phi_mean()
    context = _build_context(
        rset, phi_star, stats, dataset.innovation_index_map(config.lags)
    )
    t0 = time.perf_counter()
    report = conditional_posterior_check(
        phi_star,
        rset,
        RngStream(config.seed),
        m_draws=config.m_draws,
        slice_cfg=config.slice_config(),
        ar_cfg=config.ar_config(),
        context=context,
    )
    wall = time.perf_counter() - t0
    write_condcheck(
        out / "condcheck.csv", out / "conddraws.csv", report,
        dataset.names, rset.shocks,
    )
    write_run_summary(
        out / "run_summary.yaml",
        {
            "mode": "conditional-check",
            "sampler": "both",
            "delta": config.delta,
            "m_draws": config.m_draws,
            "ess_percent": report["ess_percent"],
            "wall_time_seconds": wall,
            "seed": config.seed,
        },
    )


def _bivariate_setup(config: RunConfig):
    from .bivariate import (
        BivariatePhi,
        connected_identified_set,
        connected_testbed,
        disconnected_identified_set,
        disconnected_testbed,
    )

    section = dict(config.bivariate or {})
    bphi = BivariatePhi(
        float(section.get("sigma11", 1.0)),
        float(section.get("sigma21", -0.5)),
        float(section.get("sigma22", 1.0)),
    )
    kind = section.get("testbed", "connected")
    if kind == "connected":
        omega_bar = float(section.get("omega_bar", 1.0))
        phi, rset = connected_testbed(omega_bar, bphi)
        oracle = connected_identified_set(bphi, omega_bar)
    elif kind == "disconnected":
        lam = float(section.get("lam", 0.5))
        phi, rset = disconnected_testbed(lam, bphi)
        oracle = disconnected_identified_set(bphi, lam)
    else:
        raise ConfigError(f"unknown bivariate testbed {kind!r}")
    return phi, rset, oracle


def _run_bivariate_demo(config: RunConfig, out: Path) -> None:
    from .bivariate import theta_of

    phi, rset, oracle = _bivariate_setup(config)
    batch = soft_sign_sample(
        phi, rset, config.slice_config(), RngStream(config.seed, 1)
    )
    thetas = np.empty(batch.size)
    branches = []
    for m in range(batch.size):
        t, b = theta_of(batch.Q[m])
        thetas[m] = t
        branches.append(b)
    write_theta_draws(
        out / "theta_slice.csv", thetas, branches, batch.weights, oracle.intervals
    )
    K = config.k_draws or batch.size
    idx = batch.resample_indices(K, RngStream(config.seed, 2).generator())
    write_theta_draws(
        out / "theta_resampled.csv",
        thetas[idx],
        [branches[i] for i in idx],
        None,
        oracle.intervals,
    )
    write_run_summary(
        out / "run_summary.yaml",
        {
            "mode": "bivariate-demo",
            "sampler": "soft-sign",
            "delta": config.delta,
            "m_draws": config.m_draws,
            "ess_percent": batch.ess_percent,
            "feasible_count": batch.feasible_count,
            "oracle_intervals": [[float(a), float(b)] for a, b in oracle.intervals],
            "seed": config.seed,
        },
    )


def _run_benchmark(config: RunConfig, out: Path) -> None:
    from .bivariate import connected_testbed
    from .samplers import accept_reject_draw

    section = dict(config.benchmark or {})
    omega_bars = [float(x) for x in section.get("omega_bars", [1.0, 0.1, 0.01])]
    deltas = [float(x) for x in section.get("deltas", [0.1, 0.01, 0.001, 0.0001])]
    m_draws = int(section.get("m_draws", 10_000))
    reps = int(section.get("replications", 5))
    ar_budget_mult = int(section.get("ar_budget_mult", 50))

    rows: list[dict] = []
    stream = RngStream(config.seed, 777)
    tag = 0
    for omega_bar in omega_bars:
        phi, rset = connected_testbed(omega_bar)
        # accept-reject benchmark: fixed candidate budget, count accepts
        times, accepted = [], []
        for _ in range(reps):
            tag += 1
            gen = stream.child(tag).generator()
            cfg = AcceptRejectConfig(max_attempts=ar_budget_mult * m_draws)
            got = 0
            t0 = time.perf_counter()
            budget = cfg.max_attempts
            while budget > 0:
                Q, att = accept_reject_draw(
                    phi, rset, AcceptRejectConfig(max_attempts=budget), gen
                )
                budget -= att
                if Q is None:
                    break
                got += 1
                if got >= m_draws:
                    break
            times.append(time.perf_counter() - t0)
            accepted.append(got)
        secs = float(np.mean(times))
        eff = float(np.mean(accepted)) / secs if secs > 0 else 0.0
        rows.append(
            {
                "algorithm": "accept-reject",
                "omega_bar": omega_bar,
                "delta": None,
                "seconds": secs,
                "ess_percent": 100.0,
                "effective_draws_per_second": eff,
            }
        )
        for delta in deltas:
            times, esss = [], []
            for _ in range(reps):
                tag += 1
                cfg = SliceConfig(m_draws=m_draws, delta=delta)
                t0 = time.perf_counter()
                batch = soft_sign_sample(phi, rset, cfg, stream.child(tag))
                times.append(time.perf_counter() - t0)
                esss.append(batch.ess_percent)
            secs = float(np.mean(times))
            ess = float(np.mean(esss))
            rows.append(
                {
                    "algorithm": "soft-sign",
                    "omega_bar": omega_bar,
                    "delta": delta,
                    "seconds": secs,
                    "ess_percent": ess,
                    "effective_draws_per_second": ess / 100.0 * m_draws / secs,
                }
            )
    write_benchmark(out / "benchmark.csv", rows)
    write_run_summary(
        out / "run_summary.yaml",
        {
            "mode": "benchmark",
            "m_draws": m_draws,
            "replications": reps,
            "omega_bars": omega_bars,
            "deltas": deltas,
            "seed": config.seed,
        },
    )
