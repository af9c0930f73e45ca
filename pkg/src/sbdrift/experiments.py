"""Experiment drivers: preflight, rate/adaptivity, CLT, edge, stress.

Every driver takes a resolved ExperimentConfig, runs its repetitions on
derived per-repetition RNG streams, and writes raw CSVs, processed
summaries, figure files, and a JSON manifest (config hash, seed,
versions) under <output>/{raw,processed,figures}.  Repetitions are the
unit of parallelism; records are aggregated in repetition-index order,
so raw outputs are bit-identical for any thread count.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import backend
from .bandwidth import (
    BandwidthGrid,
    build_grid,
    grid_ise,
    oracle_from_stack,
    oracle_ratio,
    select_from_stack,
    sup_grid_error,
)
from .config import ExperimentConfig, config_sha256, resolve_config
from .errors import EstimatorFlooredError
from .estimator import FloorSpec, bandwidth_stack, estimate_drift, estimate_drift_grid
from .inference import (
    CltRecord,
    anderson_darling,
    confidence_interval,
    ols_slope,
    plugin_variance,
    qq_data,
    standardized_stat,
    theory_secant_slope,
)
from .figures import line_plot
from .models import make_law, sample_dataset
from .streams import derive_stream
from .truth import (
    IntervalSpec,
    Query,
    evaluation_grid,
    preflight,
    save_truth_cache,
    PREFLIGHT_COLUMNS,
)


@dataclass(frozen=True)
class RunArtifacts:
    raw: list[str]
    processed: list[str]
    figures: list[str]
    manifest: str


# ---------------------------------------------------------------------------
# shared plumbing


def _interval(cfg: ExperimentConfig) -> IntervalSpec:
    return IntervalSpec(s=cfg.interval_s, u=cfg.interval_u, eta=cfg.interval_eta)


def _eval_grid(cfg: ExperimentConfig) -> np.ndarray:
    return evaluation_grid(cfg.eval_lo, cfg.eval_hi, cfg.eval_points, cfg.dim)


def _floors_from(report) -> FloorSpec:
    return FloorSpec(f_min=0.5 * report.min_f_grid, d_min=0.5 * report.min_dstar)


def _parallel_map(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fmt_cell(v) -> str:
    if v is None:
        return "na"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header, rows) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])
    return str(path)


def _out_dirs(cfg: ExperimentConfig) -> dict[str, Path]:
    root = Path(cfg.output)
    dirs = {name: root / name for name in ("raw", "processed", "figures")}
    for p in dirs.values():
        p.mkdir(parents=True, exist_ok=True)
    return dirs


def _versions() -> dict:
    import numpy
    import scipy

    out = {
        "python": sys.version.split()[0],
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }
    try:
        import numba

        out["numba"] = numba.__version__
    except ImportError:
        pass
    return out


def _write_manifest(
    dirs, experiment: str, cfg: ExperimentConfig, artifacts: dict
) -> str:
    manifest = {
        "experiment": experiment,
        "config_sha256": config_sha256(cfg),
        "seed": cfg.seed,
        "backend": backend.active_backend(),
        "versions": _versions(),
        **{k: sorted(Path(p).name for p in v) for k, v in artifacts.items()},
    }
    path = dirs["processed"] / f"{experiment}_{cfg.testbed}_manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return str(path)


def apply_overrides(
    cfg: ExperimentConfig,
    out: str | None = None,
    seed: int | None = None,
    threads: int | None = None,
) -> ExperimentConfig:
    updates = {}
    if out is not None:
        updates["output"] = str(out)
    if seed is not None:
        updates["seed"] = int(seed)
    if threads is not None:
        updates["threads"] = int(threads)
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _testbed_subconfig(cfg: ExperimentConfig, testbed: str) -> ExperimentConfig:
    """Per-testbed view for multi-testbed preflight: testbed-specific
    keys fall back to that testbed's protocol defaults."""
    if testbed == cfg.testbed:
        return cfg
    keep = {"variant", "seed", "threads", "output", "interval",
            "conditioning_grid_points"}
    data = {k: v for k, v in cfg.raw.items() if k in keep}
    data["testbed"] = testbed
    return resolve_config(data)


# ---------------------------------------------------------------------------
# preflight


def run_preflight(cfg: ExperimentConfig) -> RunArtifacts:
    """Truth-engine diagnostics per configured testbed, frozen to CSV."""
    dirs = _out_dirs(cfg)
    rows = []
    cache_paths = []
    for testbed in cfg.preflight_testbeds:
        sub = _testbed_subconfig(cfg, testbed)
        law = make_law(sub.testbed, sub.variant)
        report = preflight(
            law,
            _interval(sub),
            sub.t0,
            np.array(sub.xi0),
            _eval_grid(sub),
            conditioning_grid_points=sub.conditioning_grid_points,
        )
        rows.append([report.row()[c] for c in PREFLIGHT_COLUMNS])
        cache_path = dirs["processed"] / f"truth_cache_{testbed}_{sub.variant}.csv"
        save_truth_cache(report.cache, cache_path)
        cache_paths.append(str(cache_path))
    raw_path = _write_csv(dirs["raw"] / "preflight.csv", PREFLIGHT_COLUMNS, rows)
    manifest = _write_manifest(
        dirs,
        "preflight",
        cfg,
        {"raw_files": [raw_path], "processed_files": cache_paths, "figure_files": []},
    )
    return RunArtifacts(
        raw=[raw_path], processed=cache_paths, figures=[], manifest=manifest
    )


# ---------------------------------------------------------------------------
# rate / adaptivity


def _rate_rep(law, interval, cfg, grid, truth_cache, floors, xgrid, M, rep):
    rng = derive_stream(cfg.seed, ("rate", cfg.testbed, cfg.variant, M, rep))
    sample = sample_dataset(law, M, rng)
    stack = bandwidth_stack(
        sample, interval, cfg.t0, np.array(cfg.xi0), xgrid, grid.values, floors
    )
    oracle = oracle_from_stack(stack, grid, truth_cache)
    sel = select_from_stack(stack, grid, M, cfg.kappa_pair, cfg.kappa_final)
    err_hat = float(oracle.errors[sel.index])
    per_h = [
        [
            cfg.testbed,
            M,
            rep,
            float(grid.values[i]),
            float(oracle.errors[i]),
            grid_ise(stack.values[i], truth_cache.astar, xgrid),
            float(np.mean(stack.floor_triggered[i])),
        ]
        for i in range(len(grid))
    ]
    selected = [
        cfg.testbed,
        M,
        rep,
        oracle.h_or,
        sel.selected_h,
        float(oracle.errors[oracle.index]),
        err_hat,
        oracle_ratio(err_hat, float(oracle.errors[oracle.index])),
        sel.boundary_hit,
    ]
    return per_h, selected


RATE_SELECTED_COLUMNS = (
    "testbed", "M", "rep", "h_or", "h_hat", "err_or", "err_hat", "gamma",
    "boundary_hit",
)
RATE_PER_H_COLUMNS = ("testbed", "M", "rep", "h", "sup_err", "ise", "floor_frac")


def run_rate(cfg: ExperimentConfig) -> RunArtifacts:
    """Rate and adaptivity experiment over the configured M grid."""
    dirs = _out_dirs(cfg)
    law = make_law(cfg.testbed, cfg.variant)
    interval = _interval(cfg)
    xgrid = _eval_grid(cfg)
    report = preflight(
        law, interval, cfg.t0, np.array(cfg.xi0), xgrid,
        conditioning_grid_points=cfg.conditioning_grid_points,
    )
    floors = _floors_from(report)
    cache = report.cache

    per_h_rows, selected_rows = [], []
    summary_rows = []
    gamma_bars, mean_err_or, mean_err_hat = [], [], []
    for M in cfg.m_values:
        grid = build_grid(M, cfg.dim, h0=cfg.h0)
        results = _parallel_map(
            lambda rep: _rate_rep(
                law, interval, cfg, grid, cache, floors, xgrid, M, rep
            ),
            range(cfg.rate_reps),
            cfg.threads,
        )
        err_or = np.array([sel[5] for _, sel in results])
        err_hat = np.array([sel[6] for _, sel in results])
        gammas = np.array([sel[7] for _, sel in results])
        boundary = np.array([sel[8] for _, sel in results], dtype=float)
        for ph, sel in results:
            per_h_rows.extend(ph)
            selected_rows.append(sel)
        gamma_bars.append(float(np.mean(gammas)))
        mean_err_or.append(float(np.mean(err_or)))
        mean_err_hat.append(float(np.mean(err_hat)))
        summary_rows.append(
            [
                cfg.testbed,
                M,
                cfg.rate_reps,
                mean_err_or[-1],
                mean_err_hat[-1],
                gamma_bars[-1],
                float(np.mean([sel[3] for _, sel in results])),
                float(np.mean([sel[4] for _, sel in results])),
                float(np.mean(boundary)),
            ]
        )

    raw_paths = [
        _write_csv(dirs["raw"] / f"rate_{cfg.testbed}_per_h.csv",
                   RATE_PER_H_COLUMNS, per_h_rows),
        _write_csv(dirs["raw"] / f"rate_{cfg.testbed}_selected.csv",
                   RATE_SELECTED_COLUMNS, selected_rows),
    ]

    m_arr = np.array(cfg.m_values, dtype=float)
    distinct = np.unique(m_arr).size
    if distinct >= 2:
        slope_or = ols_slope(np.log(m_arr), np.log(mean_err_or))
        slope_hat = ols_slope(np.log(m_arr), np.log(mean_err_hat))
        secant = theory_secant_slope(
            int(np.min(m_arr)), int(np.max(m_arr)), cfg.dim
        )
        note = ""
    else:
        slope_or = slope_hat = secant = None
        note = "insufficient points for slope"
    c_avg = float(np.mean(gamma_bars))
    c_max = float(np.max(gamma_bars))
    boundary_rate = float(np.mean([r[8] for r in selected_rows]))

    processed = [
        _write_csv(
            dirs["processed"] / f"rate_{cfg.testbed}_summary.csv",
            ("testbed", "M", "reps", "mean_err_or", "mean_err_hat", "gamma_bar",
             "mean_h_or", "mean_h_hat", "boundary_rate"),
            summary_rows,
        ),
        _write_csv(
            dirs["processed"] / f"rate_{cfg.testbed}_slopes.csv",
            ("testbed", "slope_oracle", "slope_selected", "theory_secant",
             "c_avg", "c_max", "boundary_rate", "note"),
            [[cfg.testbed, slope_or, slope_hat, secant, c_avg, c_max,
              boundary_rate, note]],
        ),
    ]
    cache_path = dirs["processed"] / f"truth_cache_{cfg.testbed}_{cfg.variant}.csv"
    save_truth_cache(cache, cache_path)
    processed.append(str(cache_path))

    figures = []
    if distinct >= 2:
        figures += line_plot(
            dirs["figures"] / f"rate_{cfg.testbed}",
            [("oracle", m_arr, mean_err_or), ("selected", m_arr, mean_err_hat)],
            title=f"{cfg.testbed} sup-grid error vs M",
            xlabel="M", ylabel="mean sup-grid error", logx=True, logy=True,
        )
        figures += line_plot(
            dirs["figures"] / f"adaptivity_{cfg.testbed}",
            [("gamma_bar", m_arr, gamma_bars)],
            title=f"{cfg.testbed} oracle ratio vs M",
            xlabel="M", ylabel="mean oracle ratio", logx=True,
        )
    manifest = _write_manifest(
        dirs, "rate", cfg,
        {"raw_files": raw_paths, "processed_files": processed,
         "figure_files": figures},
    )
    return RunArtifacts(raw=raw_paths, processed=processed, figures=figures,
                        manifest=manifest)


# ---------------------------------------------------------------------------
# CLT


def _clt_rep(law, interval, cfg, query, a_star, floors, M, h, rep):
    rng = derive_stream(cfg.seed, ("clt", cfg.testbed, cfg.variant, M, rep))
    sample = sample_dataset(law, M, rng)
    est = estimate_drift(sample, interval, query, h, h, floors)
    if est.floor_triggered:
        return CltRecord(rep, M, h, 0.0, a_star, float("nan"), float("nan"),
                         float("nan"), float("nan"), False), False
    try:
        sigma = plugin_variance(sample, interval, query, h, floors)
    except EstimatorFlooredError:
        sigma = float("nan")
    a_hat = float(est.value[0])
    if not np.isfinite(sigma) or sigma <= 0.0:
        return CltRecord(rep, M, h, a_hat, a_star, sigma, float("nan"),
                         float("nan"), float("nan"), False), False
    z = standardized_stat(a_hat, a_star, sigma, M, h, 1)
    ci = confidence_interval(a_hat, sigma, M, h, 1, a_star)
    return CltRecord(rep, M, h, a_hat, a_star, sigma, z, ci.lo, ci.hi,
                     ci.covered), True


CLT_COLUMNS = ("testbed", "M", "rep", "h", "a_hat", "a_star", "sigma_hat",
               "z", "ci_lo", "ci_hi", "covered")
CLT_SUMMARY_COLUMNS = ("testbed", "M", "mean_z", "var_z", "coverage_pct",
                       "ad_stat", "ad_reject")


def run_clt(cfg: ExperimentConfig) -> RunArtifacts:
    """Pointwise CLT experiment with undersmoothed h = c M^(-alpha)."""
    if cfg.dim != 1:
        raise ValueError("the CLT experiment is one-dimensional")
    if cfg.clt_alpha is None:
        raise ValueError("clt.alpha is required for this testbed")
    if cfg.x0 is None:
        raise ValueError("query.x0 is required for the CLT experiment")
    dirs = _out_dirs(cfg)
    law = make_law(cfg.testbed, cfg.variant)
    interval = _interval(cfg)
    query = Query(t=cfg.t0, x=np.array(cfg.x0), xi=np.array(cfg.xi0))
    report = preflight(
        law, interval, cfg.t0, np.array(cfg.xi0), _eval_grid(cfg),
        conditioning_grid_points=cfg.conditioning_grid_points,
    )
    floors = _floors_from(report)
    from .truth import true_drift

    a_star = float(true_drift(law, interval, query)[0])

    rows, summary_rows = [], []
    qq_paths = []
    per_m_z = {}
    for M in cfg.clt_m_values:
        h = cfg.clt_c * float(M) ** (-cfg.clt_alpha)
        results = _parallel_map(
            lambda rep: _clt_rep(law, interval, cfg, query, a_star, floors,
                                 M, h, rep),
            range(cfg.clt_reps),
            cfg.threads,
        )
        z_valid = np.array([r.z for r, ok in results if ok])
        covered = np.array([r.covered for r, ok in results if ok], dtype=float)
        for rec, ok in results:
            rows.append([
                cfg.testbed, rec.M, rec.rep, rec.h, rec.a_hat, rec.a_star,
                rec.sigma_hat if np.isfinite(rec.sigma_hat) else None,
                rec.z if ok else None,
                rec.ci_lo if ok else None,
                rec.ci_hi if ok else None,
                rec.covered if ok else None,
            ])
        if z_valid.size >= 2:
            ad = anderson_darling(z_valid)
            summary_rows.append([
                cfg.testbed, M, float(np.mean(z_valid)),
                float(np.var(z_valid, ddof=1)),
                100.0 * float(np.mean(covered)), ad.statistic, ad.reject_5pct,
            ])
            per_m_z[M] = z_valid
        else:
            summary_rows.append([cfg.testbed, M, None, None, None, None, None])

    raw_path = _write_csv(dirs["raw"] / f"clt_{cfg.testbed}_pointwise.csv",
                          CLT_COLUMNS, rows)
    processed = [
        _write_csv(dirs["processed"] / f"clt_{cfg.testbed}_summary.csv",
                   CLT_SUMMARY_COLUMNS, summary_rows)
    ]
    for M in sorted(per_m_z)[-2:]:
        pairs = qq_data(per_m_z[M])
        qq_paths.append(
            _write_csv(
                dirs["processed"] / f"clt_{cfg.testbed}_qq_M{M}.csv",
                ("theoretical", "empirical"),
                pairs.tolist(),
            )
        )
    processed += qq_paths

    figures = []
    if per_m_z:
        m_top = sorted(per_m_z)[-1]
        pairs = qq_data(per_m_z[m_top])
        lo = float(min(pairs[0, 0], pairs[0, 1]))
        hi = float(max(pairs[-1, 0], pairs[-1, 1]))
        figures += line_plot(
            dirs["figures"] / f"clt_qq_{cfg.testbed}_M{m_top}",
            [
                ("sample", pairs[:, 0], pairs[:, 1]),
                ("diagonal", [lo, hi], [lo, hi]),
            ],
            title=f"{cfg.testbed} QQ vs N(0,1), M={m_top}",
            xlabel="theoretical quantile", ylabel="sample quantile",
        )
    manifest = _write_manifest(
        dirs, "clt", cfg,
        {"raw_files": [raw_path], "processed_files": processed,
         "figure_files": figures},
    )
    return RunArtifacts(raw=[raw_path], processed=processed, figures=figures,
                        manifest=manifest)


# ---------------------------------------------------------------------------
# terminal edge


def _edge_rep(law, interval, cfg, grid, caches, floors, xgrid, t_values, rep):
    rng = derive_stream(cfg.seed, ("edge", cfg.testbed, cfg.variant,
                                   cfg.edge_m, rep))
    sample = sample_dataset(law, cfg.edge_m, rng)
    stack = bandwidth_stack(
        sample, interval, cfg.t0, np.array(cfg.xi0), xgrid, grid.values, floors
    )
    sel = select_from_stack(stack, grid, cfg.edge_m, cfg.kappa_pair,
                            cfg.kappa_final)
    rows = []
    for t in t_values:
        if abs(t - cfg.t0) < 1e-12:
            values = stack.values[sel.index]
        else:
            values = estimate_drift_grid(
                sample, interval, t, np.array(cfg.xi0), xgrid,
                sel.selected_h, floors
            ).values
        cache = caches[t]
        err = sup_grid_error(values, cache.astar)
        delta_t = interval.delta_t(t)
        rows.append([
            cfg.testbed, cfg.edge_m, rep, float(t),
            float(interval.u - t), sel.selected_h, err, delta_t * err,
            grid_ise(values, cache.astar, xgrid),
        ])
    return rows


EDGE_COLUMNS = ("testbed", "M", "rep", "t", "offset", "h_hat", "sup_err",
                "rescaled_err", "ise")


def run_edge(cfg: ExperimentConfig) -> RunArtifacts:
    """Terminal-edge experiment: bandwidth frozen at t0, t swept toward u."""
    dirs = _out_dirs(cfg)
    law = make_law(cfg.testbed, cfg.variant)
    interval = _interval(cfg)
    xgrid = _eval_grid(cfg)
    report = preflight(
        law, interval, cfg.t0, np.array(cfg.xi0), xgrid,
        conditioning_grid_points=cfg.conditioning_grid_points,
    )
    floors = _floors_from(report)
    t_values = [interval.u - off for off in cfg.edge_offsets]
    from .truth import build_truth_cache

    caches = {}
    for t in t_values:
        caches[t] = (
            report.cache
            if abs(t - cfg.t0) < 1e-12
            else build_truth_cache(law, interval, t, np.array(cfg.xi0), xgrid)
        )
    grid = build_grid(cfg.edge_m, cfg.dim, h0=cfg.h0)
    results = _parallel_map(
        lambda rep: _edge_rep(law, interval, cfg, grid, caches, floors,
                              xgrid, t_values, rep),
        range(cfg.edge_reps),
        cfg.threads,
    )
    rows = [row for rep_rows in results for row in rep_rows]
    raw_path = _write_csv(dirs["raw"] / f"edge_{cfg.testbed}.csv",
                          EDGE_COLUMNS, rows)

    flatter = 0
    raw_increasing = 0
    for rep_rows in results:
        raw_errs = np.array([r[6] for r in rep_rows])
        resc = np.array([r[7] for r in rep_rows])
        if np.max(resc) / np.min(resc) < np.max(raw_errs) / np.min(raw_errs):
            flatter += 1
        offs = np.array([r[4] for r in rep_rows])
        if raw_errs[np.argmin(offs)] > raw_errs[np.argmax(offs)]:
            raw_increasing += 1
    n_rep = len(results)

    mean_raw = [
        float(np.mean([r[6] for rep_rows in results for r in rep_rows
                       if r[3] == t]))
        for t in t_values
    ]
    mean_resc = [
        float(np.mean([r[7] for rep_rows in results for r in rep_rows
                       if r[3] == t]))
        for t in t_values
    ]
    mean_ise = [
        float(np.mean([r[8] for rep_rows in results for r in rep_rows
                       if r[3] == t]))
        for t in t_values
    ]
    processed = [
        _write_csv(
            dirs["processed"] / f"edge_{cfg.testbed}_summary.csv",
            ("testbed", "M", "t", "offset", "mean_sup_err",
             "mean_rescaled_err", "mean_ise"),
            [
                [cfg.testbed, cfg.edge_m, t, interval.u - t, a, b, c]
                for t, a, b, c in zip(t_values, mean_raw, mean_resc, mean_ise)
            ],
        ),
        _write_csv(
            dirs["processed"] / f"edge_{cfg.testbed}_flatness.csv",
            ("testbed", "reps", "frac_rescaled_flatter", "frac_raw_increasing"),
            [[cfg.testbed, n_rep, flatter / n_rep, raw_increasing / n_rep]],
        ),
    ]
    figures = line_plot(
        dirs["figures"] / f"edge_{cfg.testbed}",
        [
            ("sup error", t_values, mean_raw),
            ("rescaled", t_values, mean_resc),
        ],
        title=f"{cfg.testbed} terminal-edge error, M={cfg.edge_m}",
        xlabel="t", ylabel="mean error", logy=True,
    )
    manifest = _write_manifest(
        dirs, "edge", cfg,
        {"raw_files": [raw_path], "processed_files": processed,
         "figure_files": figures},
    )
    return RunArtifacts(raw=[raw_path], processed=processed, figures=figures,
                        manifest=manifest)


# ---------------------------------------------------------------------------
# bounded-support stress


def _stress_rep(law, interval, cfg, grid, cache, floors, xgrid, query,
                setting, rep):
    rng = derive_stream(cfg.seed, ("stress", cfg.testbed, setting,
                                   cfg.stress_m, rep))
    sample = sample_dataset(law, cfg.stress_m, rng)
    stack = bandwidth_stack(
        sample, interval, cfg.t0, np.array(cfg.xi0), xgrid, grid.values, floors
    )
    oracle = oracle_from_stack(stack, grid, cache)
    sel = select_from_stack(stack, grid, cfg.stress_m, cfg.kappa_pair,
                            cfg.kappa_final)
    err_hat = float(oracle.errors[sel.index])
    h_hat = sel.selected_h
    w = backend.kde_weights(sample.xs, np.array(cfg.xi0), h_hat)
    delta_t = interval.delta_t(query.t)
    fvec = backend.sb_weight_matrix(
        sample.xu, np.array(cfg.xi0), query.x[None, :], delta_t, interval.delta
    )[:, 0]
    w_den = fvec * w
    w_num = sample.xu[:, 0] * w_den
    est = estimate_drift(sample, interval, query, h_hat, h_hat, floors)
    return [
        cfg.testbed, setting, cfg.stress_m, rep, h_hat, sel.boundary_hit,
        float(np.var(w_num, ddof=1)), float(np.var(w_den, ddof=1)),
        est.dhat, err_hat,
        grid_ise(stack.values[sel.index], cache.astar, xgrid),
        float(oracle.errors[oracle.index]),
        oracle_ratio(err_hat, float(oracle.errors[oracle.index])),
        float(np.mean(stack.floor_triggered[sel.index])),
    ]


STRESS_COLUMNS = ("testbed", "setting", "M", "rep", "h_hat", "boundary_hit",
                  "var_wn", "var_wd", "dhat", "sup_err", "ise", "err_or",
                  "gamma", "floor_frac")
STRESS_SUMMARY_COLUMNS = ("testbed", "setting", "mean_var_wn", "mean_var_wd",
                          "tau_d", "pr_dhat_le_tau", "med_sup_err", "med_ise",
                          "mean_gamma", "mean_h_hat", "boundary_rate")


def run_stress(cfg: ExperimentConfig) -> RunArtifacts:
    """Compact-vs-wide support stress comparison at fixed M."""
    if cfg.testbed not in ("GG1", "MM1"):
        raise ValueError("stress experiment is defined for GG1 and MM1")
    if cfg.x0 is None:
        raise ValueError("query.x0 is required for the stress experiment")
    if cfg.dim != 1:
        raise ValueError("stress experiment is one-dimensional")
    dirs = _out_dirs(cfg)
    interval = _interval(cfg)
    xgrid = _eval_grid(cfg)
    query = Query(t=cfg.t0, x=np.array(cfg.x0), xi=np.array(cfg.xi0))
    grid = build_grid(cfg.stress_m, cfg.dim, h0=cfg.h0)

    per_setting = {}
    rows = []
    for setting in ("compact", "wide"):
        law = make_law(cfg.testbed, setting)
        report = preflight(
            law, interval, cfg.t0, np.array(cfg.xi0), xgrid,
            conditioning_grid_points=cfg.conditioning_grid_points,
        )
        floors = _floors_from(report)
        results = _parallel_map(
            lambda rep: _stress_rep(law, interval, cfg, grid, report.cache,
                                    floors, xgrid, query, setting, rep),
            range(cfg.stress_reps),
            cfg.threads,
        )
        rows.extend(results)
        per_setting[setting] = results

    raw_path = _write_csv(dirs["raw"] / f"stress_{cfg.testbed}.csv",
                          STRESS_COLUMNS, rows)

    tau_d = 0.25 * float(np.median([r[8] for r in per_setting["compact"]]))
    summary_rows = []
    for setting in ("compact", "wide"):
        rs = per_setting[setting]
        dhats = np.array([r[8] for r in rs])
        summary_rows.append([
            cfg.testbed, setting,
            float(np.mean([r[6] for r in rs])),
            float(np.mean([r[7] for r in rs])),
            tau_d,
            float(np.mean(dhats <= tau_d)),
            float(np.median([r[9] for r in rs])),
            float(np.median([r[10] for r in rs])),
            float(np.mean([r[12] for r in rs])),
            float(np.mean([r[4] for r in rs])),
            float(np.mean([r[5] for r in rs])),
        ])
    processed = [
        _write_csv(dirs["processed"] / f"stress_{cfg.testbed}_summary.csv",
                   STRESS_SUMMARY_COLUMNS, summary_rows)
    ]
    manifest = _write_manifest(
        dirs, "stress", cfg,
        {"raw_files": [raw_path], "processed_files": processed,
         "figure_files": []},
    )
    return RunArtifacts(raw=[raw_path], processed=processed, figures=[],
                        manifest=manifest)
