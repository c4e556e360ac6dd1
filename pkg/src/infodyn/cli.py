"""Config-driven experiment runner.

Reads a flat key=value config, runs one named experiment at desk scale,
and writes plot-ready CSV files plus a manifest.json recording the config
hash, the effective seed, and the artifact list.  Outputs are a pure
function of (config, seed): rerunning produces byte-identical files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

import numpy as np

from . import clustering as cl
from . import dynamics as dyn
from . import filtering as flt
from . import rng
from . import sampling as smp
from . import theory as th
from .simplex import Distribution

KNOWN_KEYS = {
    "experiment", "N", "n", "dt", "t0", "t_end", "fine_step", "replications",
    "ell", "seed", "gamma", "epsilon", "s0", "i0", "r0", "p", "t", "count",
    "groups", "output_stride", "half_width", "shape",
}

EXPERIMENTS = {}


def experiment(name):
    def register(fn):
        EXPERIMENTS[name] = fn
        return fn
    return register


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict:
    """Parse `key = value` lines; '#' starts a comment."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r} (known: {sorted(KNOWN_KEYS)})")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        cfg[key] = value
    if "experiment" not in cfg:
        raise ConfigError("config must set 'experiment'")
    return cfg


def _get(cfg, key, default, conv):
    if key not in cfg:
        return default
    try:
        return conv(cfg[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {cfg[key]!r} ({exc})") from exc


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _fmt(x) -> str:
    return f"{x:.17g}" if isinstance(x, float) else str(x)


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _model(cfg) -> tuple[dyn.SirParams, float, float]:
    n_var = _get(cfg, "N", 9, int) + 1
    dt = _get(cfg, "dt", 0.25, float)
    t_end = _get(cfg, "t_end", 10.0, float)
    fine_step = _get(cfg, "fine_step", dt / 250.0, float)
    s0 = _get(cfg, "s0", 0.9445, float)
    r0 = _get(cfg, "r0", 0.0, float)
    if "groups" in cfg:
        params = dyn.grouped_sir_params(_int_list(cfg["groups"]), s0=s0, r0=r0)
    elif "gamma" in cfg or "epsilon" in cfg or "i0" in cfg:
        base = dyn.default_sir_params(n_var, s0=s0, r0=r0)
        gamma = np.array(_get(cfg, "gamma", list(base.gamma), _float_list))
        epsilon = np.array(_get(cfg, "epsilon", list(base.epsilon), _float_list))
        i0 = np.array(_get(cfg, "i0", list(base.i0), _float_list))
        params = dyn.SirParams(gamma, epsilon, s0, i0, r0)
    else:
        params = dyn.default_sir_params(n_var, s0=s0, r0=r0)
    return params, t_end, fine_step


def _two_point_grid(t: float, dt: float) -> smp.SampleGrid:
    return smp.SampleGrid(t - dt / 2.0, dt, 2)


@experiment("distance-moments")
def run_distance_moments(cfg, outdir, seed, threads):
    p = Distribution(_get(cfg, "p", [0.1, 0.2, 0.3, 0.4], _float_list))
    ns = _get(cfg, "n", [100, 1000, 10000], _int_list)
    reps = _get(cfg, "replications", 2000, int)
    N = len(p) - 1
    rows = []
    for i, n in enumerate(ns):
        def draw(rep_seed):
            counts = rng.sample_counts(p.probs, n, rng.stream(rep_seed))
            diff = counts / n - p.probs
            return float(np.sum(diff * diff / p.probs))
        est = smp.monte_carlo(draw, reps, seed=rng.derive_key(seed, i), threads=threads)
        mean_th, var_th = th.distance_moments(N, n)
        rows.append((n, est.mean, est.standard_error, est.std**2, mean_th, var_th))
    write_csv(os.path.join(outdir, "distance_moments.csv"),
              ["n", "mc_mean", "mc_se", "mc_var", "theory_mean", "theory_var"], rows)
    return ["distance_moments.csv"]


@experiment("model-trajectory")
def run_model_trajectory(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    stride = _get(cfg, "output_stride", 25, int)
    sub = dyn.Trajectory(
        traj.times[::stride].copy(), traj.p[::stride].copy(),
        traj.pdot[::stride].copy(), traj.susceptible[::stride].copy(),
        traj.couplings[::stride].copy(), traj.mean_coupling[::stride].copy(),
        traj.infected[::stride].copy(), traj.recovered[::stride].copy(),
        traj.params,
    )
    dyn.trajectory_to_csv(sub, os.path.join(outdir, "trajectory.csv"))

    count = _get(cfg, "count", int(round(t_end / dt)) + 1, int)
    grid = smp.SampleGrid(_get(cfg, "t0", 0.0, float), dt, count)
    ell = _get(cfg, "ell", 3, int)
    f = cl.kmeans(cl.kmeans_features(traj, grid), ell)
    cl.clustering_to_csv(f, os.path.join(outdir, "clustering.csv"))

    labels = f.labels0()
    members = np.zeros((traj.n_variants, f.n_clusters))
    members[np.arange(traj.n_variants), labels] = 1.0
    q = traj.p @ members
    qdot = traj.pdot @ members
    g = traj.fisher_curve()
    g_f = np.sum(qdot * qdot / q, axis=1)
    write_csv(os.path.join(outdir, "fisher.csv"), ["t", "g_tt", "g_f"],
              zip(traj.times[::stride], g[::stride], g_f[::stride]))
    return ["trajectory.csv", "clustering.csv", "fisher.csv"]


@experiment("fisher-bias-vs-n")
def run_fisher_bias_vs_n(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    t = _get(cfg, "t", 5.0, float)
    ns = _get(cfg, "n", [10000, 30000, 100000], _int_list)
    reps = _get(cfg, "replications", 500, int)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    g_tt = float(traj.fisher_curve()[traj.index_at(t)])
    N = traj.n_variants - 1
    grid = _two_point_grid(t, dt)
    rows = []
    for i, n in enumerate(ns):
        def draw(rep_seed):
            return smp.fisher_hat(smp.sample_trajectory(traj, grid, n, rep_seed), 0)
        est = smp.monte_carlo(draw, reps, seed=rng.derive_key(seed, i), threads=threads)
        pred = th.fisher_prediction(g_tt, N, n, dt)
        rows.append((n, est.mean, est.standard_error, pred.expected_value, pred.std))
    write_csv(os.path.join(outdir, "fisher_bias_vs_n.csv"),
              ["n", "mc_mean", "mc_se", "theory_mean", "theory_sd"], rows)
    return ["fisher_bias_vs_n.csv"]


@experiment("fisher-bias-vs-t")
def run_fisher_bias_vs_t(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    n = _get(cfg, "n", [100000], _int_list)[0]
    reps = _get(cfg, "replications", 500, int)
    count = _get(cfg, "count", int(round(t_end / dt)) + 1, int)
    grid = smp.SampleGrid(_get(cfg, "t0", 0.0, float), dt, count)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    N = traj.n_variants - 1

    def draw(rep_seed):
        sampled = smp.sample_trajectory(traj, grid, n, rep_seed)
        return [smp.fisher_hat(sampled, k) for k in range(count - 1)]

    ests = smp.monte_carlo_components(draw, reps, seed=seed, threads=threads)
    g = traj.fisher_curve()
    rows = []
    for k, est in enumerate(ests):
        t_mid = grid.midpoint(k)
        pred = th.fisher_prediction(float(g[traj.index_at(t_mid)]), N, n, dt)
        rows.append((t_mid, est.mean, est.standard_error, pred.expected_value, pred.std))
    write_csv(os.path.join(outdir, "fisher_bias_vs_t.csv"),
              ["t", "mc_mean", "mc_se", "theory_mean", "theory_sd"], rows)
    return ["fisher_bias_vs_t.csv"]


@experiment("info-rate-moments")
def run_info_rate_moments(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    t = _get(cfg, "t", 5.0, float)
    ns = _get(cfg, "n", [1000, 10000, 100000], _int_list)
    reps = _get(cfg, "replications", 1000, int)
    ell = _get(cfg, "ell", 3, int)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    grid = _two_point_grid(t, dt)
    k_mid = traj.index_at(t)
    p_mid = traj.p[k_mid]
    rate = traj.info_rate_curve()[k_mid]
    f = cl.kmeans(cl.kmeans_features(traj, smp.SampleGrid(0.0, dt, int(round(t_end / dt)) + 1)), ell)
    q_mid = cl.aggregate(p_mid, f)
    qdot = cl.aggregate(traj.pdot[k_mid], f)
    cluster_rate = qdot / q_mid

    var_rows, clu_rows = [], []
    for i, n in enumerate(ns):
        def draw_var(rep_seed):
            return smp.info_rate_hat(smp.sample_trajectory(traj, grid, n, rep_seed), 0)

        def draw_clu(rep_seed):
            return smp.cluster_info_rate_hat(
                smp.sample_trajectory(traj, grid, n, rep_seed), 0, f)

        ests = smp.monte_carlo_components(draw_var, reps, seed=rng.derive_key(seed, 2 * i), threads=threads)
        for mu, est in enumerate(ests):
            m_th, v_th = th.info_rate_moments(float(rate[mu]), float(p_mid[mu]), n, dt)
            var_rows.append((n, mu + 1, est.mean, est.standard_error, est.std**2, m_th, v_th))
        ests = smp.monte_carlo_components(draw_clu, reps, seed=rng.derive_key(seed, 2 * i + 1), threads=threads)
        for a, est in enumerate(ests):
            m_th, v_th = th.cluster_info_rate_moments(float(cluster_rate[a]), float(q_mid[a]), n, dt)
            clu_rows.append((n, a + 1, est.mean, est.standard_error, est.std**2, m_th, v_th))

    header = ["n", "idx", "mc_mean", "mc_se", "mc_var", "theory_mean", "theory_var"]
    write_csv(os.path.join(outdir, "info_rate_variants.csv"), header, var_rows)
    write_csv(os.path.join(outdir, "info_rate_clusters.csv"), header, clu_rows)
    cl.clustering_to_csv(f, os.path.join(outdir, "clustering.csv"))
    return ["info_rate_variants.csv", "info_rate_clusters.csv", "clustering.csv"]


@experiment("filtering-comparison")
def run_filtering_comparison(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    n = _get(cfg, "n", [250000], _int_list)[0]
    count = _get(cfg, "count", 31, int)
    grid = smp.SampleGrid(_get(cfg, "t0", 2.5, float), dt, count)
    kernel = flt.gaussian_kernel(_get(cfg, "half_width", 3, int),
                                 _get(cfg, "shape", 4.0 / 9.0, float))
    traj = dyn.integrate_sir(params, t_end, fine_step)
    sampled = smp.sample_trajectory(traj, grid, n, seed)
    rates = traj.info_rate_curve()
    true_rates = np.stack([rates[traj.index_at(tm)] for tm in grid.midpoints()])
    raw = np.stack([smp.info_rate_hat(sampled, k) for k in range(count - 1)])
    filt_p = flt.filter_probs(sampled.counts / n, kernel)
    filt = np.stack([smp.info_rate_between(filt_p[k], filt_p[k + 1], dt)
                     for k in range(count - 1)])
    rmse_raw = np.sqrt(np.mean((raw - true_rates) ** 2, axis=0))
    rmse_filt = np.sqrt(np.mean((filt - true_rates) ** 2, axis=0))
    write_csv(os.path.join(outdir, "filtering_rmse.csv"),
              ["mu", "rmse_raw", "rmse_filtered"],
              [(mu + 1, float(rr), float(rf))
               for mu, (rr, rf) in enumerate(zip(rmse_raw, rmse_filt))])
    return ["filtering_rmse.csv"]


@experiment("elbow-scan")
def run_elbow_scan(cfg, outdir, seed, threads):
    if "groups" not in cfg:
        cfg = dict(cfg, groups="9,9,8,8,8,8")
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    t_eval = _get(cfg, "t", 1.0, float)
    ells = _get(cfg, "ell", list(range(4, 11)), _int_list)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    grid = smp.SampleGrid(0.0, dt, int(round(t_end / dt)) + 1)
    feats = cl.kmeans_features(traj, grid)
    k_eval = traj.index_at(t_eval)
    from .simplex import TangentVector
    p = Distribution(traj.p[k_eval])
    pdot = TangentVector(traj.pdot[k_eval])
    curve = [(ell, cl.delta_g_prob_form(p, pdot, cl.kmeans(feats, ell))) for ell in ells]
    cl.delta_curve_to_csv(curve, os.path.join(outdir, "elbow_curve.csv"))
    ell_star = cl.elbow_select(curve)
    with open(os.path.join(outdir, "elbow_summary.csv"), "w", newline="") as fh:
        fh.write("ell_star," + str(ell_star) + "\n")
    return ["elbow_curve.csv", "elbow_summary.csv"]


@experiment("theory-vs-mc")
def run_theory_vs_mc(cfg, outdir, seed, threads):
    params, t_end, fine_step = _model(cfg)
    dt = _get(cfg, "dt", 0.25, float)
    t = _get(cfg, "t", 5.0, float)
    n = _get(cfg, "n", [10000], _int_list)[0]
    reps = _get(cfg, "replications", 1000, int)
    ell = _get(cfg, "ell", 3, int)
    traj = dyn.integrate_sir(params, t_end, fine_step)
    N = traj.n_variants - 1
    grid = _two_point_grid(t, dt)
    k_mid = traj.index_at(t)
    g_tt = float(traj.fisher_curve()[k_mid])
    f = cl.kmeans(cl.kmeans_features(traj, smp.SampleGrid(0.0, dt, int(round(t_end / dt)) + 1)), ell)
    q = cl.aggregate(traj.p[k_mid], f)
    qdot = cl.aggregate(traj.pdot[k_mid], f)
    g_f = float(np.sum(qdot * qdot / q))

    rows = []

    def add(label, mc_value, mc_se, theory_value):
        rows.append((label, mc_value, mc_se, theory_value))

    p4 = Distribution(_get(cfg, "p", [0.1, 0.2, 0.3, 0.4], _float_list))

    def draw_dist(rep_seed):
        counts = rng.sample_counts(p4.probs, 1000, rng.stream(rep_seed))
        diff = counts / 1000 - p4.probs
        return float(np.sum(diff * diff / p4.probs))

    est = smp.monte_carlo(draw_dist, reps, seed=rng.derive_key(seed, 0), threads=threads)
    mean_th, var_th = th.distance_moments(len(p4) - 1, 1000)
    add("distance_mean", est.mean, est.standard_error, mean_th)
    add("distance_var", est.std**2, est.std**2 * np.sqrt(2.0 / (reps - 1)), var_th)

    def draw_fisher(rep_seed):
        return smp.fisher_hat(smp.sample_trajectory(traj, grid, n, rep_seed), 0)

    est = smp.monte_carlo(draw_fisher, reps, seed=rng.derive_key(seed, 1), threads=threads)
    pred = th.fisher_prediction(g_tt, N, n, dt)
    add("fisher_mean", est.mean, est.standard_error, pred.expected_value)
    add("fisher_var", est.std**2, est.std**2 * np.sqrt(2.0 / (reps - 1)), pred.variance)

    def draw_cfisher(rep_seed):
        return smp.clustered_fisher_hat(smp.sample_trajectory(traj, grid, n, rep_seed), 0, f)

    est = smp.monte_carlo(draw_cfisher, reps, seed=rng.derive_key(seed, 2), threads=threads)
    cpred = th.clustered_fisher_prediction(g_f, ell, n, dt)
    add("clustered_fisher_mean", est.mean, est.standard_error, cpred.expected_value)
    add("clustered_fisher_var", est.std**2, est.std**2 * np.sqrt(2.0 / (reps - 1)), cpred.variance)

    rate = traj.info_rate_curve()[k_mid]

    def draw_rate(rep_seed):
        return smp.info_rate_hat(smp.sample_trajectory(traj, grid, n, rep_seed), 0)

    ests = smp.monte_carlo_components(draw_rate, reps, seed=rng.derive_key(seed, 3), threads=threads)
    m_th, v_th = th.info_rate_moments(float(rate[0]), float(traj.p[k_mid][0]), n, dt)
    add("info_rate_mean_mu1", ests[0].mean, ests[0].standard_error, m_th)
    add("info_rate_var_mu1", ests[0].std**2, ests[0].std**2 * np.sqrt(2.0 / (reps - 1)), v_th)

    write_csv(os.path.join(outdir, "theory_vs_mc.csv"),
              ["quantity", "mc_value", "mc_se", "theory_value"], rows)
    return ["theory_vs_mc.csv"]


def run(config_path, outdir, seed_override=None, threads: int = 1) -> list[str]:
    """Execute the configured experiment; returns the artifact list."""
    with open(config_path, "rb") as fh:
        raw = fh.read()
    cfg = parse_config(raw.decode("utf-8"))
    name = cfg["experiment"]
    if name not in EXPERIMENTS:
        raise ConfigError(
            f"unknown experiment {name!r}; valid: {sorted(EXPERIMENTS)}")
    seed = seed_override if seed_override is not None else _get(cfg, "seed", 1, int)
    if threads == 0:
        threads = os.cpu_count() or 1
    os.makedirs(outdir, exist_ok=True)
    artifacts = EXPERIMENTS[name](cfg, outdir, seed, threads)
    manifest = {
        "experiment": name,
        "config_sha256": hashlib.sha256(raw).hexdigest(),
        "seed": seed,
        "artifacts": sorted(artifacts),
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sorted(artifacts) + ["manifest.json"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="infodyn",
        description="Run a sampled-dynamics experiment from a key=value config.",
    )
    parser.add_argument("--config", required=True, help="path to the config file")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="Monte Carlo worker threads (0 = auto)")
    args = parser.parse_args(argv)
    try:
        artifacts = run(args.config, args.out, args.seed, args.threads)
    except (ConfigError, FileNotFoundError, ValueError,
            dyn.IntegrationError, smp.MonteCarloError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for name in artifacts:
        print(os.path.join(args.out, name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
