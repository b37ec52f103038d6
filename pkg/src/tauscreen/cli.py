"""Command-line workbench: simulate | screen | ingest-prices | bench | diagnose.

Every command accepts ``--config FILE`` with a JSON object of defaults;
explicit flags override config values, and unknown config keys are rejected.
Exit codes: 0 success, 1 runtime error, 2 usage error. All outputs are
deterministic functions of the flags and seed, byte-for-byte.
"""

from __future__ import annotations

import json
import os
import sys

import click
import numpy as np

from .diagnostics import check_assumptions, check_proposition1, hoeffding_bound, neighborhood_size_bound
from .errors import InvalidInputError, TauscreenError
from .evalbench import (
    ExperimentSpec,
    auc,
    default_grid,
    experiment_rows,
    estimator_matrix,
    roc_sweep,
    run_experiment,
    write_experiment_csv,
    write_json_report,
    write_sweep_csv,
)
from .io import (
    ingest_prices,
    read_data_csv,
    read_matrix_csv,
    read_price_csv,
    read_sector_csv,
    write_data_csv,
    write_matrix_csv,
    write_sector_tsv,
)
from .linalg import eig_extremes
from .rankcorr import jackknife_matrix
from .screening import (
    ThresholdSpec,
    connected_components,
    read_edges_tsv,
    screen_edges,
    threshold_matrix,
    write_edges_tsv,
    write_partition_tsv,
)
from .simgen import GroundTruth, RngStream, SimConfig, generate_ground_truth, sample

_BASE_FLAGS = {"gaussian": "gaussian", "t": "student-t"}
_TRANSFORM_FLAGS = {"none": "none", "npn": "nonparanormal"}


def _load_config(ctx, param, value):
    if value is None:
        return {}
    try:
        with open(value, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config {value}: {exc}")
    if not isinstance(doc, dict):
        raise click.UsageError(f"config {value} must hold a JSON object")
    return doc


def _merge(ctx: click.Context, config: dict) -> dict:
    """Layer config-file values under explicitly-given flags."""
    params = dict(ctx.params)
    params.pop("config", None)
    unknown = set(config) - set(params)
    if unknown:
        raise click.UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in config.items():
        source = ctx.get_parameter_source(key)
        if source is not None and source.name in ("DEFAULT", "DEFAULT_MAP"):
            params[key] = value
    return params


def _config_option(fn):
    return click.option("--config", callback=_load_config, default=None,
                        type=click.Path(), help="JSON file of flag defaults.",
                        )(fn)


def _threads_option(fn):
    return click.option("--threads", type=int, default=None,
                        help="Worker threads (default: machine parallelism).")(fn)


def _resolve_threads(threads):
    return threads if threads else (os.cpu_count() or 1)


def _echo_json(doc: dict) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


def _sim_config(params) -> SimConfig:
    try:
        return SimConfig(
            scenario=params["scenario"],
            n=params["n"],
            p=params["p"],
            base=_BASE_FLAGS[params["base"]],
            theta=params["theta"],
            transform=_TRANSFORM_FLAGS[params["transform"]],
            seed=params["seed"],
        )
    except InvalidInputError as exc:
        raise click.UsageError(str(exc))


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise click.UsageError(f"{flag}: {exc}")
    if not values:
        raise click.UsageError(f"{flag}: empty list")
    return values


def _parse_rate(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise click.UsageError("--rate expects 'C1,KAPPA'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise click.UsageError(f"--rate: {exc}")


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
@click.version_option(package_name="tauscreen")
def main():
    """Graph screening workbench built on rank correlations."""


@main.command()
@click.option("--scenario", type=click.Choice(["A", "B", "C", "D"]), default=None)
@click.option("--n", type=int, default=None)
@click.option("--p", type=int, default=None)
@click.option("--base", type=click.Choice(sorted(_BASE_FLAGS)), default="gaussian")
@click.option("--theta", type=float, default=5.0, help="Degrees of freedom for --base t.")
@click.option("--transform", type=click.Choice(sorted(_TRANSFORM_FLAGS)), default="none")
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", type=click.Path(), default=None)
@click.option("--prefix", default="sim")
@_config_option
@click.pass_context
def simulate(ctx, **_kwargs):
    """Generate a synthetic dataset plus its ground truth files."""
    params = _merge(ctx, ctx.params["config"])
    for key in ("scenario", "n", "p", "out_dir"):
        if params.get(key) is None:
            raise click.UsageError(f"--{key.replace('_', '-')} is required")
    cfg = _sim_config(params)
    try:
        rng = RngStream(cfg.seed)
        gt = generate_ground_truth(cfg, rng)
        data = sample(gt, cfg, rng)
        out_dir = params["out_dir"]
        os.makedirs(out_dir, exist_ok=True)
        prefix = os.path.join(out_dir, params["prefix"])
        write_data_csv(prefix + "_data.csv", data)
        write_matrix_csv(prefix + "_sigma.csv", gt.sigma)
        write_matrix_csv(prefix + "_precision.csv", gt.omega)
        write_edges_tsv(prefix + "_edges.tsv", gt.edges, gt.omega)
        cfg.write_json(prefix + "_config.json")
        lam_min, lam_max = eig_extremes(gt.sigma)
        _echo_json({"edge_count": len(gt.edges), "lambda_min": lam_min, "lambda_max": lam_max})
    except (TauscreenError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--data", "data_path", type=click.Path(), default=None)
@click.option("--gamma", type=float, default=None, help="Fixed threshold.")
@click.option("--rate", default=None, help="'C1,KAPPA' for the rate threshold (2/3)C1 n^-kappa.")
@click.option("--fpr-q", type=float, default=None, help="Target false-positive rate q in (0,1).")
@click.option("--fpr-f", type=float, default=None, help="Expected false-positive count budget f.")
@click.option("--estimator", type=click.Choice(["kendall", "pearson"]), default="kendall")
@click.option("--components", is_flag=True, default=False)
@click.option("--components-out", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--fpr-max-p", type=int, default=500,
              help="Refuse the O(p^2 n^2) jackknife path beyond this many columns.")
@_threads_option
@_config_option
@click.pass_context
def screen(ctx, **_kwargs):
    """Screen edges of a data CSV by thresholding a correlation estimate."""
    params = _merge(ctx, ctx.params["config"])
    if params.get("data_path") is None:
        raise click.UsageError("--data is required")
    if params.get("out") is None:
        raise click.UsageError("--out is required")
    modes = [name for name, key in (("--gamma", "gamma"), ("--rate", "rate"),
                                    ("--fpr-q", "fpr_q"), ("--fpr-f", "fpr_f"))
             if params.get(key) is not None]
    if len(modes) != 1:
        raise click.UsageError("exactly one of --gamma, --rate, --fpr-q, --fpr-f is required")
    if params["rate"] is not None:
        c1, kappa = _parse_rate(params["rate"])
        try:
            tspec = ThresholdSpec.rate(c1, kappa)
        except InvalidInputError as exc:
            raise click.UsageError(str(exc))
    elif params["gamma"] is not None:
        try:
            tspec = ThresholdSpec.fixed(params["gamma"])
        except InvalidInputError as exc:
            raise click.UsageError(str(exc))
    else:
        try:
            tspec = ThresholdSpec.fpr(f=params["fpr_f"], q=params["fpr_q"])
        except InvalidInputError as exc:
            raise click.UsageError(str(exc))

    threads = _resolve_threads(params["threads"])
    try:
        data = read_data_csv(params["data_path"])
        jack = None
        if tspec.mode == "fpr":
            if data.p > params["fpr_max_p"]:
                raise InvalidInputError(
                    f"p={data.p} exceeds --fpr-max-p={params['fpr_max_p']}; "
                    "the jackknife path costs O(p^2 n^2)")
            jack = jackknife_matrix(data, threads=threads)
        corr = estimator_matrix(data, params["estimator"], threads=threads)
        gammas = threshold_matrix(tspec, data.n, data.p, jack=jack)
        edges = screen_edges(corr, gammas)
        write_edges_tsv(params["out"], edges, corr)
        summary = {"edge_count": len(edges), "n": data.n, "p": data.p}
        if params["components"] or params["components_out"]:
            part = connected_components(edges)
            comp_path = params["components_out"] or params["out"] + ".components.tsv"
            write_partition_tsv(comp_path, part)
            summary["components"] = part.n_components
        _echo_json(summary)
    except (TauscreenError, OSError) as exc:
        _fail(exc)


@main.command("ingest-prices")
@click.option("--prices", "prices_path", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--sectors", "sectors_path", type=click.Path(), default=None,
              help="Optional ticker,sector CSV carried through to --sectors-out.")
@click.option("--sectors-out", type=click.Path(), default=None)
@_config_option
@click.pass_context
def ingest_prices_cmd(ctx, **_kwargs):
    """Turn a price table into a standardized log-return data CSV."""
    params = _merge(ctx, ctx.params["config"])
    if params.get("prices_path") is None:
        raise click.UsageError("--prices is required")
    if params.get("out") is None:
        raise click.UsageError("--out is required")
    try:
        sectors = read_sector_csv(params["sectors_path"]) if params["sectors_path"] else None
        table = read_price_csv(params["prices_path"], sectors=sectors)
        returns = ingest_prices(table)
        write_data_csv(params["out"], returns)
        if table.sectors is not None:
            write_sector_tsv(params["sectors_out"] or params["out"] + ".sectors.tsv", table)
        _echo_json({"rows": returns.n, "tickers": returns.p})
    except (TauscreenError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--mode", type=click.Choice(["table", "sweep"]), default="table")
@click.option("--scenario", type=click.Choice(["A", "B", "C", "D"]), default=None)
@click.option("--n", type=int, default=100)
@click.option("--p", type=int, default=200)
@click.option("--base", type=click.Choice(sorted(_BASE_FLAGS)), default="gaussian")
@click.option("--theta", type=float, default=5.0)
@click.option("--transform", type=click.Choice(sorted(_TRANSFORM_FLAGS)), default="none")
@click.option("--estimator", type=click.Choice(["kendall", "pearson"]), default="kendall")
@click.option("--replicates", type=int, default=50)
@click.option("--seed", type=int, default=0)
@click.option("--q", default=None, help="Comma list of target FPR levels (table mode).")
@click.option("--gamma", default=None, help="Comma list of fixed thresholds (table mode).")
@click.option("--rate", default=None, help="'C1,KAPPA' rate threshold (table mode).")
@click.option("--grid", default=None, help="'MIN,MAX,COUNT' threshold grid (sweep mode).")
@click.option("--out-csv", type=click.Path(), default=None)
@click.option("--out-json", type=click.Path(), default=None)
@_threads_option
@_config_option
@click.pass_context
def bench(ctx, **_kwargs):
    """Run replicated experiments (table mode) or an ROC sweep (sweep mode)."""
    params = _merge(ctx, ctx.params["config"])
    for key in ("scenario", "out_csv", "out_json"):
        if params.get(key) is None:
            raise click.UsageError(f"--{key.replace('_', '-')} is required")
    sim = _sim_config(params)
    threads = _resolve_threads(params["threads"])
    try:
        if params["mode"] == "sweep":
            if params["grid"] is None:
                grid = default_grid()
            else:
                parts = _parse_float_list(params["grid"], "--grid")
                if len(parts) != 3:
                    raise click.UsageError("--grid expects 'MIN,MAX,COUNT'")
                lo, hi, count = parts
                grid = tuple(np.linspace(lo, hi, int(count)).tolist())
            sweep = roc_sweep(sim, params["estimator"], params["replicates"],
                              params["seed"], grid=grid, threads=threads)
            write_sweep_csv(params["out_csv"], sweep)
            doc = {
                "mode": "sweep",
                "sim": sim.to_json_dict(),
                "estimator": params["estimator"],
                "replicates": params["replicates"],
                "auc": auc(sweep),
            }
            write_json_report(params["out_json"], doc)
            _echo_json({"auc": doc["auc"], "grid_points": len(grid)})
            return

        specs: list[tuple[float, ThresholdSpec]] = []
        chosen = [k for k in ("q", "gamma", "rate") if params.get(k) is not None]
        if len(chosen) != 1:
            raise click.UsageError("table mode needs exactly one of --q, --gamma, --rate")
        if params["q"] is not None:
            for q in _parse_float_list(params["q"], "--q"):
                specs.append((q, ThresholdSpec.fpr(q=q)))
        elif params["gamma"] is not None:
            for g in _parse_float_list(params["gamma"], "--gamma"):
                specs.append((g, ThresholdSpec.fixed(g)))
        else:
            c1, kappa = _parse_rate(params["rate"])
            tspec = ThresholdSpec.rate(c1, kappa)
            gamma_value = (2.0 / 3.0) * c1 * float(sim.n) ** (-kappa)
            specs.append((gamma_value, tspec))

        rows = []
        table = []
        for q_or_gamma, tspec in specs:
            spec = ExperimentSpec(sim=sim, threshold=tspec, estimator=params["estimator"],
                                  replicates=params["replicates"], base_seed=params["seed"])
            result = run_experiment(spec, threads=threads)
            rows.extend(experiment_rows(result, q_or_gamma))
            table.append(result.aggregate() | {"q_or_gamma": q_or_gamma})
        write_experiment_csv(params["out_csv"], rows)
        doc = {"mode": "table", "sim": sim.to_json_dict(),
               "estimator": params["estimator"], "table": table}
        write_json_report(params["out_json"], doc)
        _echo_json({"rows": len(rows), "cells": len(table)})
    except (TauscreenError, OSError) as exc:
        _fail(exc)


@main.command()
@click.option("--sigma", "sigma_path", type=click.Path(), default=None)
@click.option("--precision", "precision_path", type=click.Path(), default=None)
@click.option("--edges", "edges_path", type=click.Path(), default=None)
@click.option("--scenario", type=click.Choice(["A", "B", "C", "D"]), default=None)
@click.option("--p", type=int, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--n", type=int, default=None, help="Sample size the conditions are judged at.")
@click.option("--c1", type=float, default=0.6)
@click.option("--kappa", type=float, default=0.25)
@click.option("--xi", type=float, default=0.3)
@click.option("--c2", type=float, default=1.0)
@click.option("--alpha", type=float, default=0.5)
@click.option("--hoeffding-n", default=None, help="Comma list of sample sizes for the bound curve.")
@click.option("--hoeffding-t", default=None, help="Comma list of deviations for the bound curve.")
@click.option("--out", type=click.Path(), default=None)
@_config_option
@click.pass_context
def diagnose(ctx, **_kwargs):
    """Report the screening-theory health checks for a ground truth."""
    params = _merge(ctx, ctx.params["config"])
    if params.get("n") is None:
        raise click.UsageError("--n is required")
    if params.get("out") is None:
        raise click.UsageError("--out is required")
    from_files = params.get("sigma_path") is not None
    if from_files:
        if params.get("precision_path") is None or params.get("edges_path") is None:
            raise click.UsageError("--sigma, --precision and --edges go together")
    elif params.get("scenario") is None or params.get("p") is None:
        raise click.UsageError("supply --sigma/--precision/--edges or --scenario/--p")
    try:
        if from_files:
            sigma = read_matrix_csv(params["sigma_path"])
            omega = read_matrix_csv(params["precision_path"])
            edges, _ = read_edges_tsv(params["edges_path"], p=sigma.shape[0])
            gt = GroundTruth(sigma=sigma, omega=omega, edges=edges,
                             scenario=params.get("scenario") or "file")
        else:
            cfg = SimConfig(scenario=params["scenario"], n=max(params["n"], 2),
                            p=params["p"], seed=params["seed"])
            gt = generate_ground_truth(cfg, RngStream(params["seed"]))
        report = check_assumptions(gt, params["n"], params["c1"], params["kappa"],
                                   params["xi"], params["c2"], params["alpha"])
        conditioning = check_proposition1(gt, params["n"], params["c1"],
                                          params["kappa"], params["xi"])
        doc = {
            "assumptions": report.to_json_dict(),
            "conditioning": conditioning.to_json_dict(),
            "neighborhood_size_bound": neighborhood_size_bound(
                gt, params["n"], params["c1"], params["kappa"]),
        }
        if params["hoeffding_n"] or params["hoeffding_t"]:
            ns = ([int(v) for v in _parse_float_list(params["hoeffding_n"], "--hoeffding-n")]
                  if params["hoeffding_n"] else [params["n"]])
            ts = (_parse_float_list(params["hoeffding_t"], "--hoeffding-t")
                  if params["hoeffding_t"] else [0.1, 0.2])
            doc["hoeffding"] = [
                {"n": nn, "t": tt, "bound": hoeffding_bound(nn, tt)}
                for nn in ns for tt in ts
            ]
        write_json_report(params["out"], doc)
        _echo_json(doc)
    except (TauscreenError, OSError) as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
