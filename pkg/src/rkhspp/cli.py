"""Command-line interface.

Exit codes: 0 success, 2 usage/validation, 3 I/O failure, 4 cache or
config mismatch, 5 numeric failure.  All commands are deterministic
given (config, seed) and never leave partial output files (outputs are
written to a temporary name and renamed).
"""

from __future__ import annotations

import csv
import os
import sys

import click

from . import classify as _classify
from . import mvstats
from .errors import DataFormatError, NumericalError, SingularSystemError, ValidationError
from .kernels import GridSmoother, embed, export_field, mean_element
from .pipeline import (
    EXPERIMENT_CONFIG,
    EXPERIMENTS,
    SCENARIOS,
    PipelineConfig,
    build_basis,
    extract_features,
    run_experiment,
    simulate_scenario,
)
from .pointpat import Window, load_patterns, make_grid, save_patterns
from .spectral import features_from_csv, features_to_csv

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CACHE = 4
EXIT_NUMERIC = 5


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _run(fn):
    """Run a command body, mapping exceptions to the exit-code contract."""
    try:
        fn()
    except (ValidationError, DataFormatError) as exc:
        _fail(EXIT_USAGE, str(exc))
    except (SingularSystemError, NumericalError) as exc:
        _fail(EXIT_NUMERIC, str(exc))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"{path}:{lineno}: expected 'section.key=value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def _build_config(config_path, sigma, h, gamma, r, base: PipelineConfig) -> PipelineConfig:
    """Merge config-file values and CLI overrides onto a base config."""
    window = base.window
    values = {
        "kernel.sigma": base.sigma,
        "kernel.form": base.form,
        "grid.h": base.h,
        "smooth.gamma": base.gamma,
        "features.r": base.r,
        "window.xmin": window.xmin,
        "window.xmax": window.xmax,
        "window.ymin": window.ymin,
        "window.ymax": window.ymax,
    }
    if config_path:
        for key, raw in _load_config_file(config_path).items():
            if key not in values:
                raise ValidationError(f"unknown config key {key!r}")
            try:
                values[key] = raw if key == "kernel.form" else float(raw)
            except ValueError:
                raise ValidationError(f"bad value for {key}: {raw!r}") from None
    if sigma is not None:
        values["kernel.sigma"] = sigma
    if h is not None:
        values["grid.h"] = h
    if gamma is not None:
        values["smooth.gamma"] = gamma
    if r is not None:
        values["features.r"] = r
    return PipelineConfig(
        window=Window(
            values["window.xmin"],
            values["window.xmax"],
            values["window.ymin"],
            values["window.ymax"],
        ),
        h=float(values["grid.h"]),
        sigma=float(values["kernel.sigma"]),
        form=str(values["kernel.form"]),
        gamma=float(values["smooth.gamma"]),
        r=int(values["features.r"]),
    )


def _parse_seeds(spec: str) -> list[int]:
    """Parse '1..10' or '3,7,21' style seed lists."""
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        try:
            return list(range(int(lo), int(hi) + 1))
        except ValueError:
            raise ValidationError(f"bad seed range {spec!r}") from None
    try:
        return [int(s) for s in spec.split(",") if s]
    except ValueError:
        raise ValidationError(f"bad seed list {spec!r}") from None


_config_options = [
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="Config file with section.key=value lines."),
    click.option("--sigma", type=float, default=None, help="Kernel bandwidth override."),
    click.option("--h", type=float, default=None, help="Grid step override."),
    click.option("--gamma", type=float, default=None, help="Ridge parameter override."),
    click.option("--r", type=int, default=None, help="Truncation order override."),
]


def _with_config_options(fn):
    for opt in reversed(_config_options):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option()
def main():
    """Spectral RKHS features and multivariate statistics for replicated
    spatial point patterns."""


@main.command()
@click.argument("scenario")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Output pattern CSV (required unless listing).")
def simulate(scenario, seed, out):
    """Simulate a labeled pattern set for a named scenario.

    Use SCENARIO `list` to print the available scenarios.
    """
    def body():
        if scenario == "list":
            for name, sc in SCENARIOS.items():
                click.echo(f"{name}: {sc.description}")
            return
        if out is None:
            raise ValidationError("--out is required when simulating")
        patterns = simulate_scenario(scenario, seed)
        save_patterns(patterns, out)
        click.echo(f"wrote {len(patterns)} patterns to {out}")

    _run(body)


@main.command()
@click.argument("patterns_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output feature CSV.")
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
              help="Directory for cached spectral bases.")
@_with_config_options
def features(patterns_csv, out, cache_dir, config_path, sigma, h, gamma, r):
    """Extract spectral feature vectors from a pattern CSV."""
    def body():
        config = _build_config(config_path, sigma, h, gamma, r, PipelineConfig())
        patterns = load_patterns(patterns_csv)
        if patterns.window != config.window:
            raise ValidationError(
                "pattern window does not match configured window"
            )
        try:
            basis, hit = build_basis(config, cache_dir)
        except DataFormatError as exc:
            _fail(EXIT_CACHE, str(exc))
        if hit:
            click.echo("basis cache hit", err=True)
        feats, _ = extract_features(patterns, config, basis=basis)
        features_to_csv(feats, out)
        click.echo(f"wrote {len(feats)} feature rows to {out}")

    _run(body)


@main.command()
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output results CSV.")
def anova(features_csv, out):
    """Run Box's M, MANOVA (Pillai and Wilks) and per-coefficient ANOVA."""
    def body():
        _, labels, mu = features_from_csv(features_csv)
        data = mvstats.GroupedFeatures(mu, labels)
        results = [
            mvstats.boxm_test(data),
            mvstats.manova_pillai(data),
            mvstats.manova_wilks(data),
        ]
        results += [mvstats.anova_univariate(data, q) for q in range(data.p)]
        mvstats.results_to_csv(results, out)
        for res in results:
            df = f"{res.df1:g}" if res.df2 is None else f"{res.df1:g},{res.df2:g}"
            click.echo(f"{res.method}: statistic={res.statistic:.4f} df={df} "
                       f"p={res.p_value:.4g}")

    _run(body)


def _write_predictions(path, ids, labels, preds, classes):
    tmp = str(path) + ".tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pattern_id", "predicted", "true"]
                        + [f"posterior_{c}" for c in classes])
        for pid, true, pred in zip(ids, labels, preds):
            writer.writerow(
                [pid, pred.label, true if true is not None else ""]
                + [repr(pred.posteriors[c]) for c in classes]
            )
    os.replace(tmp, path)


@main.command()
@click.argument("train_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--test", "test_csv", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Feature CSV to predict (omit with --loocv).")
@click.option("--loocv", "use_loocv", is_flag=True,
              help="Leave-one-out cross-validation on the training set.")
@click.option("--kind", type=click.Choice(["linear", "quadratic"]), default="linear",
              show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output predictions CSV.")
def classify(train_csv, test_csv, use_loocv, kind, out):
    """Fit an LDA/QDA model and predict, or run leave-one-out CV."""
    def body():
        ids, labels, mu = features_from_csv(train_csv)
        data = mvstats.GroupedFeatures(mu, labels)
        if use_loocv:
            if test_csv is not None:
                raise ValidationError("--loocv and --test are mutually exclusive")
            err, preds = _classify.loocv(data, kind=kind)
            _write_predictions(out, ids, labels, preds, data.groups)
            click.echo(f"loocv error: {err:.4f}")
            return
        model = _classify.fit(data, kind=kind)
        if test_csv is None:
            preds = _classify.predict_many(model, data.features)
            _write_predictions(out, ids, labels, preds, model.classes)
            err = _classify.training_error(data, model)
            click.echo(f"training error: {err:.4f}")
            return
        test_ids, test_labels, test_mu = features_from_csv(test_csv)
        if test_mu.shape[1] != data.p:
            raise ValidationError("test feature dimension does not match training")
        unseen = {lb for lb in test_labels if lb is not None} - set(model.classes)
        if unseen:
            raise ValidationError(f"unseen class in test data: {sorted(unseen)}")
        preds = _classify.predict_many(model, test_mu)
        _write_predictions(out, test_ids, test_labels, preds, model.classes)
        known = [(p, t) for p, t in zip(preds, test_labels) if t is not None]
        if known:
            err = sum(p.label != t for p, t in known) / len(known)
            click.echo(f"test error: {err:.4f} ({len(known)} labeled cases)")

    _run(body)


@main.command()
@click.argument("experiment")
@click.option("--seeds", default="1..10", show_default=True,
              help="Seed list: '1..10' or '3,7,21'.")
@click.option("--out", type=click.Path(file_okay=False), required=True,
              help="Output directory for the report.")
@_with_config_options
def reproduce(experiment, seeds, out, config_path, sigma, h, gamma, r):
    """Re-run the simulated classification experiments and compare against
    the reference error rates.

    EXPERIMENT is an experiment id or `table2` for all three.
    """
    def body():
        config = _build_config(config_path, sigma, h, gamma, r, EXPERIMENT_CONFIG)
        seed_list = _parse_seeds(seeds)
        names = list(EXPERIMENTS) if experiment == "table2" else [experiment]
        os.makedirs(out, exist_ok=True)
        rows = []
        for name in names:
            res = run_experiment(name, seed_list, config, cache_dir=out)
            rows.append(res)
            click.echo(
                f"{name} ({res.classifier}): mean training error "
                f"{res.mean_training:.4f} (reference {res.reference_training}), "
                f"mean loocv error {res.mean_loocv:.4f} "
                f"(reference {res.reference_loocv})"
            )
        report = os.path.join(out, "report.csv")
        tmp = report + ".tmp"
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["experiment", "classifier", "n_seeds", "mean_training_error",
                 "mean_loocv_error", "reference_training_error",
                 "reference_loocv_error"]
            )
            for res in rows:
                writer.writerow(
                    [res.experiment, res.classifier, len(res.seeds),
                     repr(res.mean_training), repr(res.mean_loocv),
                     repr(res.reference_training), repr(res.reference_loocv)]
                )
        os.replace(tmp, report)
        click.echo(f"report written to {report}")

    _run(body)


@main.command("export-field")
@click.argument("patterns_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--pattern-id", default=None,
              help="Export the smoothed field of a single pattern.")
@click.option("--mean-of", default=None,
              help="Export the mean smoothed field of one class label.")
@click.option("--out", type=click.Path(dir_okay=False), required=True,
              help="Output field CSV (x,y,value).")
@_with_config_options
def export_field_cmd(patterns_csv, pattern_id, mean_of, out,
                     config_path, sigma, h, gamma, r):
    """Evaluate smoothed pattern fields over the grid and export as CSV."""
    def body():
        if (pattern_id is None) == (mean_of is None):
            raise ValidationError("exactly one of --pattern-id / --mean-of is required")
        config = _build_config(config_path, sigma, h, gamma, r, PipelineConfig())
        patterns = load_patterns(patterns_csv)
        grid = make_grid(config.window, config.h)
        smoother = GridSmoother(grid, config.kernel, config.gamma)
        if pattern_id is not None:
            matches = [p for p in patterns if p.id == pattern_id]
            if not matches:
                raise ValidationError(f"no pattern with id {pattern_id!r}")
            element = smoother.smooth(embed(matches[0], config.kernel))
        else:
            group = [p for p in patterns if p.label == mean_of]
            if not group:
                raise ValidationError(f"no patterns with label {mean_of!r}")
            element = mean_element(
                [smoother.smooth(embed(p, config.kernel)) for p in group]
            )
        export_field(element, grid, out)
        click.echo(f"wrote field to {out}")

    _run(body)


if __name__ == "__main__":
    main()
