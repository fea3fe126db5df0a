"""Command-line front end for the extraction pipeline.

Configuration lives in a single JSON file with one section per stage
(``mackey_glass``, ``svr``, ``extraction``, ``refine``) plus a top-level
``seed``; command-line flags override file values. Exit codes: 0 success,
2 input error, 3 convergence failure, 4 internal error.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import numpy as np

from .benchmark import MackeyGlassConfig, generate_mackey_glass, make_supervised, rmse, save_series, series_times
from .data import DatasetFormatError, load_dataset, save_dataset
from .extraction import DegenerateModelError, ExtractionConfig, InterpretableModel, max_pairwise_similarity, model_extraction
from .fuzzy import FuzzyRuleBase, format_rules, from_svr, infer_batch
from .refine import RefineConfig, refine
from .serialize import (
    ModelFormatError,
    save_extraction_trace,
    save_interpretable_model,
    save_loss_trace,
    save_prediction_trace,
    save_report,
    save_rulebase,
    save_svr_model,
    load_model_file,
)
from .svr import SvrModel, SvrTrainConfig, predict_batch, train_svr

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NOT_CONVERGED = 3
EXIT_INTERNAL_ERROR = 4

_EXIT_CODE_HELP = (
    "Exit codes: 0 success, 2 input error (bad files, bad config fields), "
    "3 convergence failure (artifacts are still written), 4 internal error."
)


class ConfigError(ValueError):
    pass


_SECTIONS = {
    "mackey_glass": (
        ("tau", "a", "b_exp", "c_decay", "n_samples"),
        ("dt", "sample_every", "x0", "washout"),
    ),
    "svr": (("C", "epsilon", "sigma"), ("kkt_tolerance", "max_passes", "fix_bias_to_zero")),
    "extraction": (
        ("C", "epsilon_init", "sigma_init", "epsilon_step", "tol", "k"),
        ("max_outer_iterations", "delta", "refine_epochs", "shuffle_seed"),
    ),
    "refine": (("delta", "epochs"), ("min_sigma", "shuffle_seed")),
}


def _load_config(path: str) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    known = set(_SECTIONS) | {"seed"}
    for key in payload:
        if key not in known:
            raise ConfigError(f"unknown config key '{key}'")
    return payload


def _section_kwargs(config: dict, name: str) -> dict:
    required, optional = _SECTIONS[name]
    section = config.get(name)
    if section is None:
        raise ConfigError(f"missing section '{name}'")
    if not isinstance(section, dict):
        raise ConfigError(f"section '{name}' must be a JSON object")
    for key in section:
        if key not in required and key not in optional:
            raise ConfigError(f"unknown field '{key}' in section '{name}'")
    for key in required:
        if key not in section:
            raise ConfigError(f"missing field '{key}' in section '{name}'")
    return dict(section)


def _resolve_seed(flag_seed: int | None, config: dict) -> int:
    if flag_seed is not None:
        return flag_seed
    seed = config.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("field 'seed' must be an integer")
    return seed


def _run(action) -> None:
    try:
        code = action()
    except (ConfigError, DatasetFormatError, ModelFormatError, FileNotFoundError, IsADirectoryError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except (ValueError, ArithmeticError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT_ERROR)
    except DegenerateModelError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NOT_CONVERGED)
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        sys.exit(EXIT_INTERNAL_ERROR)
    sys.exit(code if code is not None else EXIT_OK)


def _as_predictor(obj):
    if isinstance(obj, SvrModel):
        return lambda X: predict_batch(obj, X)
    if isinstance(obj, InterpretableModel):
        return lambda X: infer_batch(obj.rulebase, X)
    return lambda X: infer_batch(obj, X)


def _as_rulebase(obj) -> FuzzyRuleBase:
    if isinstance(obj, FuzzyRuleBase):
        return obj
    if isinstance(obj, InterpretableModel):
        return obj.rulebase
    return from_svr(obj)


@click.group(epilog=_EXIT_CODE_HELP)
def main():
    """Train epsilon-SVR models, extract interpretable fuzzy rule bases, and
    reproduce the Mackey-Glass prediction experiment."""


@main.command("gen-data", epilog=_EXIT_CODE_HELP)
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False), help="series file (t value per line)")
@click.option("--seed", type=int, default=None, help="overrides the config seed")
@click.option("--train-output", type=click.Path(dir_okay=False), default=None, help="also write supervised training pairs")
@click.option("--test-output", type=click.Path(dir_okay=False), default=None, help="also write supervised test pairs")
def cmd_gen_data(config_path, output, seed, train_output, test_output):
    """Generate a Mackey-Glass series (and optional supervised splits)."""

    def action():
        config = _load_config(config_path)
        mg = MackeyGlassConfig(**_section_kwargs(config, "mackey_glass"))
        series = generate_mackey_glass(mg, _resolve_seed(seed, config))
        save_series(series, output, series_times(mg))
        click.echo(f"wrote {series.shape[0]} samples to {output} (range [{series.min():.6g}, {series.max():.6g}])")
        if train_output or test_output:
            sup = make_supervised(series)
            if train_output:
                save_dataset(sup.train(), train_output)
            if test_output:
                save_dataset(sup.test(), test_output)
        return EXIT_OK

    _run(action)


@main.command("train", epilog=_EXIT_CODE_HELP)
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False))
def cmd_train(data_path, config_path, output):
    """Train a plain-Gaussian epsilon-SVR on a dataset file."""

    def action():
        config = _load_config(config_path)
        cfg = SvrTrainConfig(**_section_kwargs(config, "svr"))
        data = load_dataset(data_path)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = train_svr(data, cfg)
        save_svr_model(model, output)
        train_rmse = rmse(predict_batch(model, data.x), data.y)
        click.echo(f"support vectors: {model.n_support}  bias: {model.bias:.6g}  train RMSE: {train_rmse!r}")
        return EXIT_OK if model.converged else EXIT_NOT_CONVERGED

    _run(action)


@main.command("extract", epilog=_EXIT_CODE_HELP)
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False), help="interpretable model file")
@click.option("--seed", type=int, default=None, help="overrides the refinement shuffle seed")
@click.option("--rules", "rules_path", type=click.Path(dir_okay=False), default=None, help="rule listing text file")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None, help="extraction trace (epsilon sv_count error)")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None, help="standalone extraction report")
@click.option("--test-data", type=click.Path(exists=True, dir_okay=False), default=None, help="held-out set for a test RMSE line")
def cmd_extract(data_path, config_path, output, seed, rules_path, trace_path, report_path, test_data):
    """Extract an interpretable fuzzy rule base from a dataset."""

    def action():
        config = _load_config(config_path)
        kwargs = _section_kwargs(config, "extraction")
        kwargs.setdefault("shuffle_seed", _resolve_seed(seed, config))
        if seed is not None:
            kwargs["shuffle_seed"] = seed
        xcfg = ExtractionConfig(**kwargs)
        data = load_dataset(data_path)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = model_extraction(data, xcfg)
        worst = max_pairwise_similarity(model.rulebase)
        if worst > xcfg.k + 1e-12:
            raise RuntimeError(f"similarity invariant violated before write: {worst} > {xcfg.k}")
        save_interpretable_model(model, output)
        if rules_path:
            Path(rules_path).write_text(format_rules(model.rulebase) + "\n")
        if trace_path:
            save_extraction_trace(model.report, trace_path)
        if report_path:
            save_report(model.report, report_path)
        train_rmse = float(np.sqrt(model.report.final_training_error))
        click.echo(f"rules: {model.report.final_rule_count}  train RMSE: {train_rmse!r}")
        if test_data:
            test = load_dataset(test_data)
            test_rmse = rmse(infer_batch(model.rulebase, test.x), test.y)
            click.echo(f"test RMSE: {test_rmse!r}")
        return EXIT_OK if model.report.converged else EXIT_NOT_CONVERGED

    _run(action)


@main.command("refine", epilog=_EXIT_CODE_HELP)
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--output", required=True, type=click.Path(dir_okay=False), help="refined rule base file")
@click.option("--seed", type=int, default=None, help="overrides the shuffle seed")
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None, help="loss trace (epoch mse)")
def cmd_refine(model_path, data_path, config_path, output, seed, trace_path):
    """Gradient-descent fine-tuning of membership centers and widths."""

    def action():
        config = _load_config(config_path)
        kwargs = _section_kwargs(config, "refine")
        kwargs.setdefault("shuffle_seed", _resolve_seed(seed, config))
        if seed is not None:
            kwargs["shuffle_seed"] = seed
        rcfg = RefineConfig(**kwargs)
        rb = _as_rulebase(load_model_file(model_path))
        data = load_dataset(data_path)
        result = refine(rb, data, rcfg)
        save_rulebase(result.rulebase, output)
        if trace_path:
            save_loss_trace(result.trace, trace_path)
        final_rmse = rmse(infer_batch(result.rulebase, data.x), data.y)
        click.echo(f"epochs: {len(result.trace)}  train RMSE: {final_rmse!r}")
        if result.diverged:
            click.echo("refinement diverged; stopped early", err=True)
            return EXIT_NOT_CONVERGED
        return EXIT_OK

    _run(action)


@main.command("eval", epilog=_EXIT_CODE_HELP)
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("data_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None, help="write (t, target, prediction) lines")
def cmd_eval(model_path, data_path, trace_path):
    """Evaluate a model file on a dataset and print the RMSE."""

    def action():
        predictor = _as_predictor(load_model_file(model_path))
        data = load_dataset(data_path)
        predictions = predictor(data.x)
        click.echo(f"RMSE = {rmse(predictions, data.y)!r}")
        if trace_path:
            save_prediction_trace(trace_path, data.y, predictions)
        return EXIT_OK

    _run(action)


@main.command("rules", epilog=_EXIT_CODE_HELP)
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--variables", default=None, help="comma-separated input variable names")
def cmd_rules(model_path, variables):
    """Print the rule listing of a model file."""

    def action():
        rb = _as_rulebase(load_model_file(model_path))
        names = [v.strip() for v in variables.split(",")] if variables else None
        click.echo(format_rules(rb, names))
        return EXIT_OK

    _run(action)


if __name__ == "__main__":
    main()
