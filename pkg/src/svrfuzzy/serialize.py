"""Versioned JSON persistence for models, rule bases, and reports, plus the
delimited-text traces. Output is byte-deterministic for identical inputs."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .extraction import ExtractionReport, InterpretableModel, IterationRecord
from .fuzzy import FuzzyRuleBase, InferenceMode, make_rulebase
from .svr import KernelConfig, KernelKind, SvrModel

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model file could not be parsed or has an unsupported version."""


def _write_json(payload: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path: str | Path) -> dict:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"parse error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ModelFormatError("expected a JSON object at the top level")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {version!r}; this build reads version {FORMAT_VERSION}")
    return payload


# ---------------------------------------------------------------------------
# SVR models


def _svr_payload(model: SvrModel) -> dict:
    return {
        "kernel_kind": model.kernel.kind.value,
        "widths": [float(w) for w in model.kernel.widths],
        "centers": [[float(v) for v in row] for row in model.support_vectors],
        "betas": [float(b) for b in model.betas],
        "bias": float(model.bias),
    }


def save_svr_model(model: SvrModel, path: str | Path) -> None:
    _write_json({"format_version": FORMAT_VERSION, "type": "svr_model", **_svr_payload(model)}, path)


def _svr_from_payload(payload: dict) -> SvrModel:
    try:
        return SvrModel(
            support_vectors=np.asarray(payload["centers"], dtype=np.float64).reshape(len(payload["betas"]), -1),
            betas=np.asarray(payload["betas"], dtype=np.float64),
            bias=float(payload["bias"]),
            kernel=KernelConfig(KernelKind(payload["kernel_kind"]), np.asarray(payload["widths"])),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelFormatError(f"invalid svr_model payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Rule bases


def _rulebase_payload(rb: FuzzyRuleBase) -> dict:
    return {
        "mode": rb.mode.value,
        "input_dimension": rb.input_dimension,
        "rules": [
            {
                "centers": [mf.center for mf in rule.antecedents],
                "widths": [mf.width for mf in rule.antecedents],
                "consequent": rule.consequent,
            }
            for rule in rb.rules
        ],
    }


def save_rulebase(rb: FuzzyRuleBase, path: str | Path) -> None:
    _write_json({"format_version": FORMAT_VERSION, "type": "rulebase", "rulebase": _rulebase_payload(rb)}, path)


def _rulebase_from_payload(payload: dict) -> FuzzyRuleBase:
    try:
        rules = payload["rules"]
        return make_rulebase(
            np.asarray([r["centers"] for r in rules], dtype=np.float64),
            np.asarray([r["widths"] for r in rules], dtype=np.float64),
            np.asarray([r["consequent"] for r in rules], dtype=np.float64),
            InferenceMode(payload["mode"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ModelFormatError(f"invalid rulebase payload: {exc}") from exc


# ---------------------------------------------------------------------------
# Interpretable models and extraction reports


def report_payload(report: ExtractionReport) -> dict:
    return asdict(report) | {"iterations": [list(asdict(r).values()) for r in report.iterations]}


def save_report(report: ExtractionReport, path: str | Path) -> None:
    _write_json({"format_version": FORMAT_VERSION, "type": "extraction_report", **report_payload(report)}, path)


def _report_from_payload(payload: dict) -> ExtractionReport:
    return ExtractionReport(
        iterations=tuple(IterationRecord(float(e), int(s), float(err)) for e, s, err in payload["iterations"]),
        final_rule_count=int(payload["final_rule_count"]),
        final_training_error=float(payload["final_training_error"]),
        merges_performed=int(payload["merges_performed"]),
        converged=bool(payload["converged"]),
        selected_epsilon=float(payload["selected_epsilon"]),
    )


def save_interpretable_model(model: InterpretableModel, path: str | Path) -> None:
    _write_json(
        {
            "format_version": FORMAT_VERSION,
            "type": "interpretable_model",
            "rulebase": _rulebase_payload(model.rulebase),
            "report": report_payload(model.report),
        },
        path,
    )


def load_model_file(path: str | Path) -> SvrModel | FuzzyRuleBase | InterpretableModel:
    """Load any supported model file, dispatching on its ``type`` field."""
    payload = _read_json(path)
    kind = payload.get("type")
    if kind == "svr_model":
        return _svr_from_payload(payload)
    if kind == "rulebase":
        return _rulebase_from_payload(payload["rulebase"])
    if kind == "interpretable_model":
        try:
            report = _report_from_payload(payload["report"])
        except (KeyError, ValueError, TypeError) as exc:
            raise ModelFormatError(f"invalid report payload: {exc}") from exc
        return InterpretableModel(rulebase=_rulebase_from_payload(payload["rulebase"]), report=report)
    raise ModelFormatError(f"unknown model type {kind!r}")


def save_experiment_report(report, path: str | Path) -> None:
    """Persist a benchmark ExperimentReport (plain dataclass of scalars)."""
    _write_json({"format_version": FORMAT_VERSION, "type": "experiment_report", **asdict(report)}, path)


# ---------------------------------------------------------------------------
# Delimited traces


def save_extraction_trace(report: ExtractionReport, path: str | Path) -> None:
    lines = ["# columns: epsilon sv_count error"]
    for rec in report.iterations:
        lines.append(f"{float(rec.epsilon)!r} {int(rec.sv_count)} {float(rec.error)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def save_loss_trace(trace, path: str | Path) -> None:
    lines = ["# columns: epoch mse"]
    for epoch, mse in enumerate(trace, start=1):
        lines.append(f"{epoch} {float(mse)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def save_prediction_trace(path: str | Path, targets, predictions, times=None) -> None:
    targets = np.asarray(targets, dtype=np.float64).ravel()
    predictions = np.asarray(predictions, dtype=np.float64).ravel()
    if times is None:
        times = np.arange(targets.shape[0], dtype=np.float64)
    lines = ["# columns: t target prediction"]
    for t, tv, pv in zip(np.asarray(times, dtype=np.float64), targets, predictions):
        lines.append(f"{float(t)!r} {float(tv)!r} {float(pv)!r}")
    Path(path).write_text("\n".join(lines) + "\n")
