"""JSON experiment configs.

A config is a single JSON document with a ``schema_version`` field; every
section is optional except ``model.variant``, with the standard settings of
that variant as defaults.  See README for the full schema.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from .experiments import (
    TARGET_FUNCTIONS,
    AnalysisConfig,
    ExperimentConfig,
    ThetaInit,
)
from .model import ModelSpec, VARIANTS
from .neldermead import NmConfig

SCHEMA_VERSION = 1

_MODEL_DEFAULTS: dict[str, dict] = {
    "single-kpo": dict(
        depth=12, tau=0.7, t_d=0.7, chi=0.1, cutoff=25, alpha=3.0,
        observables=("x@1",), output_rule="single",
    ),
    "kpo-network": dict(
        depth=6, tau=1.0, t_d=1.0, chi=(1.0, 1.0), cutoff=(10, 10), alpha=(1.0, 1.0),
        coupling=((0.0, 0.0), (-0.1, 0.0)),
        observables=("x@1", "x@2"), output_rule="product",
    ),
    "multi-input-single-kpo": dict(
        depth=12, tau=0.7, t_d=0.7, chi=0.1, cutoff=25, alpha=0.0, num_inputs=2,
        observables=("x@1", "n@1"), output_rule="vector",
    ),
    "qubit-baseline": dict(
        depth=2, tau=10.0, num_qubits=6, ising_seed=0,
        observables=("2z@1",), output_rule="single",
    ),
}

_MODEL_KEYS = {
    "variant", "depth", "tau", "observables", "output_rule", "chi", "cutoff",
    "alpha", "t_d", "chi_tilde", "coupling", "num_inputs", "deficit_tol",
    "num_qubits", "ising_seed",
}


class ConfigError(ValueError):
    """Invalid or missing configuration; carries the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _section(doc: dict, name: str) -> dict:
    value = doc.get(name, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(name, "must be a JSON object")
    return dict(value)


def _tupled(value):
    if isinstance(value, list):
        return tuple(_tupled(v) for v in value)
    return value


def parse_model(section: dict) -> ModelSpec:
    variant = section.get("variant")
    if variant is None:
        raise ConfigError("model.variant", "is required")
    if variant not in VARIANTS:
        raise ConfigError("model.variant", f"unknown variant {variant!r}; one of {VARIANTS}")
    unknown = set(section) - _MODEL_KEYS
    if unknown:
        raise ConfigError("model", f"unknown fields {sorted(unknown)}")
    fields = dict(_MODEL_DEFAULTS[variant])
    fields.update({k: _tupled(v) for k, v in section.items() if k != "variant"})
    if "observables" in fields:
        fields["observables"] = tuple(fields["observables"])
    try:
        return ModelSpec(variant=variant, **fields)
    except (ValueError, TypeError) as exc:
        raise ConfigError("model", str(exc)) from exc


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config", "top level must be a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigError(
            "schema_version", f"expected {SCHEMA_VERSION}, got {version!r}"
        )
    known = {"schema_version", "model", "dataset", "theta_init", "theta0",
             "optimizer", "analysis"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError("config", f"unknown sections {sorted(unknown)}")

    model = parse_model(_section(doc, "model"))

    ds = _section(doc, "dataset")
    target = ds.pop("target", "gaussian")
    if isinstance(target, str) and target not in TARGET_FUNCTIONS:
        raise ConfigError(
            "dataset.target", f"unknown target {target!r}; one of {sorted(TARGET_FUNCTIONS)}"
        )
    try:
        n_samples = int(ds.pop("n_samples", 100))
        dataset_seed = int(ds.pop("seed", 0))
    except (ValueError, TypeError) as exc:
        raise ConfigError("dataset", str(exc)) from exc
    if ds:
        raise ConfigError("dataset", f"unknown fields {sorted(ds)}")

    try:
        theta_init = ThetaInit(**_section(doc, "theta_init"))
    except (ValueError, TypeError) as exc:
        raise ConfigError("theta_init", str(exc)) from exc

    theta0 = doc.get("theta0")
    if theta0 is not None:
        if not isinstance(theta0, list):
            raise ConfigError("theta0", "must be a list of numbers")
        if len(theta0) != model.n_parameters:
            raise ConfigError(
                "theta0",
                f"length {len(theta0)} does not match 3*K*D = {model.n_parameters}",
            )
        theta0 = tuple(float(v) for v in theta0)

    opt = _section(doc, "optimizer")
    if opt.get("max_iterations", "absent") is None:
        opt.pop("max_iterations")
    try:
        optimizer = NmConfig(**opt)
    except (ValueError, TypeError) as exc:
        raise ConfigError("optimizer", str(exc)) from exc

    try:
        analysis = AnalysisConfig(**_section(doc, "analysis"))
    except (ValueError, TypeError) as exc:
        raise ConfigError("analysis", str(exc)) from exc

    try:
        return ExperimentConfig(
            model=model,
            target=target,
            n_samples=n_samples,
            dataset_seed=dataset_seed,
            theta_init=theta_init,
            theta0=theta0,
            optimizer=optimizer,
            analysis=analysis,
        )
    except ValueError as exc:
        raise ConfigError("config", str(exc)) from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
    return parse_config(doc)


def config_to_dict(config: ExperimentConfig) -> dict:
    """Resolved snapshot of a config, mirroring the input schema."""
    model = {k: v for k, v in asdict(config.model).items() if v is not None}
    model["observables"] = list(config.model.observables)
    if config.model.coupling is not None:
        model["coupling"] = [list(map(_json_number, row)) for row in config.model.coupling]
    model["alpha"] = [_json_number(a) for a in config.model.alpha]
    model["chi"] = list(config.model.chi)
    model["cutoff"] = list(config.model.cutoff)
    return {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "dataset": {
            "target": config.target,
            "n_samples": config.n_samples,
            "seed": config.dataset_seed,
        },
        "theta_init": asdict(config.theta_init),
        "theta0": list(config.theta0) if config.theta0 is not None else None,
        "optimizer": asdict(config.optimizer),
        "analysis": asdict(config.analysis),
    }


def _json_number(value):
    if isinstance(value, complex):
        return value.real if value.imag == 0 else [value.real, value.imag]
    return value
