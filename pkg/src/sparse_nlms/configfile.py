"""Config ingestion: flat dotted key-value text or an equivalent JSON
document, both mapping 1:1 onto :class:`ExperimentConfig`.

Key-value form::

    # desk-scale override
    n_taps = 60
    sparsity_list = 3, 6
    stop.max_iterations = 5000
    threshold_c_by_snr.5 = 1e-4

JSON form uses nested objects for ``stop`` and ``threshold_c_by_snr`` and
arrays for the list fields. Unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Union

from .algorithms import StopCriterion
from .errors import ConfigError
from .experiment import ExperimentConfig

__all__ = [
    "load_config",
    "parse_config_text",
    "config_from_mapping",
    "config_to_mapping",
    "dump_config_json",
    "content_hash",
]

_LIST_INT_FIELDS = {"sparsity_list"}
_LIST_FLOAT_FIELDS = {"snr_db_list"}
_LIST_STR_FIELDS = {"algorithms", "modulations"}
_SCALAR_FIELDS = {
    "n_taps": int,
    "runs": int,
    "master_seed": int,
    "mu": float,
    "mu_max": float,
    "rho_za_coeff": float,
    "rho_rza_coeff": float,
    "eps_rza": float,
    "beta": float,
    "signal_power": float,
    "es_n0_step_db": float,
    "unnormalized_rza": bool,
    "validation_level": str,
}


def _parse_scalar(text: str) -> Any:
    text = text.strip()
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse dotted key-value lines into the nested mapping form."""
    root: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        parts = key.split(".")
        node = root
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"line {lineno}: key {key!r} conflicts with a scalar")
        items = [_parse_scalar(v) for v in value.split(",")]
        node[parts[-1]] = items if len(items) > 1 else items[0]
    return root


def _as_list(value: Any) -> list:
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


def config_from_mapping(mapping: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from the nested mapping, starting from the
    defaults; unknown keys raise :class:`ConfigError`."""
    if not isinstance(mapping, dict):
        raise ConfigError(f"config document must be a mapping, got {type(mapping).__name__}")
    kwargs: dict[str, Any] = {}
    mapping = dict(mapping)

    for name, cast in _SCALAR_FIELDS.items():
        if name in mapping:
            value = mapping.pop(name)
            try:
                kwargs[name] = cast(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {name}: {value!r}") from exc

    for name, cast in (
        *((f, int) for f in _LIST_INT_FIELDS),
        *((f, float) for f in _LIST_FLOAT_FIELDS),
        *((f, str) for f in _LIST_STR_FIELDS),
    ):
        if name in mapping:
            try:
                kwargs[name] = [cast(v) for v in _as_list(mapping.pop(name))]
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value in list {name}") from exc

    if "es_n0_range_db" in mapping:
        pair = _as_list(mapping.pop("es_n0_range_db"))
        if len(pair) != 2:
            raise ConfigError("es_n0_range_db needs exactly two values: low, high")
        kwargs["es_n0_range_db"] = (float(pair[0]), float(pair[1]))

    if "threshold_c_by_snr" in mapping:
        table = mapping.pop("threshold_c_by_snr")
        if not isinstance(table, dict):
            raise ConfigError("threshold_c_by_snr must map SNR (dB) to C")
        try:
            kwargs["threshold_c_by_snr"] = {
                float(k): float(v) for k, v in table.items()
            }
        except (TypeError, ValueError) as exc:
            raise ConfigError("threshold_c_by_snr keys and values must be numeric") from exc

    if "stop" in mapping:
        stop = mapping.pop("stop")
        if not isinstance(stop, dict):
            raise ConfigError("stop must be a mapping with delta_tolerance/max_iterations")
        default_stop = ExperimentConfig.__dataclass_fields__["stop"].default_factory()
        unknown = set(stop) - {"delta_tolerance", "max_iterations"}
        if unknown:
            raise ConfigError(f"unknown stop keys: {sorted(unknown)}")
        kwargs["stop"] = StopCriterion(
            delta_tolerance=float(
                stop.get("delta_tolerance", default_stop.delta_tolerance)
            ),
            max_iterations=int(
                stop.get("max_iterations", default_stop.max_iterations)
            ),
        )

    if mapping:
        raise ConfigError(f"unknown config keys: {sorted(mapping)}")
    return ExperimentConfig(**kwargs)


def config_to_mapping(config: ExperimentConfig) -> dict:
    """Nested, JSON-ready mapping; the exact inverse of config_from_mapping."""
    return {
        "n_taps": config.n_taps,
        "sparsity_list": list(config.sparsity_list),
        "snr_db_list": [float(s) for s in config.snr_db_list],
        "runs": config.runs,
        "algorithms": list(config.algorithms),
        "stop": {
            "delta_tolerance": config.stop.delta_tolerance,
            "max_iterations": config.stop.max_iterations,
        },
        "threshold_c_by_snr": {
            repr(float(k)): v for k, v in sorted(config.threshold_c_by_snr.items())
        },
        "mu": config.mu,
        "mu_max": config.mu_max,
        "rho_za_coeff": config.rho_za_coeff,
        "rho_rza_coeff": config.rho_rza_coeff,
        "eps_rza": config.eps_rza,
        "beta": config.beta,
        "signal_power": config.signal_power,
        "es_n0_range_db": list(config.es_n0_range_db),
        "es_n0_step_db": config.es_n0_step_db,
        "modulations": list(config.modulations),
        "master_seed": config.master_seed,
        "unnormalized_rza": config.unnormalized_rza,
        "validation_level": config.validation_level,
    }


def dump_config_json(config: ExperimentConfig) -> str:
    """Canonical JSON echo (sorted keys), used for manifests and hashing."""
    return json.dumps(config_to_mapping(config), sort_keys=True, indent=2)


def content_hash(data: bytes) -> str:
    """Git-style blob hash (sha1 over a 'blob <len>\\0' framed payload)."""
    return hashlib.sha1(b"blob %d\x00" % len(data) + data).hexdigest()


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Load a config file, sniffing JSON versus key-value text."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    else:
        mapping = parse_config_text(text)
    return config_from_mapping(mapping)
