"""YAML experiment files, one key per :class:`ExperimentConfig` field.

Example::

    name: my-run
    n: 10000
    replications: 200
    base_seed: 7
    oracle_replications: 100000
    checkpoints: [100, 1000, 10000]     # optional, default 50 log-spaced rounds
    arms:
      - {kind: pareto, alpha: 5}
      - {kind: mixture, weight: 0.2, alpha: 1.1, C: 1, atom: 0}
      - {kind: frechet, alpha: 2, s: 1, m: 0}
      - {kind: replay, samples: [0, 3, 1, 12]}
      - {kind: replay, trace: hosts.csv, arm: laptop_2}
    policies:
      - {kind: extreme_hunter, b: 1}
      - {kind: ucb1}
      - {kind: threshold_ascent, s: 100, delta: 0.01, label: ta}

Unknown keys anywhere are rejected. Relative trace paths resolve against
the config file's directory.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .distributions import DiracMixture, EmpiricalReplay, ExactPareto, Frechet
from .harness import ExperimentConfig
from .policies import PolicySpec

TOP_KEYS = {"name", "arms", "policies", "n", "replications", "base_seed", "checkpoints", "oracle_replications"}

ARM_KEYS = {
    "pareto": ({"alpha"}, {"C"}),
    "frechet": ({"alpha"}, {"s", "m"}),
    "mixture": ({"weight", "alpha"}, {"C", "atom"}),
    "replay": (set(), {"samples", "trace", "arm", "schema", "window"}),
}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _check_keys(where: str, data: dict, required: set, optional: set) -> None:
    if not isinstance(data, dict):
        raise ConfigError(where, "expected a mapping")
    unknown = set(data) - required - optional
    if unknown:
        raise ConfigError(f"{where}.{sorted(unknown)[0]}", "unknown key")
    missing = required - set(data)
    if missing:
        raise ConfigError(f"{where}.{sorted(missing)[0]}", "missing required key")


def arm_from_dict(data: dict, where: str = "arms", base_dir: Path | None = None):
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"{where}.kind", "each arm needs a kind")
    kind = data["kind"]
    if kind not in ARM_KEYS:
        raise ConfigError(f"{where}.kind", f"unknown arm kind {kind!r}; expected one of {sorted(ARM_KEYS)}")
    required, optional = ARM_KEYS[kind]
    body = {k: v for k, v in data.items() if k != "kind"}
    _check_keys(where, body, required, optional)
    try:
        if kind == "pareto":
            return ExactPareto(float(body["alpha"]), float(body.get("C", 1.0)))
        if kind == "frechet":
            return Frechet(float(body["alpha"]), float(body.get("s", 1.0)), float(body.get("m", 0.0)))
        if kind == "mixture":
            return DiracMixture(float(body["weight"]), ExactPareto(float(body["alpha"]), float(body.get("C", 1.0))),
                                float(body.get("atom", 0.0)))
        if ("samples" in body) == ("trace" in body):
            raise ConfigError(where, "a replay arm needs exactly one of samples or trace")
        if "samples" in body:
            return EmpiricalReplay(tuple(float(v) for v in body["samples"]))
        from .traces import ingest_trace

        path = Path(body["trace"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        data_set = ingest_trace(path, body.get("schema", "auto"), float(body.get("window", 4.0)))
        label = str(body.get("arm", data_set.labels[0]))
        if label not in data_set.labels:
            raise ConfigError(f"{where}.arm", f"arm {label!r} not in trace {path}")
        return data_set.select([label]).arms()[0]
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def arm_to_dict(arm) -> dict:
    if isinstance(arm, ExactPareto):
        return {"kind": "pareto", "alpha": arm.alpha, "C": arm.C}
    if isinstance(arm, Frechet):
        return {"kind": "frechet", "alpha": arm.alpha, "s": arm.s, "m": arm.m}
    if isinstance(arm, DiracMixture):
        return {"kind": "mixture", "weight": arm.weight_pareto, "alpha": arm.pareto.alpha,
                "C": arm.pareto.C, "atom": arm.atom}
    return {"kind": "replay", "samples": list(arm.samples)}


def policy_from_dict(data: dict, where: str = "policies") -> PolicySpec:
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(f"{where}.kind", "each policy needs a kind")
    params = {k: v for k, v in data.items() if k not in ("kind", "label")}
    try:
        return PolicySpec(data["kind"], params, str(data.get("label", "")))
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def policy_to_dict(spec: PolicySpec) -> dict:
    out = {"kind": spec.kind, **spec.params}
    if spec.label != spec.kind:
        out["label"] = spec.label
    return out


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    _check_keys("config", data, {"arms", "policies", "n"}, TOP_KEYS)
    if not isinstance(data["arms"], list):
        raise ConfigError("arms", "expected a list")
    if not isinstance(data["policies"], list):
        raise ConfigError("policies", "expected a list")
    arms = [arm_from_dict(a, f"arms[{i}]", base_dir) for i, a in enumerate(data["arms"])]
    policies = [policy_from_dict(p, f"policies[{i}]") for i, p in enumerate(data["policies"])]
    kwargs = {}
    for key, cast in (("n", int), ("replications", int), ("base_seed", int), ("oracle_replications", int)):
        if key in data:
            try:
                kwargs[key] = cast(data[key])
            except (TypeError, ValueError):
                raise ConfigError(key, f"expected an integer, got {data[key]!r}") from None
    if "checkpoints" in data and data["checkpoints"] is not None:
        try:
            kwargs["checkpoints"] = [int(c) for c in data["checkpoints"]]
        except (TypeError, ValueError):
            raise ConfigError("checkpoints", "expected a list of integers") from None
    if "name" in data:
        kwargs["name"] = str(data["name"])
    try:
        cfg = ExperimentConfig(arms=arms, policies=policies, **kwargs)
    except ValueError as exc:
        key = next((k for k in ("checkpoints", "replications", "oracle_replications", "n", "policies") if k in str(exc)),
                   "config")
        raise ConfigError(key, str(exc)) from None
    for p in policies:
        try:
            p.build(cfg.n_arms, cfg.n, None, best_arm=0) if p.kind != "random" else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"policies.{p.label}", str(exc)) from None
    return cfg


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {
        "name": cfg.name,
        "n": cfg.n,
        "replications": cfg.replications,
        "base_seed": cfg.base_seed,
        "oracle_replications": cfg.oracle_replications,
        "checkpoints": list(cfg.checkpoints),
        "arms": [arm_to_dict(a) for a in cfg.arms],
        "policies": [policy_to_dict(p) for p in cfg.policies],
    }


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh)
        except yaml.YAMLError as exc:
            raise ConfigError("config", f"not valid YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a mapping")
    return config_from_dict(data, path.parent)


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False)
