"""Command-line front end.

`umabsim run <config.toml>` executes every (environment, policy) cell of an
experiment config, writing per-cell regret CSVs, pinned environment JSONs,
a combined final-regret table, and a manifest. Re-running the manifest
reproduces the CSVs byte for byte. `umabsim ratio` and `umabsim bound`
operate on run outputs and environment files respectively.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__, _backend
from .core import lower_bound_constant
from .environments import load_environment, save_environment
from .policies import DEFAULT_KLUCB_C, PolicyConfig
from .simulator import (
    DEFAULT_NUM_CHECKPOINTS,
    EnvironmentSpec,
    read_summary_csv,
    regret_ratio,
    run_ensemble,
    write_summary_csv,
)

MANIFEST_FORMAT = "umabsim/manifest-v1"


class ConfigError(Exception):
    """Invalid experiment config; the message names the offending key."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment: what to run and under which seeds."""

    label: str
    horizon: int
    num_trials: int
    base_seed: int
    policies: tuple[PolicyConfig, ...]
    environments: tuple[EnvironmentSpec, ...]
    num_checkpoints: int = DEFAULT_NUM_CHECKPOINTS
    output: str | None = None
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.num_trials < 1:
            raise ConfigError("num_trials must be >= 1")
        if self.base_seed < 0:
            raise ConfigError("base_seed must be >= 0")
        if self.num_checkpoints < 1:
            raise ConfigError("checkpoints must be >= 1")
        if not self.policies:
            raise ConfigError("policies must not be empty")
        if not self.environments:
            raise ConfigError("environments must not be empty")
        labels = [p.output_label for p in self.policies]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"policy labels must be unique, got {labels}")
        env_labels = [e.output_label for e in self.environments]
        if len(set(env_labels)) != len(env_labels):
            raise ConfigError(f"environment labels must be unique, got {env_labels}")


def _require(table: dict, key: str, types, context: str):
    if key not in table:
        raise ConfigError(f"missing key {key!r} in {context}")
    value = table[key]
    if not isinstance(value, types) or isinstance(value, bool):
        raise ConfigError(f"key {key!r} in {context} has wrong type {type(value).__name__}")
    return value


def _policy_from_entry(entry, context: str) -> PolicyConfig:
    if isinstance(entry, str):
        try:
            return PolicyConfig(name=entry)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if isinstance(entry, dict):
        name = _require(entry, "name", str, context)
        extra = set(entry) - {"name", "klucb_c", "label"}
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)} in {context}")
        try:
            return PolicyConfig(
                name=name,
                klucb_c=float(entry.get("klucb_c", DEFAULT_KLUCB_C)),
                label=entry.get("label"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"{context} must be a policy name or a table")


def _env_from_entry(entry: dict, config_dir: Path, context: str) -> EnvironmentSpec:
    if not isinstance(entry, dict):
        raise ConfigError(f"{context} must be a table")
    kind = _require(entry, "kind", str, context)
    known = {
        "kind", "num_arms", "mu_min", "mu_max", "edge_prob",
        "num_graphs", "path", "label", "max_attempts",
    }
    extra = set(entry) - known
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)} in {context}")
    path = entry.get("path")
    if path is not None:
        path = str(Path(config_dir, path))
    try:
        return EnvironmentSpec(
            kind=kind,
            num_arms=int(entry.get("num_arms", 0)),
            mu_min=float(entry.get("mu_min", 0.1)),
            mu_max=float(entry.get("mu_max", 0.9)),
            edge_prob=(float(entry["edge_prob"]) if "edge_prob" in entry else None),
            num_graphs=int(entry.get("num_graphs", 1)),
            path=path,
            label=entry.get("label"),
            max_attempts=int(entry.get("max_attempts", 1_000_000)),
        )
    except ValueError as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def _config_from_dict(raw: dict, config_dir: Path, default_label: str) -> ExperimentConfig:
    known = {
        "label", "horizon", "num_trials", "base_seed", "policies",
        "environments", "checkpoints", "output", "workers",
    }
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown top-level keys {sorted(extra)}")
    policies_raw = _require(raw, "policies", list, "config")
    envs_raw = _require(raw, "environments", list, "config")
    policies = tuple(
        _policy_from_entry(p, f"policies[{i}]") for i, p in enumerate(policies_raw)
    )
    envs = tuple(
        _env_from_entry(e, config_dir, f"environments[{i}]") for i, e in enumerate(envs_raw)
    )
    workers = raw.get("workers")
    return ExperimentConfig(
        label=str(raw.get("label", default_label)),
        horizon=int(_require(raw, "horizon", int, "config")),
        num_trials=int(_require(raw, "num_trials", int, "config")),
        base_seed=int(_require(raw, "base_seed", int, "config")),
        policies=policies,
        environments=envs,
        num_checkpoints=int(raw.get("checkpoints", DEFAULT_NUM_CHECKPOINTS)),
        output=raw.get("output"),
        workers=(int(workers) if workers is not None else None),
    )


def load_config(path) -> ExperimentConfig:
    """Load a TOML experiment config, or the config embedded in a manifest
    JSON produced by a previous run."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    if path.suffix == ".json":
        try:
            manifest = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        if manifest.get("format") != MANIFEST_FORMAT:
            raise ConfigError(f"{path} is not a {MANIFEST_FORMAT} manifest")
        raw = manifest.get("config", {})
    else:
        try:
            raw = tomllib.loads(path.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    return _config_from_dict(raw, path.parent, default_label=path.stem)


def _config_to_dict(config: ExperimentConfig) -> dict:
    return {
        "label": config.label,
        "horizon": config.horizon,
        "num_trials": config.num_trials,
        "base_seed": config.base_seed,
        "checkpoints": config.num_checkpoints,
        "policies": [
            {"name": p.name, "klucb_c": p.klucb_c, "label": p.output_label}
            for p in config.policies
        ],
        "environments": [
            {
                "kind": e.kind,
                **({"num_arms": e.num_arms} if e.kind != "file" else {}),
                **({"mu_min": e.mu_min, "mu_max": e.mu_max} if e.kind != "file" else {}),
                **({"edge_prob": e.edge_prob} if e.edge_prob is not None else {}),
                "num_graphs": e.num_graphs,
                **({"path": str(Path(e.path).resolve())} if e.path else {}),
                "label": e.output_label,
                "max_attempts": e.max_attempts,
            }
            for e in config.environments
        ],
    }


def _sha1_hex(path: Path) -> str:
    return hashlib.sha1(path.read_bytes()).hexdigest()


def preset_names() -> list[str]:
    root = resources.files("umabsim.presets")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def preset_path(name: str) -> Path:
    path = Path(str(resources.files("umabsim.presets") / f"{name}.toml"))
    if not path.exists():
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(preset_names())}"
        )
    return path


def cmd_run(args) -> int:
    try:
        config_path = preset_path(args.config) if args.preset else Path(args.config)
        config = load_config(config_path)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(args.output or config.output or Path("results") / config.label)
    workers = args.threads or config.workers or os.cpu_count() or 1
    backend = args.backend or _backend.active_backend()
    env_dir = out_dir / "envs"
    env_dir.mkdir(parents=True, exist_ok=True)

    manifest_envs = []
    table_rows = []
    summaries = {}
    for spec in config.environments:
        envs = spec.build_all(config.base_seed)
        files, hashes = [], []
        for k, env in enumerate(envs):
            suffix = f"_g{k}" if len(envs) > 1 else ""
            env_path = env_dir / f"{spec.output_label}{suffix}.json"
            save_environment(env, env_path)
            files.append(str(env_path.relative_to(out_dir)))
            hashes.append(_sha1_hex(env_path))
        manifest_envs.append(
            {"label": spec.output_label, "files": files, "sha1": hashes}
        )
        for pol in config.policies:
            summary = run_ensemble(
                envs,
                pol,
                horizon=config.horizon,
                num_trials=config.num_trials,
                base_seed=config.base_seed,
                workers=workers,
                num_checkpoints=config.num_checkpoints,
                backend=backend,
            )
            csv_name = f"{spec.output_label}__{pol.output_label}.csv"
            write_summary_csv(summary, out_dir / csv_name)
            summaries[csv_name] = summary
            table_rows.append(
                (
                    spec.output_label,
                    pol.output_label,
                    summary.final_round,
                    summary.final_regret,
                    float(summary.half_width_95[-1]),
                    summary.num_trials,
                )
            )
            print(
                f"{spec.output_label:>16}  {pol.output_label:>12}  "
                f"final regret {summary.final_regret:10.3f} "
                f"+/- {float(summary.half_width_95[-1]):7.3f}  "
                f"({summary.num_trials} trials)"
            )

    table_path = out_dir / "table.csv"
    with open(table_path, "w", newline="") as fh:
        fh.write("environment,policy,round,mean_regret,half_width_95,num_trials\n")
        for row in table_rows:
            fh.write(
                f"{row[0]},{row[1]},{row[2]},{row[3]!r},{row[4]!r},{row[5]}\n"
            )

    manifest = {
        "format": MANIFEST_FORMAT,
        "package_version": __version__,
        "backend": backend,
        "config": _config_to_dict(config),
        "environments": manifest_envs,
        "outputs": {"summaries": sorted(summaries), "table": table_path.name},
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(summaries)} summaries, {table_path}, {manifest_path}")
    return 0


def cmd_ratio(args) -> int:
    try:
        numer = read_summary_csv(args.numerator)
        denom = read_summary_csv(args.denominator)
        ratio = regret_ratio(numer, denom)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"regret ratio at round {ratio.final_round}: "
        f"{ratio.value:.6g} +/- {ratio.half_width_95:.3g}"
    )
    return 0


def cmd_bound(args) -> int:
    try:
        env = load_environment(args.environment)
        constant = lower_bound_constant(env)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"optimal arm (1-based): {env.optimal_index + 1}")
    print(f"neighborhood size: {len(env.graph.neighborhood(env.optimal_index))}")
    print(f"lower-bound constant: {constant!r}")
    return 0


def cmd_presets(args) -> int:
    for name in preset_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="umabsim",
        description="Simulate unimodal graph bandits and summarize regret.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config or preset")
    run.add_argument("config", help="TOML config, manifest.json, or preset name with --preset")
    run.add_argument("--preset", action="store_true", help="treat CONFIG as a bundled preset name")
    run.add_argument("--output", help="output directory (default: results/<label>)")
    run.add_argument(
        "--threads",
        type=int,
        default=0,
        metavar="N",
        help="worker threads; 0 means config value or all cores",
    )
    run.add_argument(
        "--backend",
        choices=("python", "compiled"),
        help="force a trial-loop backend (default: best available)",
    )
    run.set_defaults(func=cmd_run)

    ratio = sub.add_parser("ratio", help="final-regret ratio of two summary CSVs")
    ratio.add_argument("numerator")
    ratio.add_argument("denominator")
    ratio.set_defaults(func=cmd_ratio)

    bound = sub.add_parser("bound", help="lower-bound constant of an environment JSON")
    bound.add_argument("environment")
    bound.set_defaults(func=cmd_bound)

    presets = sub.add_parser("presets", help="list bundled experiment presets")
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
