"""Command-line front door: run, bon, correlate, ablate, validate-config.

Configuration is a flat key=value file; every key has a default, unknown
keys are errors, and the parsed config is echoed into every report next to
its hash. Command-line --set overrides win over the file, and --seed /
--out are shorthands for the master_seed / out_dir keys.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import EvalSpec, correlation_experiment
from .engine import ScalingConfig, run_bon, run_fr_tts
from .errors import ConfigError, FillscaleError
from .fillsearch import FillSearchConfig, filling_search
from .grid import save_grid
from .reports import (
    config_hash,
    correlation_payload,
    make_report,
    run_payload,
    write_csv,
    write_report,
)
from .rngstream import stream
from .strategies import RemoteOracle, Strategy, SyntheticOracle
from .toyworld import WorldConfig, generate_tokens

# key -> (type, default, help). The single source of truth for run config.
CONFIG_SCHEMA = {
    "width": (int, 16, "grid columns"),
    "height": (int, 16, "grid rows"),
    "vocab_size": (int, 16, "token ids per cell"),
    "patch_size": (int, 4, "pixels per token side in the codec"),
    "alpha": (float, 2.0, "template-attraction logit weight"),
    "beta": (float, 1.0, "neighbor-coherence logit weight"),
    "temperature": (float, 1.0, "sampling temperature"),
    "match_weight": (float, 0.7, "scorer weight on template agreement"),
    "smooth_weight": (float, 0.3, "scorer weight on neighbor smoothness"),
    "num_samples": (int, 8, "parallel trajectories N"),
    "checkpoint_rows": (int, 4, "rows generated between filter steps"),
    "strategy": (str, "filling", "intermediate scorer: cropping | zeropad | rollout | filling"),
    "block_size": (int, 8, "tokens per block for filling"),
    "coarse_trials": (int, 5, "random schemes tried in the coarse phase"),
    "refine_iters": (int, 5, "zero-order refinement iterations"),
    "refine_blocks": (int, 1, "slots re-randomized per refinement step"),
    "sched_begin_frac": (float, 0.25, "ramp start as a fraction of checkpoints"),
    "sched_end_frac": (float, 0.6, "ramp end as a fraction of checkpoints"),
    "variance_center": (float, 0.00065, "fill-score variance with no weight shift"),
    "variance_sensitivity": (float, 50.0, "steepness of the variance shift"),
    "variance_on_normalized": (bool, False, "measure variance after normalization"),
    "resample_temperature": (float, 0.1, "softmax temperature for parent draws"),
    "resample_kernel": (str, "softmax", "parent weighting: softmax | linear"),
    "elitism": (bool, True, "guarantee the best sample a parent slot"),
    "rollout_greedy": (bool, False, "argmax instead of sampling in rollouts"),
    "master_seed": (int, 0, "root of every named random stream"),
    "prompt_count": (int, 12, "number of prompt classes to run"),
    "prompt_offset": (int, 0, "first prompt class id"),
    "oracle": (str, "synthetic", "scorer backend: synthetic | remote"),
    "remote_endpoint": (str, "http://127.0.0.1:8765", "reward service base URL"),
    "remote_timeout": (float, 10.0, "seconds per remote request"),
    "remote_retries": (int, 2, "extra attempts on transport failure"),
    "correlate_trajectories": (int, 200, "trajectories in the correlation study"),
    "correlate_specs": (str, "cropping,zeropad,filling:5:5,filling:1:0,filling:10:0",
                        "comma list: strategy[:coarse[:refine]] | final | noise"),
    "ablate_grids": (int, 50, "partial grids for the filling-times sweep"),
    "out_dir": (str, "out", "artifact directory"),
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _coerce(key: str, raw: str):
    typ = CONFIG_SCHEMA[key][0]
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(
            f"bad value {raw!r} for key {key} (expected {typ.__name__})") from exc


def parse_config_file(path) -> dict:
    """key=value lines; '#' starts a comment; unknown keys are errors."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def build_config(config_path=None, sets=(), seed=None, out=None) -> dict:
    cfg = {key: default for key, (_, default, _) in CONFIG_SCHEMA.items()}
    if config_path:
        cfg.update(parse_config_file(config_path))
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
        cfg[key] = _coerce(key, value)
    if seed is not None:
        cfg["master_seed"] = seed
    if out is not None:
        cfg["out_dir"] = out
    return cfg


def world_from(cfg: dict) -> WorldConfig:
    return WorldConfig(
        width=cfg["width"], height=cfg["height"],
        vocab_size=cfg["vocab_size"], patch_size=cfg["patch_size"],
        alpha=cfg["alpha"], beta=cfg["beta"], temperature=cfg["temperature"],
        match_weight=cfg["match_weight"], smooth_weight=cfg["smooth_weight"])


def scaling_from(cfg: dict) -> ScalingConfig:
    try:
        strategy = Strategy(cfg["strategy"])
    except ValueError as exc:
        raise ConfigError(f"unknown strategy {cfg['strategy']!r}") from exc
    return ScalingConfig(
        num_samples=cfg["num_samples"],
        checkpoint_rows=cfg["checkpoint_rows"],
        strategy=strategy,
        fill=FillSearchConfig(cfg["coarse_trials"], cfg["refine_iters"],
                              cfg["refine_blocks"], cfg["block_size"]),
        resample_temperature=cfg["resample_temperature"],
        resample_kernel=cfg["resample_kernel"],
        elitism=cfg["elitism"],
        master_seed=cfg["master_seed"],
        sched_begin_frac=cfg["sched_begin_frac"],
        sched_end_frac=cfg["sched_end_frac"],
        variance_center=cfg["variance_center"],
        variance_sensitivity=cfg["variance_sensitivity"],
        variance_on_normalized=cfg["variance_on_normalized"],
        rollout_greedy=cfg["rollout_greedy"])


def oracle_from(cfg: dict, world: WorldConfig):
    import os

    if cfg["oracle"] == "synthetic":
        return SyntheticOracle.from_world(world)
    if cfg["oracle"] == "remote":
        endpoint = os.environ.get("FILLSCALE_REMOTE_ENDPOINT",
                                  cfg["remote_endpoint"])
        return RemoteOracle(endpoint, world.codebook(),
                            cfg["remote_timeout"], cfg["remote_retries"])
    raise ConfigError(f"unknown oracle {cfg['oracle']!r}")


def parse_eval_specs(text: str, cfg: dict) -> list:
    """'cropping,zeropad,filling:10:0' -> labeled EvalSpecs."""
    specs = []
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        parts = token.split(":")
        name = parts[0]
        if name in ("cropping", "zeropad", "rollout", "final", "noise"):
            if len(parts) > 1:
                raise ConfigError(f"{name} takes no arguments, got {token!r}")
            specs.append(EvalSpec(name, name,
                                  rollout_greedy=cfg["rollout_greedy"]))
        elif name == "filling":
            coarse = int(parts[1]) if len(parts) > 1 else cfg["coarse_trials"]
            refine = int(parts[2]) if len(parts) > 2 else cfg["refine_iters"]
            if len(parts) > 3:
                raise ConfigError(f"too many arguments in {token!r}")
            label = "filling" if len(parts) == 1 else f"filling-c{coarse}-r{refine}"
            specs.append(EvalSpec(label, "filling",
                                  fill=FillSearchConfig(
                                      coarse, refine, cfg["refine_blocks"],
                                      cfg["block_size"]),
                                  stream_tag="filling"))
        else:
            raise ConfigError(f"unknown eval spec {token!r}")
    if not specs:
        raise ConfigError("empty eval spec list")
    return specs


def _prompt_ids(cfg: dict) -> list:
    return list(range(cfg["prompt_offset"],
                      cfg["prompt_offset"] + cfg["prompt_count"]))


def _outdir(cfg: dict) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(cfg: dict) -> int:
    world = world_from(cfg)
    scaling = scaling_from(cfg)
    oracle = oracle_from(cfg, world)
    out = _outdir(cfg)
    per_prompt, reward_rows, trial_rows = [], [], []
    best_overall, best_grid = -np.inf, None
    for pid in _prompt_ids(cfg):
        prompt = world.prompt(pid)
        result = run_fr_tts(world, scaling, prompt, oracle)
        per_prompt.append({"prompt": pid, **run_payload(result)})
        for cp in result.checkpoints:
            for i in range(scaling.num_samples):
                reward_rows.append((pid, cp.index, i, repr(cp.raw_fill[i]),
                                    repr(cp.raw_div[i]), repr(cp.norm_fill[i]),
                                    repr(cp.norm_div[i]), repr(cp.unified[i]),
                                    cp.parents[i]))
        if result.trial_logs:
            for c, logs in enumerate(result.trial_logs):
                for i, log in enumerate(logs or ()):
                    for t, rec in enumerate(log):
                        trial_rows.append((pid, c, i, t, rec.phase,
                                           repr(rec.score), int(rec.accepted)))
        if result.best_score > best_overall:
            best_overall = result.best_score
            best_grid = result.final_samples[result.best_index].grid
    payload = {
        "per_prompt": per_prompt,
        "mean_best": float(np.mean([p["best_score"] for p in per_prompt])),
        "mean_score": float(np.mean([p["mean_score"] for p in per_prompt])),
        "total_oracle_calls": int(oracle.calls),
    }
    report = make_report(cfg, payload)
    write_report(out / "run.json", report)
    write_csv(out / "run_rewards.csv",
              ("prompt", "checkpoint", "sample", "raw_fill", "raw_div",
               "norm_fill", "norm_div", "unified", "parent"), reward_rows)
    if trial_rows:
        write_csv(out / "fill_trials.csv",
                  ("prompt", "checkpoint", "sample", "trial", "phase",
                   "score", "accepted"), trial_rows)
    if best_grid is not None:
        save_grid(out / "best.grid", best_grid)
    print(f"run: {len(per_prompt)} prompts  mean_best={payload['mean_best']:.6f}"
          f"  report={out / 'run.json'}")
    return 0


def cmd_bon(cfg: dict) -> int:
    world = world_from(cfg)
    scaling = scaling_from(cfg)
    oracle = oracle_from(cfg, world)
    out = _outdir(cfg)
    per_prompt, rows = [], []
    for pid in _prompt_ids(cfg):
        result = run_bon(world, scaling, world.prompt(pid), oracle)
        per_prompt.append({"prompt": pid, **run_payload(result)})
        for i, score in enumerate(result.final_scores):
            rows.append((pid, i, repr(score)))
    payload = {
        "per_prompt": per_prompt,
        "mean_best": float(np.mean([p["best_score"] for p in per_prompt])),
        "mean_score": float(np.mean([p["mean_score"] for p in per_prompt])),
        "total_oracle_calls": int(oracle.calls),
    }
    write_report(out / "bon.json", make_report(cfg, payload))
    write_csv(out / "bon_scores.csv", ("prompt", "sample", "score"), rows)
    print(f"bon: {len(per_prompt)} prompts  mean_best={payload['mean_best']:.6f}"
          f"  report={out / 'bon.json'}")
    return 0


def cmd_correlate(cfg: dict) -> int:
    world = world_from(cfg)
    oracle = oracle_from(cfg, world)
    specs = parse_eval_specs(cfg["correlate_specs"], cfg)
    out = _outdir(cfg)
    table = correlation_experiment(world, specs, cfg["correlate_trajectories"],
                                   cfg["checkpoint_rows"], cfg["master_seed"],
                                   _prompt_ids(cfg), oracle)
    write_report(out / "correlate.json",
                 make_report(cfg, correlation_payload(table)))
    write_csv(out / "correlate.csv",
              ("strategy", "checkpoint", "rho", "n", "note"), table.to_rows())
    for spec in specs:
        series = ["None" if r is None else f"{r:.4f}"
                  for r in table.rho_series(spec.label)]
        print(f"correlate: {spec.label:>16}  rho=[{', '.join(series)}]")
    return 0


def make_partial_grids(world: WorldConfig, checkpoint_rows: int,
                       master_seed: int, prompt_ids, count: int):
    """Independent half-generated grids, one prompt each, for sweeps."""
    segments = world.height // checkpoint_rows
    if segments < 2:
        raise ConfigError("need at least 2 segments to stop halfway")
    half = max(1, segments // 2)
    params = world.generator_params()
    seg_tokens = checkpoint_rows * world.width
    grids = []
    for g in range(count):
        prompt = world.prompt(prompt_ids[g % len(prompt_ids)])
        sample = world.new_sample()
        for seg in range(half):
            sample = generate_tokens(sample, prompt, seg_tokens, params,
                                     stream(master_seed, "traj", g, seg))
        grids.append((sample.grid, prompt))
    return grids


def sweep_filling_times(world: WorldConfig, cfg: dict, values) -> list:
    """Mean searched best score per coarse budget on a shared grid set.

    Refinement stays off and every grid reuses one named stream across
    budgets, so a larger budget scores a superset of schemes and the mean
    column cannot decrease.
    """
    grids = make_partial_grids(world, cfg["checkpoint_rows"],
                               cfg["master_seed"], _prompt_ids(cfg),
                               cfg["ablate_grids"])
    rows = []
    for value in values:
        search_cfg = FillSearchConfig(int(value), 0, cfg["refine_blocks"],
                                      cfg["block_size"])
        oracle = SyntheticOracle(world.match_weight, world.smooth_weight)
        scores = []
        for g, (grid, prompt) in enumerate(grids):
            rng = stream(cfg["master_seed"], "fill", g)
            scores.append(filling_search(grid, prompt, oracle,
                                         search_cfg, rng).best_score)
        rows.append({"value": int(value), "mean_best": float(np.mean(scores)),
                     "oracle_calls": int(oracle.calls)})
    return rows


def cmd_ablate(cfg: dict, axis: str, values_text) -> int:
    world = world_from(cfg)
    out = _outdir(cfg)
    if axis == "strategy":
        values = (values_text.split(",") if values_text
                  else ["cropping", "zeropad", "rollout", "filling"])
        rows = []
        for name in values:
            scaling = replace(scaling_from(cfg), strategy=Strategy(name.strip()))
            oracle = oracle_from(cfg, world)
            bests, means = [], []
            for pid in _prompt_ids(cfg):
                result = run_fr_tts(world, scaling, world.prompt(pid), oracle)
                bests.append(result.best_score)
                means.append(result.mean_score)
            rows.append({"value": name.strip(),
                         "mean_best": float(np.mean(bests)),
                         "mean_score": float(np.mean(means)),
                         "oracle_calls": int(oracle.calls)})
    elif axis == "filling-times":
        values = [int(v) for v in (values_text or "1,5,10").split(",")]
        rows = sweep_filling_times(world, cfg, values)
    elif axis == "block-size":
        raw = (values_text or f"1,{world.width // 2},row").split(",")
        values = [world.width if v.strip() == "row" else int(v) for v in raw]
        rows = []
        for value in values:
            scaling = replace(scaling_from(cfg), strategy=Strategy.FILLING,
                              fill=replace(scaling_from(cfg).fill,
                                           block_size=int(value)))
            oracle = oracle_from(cfg, world)
            bests = []
            for pid in _prompt_ids(cfg):
                result = run_fr_tts(world, scaling, world.prompt(pid), oracle)
                bests.append(result.best_score)
            rows.append({"value": int(value),
                         "mean_best": float(np.mean(bests)),
                         "oracle_calls": int(oracle.calls)})
    else:
        raise ConfigError(f"unknown ablation axis {axis!r}")
    payload = {"axis": axis, "rows": rows}
    write_report(out / "ablate.json", make_report(cfg, payload))
    write_csv(out / "ablate.csv", ("value", "mean_best"),
              [(r["value"], repr(r["mean_best"])) for r in rows])
    for r in rows:
        print(f"ablate {axis}: {r['value']!s:>10}  mean_best={r['mean_best']:.6f}")
    return 0


def cmd_validate(cfg: dict) -> int:
    world = world_from(cfg)
    scaling = scaling_from(cfg)
    from .engine import validate_run

    validate_run(world, scaling)
    parse_eval_specs(cfg["correlate_specs"], cfg)
    print(f"config ok  hash={config_hash(cfg)}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fillscale",
        description="Test-time scaling for token-grid generation on a "
                    "synthetic testbed.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("run", "scaling loop with checkpoint filtering over a prompt set"),
            ("bon", "best-of-N baseline over a prompt set"),
            ("correlate", "rank partial-grid scorers against final scores"),
            ("ablate", "sweep one axis and tabulate mean best scores"),
            ("validate-config", "check the configuration and exit")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key=value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one config key")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--out", help="override out_dir")
        if name == "ablate":
            p.add_argument("--axis", required=True,
                           choices=["strategy", "filling-times", "block-size"])
            p.add_argument("--values", help="comma-separated axis values")
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args.config, args.set, args.seed, args.out)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "bon":
            return cmd_bon(cfg)
        if args.command == "correlate":
            return cmd_correlate(cfg)
        if args.command == "ablate":
            return cmd_ablate(cfg, args.axis, args.values)
        return cmd_validate(cfg)
    except FillscaleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
