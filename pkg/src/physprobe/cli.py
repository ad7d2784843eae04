"""Command-line entry points: run, serve, serve-http, replay, render, eval."""

import csv
import dataclasses
import json
import pathlib
import sys

import click
import yaml

from .errors import ConfigurationError, PhysprobeError
from .harness.baselines import BASELINES, make_baseline
from .harness.episode import (
    EpisodeConfig,
    EpisodeSession,
    ReplayAgent,
    replay_episode,
)
from .harness.render import render_classical, render_fluid, render_quantum
from .harness.trials import (
    read_records,
    run_parameter_inference,
    run_trials,
    write_records,
)


def _clean_errors(command):
    """Surface domain errors as short CLI messages, not tracebacks."""
    import functools

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PhysprobeError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _apply_override(tree: dict, dotted: str, raw_value: str) -> None:
    keys = dotted.split(".")
    node = tree
    for key in keys[:-1]:
        node = node.setdefault(key, {})
        if not isinstance(node, dict):
            raise ConfigurationError(f"cannot descend into {key!r} in override {dotted!r}")
    node[keys[-1]] = yaml.safe_load(raw_value)


def _load_config_tree(path) -> dict:
    text = pathlib.Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return json.loads(text)
    return yaml.safe_load(text)


def build_episode_config(config_path, environment, seed, num_queries, variant,
                         episodes, overrides) -> EpisodeConfig:
    tree = _load_config_tree(config_path) if config_path else {}
    if not isinstance(tree, dict):
        raise ConfigurationError("config file must hold a mapping")
    if environment:
        tree["environment"] = environment
    if seed is not None:
        tree["seed"] = seed
    if num_queries is not None:
        tree["num_queries"] = num_queries
    if variant:
        variant_tree = tree.get("variant")
        if not isinstance(variant_tree, dict):
            variant_tree = {}
        variant_tree["kind"] = variant
        tree["variant"] = variant_tree
    if episodes is not None:
        variant_tree = tree.setdefault("variant", {"kind": "icl"})
        if isinstance(variant_tree, str):
            variant_tree = {"kind": variant_tree}
            tree["variant"] = variant_tree
        variant_tree["num_episodes"] = episodes
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override must look like key=value, got {item!r}")
        dotted, raw_value = item.split("=", 1)
        _apply_override(tree, dotted, raw_value)
    if "environment" not in tree:
        raise ConfigurationError("an environment kind is required (flag or config file)")
    if "seed" not in tree:
        raise ConfigurationError("an explicit seed is required (flag or config file)")
    return EpisodeConfig.from_dict(tree)


_config_options = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="YAML or JSON episode configuration."),
    click.option("--environment", type=click.Choice(["classical", "fluid", "quantum"]),
                 default=None, help="Environment kind (overrides the config file)."),
    click.option("--seed", type=int, default=None, help="Episode seed."),
    click.option("--queries", "num_queries", type=int, default=None,
                 help="Prediction queries per episode."),
    click.option("--variant", type=click.Choice(["standard", "visual", "icl",
                                                 "parameter_inference"]),
                 default=None, help="Episode variant."),
    click.option("--episodes", type=int, default=None,
                 help="Episode count for the icl variant."),
    click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                 help="Dotted config override, e.g. config.n_particles=3."),
]


def _with_config_options(command):
    for option in reversed(_config_options):
        command = option(command)
    return command


@click.group()
def main():
    """Budget-constrained physics inference environments."""


@main.command()
@_with_config_options
@click.option("--agent", type=click.Choice(sorted(BASELINES)), default="grid",
              show_default=True, help="Scripted agent to drive the episode.")
@click.option("--agent-seed", type=int, default=0, show_default=True,
              help="Seed for stochastic agents.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write episode records to this JSONL file.")
@_clean_errors
def run(config_path, environment, seed, num_queries, variant, episodes,
        overrides, agent, agent_seed, out_path):
    """Run episodes in-process with a scripted agent."""
    episode = build_episode_config(config_path, environment, seed, num_queries,
                                   variant, episodes, overrides)

    def agent_factory():
        if agent == "random":
            return make_baseline(agent, seed=agent_seed)
        return make_baseline(agent)

    if episode.variant.kind == "parameter_inference":
        estimate, error, record = run_parameter_inference(episode, agent_factory())
        records = [record]
        if estimate is None:
            click.echo("estimate: forfeited")
        else:
            click.echo(f"estimate: {estimate}")
            click.echo(f"absolute error: {error}")
    else:
        records = run_trials(episode, agent_factory)
        for index, record in enumerate(records):
            click.echo(f"episode {index}: score {record.score}")
    if out_path:
        write_records(out_path, records)
        click.echo(f"wrote {len(records)} record(s) to {out_path}")


@main.command()
@_with_config_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=0, help="TCP port (0 picks a free one).")
@click.option("--stdio", is_flag=True, help="Serve one episode over stdin/stdout.")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="Append finished episode records to this JSONL file.")
@click.option("--seed-step", type=int, default=0, show_default=True,
              help="Connection k runs with seed + k * seed_step.")
@_clean_errors
def serve(config_path, environment, seed, num_queries, variant, episodes,
          overrides, host, port, stdio, log_path, seed_step):
    """Serve episodes to external agents over the NDJSON wire protocol."""
    from .wire.server import serve_stdio, start_server, write_record_line

    episode = build_episode_config(config_path, environment, seed, num_queries,
                                   variant, episodes, overrides)
    if stdio:
        record = serve_stdio(episode)
        if log_path:
            import threading

            write_record_line(log_path, record, threading.Lock())
        return
    server, thread = start_server(episode, host=host, port=port,
                                  record_path=log_path, seed_step=seed_step)
    bound_host, bound_port = server.server_address
    click.echo(f"listening on {bound_host}:{bound_port}", err=True)
    try:
        thread.join()
    except KeyboardInterrupt:
        server.shutdown()
        server.server_close()


@main.command("serve-http")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_clean_errors
def serve_http(host, port):
    """Serve the HTTP episode API."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command()
@click.option("--record", "record_path", type=click.Path(exists=True), required=True,
              help="JSONL episode records to replay.")
@click.option("--index", type=int, default=None,
              help="Replay only this record (0-based).")
@_clean_errors
def replay(record_path, index):
    """Re-run recorded transcripts and verify bitwise-identical responses."""
    records = read_records(record_path)
    if index is not None:
        records = [records[index]]
    failures = 0
    for position, record in enumerate(records):
        fresh, mismatches = replay_episode(record)
        if mismatches:
            failures += 1
            click.echo(
                f"episode {position}: MISMATCH at transcript entries {mismatches}"
            )
        else:
            click.echo(f"episode {position}: replay clean, score {fresh.score}")
    if failures:
        raise SystemExit(1)


@main.command()
@click.option("--record", "record_path", type=click.Path(exists=True), required=True)
@click.option("--index", type=int, default=0, show_default=True,
              help="Which record in the file to render.")
@click.option("--out", "out_dir", type=click.Path(), required=True,
              help="Directory for the PNG frames.")
@click.option("--size", type=int, default=512, show_default=True)
@_clean_errors
def render(record_path, index, out_dir, size):
    """Render observation-time frames (or heatmaps) from an episode record."""
    records = read_records(record_path)
    record = records[index]
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    episode = EpisodeConfig.from_dict(record.config)
    session = EpisodeSession(episode)
    agent = ReplayAgent(record.transcript)

    def snapshot(frame_index: int, time: float) -> bytes:
        env = session.env
        if session.kind == "classical":
            return render_classical(env.state.positions, env.state.radii,
                                    env.config.box_lo, env.config.box_hi,
                                    image_size=size)
        if session.kind == "fluid":
            return render_fluid(env.field.physical_vorticity(), image_size=size)
        from .envs.quantum import marginal_density

        return render_quantum(
            marginal_density(env.psi, 1, env.config.p), image_size=size
        )

    frame = 0
    envelopes = session.start()
    png = snapshot(frame, 0.0)
    (out / f"frame_{frame:04d}.png").write_bytes(png)
    while not session.done:
        reply = agent.respond(envelopes)
        envelopes = session.handle(reply)
        if any(e["type"] == "observation" for e in envelopes):
            frame += 1
            png = snapshot(frame, session.clock.time)
            (out / f"frame_{frame:04d}.png").write_bytes(png)
    click.echo(f"wrote {frame + 1} frame(s) to {out}")


@main.command()
@click.option("--suite", "suite_path", type=click.Path(exists=True), required=True,
              help="YAML suite: a list of {name, environment, config, seeds, agents}.")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="CSV destination for per-seed scores and per-agent means.")
@_clean_errors
def eval(suite_path, out_path):
    """Sweep scripted agents over configured environments; emit a score CSV."""
    suite = yaml.safe_load(pathlib.Path(suite_path).read_text(encoding="utf-8"))
    if not isinstance(suite, list):
        raise ConfigurationError("suite file must hold a list of entries")
    rows = []
    for entry in suite:
        name = entry.get("name", entry["environment"])
        seeds = entry.get("seeds", [entry["seed"]] if "seed" in entry else [0])
        agents = entry.get("agents", ["grid"])
        for agent_name in agents:
            scores = []
            for seed in seeds:
                episode = EpisodeConfig.from_dict(
                    {
                        "environment": entry["environment"],
                        "config": entry.get("config", {}),
                        "seed": seed,
                        "num_queries": entry.get("num_queries", 5),
                        "horizon_factor": entry.get("horizon_factor", 1.2),
                        "variant": entry.get("variant"),
                    }
                )
                def agent_factory(name=agent_name, agent_seed=seed):
                    if name == "random":
                        return make_baseline(name, seed=agent_seed)
                    return make_baseline(name)

                if episode.variant.kind == "parameter_inference":
                    _, error, record = run_parameter_inference(episode, agent_factory())
                    score = error
                else:
                    records = run_trials(episode, agent_factory)
                    score = records[-1].score
                rows.append(
                    {
                        "name": name,
                        "environment": entry["environment"],
                        "variant": episode.variant.kind,
                        "agent": agent_name,
                        "seed": seed,
                        "score": score,
                    }
                )
                scores.append(score)
            valid = [s for s in scores if s is not None]
            rows.append(
                {
                    "name": name,
                    "environment": entry["environment"],
                    "variant": episode.variant.kind,
                    "agent": agent_name,
                    "seed": "mean",
                    "score": sum(valid) / len(valid) if valid else None,
                }
            )
    with open(out_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=["name", "environment", "variant", "agent", "seed", "score"]
        )
        writer.writeheader()
        writer.writerows(rows)
    click.echo(f"wrote {len(rows)} row(s) to {out_path}")


if __name__ == "__main__":
    main()
