"""Simulated-crowd CLI: run campaigns and personalization passes."""

from __future__ import annotations

import logging
from pathlib import Path

import click

from ..ltr.model import TrainParams
from .campaign import CampaignConfig, run_campaign
from .personalization import run_personalization


@click.group()
@click.option("--verbose", is_flag=True, default=False)
def main(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Campaign config JSON; defaults to the standard desk-scale campaign.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--profile", type=click.Choice(["shared", "simple", "heterogeneous", "uniform"]), default=None,
              help="Override the crowd profile from the config.")
def run(config_path: str | None, seed: int, out_dir: str, profile: str | None) -> None:
    """Run a full simulated campaign; writes curve.csv, logs, and models."""
    config = CampaignConfig.from_file(config_path) if config_path else CampaignConfig()
    if profile:
        config = CampaignConfig.from_dict({**config.to_dict(), "crowd_profile": profile})
    result = run_campaign(config, seed=seed, out_dir=out_dir)
    click.echo(f"campaign complete: {len(result.records)} iterations")
    click.echo(result.curve_csv.read_text().strip())
    if config.personalization_top_k > 0:
        personal = run_personalization(
            out_dir, top_k=config.personalization_top_k, personal_params=config.personal_train
        )
        click.echo(f"personalization: {personal.win_count}/{len(personal.wins)} workers beat the global model")
        click.echo(f"wrote {personal.csv_path}")


@main.command()
@click.option("--out", "out_dir", type=click.Path(exists=True), required=True,
              help="Directory of a finished campaign run.")
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--num-trees", type=int, default=100, show_default=True)
def personalize(out_dir: str, top_k: int, num_trees: int) -> None:
    """Build per-worker models from an existing campaign's logs."""
    result = run_personalization(
        out_dir, top_k=top_k, personal_params=TrainParams(num_trees=num_trees)
    )
    click.echo(f"{result.win_count}/{len(result.wins)} workers beat the global model")
    click.echo(f"wrote {result.csv_path}")


if __name__ == "__main__":
    main()
