from pathlib import Path

from passgraph.cli.commands import run_pipeline
from passgraph.cli.config import load_config

config = load_config(Path("config.yaml"))


if __name__ == "__main__":
    run_pipeline(config)
