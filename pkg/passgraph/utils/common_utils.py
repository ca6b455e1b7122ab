import hashlib
import json
from datetime import datetime
from pathlib import Path

import numpy as np
import yaml

from passgraph.utils.logger_utils import setup_logger

logger = setup_logger(__name__)


def openfile(file: str | Path) -> dict | list | None:
    if isinstance(file, str):
        file = Path(file)
    with file.open("r", encoding="utf-8") as f:
        try:
            data = json.loads(f.read())
        except Exception as e:
            logger.error("Failed to load JSON from %s: %s", file, str(e))
            data = None
    return data


def dump_json(data, file: str | Path) -> Path:
    file = Path(file)
    file.parent.mkdir(parents=True, exist_ok=True)
    with file.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=4, sort_keys=True)
    return file


def config_hash(config: dict, length: int = 8) -> str:
    """
    Stable short hash of a plain-data configuration.

    Keys are sorted before hashing so dict ordering never changes the result.
    """
    payload = json.dumps(config, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:length]


def make_run_dir(root: str | Path, command: str, config: dict) -> Path:
    """
    Create ``<root>/<command>-<timestamp>-<hash>`` and store the resolved config
    in it, so any output of the run can be re-derived.
    """
    stamp = datetime.now().strftime("%Y%m%d-%H%M%S")
    run_dir = Path(root) / f"{command}-{stamp}-{config_hash(config)}"
    suffix = 1
    while run_dir.exists():
        run_dir = Path(root) / f"{command}-{stamp}-{config_hash(config)}-{suffix}"
        suffix += 1
    run_dir.mkdir(parents=True)
    (run_dir / "resolved_config.yaml").write_text(
        yaml.safe_dump(config, sort_keys=True), encoding="utf-8"
    )
    logger.info("Run directory: %s", run_dir)
    return run_dir


def derived_rng(seed: int, *stream: int) -> np.random.Generator:
    # (seed, index...) streams are independent of generation order
    return np.random.default_rng([int(seed), *[int(s) for s in stream]])
