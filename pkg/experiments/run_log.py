"""Run audit log.

Appends one newline-delimited JSON record per CLI run to logs/runs.jsonl.

Log record schema:
  {
    "ts": "ISO timestamp",
    "command": "convergence",
    "problem": "f2x",
    "parameters": {...},
    "rows": 5,
    "status": "ok" | "usage_error" | "numerical_failure"
  }
"""

import json
from datetime import datetime, timezone
from typing import Optional

from loguru import logger

from config import Config, get_config, resolve_path


def log_run(
    command: str,
    problem: Optional[str],
    parameters: dict,
    rows: int,
    status: str,
    cfg: Optional[Config] = None,
) -> None:
    """Append a run record; failures to write are only warned about."""
    cfg = cfg or get_config()
    if not cfg.logging.log_runs:
        return

    record = {
        "ts": datetime.now(timezone.utc).isoformat(),
        "command": command,
        "problem": problem,
        "parameters": parameters,
        "rows": rows,
        "status": status,
    }

    log_path = resolve_path(cfg.logging.log_file)
    try:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, default=str) + "\n")
    except Exception as e:
        logger.warning(f"Could not write to run log: {e}")
