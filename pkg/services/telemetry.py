"""
Telemetry service: logs completed simulation runs to a JSONL file.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

from domain.config import ScenarioConfig
from domain.simulation import SimulationResult

LOG_DIR = Path(__file__).resolve().parent.parent / "data" / "logs"
LOG_FILE = LOG_DIR / "runs.jsonl"

def make_run_id(cfg: ScenarioConfig, mode: str) -> str:
    """Deterministic fingerprint for a config + controller mode."""
    payload = {"config": cfg.model_dump(mode="json"), "mode": mode}
    raw = json.dumps(payload, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()[:16]


def log_run(
    cfg: ScenarioConfig,
    result: SimulationResult,
    wall_seconds: float,
    log_file: Optional[Path] = None,
) -> Dict[str, Any]:
    """Append a run record to the JSONL file and return the record."""
    fp = log_file or LOG_FILE
    fp.parent.mkdir(parents=True, exist_ok=True)
    rec: Dict[str, Any] = {
        "ts": datetime.now(timezone.utc).isoformat(),
        "run_id": make_run_id(cfg, result.mode.value),
        "scenario": cfg.name,
        "mode": result.mode.value,
        "seed": cfg.seed,
        "duration_us": result.duration,
        "events": result.events,
        "wall_seconds": round(wall_seconds, 3),
        "resets": result.controller.resets,
        "metrics": [asdict(m) for m in result.metrics],
    }
    with fp.open("a", encoding="utf-8") as f:
        f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    return rec
