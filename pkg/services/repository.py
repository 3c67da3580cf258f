"""
Repository helpers for reading/writing scenario JSON files under data/scenarios.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import List

from domain.config import ScenarioConfig, parse_config
from domain.errors import ConfigInvalid

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_SCENARIO = "five-ugs-users"


class Repository:
    def __init__(self, data_dir: Path | None = None) -> None:
        self.data_dir = data_dir or DATA_DIR
        self.scenario_dir = self.data_dir / "scenarios"

    def list_scenarios(self) -> List[str]:
        if not self.scenario_dir.exists():
            return []
        return sorted(p.stem for p in self.scenario_dir.glob("*.json"))

    def resolve(self, name_or_path: str | Path) -> Path:
        """A path to an existing file wins; otherwise look the name up under data/scenarios."""
        candidate = Path(name_or_path)
        if candidate.exists():
            return candidate
        named = self.scenario_dir / f"{Path(name_or_path).stem}.json"
        if named.exists():
            return named
        raise FileNotFoundError(f"no scenario file or named scenario {str(name_or_path)!r}")

    def load_scenario(self, name_or_path: str | Path | None = None) -> ScenarioConfig:
        if name_or_path is None:
            return ScenarioConfig.default()
        fp = self.resolve(name_or_path)
        try:
            raw = json.loads(fp.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"{fp}: not valid JSON ({exc.msg} at line {exc.lineno})") from exc
        if not isinstance(raw, dict):
            raise ConfigInvalid(f"{fp}: top level must be an object")
        return parse_config(raw)

    def save_scenario(self, cfg: ScenarioConfig, path: Path | None = None) -> Path:
        fp = path or self.scenario_dir / f"{cfg.name}.json"
        fp.parent.mkdir(parents=True, exist_ok=True)
        fp.write_text(cfg.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return fp
