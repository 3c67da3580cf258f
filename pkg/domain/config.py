"""
Scenario configuration schema (pydantic). Pure; file IO lives in services.repository.

Durations are written in seconds and exposed as integer µs; flow rates are
written in kB/s (bytes/s / 1000, the `*_units` fields) and exposed as bits/s.
"""
from __future__ import annotations

from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigInvalid
from .models import BITS_PER_S_PER_UNIT, ControllerMode, FlowSpec, ServiceClass, SimTime, seconds_to_us


class FlowConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    flow_id: int = Field(ge=0)
    packet_size: int = Field(gt=0, description="bytes")
    send_interval: float = Field(allow_inf_nan=False, gt=0, description="seconds between packets at the maximum rate")
    min_rate_units: float = Field(allow_inf_nan=False, gt=0, description="minimum subjective rate in kB/s (x8000 = bits/s)")
    service_class: ServiceClass = ServiceClass.UGS
    priority: int = 0

    @property
    def send_interval_us(self) -> SimTime:
        return seconds_to_us(self.send_interval)

    @field_validator("service_class")
    @classmethod
    def _only_scheduled_classes(cls, v: ServiceClass) -> ServiceClass:
        if not v.scheduled:
            raise ValueError(f"service class {v.value} is declared but not scheduled")
        return v

    @model_validator(mode="after")
    def _min_not_above_max(self) -> "FlowConfig":
        if self.send_interval_us <= 0:
            raise ValueError("send_interval rounds to 0 us")
        spec = self.to_spec()
        if spec.min_rate > spec.max_rate:
            raise ValueError(
                f"flow {self.flow_id}: min rate {spec.min_rate:.0f} b/s exceeds max rate {spec.max_rate:.0f} b/s"
            )
        return self

    def to_spec(self) -> FlowSpec:
        return FlowSpec(
            flow_id=self.flow_id,
            packet_size=self.packet_size,
            send_interval=self.send_interval_us,
            min_rate=self.min_rate_units * BITS_PER_S_PER_UNIT,
            service_class=self.service_class,
            priority=self.priority,
        )


class MacConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frame_duration: float = Field(default=0.005, allow_inf_nan=False, gt=0, description="seconds")
    uplink_capacity: float = Field(default=6_400_000.0, allow_inf_nan=False, gt=0, description="bits/s")
    queue_limit: int = Field(default=50, ge=1, description="packets per flow")
    # What allocate_grants is fed: every flow's maximum sustained rate, or the
    # controller's current rate.
    grant_basis: Literal["sustained", "current"] = "sustained"

    @property
    def frame_duration_us(self) -> SimTime:
        return seconds_to_us(self.frame_duration)

    @property
    def frame_capacity_bits(self) -> int:
        return int(self.uplink_capacity * self.frame_duration_us // 1_000_000)

    @model_validator(mode="after")
    def _frame_resolvable(self) -> "MacConfig":
        if self.frame_duration_us <= 0:
            raise ValueError("frame_duration rounds to 0 us")
        return self


class ControllerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: ControllerMode = ControllerMode.QOE
    reset_period: float = Field(default=20.0, allow_inf_nan=False, gt=0, description="seconds")
    descent_duration: float = Field(default=18.0, allow_inf_nan=False, gt=0, description="seconds")
    control_epoch: float = Field(default=0.5, allow_inf_nan=False, gt=0, description="seconds")
    # "all": a loss on any flow flags every flow; "culprit": only the losing flow.
    loss_scope: Literal["all", "culprit"] = "all"

    @property
    def reset_period_us(self) -> SimTime:
        return seconds_to_us(self.reset_period)

    @property
    def descent_duration_us(self) -> SimTime:
        return seconds_to_us(self.descent_duration)

    @property
    def control_epoch_us(self) -> SimTime:
        return seconds_to_us(self.control_epoch)

    @property
    def descent_epochs(self) -> int:
        return self.descent_duration_us // self.control_epoch_us

    @model_validator(mode="after")
    def _timing(self) -> "ControllerConfig":
        if self.control_epoch_us <= 0:
            raise ValueError("control_epoch rounds to 0 us")
        if self.descent_duration_us >= self.reset_period_us:
            raise ValueError("descent_duration must be shorter than reset_period")
        if self.descent_duration_us % self.control_epoch_us:
            raise ValueError("control_epoch must divide descent_duration evenly")
        return self


# Default users: (flow, interval s, minimum requirement kB/s); 200-byte CBR packets.
_DEFAULT_USERS = [
    (1, 0.0015, 120.0),
    (2, 0.001, 150.0),
    (3, 0.001, 150.0),
    (4, 0.001, 150.0),
    (5, 0.0015, 120.0),
]


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "five-ugs-users"
    flows: List[FlowConfig]
    mac: MacConfig = Field(default_factory=MacConfig)
    controller: ControllerConfig = Field(default_factory=ControllerConfig)
    duration: float = Field(default=200.0, allow_inf_nan=False, description="seconds")
    seed: int = 42
    out_trace: Optional[str] = None
    out_report: Optional[str] = None

    @property
    def duration_us(self) -> SimTime:
        return seconds_to_us(self.duration)

    @field_validator("duration")
    @classmethod
    def _positive_duration(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("duration must be > 0")
        return v

    @model_validator(mode="after")
    def _unique_flows(self) -> "ScenarioConfig":
        if not self.flows:
            raise ValueError("at least one flow is required")
        ids = [f.flow_id for f in self.flows]
        if len(ids) != len(set(ids)):
            raise ValueError(f"flow ids must be unique, got {ids}")
        return self

    def flow_specs(self) -> List[FlowSpec]:
        return [f.to_spec() for f in sorted(self.flows, key=lambda f: f.flow_id)]

    @classmethod
    def default(cls) -> "ScenarioConfig":
        """Five equal-priority UGS users on a 6.4 Mbit/s uplink, 200 s."""
        flows = [
            FlowConfig(flow_id=fid, packet_size=200, send_interval=interval, min_rate_units=minimum)
            for fid, interval, minimum in _DEFAULT_USERS
        ]
        return cls(flows=flows)


def _reason(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err.get("loc", ()))
        msg = err.get("msg", "invalid")
        parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def parse_config(data: Dict[str, Any]) -> ScenarioConfig:
    """Validate a raw mapping; schema violations become ConfigInvalid."""
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(_reason(exc)) from exc


def with_overrides(cfg: ScenarioConfig, **overrides: Any) -> ScenarioConfig:
    """Apply non-None top-level/controller overrides and re-validate."""
    data = cfg.model_dump(mode="json")
    mode = overrides.pop("mode", None)
    if mode is not None:
        data["controller"]["mode"] = ControllerMode(mode).value
    for key, value in overrides.items():
        if value is not None:
            data[key] = value
    return parse_config(data)
