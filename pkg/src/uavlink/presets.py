"""Built-in sweep presets and the generic sweep runner.

Each preset pins a reproducible scenario (sampled quantities resolved by a
documented placement seed) and emits plot-ready rows:

``fig2``  throughput vs the interferers' threshold, one curve per source
          threshold, ten all-Rician nodes.
``fig3``  throughput vs interferer count; the first two interferers are
          Rician, the rest Rayleigh.
``fig4``  error probability vs interferer count for several SINR
          thresholds, all nodes Rician.
``fig5``  queue-drop probability vs slot duration, one curve per source
          threshold; no interferers enter this metric.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import throughput as tp
from .errors import DomainError, ScenarioError
from .scenario_io import Scenario, scenario_from_mapping
from .throughput import PolicyVector

__all__ = ["SweepSpec", "run_sweep", "PRESETS", "run_preset", "preset_scenario"]

DEFAULT_PRESET_SEED = 7

# Interferer thresholds reported as the throughput-maximizing operating
# points of the two fading families in the preset geometry.
RICIAN_BETA = 5.1
RAYLEIGH_BETA = 1.55

SWEEP_VARIABLES = (
    "beta_n",
    "beta_m",
    "interferer_count",
    "gamma_th",
    "t_slt",
    "interferer_power_range",
)


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis plus fixed scenario overrides applied before sweeping."""

    variable: str
    values: tuple
    fixed: Mapping[str, Any] | None = None

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise DomainError(
                f"SweepSpec.variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}"
            )
        if len(self.values) == 0:
            raise DomainError("SweepSpec.values must be non-empty")
        scalars = [v for v in self.values]
        if self.variable != "interferer_power_range" and any(
            b <= a for a, b in zip(scalars, scalars[1:])
        ):
            raise DomainError("SweepSpec.values must be strictly increasing")


def _with_interferer_prefix(scenario: Scenario, count: int) -> Scenario:
    interferers = scenario.interferers()
    if count > len(interferers):
        raise DomainError(
            f"interferer_count {count} exceeds the {len(interferers)} interferers available"
        )
    kept = (scenario.source(), *interferers[:count])
    return replace(scenario, nodes=kept)


def _with_power_range(scenario: Scenario, value: Any) -> Scenario:
    try:
        lo, hi = float(value[0]), float(value[1])
    except (TypeError, IndexError, ValueError) as exc:
        raise DomainError(f"interferer_power_range value must be (lo, hi), got {value!r}") from exc
    if not 0 < lo <= hi:
        raise DomainError("interferer_power_range: need 0 < lo <= hi")
    span = 0.5  # documents' sampled powers live in [0.5, 1.0]
    nodes = []
    for node in scenario.nodes:
        if node.role == "source":
            nodes.append(node)
            continue
        frac = (node.transmit_power - 0.5) / span
        frac = min(1.0, max(0.0, frac))
        nodes.append(replace(node, transmit_power=lo + (hi - lo) * frac))
    return replace(scenario, nodes=tuple(nodes))


def _apply_point(scenario: Scenario, policy: PolicyVector, variable: str, value: Any):
    if variable == "beta_n":
        return scenario, policy.updated(scenario.source().id, float(value))
    if variable == "beta_m":
        for node in scenario.interferers():
            policy = policy.updated(node.id, float(value))
        return scenario, policy
    if variable == "gamma_th":
        return replace(scenario, sinr_threshold=float(value)), policy
    if variable == "t_slt":
        return replace(scenario, slot_duration=float(value)), policy
    if variable == "interferer_count":
        return _with_interferer_prefix(scenario, int(value)), policy
    if variable == "interferer_power_range":
        return _with_power_range(scenario, value), policy
    raise DomainError(f"unknown sweep variable {variable!r}")


def run_sweep(
    scenario: Scenario, spec: SweepSpec, approximate: bool = False
) -> tuple[list[str], list[dict]]:
    """Evaluate the source's breakdown at every sweep point, in given order."""
    base_policy = PolicyVector.from_scenario(scenario)
    if spec.fixed:
        for key, value in spec.fixed.items():
            scenario, base_policy = _apply_point(scenario, base_policy, key, value)
    columns = [spec.variable, "p_delay", "p_overflow", "p_error", "p_loss", "throughput"]
    rows = []
    for value in spec.values:
        point_scenario, point_policy = _apply_point(scenario, base_policy, spec.variable, value)
        breakdown = tp.evaluate(point_scenario, point_policy, approximate=approximate)
        rows.append(
            {
                spec.variable: value if not isinstance(value, (tuple, list)) else str(value),
                "p_delay": breakdown.p_delay,
                "p_overflow": breakdown.p_overflow,
                "p_error": breakdown.p_error,
                "p_loss": breakdown.p_loss,
                "throughput": breakdown.throughput,
            }
        )
    return columns, rows


# --------------------------------------------------------------------------
# Preset scenarios
# --------------------------------------------------------------------------


def _interferer_specs(count: int, fading: Sequence[str]) -> list[dict]:
    return [
        {
            "id": f"i{k}",
            "role": "interferer",
            "position": "sampled",
            "transmit_power": "sampled",
            "fading": fading[k] if k < len(fading) else fading[-1],
            "queue": {
                "arrival_rate": "sampled",
                "delay_threshold": "sampled",
                "buffer_capacity_normalized": "sampled",
            },
        }
        for k in range(count)
    ]


def _fig2_scenario(seed: int) -> Scenario:
    # Source pinned near the area corner: its moderate elevation keeps the
    # feasible threshold range wide enough to show the interior optimum.
    doc = {
        "placement_seed": seed,
        "nodes": [
            {
                "id": "src",
                "role": "source",
                "position": [1.0, 1.0, 0.0],
                "transmit_power": 0.75,
                "fading": "rician",
                "beta": RICIAN_BETA,
                "queue": {
                    "arrival_rate": 120.0,
                    "delay_threshold": 0.045,
                    "buffer_capacity_normalized": 100.0,
                },
            },
            *[
                {**spec, "beta": RICIAN_BETA}
                for spec in _interferer_specs(9, ["rician"])
            ],
        ],
    }
    return scenario_from_mapping(doc)


def _fig2_rows(scenario: Scenario) -> tuple[list[str], list[dict]]:
    view = tp.source_view(scenario)
    upper = tp.beta_upper(view.model, view.queue, view.num_channels)
    beta_n_grid = np.linspace(0.3, 0.995 * upper, 28)
    beta_m_grid = (2.5, 3.5, 4.5, 5.1, 5.7, 6.3, 7.0)
    policy = PolicyVector.from_scenario(scenario)
    rows = []
    for beta_n in beta_n_grid:
        p_n = policy.updated(scenario.source().id, float(beta_n))
        for beta_m in beta_m_grid:
            p = p_n
            for node in scenario.interferers():
                p = p.updated(node.id, beta_m)
            breakdown = tp.evaluate(scenario, p)
            rows.append(
                {
                    "beta_n": float(beta_n),
                    "beta_m": beta_m,
                    "throughput": breakdown.throughput,
                }
            )
    return ["beta_n", "beta_m", "throughput"], rows


def _fig3_scenario(seed: int) -> Scenario:
    specs = _interferer_specs(8, ["rician", "rician", "rayleigh"])
    for k, spec in enumerate(specs):
        spec["beta"] = RICIAN_BETA if k < 2 else RAYLEIGH_BETA
    doc = {
        "placement_seed": seed,
        "nodes": [
            {
                "id": "src",
                "role": "source",
                "position": [1.0, 1.0, 0.0],
                "transmit_power": 0.5,
                "fading": "rician",
                "beta": RICIAN_BETA,
                "queue": {
                    "arrival_rate": 80.0,
                    "delay_threshold": 0.045,
                    "buffer_capacity_normalized": 100.0,
                },
            },
            *specs,
        ],
    }
    return scenario_from_mapping(doc)


def _fig3_rows(scenario: Scenario) -> tuple[list[str], list[dict]]:
    rows = []
    for count in range(0, len(scenario.interferers()) + 1):
        point = _with_interferer_prefix(scenario, count)
        breakdown = tp.evaluate(point)
        rows.append({"num_interferers": count, "throughput": breakdown.throughput})
    return ["num_interferers", "throughput"], rows


def _fig4_scenario(seed: int) -> Scenario:
    specs = _interferer_specs(8, ["rician"])
    for spec in specs:
        spec["beta"] = RICIAN_BETA
    doc = {
        "placement_seed": seed,
        "nodes": [
            {
                "id": "src",
                "role": "source",
                "position": [1.0, 1.0, 0.0],
                "transmit_power": 0.5,
                "fading": "rician",
                "beta": RICIAN_BETA,
                "queue": {
                    "arrival_rate": 80.0,
                    "delay_threshold": 0.045,
                    "buffer_capacity_normalized": 100.0,
                },
            },
            *specs,
        ],
    }
    return scenario_from_mapping(doc)


def _fig4_rows(scenario: Scenario) -> tuple[list[str], list[dict]]:
    rows = []
    for gamma_th in (2.0, 4.0, 8.0):
        point_base = replace(scenario, sinr_threshold=gamma_th)
        for count in range(1, len(scenario.interferers()) + 1):
            point = _with_interferer_prefix(point_base, count)
            breakdown = tp.evaluate(point)
            rows.append(
                {
                    "gamma_th": gamma_th,
                    "num_interferers": count,
                    "p_error": breakdown.p_error,
                }
            )
    return ["gamma_th", "num_interferers", "p_error"], rows


def _fig5_scenario(seed: int) -> Scenario:
    doc = {
        "placement_seed": seed,
        "nodes": [
            {
                "id": "src",
                "role": "source",
                "position": [1.0, 1.0, 0.0],
                "transmit_power": 0.5,
                "fading": "rician",
                "beta": RICIAN_BETA,
                "queue": {
                    "arrival_rate": 80.0,
                    "delay_threshold": 0.045,
                    "buffer_capacity_normalized": 100.0,
                },
            },
        ],
    }
    return scenario_from_mapping(doc)


def _fig5_rows(scenario: Scenario) -> tuple[list[str], list[dict]]:
    slot_grid = np.linspace(0.5e-3, 4.0e-3, 8)
    # thresholds anchored to the tightest (largest slot) stability bound so
    # every point of the sweep stays feasible
    tight = replace(scenario, slot_duration=float(slot_grid[-1]))
    view = tp.source_view(tight)
    upper = tp.beta_upper(view.model, view.queue, view.num_channels)
    beta_fracs = (0.70, 0.85, 0.95, 0.999)
    rows = []
    for t_slt in slot_grid:
        point = replace(scenario, slot_duration=float(t_slt))
        for frac in beta_fracs:
            beta_n = frac * upper
            policy = PolicyVector({scenario.source().id: beta_n})
            breakdown = tp.evaluate(point, policy)
            drop = breakdown.p_overflow + (1.0 - breakdown.p_overflow) * breakdown.p_delay
            rows.append(
                {
                    "t_slt": float(t_slt),
                    "beta_n": float(beta_n),
                    "queue_drop": drop,
                }
            )
    return ["t_slt", "beta_n", "queue_drop"], rows


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    build: Callable[[int], Scenario]
    rows: Callable[[Scenario], tuple[list[str], list[dict]]]


PRESETS: dict[str, Preset] = {
    "fig2": Preset(
        "fig2",
        "throughput vs interferer threshold, curves over source threshold (10 Rician nodes)",
        _fig2_scenario,
        _fig2_rows,
    ),
    "fig3": Preset(
        "fig3",
        "throughput vs interferer count (first two interferers Rician, rest Rayleigh)",
        _fig3_scenario,
        _fig3_rows,
    ),
    "fig4": Preset(
        "fig4",
        "error probability vs interferer count for SINR thresholds 2/4/8 (all Rician)",
        _fig4_scenario,
        _fig4_rows,
    ),
    "fig5": Preset(
        "fig5",
        "queue-drop probability vs slot duration, curves over source threshold",
        _fig5_scenario,
        _fig5_rows,
    ),
}


def preset_scenario(name: str, seed: int | None = None) -> Scenario:
    if name not in PRESETS:
        raise ScenarioError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    return PRESETS[name].build(DEFAULT_PRESET_SEED if seed is None else seed)


def run_preset(name: str, seed: int | None = None) -> tuple[list[str], list[dict]]:
    preset = PRESETS.get(name)
    if preset is None:
        raise ScenarioError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    scenario = preset_scenario(name, seed)
    return preset.rows(scenario)
