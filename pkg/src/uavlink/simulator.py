"""Slot-level Monte Carlo oracle for the analytic loss model.

Unlike the closed forms, the simulator runs the true system: geometric
service (a head-of-line packet leaves only when the best channel clears
the threshold), the exact interference sum with per-channel collisions,
finite buffers holding exponential packet lengths, and deadline drops at
slot boundaries.  Gaps between these statistics and the analytics measure
the quality of the closed-form approximations, not bugs.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import channel as ch
from .errors import DomainError
from .scenario_io import Scenario

__all__ = [
    "SimConfig",
    "MetricEstimate",
    "ReplicationCounts",
    "SimResult",
    "derive_seed",
    "run",
]

_MASK64 = (1 << 64) - 1
_BLOCK = 1 << 16


@dataclass(frozen=True)
class SimConfig:
    """Horizon, seeding, warmup, and replication count of one simulation.

    ``always_collide`` is a sensitivity knob: every transmitting interferer
    hits the main link's channel instead of only on argmax collisions.
    """

    num_slots: int
    seed: int = 0
    warmup_slots: int = 0
    replication_count: int = 1
    always_collide: bool = False

    def __post_init__(self):
        if not 0 <= self.warmup_slots < self.num_slots:
            raise DomainError("SimConfig: need num_slots > warmup_slots >= 0")
        if self.replication_count < 1:
            raise DomainError("SimConfig: replication_count must be >= 1")


@dataclass(frozen=True)
class MetricEstimate:
    """Point estimate with a 95% normal-approximation halfwidth across replications."""

    value: float
    halfwidth: float


@dataclass(frozen=True)
class ReplicationCounts:
    """Raw post-warmup event tallies of the source node for one replication.

    The exact conservation identity is
    arrivals + queued_at_warmup ==
    delivered + delay_drops + error_drops + overflow_drops + queued_at_end.
    """

    arrivals: int
    overflow_drops: int
    delay_drops: int
    error_drops: int
    delivered: int
    transmissions: int
    queued_at_warmup: int
    queued_at_end: int

    @property
    def admitted(self) -> int:
        return self.arrivals - self.overflow_drops + self.queued_at_warmup

    def p_overflow(self) -> float:
        return self.overflow_drops / self.arrivals if self.arrivals else 0.0

    def p_delay(self) -> float:
        return self.delay_drops / self.admitted if self.admitted else 0.0

    def p_error(self) -> float:
        return self.error_drops / self.transmissions if self.transmissions else 0.0


@dataclass(frozen=True)
class SimResult:
    p_delay: MetricEstimate
    p_overflow: MetricEstimate
    p_error: MetricEstimate
    throughput: MetricEstimate
    counts: tuple[ReplicationCounts, ...]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, replication: int, node: int) -> int:
    """Avalanche-mixed per-(replication, node) stream seed; pure and stable."""
    h = _splitmix64(master & _MASK64)
    h = _splitmix64(h ^ ((replication + 1) & _MASK64))
    h = _splitmix64(h ^ (((node + 1) << 32) & _MASK64))
    return h


@dataclass(frozen=True)
class _SimNode:
    index: int
    beta: float
    received_power: float  # transmit power times squared path-loss amplitude
    fading: ch.FadingModel
    arrivals_per_slot: float
    delay_threshold: float
    buffer_capacity: float


def _draw_fading(rng: np.random.Generator, model: ch.FadingModel, nb: int, f: int) -> np.ndarray:
    if isinstance(model, ch.Rayleigh):
        return np.sqrt(model.omega * rng.exponential(size=(nb, f)))
    g = rng.standard_normal(size=(nb, f, 2))
    return np.hypot(model.b + g[..., 0], g[..., 1])


def _run_replication(
    scenario: Scenario,
    nodes: list[_SimNode],
    source_idx: int,
    cfg: SimConfig,
    replication: int,
) -> ReplicationCounts:
    n_nodes = len(nodes)
    f = scenario.num_channels
    t_slt = scenario.slot_duration
    gamma_th = scenario.sinr_threshold
    noise_power = scenario.noise.power
    rngs = [
        np.random.default_rng(derive_seed(cfg.seed, replication, node.index))
        for node in nodes
    ]

    queues: list[deque] = [deque() for _ in range(n_nodes)]
    stored: list[float] = [0.0] * n_nodes

    arrivals = overflow_drops = delay_drops = error_drops = 0
    delivered = transmissions = 0
    queued_at_warmup = 0

    done = 0
    while done < cfg.num_slots:
        nb = min(_BLOCK, cfg.num_slots - done)
        best_val = []
        best_ch = []
        can_tx = []
        counts = []
        offsets = []
        lengths = []
        for node, rng in zip(nodes, rngs):
            fades = _draw_fading(rng, node.fading, nb, f)
            best = fades.max(axis=1)
            best_val.append(best)
            best_ch.append(fades.argmax(axis=1))
            can_tx.append(best >= node.beta)
            cnt = rng.poisson(node.arrivals_per_slot, nb)
            counts.append(cnt)
            total = int(cnt.sum())
            offsets.append(rng.random(total))
            lengths.append(rng.exponential(1.0, total))
        ptr = [0] * n_nodes

        for t in range(nb):
            slot = done + t
            now = slot * t_slt
            measured = slot >= cfg.warmup_slots
            if slot == cfg.warmup_slots:
                queued_at_warmup = len(queues[source_idx])

            tx_channel = [-1] * n_nodes
            tx_value = [0.0] * n_nodes
            for i in range(n_nodes):
                q = queues[i]
                node = nodes[i]
                while q and now - q[0][0] > node.delay_threshold:
                    _, length = q.popleft()
                    stored[i] -= length
                    if i == source_idx and measured:
                        delay_drops += 1
                if q and can_tx[i][t]:
                    tx_channel[i] = best_ch[i][t]
                    tx_value[i] = best_val[i][t]
                    _, length = q.popleft()
                    stored[i] -= length

            if tx_channel[source_idx] >= 0:
                my_ch = tx_channel[source_idx]
                interference = 0.0
                for i in range(n_nodes):
                    if i != source_idx and tx_channel[i] >= 0 and (
                        cfg.always_collide or tx_channel[i] == my_ch
                    ):
                        interference += nodes[i].received_power * tx_value[i] ** 2
                signal = nodes[source_idx].received_power * tx_value[source_idx] ** 2
                ok = signal >= gamma_th * (noise_power + interference)
                if measured:
                    transmissions += 1
                    if ok:
                        delivered += 1
                    else:
                        error_drops += 1

            for i in range(n_nodes):
                node = nodes[i]
                count = int(counts[i][t])
                if count == 0:
                    continue
                batch = sorted(
                    zip(offsets[i][ptr[i] : ptr[i] + count], lengths[i][ptr[i] : ptr[i] + count])
                )  # FIFO admission follows the within-slot arrival times
                ptr[i] += count
                for offset, length in batch:
                    if i == source_idx and measured:
                        arrivals += 1
                    if stored[i] + length <= node.buffer_capacity:
                        queues[i].append(((slot + offset) * t_slt, length))
                        stored[i] += length
                    elif i == source_idx and measured:
                        overflow_drops += 1
        done += nb

    return ReplicationCounts(
        arrivals=arrivals,
        overflow_drops=overflow_drops,
        delay_drops=delay_drops,
        error_drops=error_drops,
        delivered=delivered,
        transmissions=transmissions,
        queued_at_warmup=queued_at_warmup,
        queued_at_end=len(queues[source_idx]),
    )


def _estimate(values: list[float]) -> MetricEstimate:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return MetricEstimate(mean, 0.0)
    half = 1.96 * float(arr.std(ddof=1)) / math.sqrt(arr.size)
    return MetricEstimate(mean, half)


def run(scenario: Scenario, policy=None, cfg: SimConfig = SimConfig(100_000)) -> SimResult:
    """Simulate the scenario and collect the source node's empirical losses.

    ``policy`` maps node ids to thresholds (defaults to the scenario's);
    a threshold of ``inf`` silences a node entirely.  Replications use
    independently derived streams and are reduced in replication order, so
    identical inputs give bit-identical results.
    """
    betas = {node.id: node.beta for node in scenario.nodes}
    if policy is not None:
        betas.update(getattr(policy, "betas", policy))
    nodes = []
    source_idx = None
    for index, node in enumerate(scenario.nodes):
        link = ch.build_link(
            node.position, scenario.destination, scenario.environment, node.fading_override
        )
        if node.role == "source":
            source_idx = index
        nodes.append(
            _SimNode(
                index=index,
                beta=float(betas[node.id]),
                received_power=node.transmit_power * link.path_loss_amplitude**2,
                fading=link.fading,
                arrivals_per_slot=node.queue.arrival_rate * scenario.slot_duration,
                delay_threshold=node.queue.delay_threshold,
                buffer_capacity=node.queue.buffer_capacity_normalized,
            )
        )
    counts = tuple(
        _run_replication(scenario, nodes, source_idx, cfg, rep)
        for rep in range(cfg.replication_count)
    )
    observed_slots = cfg.num_slots - cfg.warmup_slots
    horizon = observed_slots * scenario.slot_duration
    return SimResult(
        p_delay=_estimate([c.p_delay() for c in counts]),
        p_overflow=_estimate([c.p_overflow() for c in counts]),
        p_error=_estimate([c.p_error() for c in counts]),
        throughput=_estimate([c.delivered / horizon for c in counts]),
        counts=counts,
    )
