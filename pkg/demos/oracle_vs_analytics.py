"""Closed forms against the slot-level Monte Carlo oracle.

The simulator runs the true system (best-channel transmissions, real
queues, exact interference sums), so the gaps below measure the quality
of the analytic approximations, not numerical error.  On the
single-channel scenario the conditional error probability is exact and
the empirical value lands inside the confidence interval.
"""

from uavlink import simulator as sim
from uavlink import throughput as tp
from uavlink.channel import build_link
from uavlink.scenario_io import scenario_from_mapping
from uavlink.simulator import SimConfig


def noise_limited_scenario():
    doc = {
        "num_channels": 1,
        "noise": {"bandwidth": 1e6},
        "nodes": [
            {
                "id": "src",
                "role": "source",
                "position": [5.0, 5.0, 0.0],
                "transmit_power": 0.5,
                "fading": "rayleigh",
                "beta": 0.5,
                "queue": {
                    "arrival_rate": 150.0,
                    "delay_threshold": 0.1,
                    "buffer_capacity_normalized": 500.0,
                },
            }
        ],
    }
    base = scenario_from_mapping(doc)
    link = build_link(base.nodes[0].position, base.destination, base.environment, None)
    # place the noise floor at fading amplitude 0.9 so errors are common
    margin_rate = 0.5 * link.path_loss_amplitude**2 / base.sinr_threshold
    doc["noise"]["bandwidth"] = margin_rate * 0.81 / (1.38e-23 * 290.0)
    return scenario_from_mapping(doc)


scenario = noise_limited_scenario()
analytic = tp.evaluate(scenario)
result = sim.run(
    scenario, cfg=SimConfig(100_000, seed=7, warmup_slots=1_000, replication_count=8)
)

print(f"{'metric':<12} {'analytic':>12} {'empirical':>12} {'95% halfwidth':>14}")
rows = [
    ("p_delay", analytic.p_delay, result.p_delay),
    ("p_overflow", analytic.p_overflow, result.p_overflow),
    ("p_error", analytic.p_error, result.p_error),
    ("throughput", analytic.throughput, result.throughput),
]
for name, a, e in rows:
    print(f"{name:<12} {a:>12.5f} {e.value:>12.5f} {e.halfwidth:>14.5f}")

print()
counts = result.counts[0]
print("replication 0 tallies:", counts)
balance = (
    counts.arrivals
    + counts.queued_at_warmup
    - counts.delivered
    - counts.delay_drops
    - counts.error_drops
    - counts.overflow_drops
    - counts.queued_at_end
)
print(f"conservation residual (must be 0): {balance}")
