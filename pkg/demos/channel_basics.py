"""Walk one link through the channel pipeline.

Geometry fixes the elevation angle; the elevation fixes the line-of-sight
probability, which in turn picks the fading family (Rician when LoS is
likely, Rayleigh otherwise), the path-loss exponent, and the path-loss
amplitude.  The transmit probability of a threshold policy then follows
from the best-of-N fading draw.
"""

import math

import numpy as np

from uavlink.channel import (
    EnvironmentParams,
    Position,
    build_link,
    elevation_angle,
    fading_cdf,
    p_los,
    path_loss_exponent,
    rician_b,
    transmit_prob,
)

env = EnvironmentParams()
uav = Position(20.0, 20.0, 50.0)

print("Ground user walking away from the point under the UAV:")
print(f"{'offset':>8} {'theta':>8} {'P_LoS':>8} {'alpha':>7} {'b':>7} {'model':>9}")
for offset in (0.0, 5.0, 10.0, 20.0, 28.0):
    user = Position(20.0 + offset, 20.0, 0.0)
    theta = elevation_angle(user, uav)
    link = build_link(user, uav, env)
    model = type(link.fading).__name__
    print(
        f"{offset:8.1f} {math.degrees(theta):7.1f}° {p_los(theta, env):8.4f} "
        f"{path_loss_exponent(theta, env):7.3f} {rician_b(theta, env):7.3f} {model:>9}"
    )

print()
print("Threshold policy on the corner user's link (15 channels):")
user = Position(1.0, 1.0, 0.0)
link = build_link(user, uav, env)
print(f"fading family: {link.fading}")
print(f"{'beta':>6} {'CDF':>10} {'transmit prob':>14}")
for beta in np.linspace(0.0, 7.0, 8):
    print(
        f"{beta:6.2f} {fading_cdf(link.fading, beta):10.5f} "
        f"{transmit_prob(link.fading, beta, 15):14.5f}"
    )
