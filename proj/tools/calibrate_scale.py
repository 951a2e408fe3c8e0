#!/usr/bin/env python3
"""Recover the quadratic-score scale used by the fig_noise experiment.

The noisy-signal curves are drawn for a binary outcome with prior
P(Y = 1) = alpha = 0.1 and two agents whose signals flip with probability beta.
The race baseline for two agents has the closed form c = (2 v1 - v2) / 4,
where v_k is the expected score gain of k signals.  With beta = 0 both signals
are perfect, so v1 = v2 and c = v1 / 4.  The plotted race effort at beta = 0 is
0.9, which pins v1 = 3.6.  The unscaled quadratic rule gives v1 = 0.18 at this
prior, so the scale is 3.6 / 0.18 = 20.

The script recomputes this from exact enumeration and checks the second
plotted race point (beta = 0.05 -> 0.299819) against the recovered scale.

Usage: python3 tools/calibrate_scale.py
"""

import itertools
import math

ALPHA = 0.1
PLOTTED_RACE = {0.0: 0.9, 0.05: 0.299819}


def quadratic(p, y):
    return 2.0 * p[y] - sum(q * q for q in p)


def expected_gain(alpha, beta, k):
    """v_k for the unscaled quadratic rule, by enumerating all k-signal tuples."""
    prior = (1.0 - alpha, alpha)
    base = sum(prior[y] * quadratic(prior, y) for y in (0, 1))
    total = 0.0
    for signals in itertools.product((0, 1), repeat=k):
        joint = [prior[y] * math.prod(1.0 - beta if x == y else beta for x in signals) for y in (0, 1)]
        z = sum(joint)
        if z == 0.0:
            continue
        post = [j / z for j in joint]
        total += sum(joint[y] * quadratic(post, y) for y in (0, 1))
    return total - base


def race_effort(v1, v2):
    return max(0.0, (2.0 * v1 - v2) / 4.0)


def main():
    v1 = expected_gain(ALPHA, 0.0, 1)
    scale = 4.0 * PLOTTED_RACE[0.0] / v1
    print(f"unscaled v1 at beta=0: {v1:.9g}")
    print(f"recovered scale: {scale:.9g}")
    for beta, plotted in PLOTTED_RACE.items():
        c = race_effort(scale * expected_gain(ALPHA, beta, 1), scale * expected_gain(ALPHA, beta, 2))
        print(f"beta={beta}: race effort {c:.6f}, plotted {plotted}")
        assert abs(c - plotted) < 1e-4, "scale does not reproduce the plotted point"


if __name__ == "__main__":
    main()
