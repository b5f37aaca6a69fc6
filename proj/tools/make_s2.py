"""Writes configs/s2.cfg: two monotone tables g_k = c_k + 0.8 T(x) with
T(x) = 1/2 + tanh(6 (x - 1/2)) / (2 tanh 3), c = (0.10, 0.12).

Each g_k has a sink near c_k, a source near 1/2 and a sink near c_k + 0.8.
"""
import math
import sys

KNOTS = 129


def step(x):
    return 0.5 + math.tanh(6.0 * (x - 0.5)) / (2.0 * math.tanh(3.0))


def row(values):
    return "[" + ", ".join(repr(v) for v in values) + "]"


def main(path):
    xs = [i / (KNOTS - 1) for i in range(KNOTS)]
    out = [
        "# Two-attractor system: each state's map has two sinks around a source.",
        "chain:",
        "  n_states: 2",
        "  transition:",
        "    - [0.5, 0.5]",
        "    - [0.5, 0.5]",
        "maps:",
    ]
    for state, offset in ((1, 0.10), (2, 0.12)):
        out += [
            f"  - state: {state}",
            "    family: table",
            f"    x: {row(xs)}",
            f"    y: {row([offset + 0.8 * step(x) for x in xs])}",
        ]
    out += [
        "analysis:",
        "  epsilon: 0.01",
        "  delta: 0.001",
        "  bins: 2048",
        "  walk_steps: 1000000",
        "  burn_in: 1000",
        "  seed: 7",
        "  max_period: 2",
        "  baxendale_epsilons: [0.05]",
        "output:",
        '  directory: "out/s2"',
        "  formats: [csv, txt]",
    ]
    with open(path, "w") as f:
        f.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "configs/s2.cfg")
