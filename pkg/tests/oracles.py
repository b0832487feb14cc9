"""Independent brute-force selection oracle used to cross-check the library.

Deliberately written as plain loops with explicit tie-break chains, sharing
no code with the library's vectorized selection path.
"""

from adastream.ladder import DEFAULT_LADDER


def _cost(f, h):
    return f * h * h


def brute_force_max_quality(grid):
    """Exhaustive scan: max quality, ties to lower cost, then lower frame rate."""
    best = None
    for fi, f in enumerate(DEFAULT_LADDER.frame_rates_hz):
        for hi, h in enumerate(DEFAULT_LADDER.heights):
            q = float(grid.q[fi, hi])
            key = (-q, _cost(f, h), f)
            if best is None or key < best[0]:
                best = (key, f, h, q)
    return best[1], best[2], best[3]


def brute_force_efficient(grid, margin):
    """Exhaustive scan: min cost within margin of the max, ties to higher
    quality, then lower frame rate."""
    _, _, q_star = brute_force_max_quality(grid)
    best = None
    for fi, f in enumerate(DEFAULT_LADDER.frame_rates_hz):
        for hi, h in enumerate(DEFAULT_LADDER.heights):
            q = float(grid.q[fi, hi])
            if q_star - q > margin:
                continue
            key = (_cost(f, h), -q, f)
            if best is None or key < best[0]:
                best = (key, f, h, q)
    return best[1], best[2], best[3], q_star
