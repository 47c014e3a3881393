"""Hand-built lines for small MILP fixtures (rates in m3/s, flow along +x)."""
from doubletopt.geometry import DoubletLine, WellCandidate
from doubletopt.tap import TapLimits


def make_line(line_id, t, wells, first_id=0):
    """``wells`` is a list of (s, q_d, q_f, alpha)."""
    cands = tuple(
        WellCandidate(first_id + n, s, t, s, t, TapLimits(q_d, q_f, alpha)) for n, (s, q_d, q_f, alpha) in enumerate(wells)
    )
    return DoubletLine(line_id, t, cands)


def example_line(gap=20.0):
    # upstream q_d 10 l/s, downstream q_f 6 l/s, alpha 5e-4
    return make_line(0, 0.0, [(0.0, 0.010, 0.004, 5e-4), (gap, 0.004, 0.006, 5e-4)])


def coupled_lines():
    a = make_line(0, 0.0, [(0.0, 0.02, 0.02, 5e-4), (20.0, 0.02, 0.02, 5e-4)], 0)
    b = make_line(1, 30.0, [(0.0, 0.02, 0.02, 5e-4), (20.0, 0.02, 0.02, 5e-4)], 2)
    return a, b
