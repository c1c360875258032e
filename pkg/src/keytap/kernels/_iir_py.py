"""Pure-Python reference implementation of the biquad-cascade filter.

Same algorithm as the compiled kernel: each second-order section is applied
in direct form II transposed. Kept simple and loop-based so the two
implementations can be diffed by eye; the compiled kernel exists because
this recurrence cannot be vectorized across time.
"""


def sosfilt(sos, x, out):
    """Apply a cascade of second-order sections to x, writing into out.

    sos is an (n_sections, 6) array of [b0, b1, b2, a0, a1, a2] rows with
    a0 == 1. x and out are 1-D float64 arrays of equal length; out may be
    the same array as x.
    """
    n = len(x)
    if out is not x:
        out[:] = x
    for s in range(sos.shape[0]):
        b0 = sos[s, 0]
        b1 = sos[s, 1]
        b2 = sos[s, 2]
        a1 = sos[s, 4]
        a2 = sos[s, 5]
        z1 = 0.0
        z2 = 0.0
        for i in range(n):
            xi = out[i]
            yi = b0 * xi + z1
            z1 = b1 * xi - a1 * yi + z2
            z2 = b2 * xi - a2 * yi
            out[i] = yi
    return out
