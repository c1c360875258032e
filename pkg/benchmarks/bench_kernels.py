#!/usr/bin/env python3
"""Time the compiled IIR kernel against the pure-Python fallback.

Both backends implement the same cascaded-biquad filter, so the numbers
differ only in implementation cost. The two workloads mirror the real
call sites: a 100-band equalizer cascade over one keystroke segment and
an 8th-order lowpass over a whole recording session.
"""

import argparse
import time

import numpy as np

from keytap.defense import EqConfig, draw_eq_sos
from keytap.dsp import butterworth_lowpass_sos
from keytap.kernels import BACKEND, _iir_py

try:
    from keytap.kernels import _iir_cy
except ImportError:
    _iir_cy = None


def time_impl(impl, sos, x, repeats):
    """Best-of-n wall time in seconds, plus the filtered output."""
    best = float("inf")
    out = np.empty_like(x)
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = np.empty_like(x)
        impl.sosfilt(sos, x, out)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions, best is reported")
    parser.add_argument("--session-seconds", type=float, default=30.0,
                        help="length of the session-filter workload")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    sr = 16000
    rng = np.random.default_rng(args.seed)
    eq_sos = draw_eq_sos(EqConfig(seed=args.seed), sr, rng)
    lp_sos = butterworth_lowpass_sos(4000.0, sr, order=8)
    keystroke = rng.standard_normal(int(0.1 * sr))
    session = rng.standard_normal(int(args.session_seconds * sr))

    workloads = [
        ("eq cascade, one keystroke", eq_sos, keystroke),
        ("channel lowpass, full session", lp_sos, session),
    ]

    print(f"active backend: {BACKEND}")
    if _iir_cy is None:
        print("compiled extension not built; timing the fallback only")
    header = (f"{'workload':<32}{'sections':>9}{'samples':>9}"
              f"{'python':>12}{'compiled':>12}{'speedup':>9}")
    print(header)
    print("-" * len(header))
    for name, sos, x in workloads:
        t_py, out_py = time_impl(_iir_py, sos, x, args.repeats)
        row = (f"{name:<32}{sos.shape[0]:>9}{x.size:>9}"
               f"{t_py * 1e3:>10.2f}ms")
        if _iir_cy is not None:
            t_cy, out_cy = time_impl(_iir_cy, sos, x, args.repeats)
            err = float(np.max(np.abs(out_py - out_cy)))
            if err > 1e-9:
                raise AssertionError(
                    f"backends disagree on {name}: max diff {err:.3e}")
            row += f"{t_cy * 1e3:>10.2f}ms{t_py / t_cy:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
