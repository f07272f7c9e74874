"""Fixed-step convergence: halving dt shrinks the error sixteen-fold.

The classical fourth-order stepper is exercised on a smooth run (no
control, bounded regular weight) against a fine reference solution.
"""

from flockform.cli import convergence_table

rows = convergence_table()
print(f"{'dt':>12} {'terminal error':>16} {'ratio':>8}")
for dt, err, ratio in rows:
    tail = f"{ratio:8.2f}" if ratio == ratio else "       -"
    print(f"{dt:12.6f} {err:16.6e} {tail}")
print("\nnominal ratio for a fourth-order method is 16")
