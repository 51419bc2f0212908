"""Where Schur-complement formulas for the pseudoinverse break down.

For an invertible self-adjoint 2x2 block matrix the inverse can be built
from a Schur complement.  With pseudoinverses the same formula needs two
kernel inclusions; this script shows both inclusions failing on 2x2
examples, then checks the factorization test on a random matrix.

Run with ``python demos/block_pseudoinverse.py``.
"""

from __future__ import annotations

import numpy as np

from effop.blockop import OrthoDecomp, aitken_valid, gen_babachiewicz, split
from effop.numkit import pinv
from effop.verify import random_two_block_selfadjoint


def show(name: str, x: np.ndarray) -> None:
    view = split(x, OrthoDecomp.consecutive([1, 1]))
    report = gen_babachiewicz(view)
    print(f"{name}: X = {x.tolist()}")
    print(f"  X^+                  = {(np.round(pinv(x), 12) + 0.0).tolist()}")
    print(f"  Schur formula        = {np.round(report.candidate, 12).tolist()}")
    print(f"  X/X11                = {np.round(report.schur, 12).tolist()}")
    print(f"  [(X^+)00]^+          = {np.round(report.pinv_of_block00, 12).tolist()}")
    print(f"  failed inclusions    = {list(report.failed)}")
    print(f"  Aitken factorization = {aitken_valid(view).valid}")


def main() -> None:
    show("first", np.array([[1.0, 1.0], [1.0, 0.0]]))
    show("second", np.array([[1.0, 1.0], [1.0, 1.0]]))

    rng = np.random.default_rng(0)
    x, n0, inclusion = random_two_block_selfadjoint(rng)
    view = split(x, OrthoDecomp.consecutive([n0, x.shape[0] - n0]))
    report = aitken_valid(view)
    print(f"random {x.shape[0]}x{x.shape[0]} matrix: inclusion engineered={inclusion}, "
          f"factorization valid={report.valid}, residual={report.residual:.2e}")


if __name__ == "__main__":
    main()
