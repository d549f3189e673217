"""Numerical toolkit for smoothed truncated Perron summation.

Subpackages cover the plateau kernel family and its Fourier analysis
(`kernels`), integer/character arithmetic (`arith`), Dirichlet series
evaluation and partial-sum bounds (`series`), the smoothed Perron
evaluator with explicit error budget (`perron`), contour shifting with
residue bookkeeping (`lineshift`), and a primitive-root counting
experiment (`experiment`).  The `cli` module exposes everything as
subcommands.
"""

__version__ = "0.1.0"

__all__ = [
    "arith",
    "cli",
    "experiment",
    "kernels",
    "lineshift",
    "perron",
    "series",
]
