"""Build script for the compiled simplex kernel.

The extension is optional: if Cython or a C compiler is unavailable, the
package installs anyway and falls back to the pure numpy kernel at import
time (see goalbench.simplex). -ffp-contract=off keeps the compiled kernel
bit-identical to the numpy one (no fused multiply-add contraction).
"""

import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "goalbench.simplex._speedups",
                ["src/goalbench/simplex/_speedups.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    sys.stderr.write("Cython not found; installing with pure-Python kernel only\n")

setup(ext_modules=ext_modules)
