"""Build script for the optional compiled kernels.

The package is fully functional without the extension; antclust falls back
to the pure-Python implementations at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "antclust._speedups",
        ["src/antclust/_speedups.pyx"],
        # no FMA contraction: compiled and pure backends must agree bit-for-bit
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
    if cythonize is not None
    else [],
)
