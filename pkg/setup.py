# Builds the optional compiled kernel. If Cython or a C compiler is missing
# the install still succeeds and the package falls back to the pure-Python
# kernel at import time.
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sweepout._speedups",
                ["src/sweepout/_speedups.pyx"],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
