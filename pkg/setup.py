"""Build script for the optional compiled kernel backend.

The package works without the extension (a pure-Python twin of every kernel
ships in hmvp.kernels.pyref); if Cython or a C compiler is missing the build
falls back to pure Python silently.

Floating-point note: the extension is compiled with -ffp-contract=off and
without -ffast-math so that the compiled kernels produce bitwise-identical
results to the pure-Python reference (both evaluate the same operations in
the same order in IEEE double precision).
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "hmvp.kernels._core",
                sources=["src/hmvp/kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
