"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure-numpy twin of every kernel
is selected at import time), so a failed compile is downgraded to a warning.
"""
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "gtoda._core.kernels",
                ["src/gtoda/_core/kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    warnings.warn(f"Cython extension not built ({exc}); using pure-python kernels")

setup(ext_modules=ext_modules)
