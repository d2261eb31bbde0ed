"""Build script: compiles the optional Cython query-processing kernels.

The package works without the extension (a pure-Python twin of the kernels
is selected at import time), so the extension is marked optional and a
failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "impactidx._kernels",
                ["src/impactidx/_kernels.pyx"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
