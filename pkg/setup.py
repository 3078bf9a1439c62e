"""Build the optional compiled kernel.

If Cython or a C++ compiler is missing the package still installs and
falls back to the pure-Python kernels at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "topdown_dt._kernels",
                sources=["src/topdown_dt/_kernels.pyx"],
                language="c++",
                extra_compile_args=["-O3", "-std=c++17"],
            )
        ],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []

setup(ext_modules=ext_modules)
