"""Build the optional Cython core.

If Cython or a C compiler is unavailable the package still installs and
falls back to the pure-Python/numpy implementation in ``_pycore``.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("SPDE_MOMENTS_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "spde_moments._core",
                    ["src/spde_moments/_core.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
