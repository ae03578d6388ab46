"""Build the optional Cython kernel module; the package runs without it."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LATLEDGER_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    f"latledger.ring.{name}",
                    [f"src/latledger/ring/{name}.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
                for name in ("_core", "_wide")
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
