"""Build script for the optional Cython kernels.

The package works without the extension; ``zplab.kernels`` falls back to
the numpy implementation when ``zplab._ckernels`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ZPLAB_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "zplab._ckernels",
                    ["src/zplab/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
