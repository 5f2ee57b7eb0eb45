"""Build script: compiles the optional Cython kernel core.

The package works without the extension (a numpy fallback is selected at
import time), so the extension is marked optional and a failed compile
does not abort installation.
"""
import numpy as np
from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "frachelm._kernels._native",
        sources=["src/frachelm/_kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
