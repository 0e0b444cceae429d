"""Build script for the optional compiled kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the random-walk betweenness
accumulation loop faster on large networks.
"""

from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tradenet._kernels._cyflow",
                ["src/tradenet/_kernels/_cyflow.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: install pure-Python only.
    ext_modules = []

setup(ext_modules=ext_modules)
