"""Build script: compiles the membership kernel when Cython is available.

The package works without the extension (a numpy fallback is selected at
import time), so a failed extension build should not block installation.
"""
import os

from setuptools import Extension, setup

try:
    if not os.path.exists("src/gaussbm/_combo_cy.pyx"):
        raise ImportError("kernel source not present")
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gaussbm._combo_cy",
                ["src/gaussbm/_combo_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
