"""Build the optional compiled kernel; the package falls back to pure Python without it."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("POINCARE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext = Extension(
            "poincare_zeros._kernel",
            ["src/poincare_zeros/_kernel.pyx"],
            extra_compile_args=["-O2", "-ffp-contract=off"],
        )
        ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
