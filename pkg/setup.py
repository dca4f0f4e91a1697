"""Build script: compiles the optional Cython kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so the extension is marked optional and any build
failure degrades to the pure-Python install.
"""
from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "twqkd._kernel",
                ["src/twqkd/_kernel.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
