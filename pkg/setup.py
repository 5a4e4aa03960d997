"""Build script: compiles the optional Cython kernel.

The package works without the extension (pure-Python kernels are selected at
import time); any build failure here should not make the install unusable, so
the extension is attempted best-effort.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("picsif._kernels._speed", ["src/picsif/_kernels/_speed.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
