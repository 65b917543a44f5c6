"""Build script: compiles the optional entropy kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); the build therefore tolerates a missing compiler or Cython.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            warnings.warn(f"extension build failed ({exc}); using pure-Python kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"building {ext.name} failed ({exc}); using pure-Python kernels")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "entroread._kernels",
                sources=["src/entroread/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
