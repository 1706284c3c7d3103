"""Build script for the optional compiled kernels.

The package runs on pure numpy; the Cython extension only accelerates the
hot kernels and is skipped when it cannot be built (no compiler, no Cython).
Set CAPID_NO_EXT=1 to skip the extension on purpose.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise fall back to numpy kernels."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"skipping compiled kernels ({exc}); numpy fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); numpy fallback will be used")


def extensions():
    if os.environ.get("CAPID_NO_EXT"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "capid._kernels",
        ["src/capid/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
