"""Builds the optional Cython kernels; the package falls back to NumPy without them."""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            print(f"warning: compiled kernels not built ({exc}); using NumPy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); using NumPy fallback")


def extensions():
    if os.environ.get("ERGOLIB_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []

    ext = Extension("ergolib._kernels._ckernels", ["src/ergolib/_kernels/_ckernels.pyx"])
    return cythonize(
        [ext],
        compiler_directives={"language_level": "3"},
        quiet=True,
    )


setup(
    ext_modules=extensions(),
    package_dir={"": "src"},
    cmdclass={"build_ext": OptionalBuildExt},
)
