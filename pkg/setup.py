"""Build script: compiles the optional C extension for the propagation chain.

The package works without the extension (a vectorized numpy fallback is
selected at import time); the build therefore must not fail when a C
compiler or Cython is unavailable.
"""
import sys

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "transmute._kernels",
                sources=["src/transmute/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError as exc:
    sys.stderr.write(f"transmute: building without compiled extension ({exc})\n")


try:
    from setuptools.command.build_ext import build_ext as _build_ext

    class optional_build_ext(_build_ext):  # noqa: N801 - distutils naming
        def run(self):
            try:
                super().run()
            except Exception as exc:  # compiler missing entirely
                sys.stderr.write(f"transmute: skipping compiled extension ({exc})\n")

        def build_extension(self, ext):
            try:
                super().build_extension(ext)
            except Exception as exc:
                sys.stderr.write(
                    f"transmute: failed to compile {ext.name}, "
                    f"falling back to pure Python ({exc})\n"
                )

    cmdclass = {"build_ext": optional_build_ext}
except ImportError:
    cmdclass = {}

setup(ext_modules=ext_modules, cmdclass=cmdclass)
