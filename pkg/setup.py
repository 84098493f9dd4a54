"""Build script: compiles the optional Monte-Carlo kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a failed compile only costs speed.
"""

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: skipping compiled kernel ({exc}); "
                  "falling back to the pure-NumPy backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: could not build {ext.name} ({exc}); "
                  "falling back to the pure-NumPy backend")


try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "relaysel._kernel",
                ["src/relaysel/_kernel.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:  # pragma: no cover - cython not installed
    extensions = []

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
