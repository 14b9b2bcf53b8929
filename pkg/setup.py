"""Build script: compiles the optional evaluation core.

The compiled extension is a pure speed-up; if Cython or a C compiler is
missing the build falls through and the package uses the pure-Python
backend selected at import time.
"""
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(f"warning: compiled evaluation core not built ({exc}); "
              "falling back to the pure-Python backend", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; skipping compiled core",
              file=sys.stderr)
        return []
    ext = Extension(
        "dergreen._backends._evalcore",
        ["src/dergreen/_backends/_evalcore.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
