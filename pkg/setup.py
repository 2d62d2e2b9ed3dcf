"""Optional compiled accelerator build.

The package is pure Python; the Cython twin of the hot kernels is built only
when a compiler and Cython are present.  `pip install .` must never fail for
lack of either, so every build error here downgrades to the pure fallback.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, miscompile, ...
            print(f"accelerator build skipped: {exc}")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"accelerator build skipped for {ext.name}: {exc}")


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cellcover/_kernels_c.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
