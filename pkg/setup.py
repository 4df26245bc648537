"""Build script: compiles the optional fast-kernel extension.

The extension is a pure accelerator; if Cython or a C compiler is missing
the install still succeeds and the package falls back to the pure-Python
kernels at import time.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Let extension build failures degrade to the pure-Python fallback."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: skipping fast kernels ({exc}); using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); using pure-Python fallback")


ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "pneumyo._kernels._ext",
                ["src/pneumyo/_kernels/_ext.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    print("warning: Cython not available; installing with pure-Python kernels only")

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
