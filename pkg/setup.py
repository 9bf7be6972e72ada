"""Build script: compiles the network-simplex kernel when a C toolchain is
available and falls back to the pure-Python kernel otherwise.

The package is fully functional without the extension; `transportlab.ot_lp`
selects the compiled kernel at import time if it was built.
"""

import sys
from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible; never fail the install over it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "WARNING: building the compiled simplex kernel failed "
            f"({exc!r}); installing with the pure-Python kernel only.",
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    import os
    if not os.path.exists("src/transportlab/_simplex_core.pyx"):
        return []
    ext = Extension(
        "transportlab._simplex_core",
        sources=["src/transportlab/_simplex_core.pyx"],
        # -ffp-contract=off keeps kernel arithmetic bit-identical to the
        # pure-Python/numpy fallback (no FMA contraction).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
