"""Build glue for the optional compiled SMO core.

The package is fully functional without the extension; a pure numpy
implementation is selected at import time when the compiled module is
missing.  Set STORMSCHED_PURE=1 to skip compilation on purpose.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install over a missing compiler."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: compiled SMO core skipped ({exc}); pure fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: building {ext.name} failed ({exc}); pure fallback will be used")


extensions = []
if os.environ.get("STORMSCHED_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        extensions = cythonize(
            [
                Extension(
                    "stormsched._smo._speedups",
                    ["src/stormsched/_smo/_speedups.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # -ffp-contract=off keeps the C arithmetic bit-identical to
                    # the numpy fallback (no fused multiply-add surprises).
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        print("warning: Cython not available; pure fallback will be used")

setup(ext_modules=extensions, cmdclass={"build_ext": optional_build_ext})
