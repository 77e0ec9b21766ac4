"""Build script: compiles the optional Cython stencil kernels.

The package is fully functional without the extension (a numpy reference
backend is selected at import time), so a failed compilation only costs
speed. `pip install -e . --no-build-isolation` builds the extension when
Cython and a C compiler are available.
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Degrade to a pure-python install if the extension fails to build."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: building the Cython kernels failed ({exc}); "
                  "falling back to the numpy backend.")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: {ext.name} failed to compile ({exc}); "
                  "falling back to the numpy backend.")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        return []
    ext = Extension(
        "ekwaves.kernels._stencils",
        ["src/ekwaves/kernels/_stencils.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
