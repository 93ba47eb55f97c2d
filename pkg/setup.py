"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure-NumPy fallback selected at
import time in nlslab.kernels); a failed compile therefore only costs speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "nlslab._corekernels",
                ["src/nlslab/_corekernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"nlslab: skipping Cython extension build ({exc}); "
          "pure-NumPy kernels will be used")

setup(ext_modules=ext_modules)
