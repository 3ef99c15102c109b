import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# -ffp-contract=off keeps the bilinear arithmetic bit-identical to the
# numpy fallback (no fused multiply-add surprises).
setup(
    ext_modules=cythonize(
        [
            Extension(
                "wheatseg._kernels._core",
                ["src/wheatseg/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
)
