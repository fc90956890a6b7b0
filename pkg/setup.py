"""Build script for the compiled score kernel.

The kernel is optional at runtime: if the extension is missing (or
ENSF_NO_EXT=1 was set at install time), ensf.score falls back to the
numpy backend. -march=native is deliberate — the kernel is built for
the machine it runs on; there is no binary distribution.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("ENSF_NO_EXT"):
    import numpy as np
    from Cython.Build import cythonize

    ext = Extension(
        "ensf._kernels",
        sources=["src/ensf/_kernels.pyx"],
        include_dirs=[np.get_include(), "src/ensf"],
        extra_compile_args=["-O3", "-march=native", "-ffast-math"],
        # vectorized libm entry points (_ZGV*_expf) need an explicit -lmvec
        extra_link_args=["-lmvec", "-lm"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
