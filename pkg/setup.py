"""Builds the optional compiled kernels.

The package is fully functional without the extension: clipal.kernels
falls back to the numpy implementation when the compiled module is
missing (see src/clipal/kernels/__init__.py).
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    import numpy as np
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "clipal.kernels._fast",
        ["src/clipal/kernels/_fast.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
