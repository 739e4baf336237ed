import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    ext = Extension(
        "ctxaug.inpaint._sweep",
        ["src/ctxaug/inpaint/_sweep.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    # The package falls back to the pure-Python kernel if this fails to build.
    ext.optional = True
    extensions = cythonize([ext], language_level=3)

setup(ext_modules=extensions)
