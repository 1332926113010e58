"""Build script for the optional compiled integration kernel.

The package is fully functional without the extension; a pure NumPy
fallback is selected at import time when the compiled module is absent.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "trendcomp._genz",
                ["src/trendcomp/_genz.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
