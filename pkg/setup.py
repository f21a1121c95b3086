"""Build script: compiles the optional saturable-kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a missing compiler only costs speed.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "fracstates._kernels._sat_cy",
                ["src/fracstates/_kernels/_sat_cy.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level="3",
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
