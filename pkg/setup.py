"""Build the optional compiled kernel core.

The extension is marked optional: if Cython or a C compiler is missing the
package still installs and falls back to the numpy kernels at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off keeps a*b+c as two roundings so results match numpy exactly
ext = Extension(
    "imdeg._ckernels",
    sources=["src/imdeg/_ckernels.pyx" if cythonize else "src/imdeg/_ckernels.c"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    optional=True,
)

if cythonize is not None:
    extensions = cythonize(
        [ext],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )
else:
    extensions = [ext]

setup(ext_modules=extensions)
