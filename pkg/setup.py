"""Build hook for the optional compiled join/count kernels.

The package works without the extension (a pure Python backend is selected
at import time), so any failure to cythonize or compile downgrades to a
plain build instead of aborting the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rulelm._kernels._speedups",
                ["src/rulelm/_kernels/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - depends on build host
    print(f"rulelm: building without compiled kernels ({exc})")

setup(ext_modules=ext_modules)
