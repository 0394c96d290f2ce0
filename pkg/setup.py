"""Build script: compiles the candidate-evaluation VM core when Cython and a
C compiler are available, and falls back to a pure-Python build otherwise.
The package selects the compiled core at import time if it exists."""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/tracefix/engine/_vmcore.pyx"],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"tracefix: building without compiled VM core ({exc})")

setup(ext_modules=ext_modules)
