import sys

from setuptools import Extension, setup


def extensions():
    """Build the compiled kernel extension when Cython + a compiler are present.

    The package works without it (pure-numpy fallback selected at import),
    so a failed extension build must not block installation.
    """
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        print(f"gestureforge: skipping compiled kernels ({exc})", file=sys.stderr)
        return []
    ext = Extension(
        "gestureforge._fastk",
        ["src/gestureforge/_fastk.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extensions())
