"""Build the libavcodec bridge extension.

The extension links against the system FFmpeg development libraries,
located through pkg-config. Everything else (name, version, deps) lives
in pyproject.toml.
"""

import subprocess

import pybind11
from setuptools import Extension, setup

LIBAV = ["libavcodec", "libavformat", "libavutil"]


def pkg_config(*args: str) -> list[str]:
    out = subprocess.check_output(["pkg-config", *args, *LIBAV], text=True)
    return out.split()


setup(
    ext_modules=[
        Extension(
            "ciaf_extractor._codec",
            sources=["csrc/codec.cpp"],
            include_dirs=[pybind11.get_include()],
            extra_compile_args=["-std=c++17", "-O2", *pkg_config("--cflags")],
            extra_link_args=pkg_config("--libs"),
        )
    ]
)
