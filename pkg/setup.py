from setuptools import setup
from setuptools_rust import Binding, RustExtension

# optional: the package falls back to the pure-Python backend when the
# Rust toolchain is unavailable
setup(
    rust_extensions=[
        RustExtension(
            "phr_abe._native",
            path="rust/Cargo.toml",
            binding=Binding.PyO3,
            optional=True,
            debug=False,
        )
    ],
)
