"""MLP training on MNIST with output-complexity and sensitivity probes."""

from ._core import (
    ConfigError,
    IdxFormatError,
    LzssDecodeError,
    Mlp,
    Prng,
    build_mlp,
    default_experiments,
    lz76_complexity,
    lzss_compress_len,
    lzss_decode,
    lzss_encode,
    main,
    normalize,
    parse_idx_images,
    parse_idx_labels,
    run_suite,
)

__all__ = [
    "ConfigError",
    "IdxFormatError",
    "LzssDecodeError",
    "Mlp",
    "Prng",
    "build_mlp",
    "default_experiments",
    "lz76_complexity",
    "lzss_compress_len",
    "lzss_decode",
    "lzss_encode",
    "main",
    "normalize",
    "parse_idx_images",
    "parse_idx_labels",
    "run_suite",
]
