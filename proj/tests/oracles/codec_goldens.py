"""Golden compressed lengths from the reference codec bindings.

Python's gzip/lzma modules and the zstandard package wrap the same zlib
1.2.11, liblzma and zstd 1.5.7 builds the C++ backends link, so lengths agree
byte for byte. Run once; the printed values are frozen in
tests/compressors_test.cpp.
"""
import gzip
import lzma
import pathlib

import zstandard

TEXTS = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "texts"


def sizes(data: bytes):
    return (
        len(gzip.compress(data, compresslevel=6, mtime=0)),
        len(lzma.compress(data, format=lzma.FORMAT_XZ, check=lzma.CHECK_CRC64, preset=6)),
        len(zstandard.ZstdCompressor(level=3).compress(data)),
    )


cases = {
    "repeat_a_10000": b"a" * 10000,
    "sentence200": (TEXTS / "sentence200.txt").read_bytes(),
    "para500": (TEXTS / "para500.txt").read_bytes(),
    "para500_twice": (TEXTS / "para500.txt").read_bytes() * 2,
    "empty": b"",
}
for name, data in cases.items():
    g, l, z = sizes(data)
    print(f"{name:16s} bytes={len(data):6d} gzip={g} lzma={l} zstd={z}")
