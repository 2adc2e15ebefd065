import os
import struct
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import simplicity_probe as sp


def test_prng_first_output_for_seed_zero():
    assert sp.Prng(0).next() == 0xE220A8397B1DCDAF


def test_prng_uniform_range():
    rng = sp.Prng(3)
    draws = [rng.uniform(-2.0, 5.0) for _ in range(1000)]
    assert min(draws) >= -2.0 and max(draws) < 5.0


def test_lzss_roundtrip_and_length():
    rng = np.random.default_rng(1)
    for n in (0, 1, 17, 4096):
        data = bytes(rng.integers(0, 4, n, dtype=np.uint8))
        enc = sp.lzss_encode(data)
        assert sp.lzss_decode(enc) == data
        assert sp.lzss_compress_len(data) == len(enc)


def test_lzss_known_encoding():
    assert sp.lzss_encode(b"abcabcabc") == bytes([0x08, 0x61, 0x62, 0x63, 0x00, 0x04, 0x03])


def test_lzss_decode_error_is_value_error():
    with pytest.raises(ValueError):
        sp.lzss_decode(bytes([0x01, 0x00]))


def test_lz76_small_cases():
    assert sp.lz76_complexity(b"") == 0
    assert sp.lz76_complexity(bytes(10000)) <= 3
    assert sp.lz76_complexity(bytes([0, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 0, 1])) == 6


def test_idx_parsing():
    pixels = np.arange(2 * 784, dtype=np.uint8).reshape(2, 784)
    blob = struct.pack(">IIII", 0x803, 2, 28, 28) + pixels.tobytes()
    parsed = sp.parse_idx_images(blob)
    assert parsed.shape == (2, 784)
    assert np.array_equal(parsed, pixels.astype(float))
    labels = sp.parse_idx_labels(struct.pack(">II", 0x801, 3) + bytes([7, 0, 9]))
    assert labels.tolist() == [7, 0, 9]
    with pytest.raises(ValueError, match="magic"):
        sp.parse_idx_images(struct.pack(">IIII", 0x801, 2, 28, 28))


def test_normalize_endpoints():
    assert sp.normalize(0) == -1.0
    assert sp.normalize(255) == 1.0


def test_mlp_forward_matches_numpy():
    net = sp.build_mlp([16, 8], "tanh", seed=5)
    x = np.random.default_rng(0).uniform(-1, 1, (4, 784))
    w = net.weights
    assert [a.shape for a in w] == [(16, 784), (8, 16), (10, 8)]
    logits = net.forward(x)
    h = np.tanh(x @ w[0].T)
    h = np.tanh(h @ w[1].T)
    np.testing.assert_allclose(logits, h @ w[2].T, rtol=1e-12, atol=1e-12)
    assert net.predict(x).tolist() == np.argmax(logits, axis=1).tolist()


def test_sensitivity_scales_linearly():
    net = sp.build_mlp([8], "sigmoid", seed=2)
    x = np.random.default_rng(4).uniform(-1, 1, (20, 784))
    labels = [0] * 20
    m1, p1 = net.sensitivity(x, labels, epsilon=1e-5, n_samples=20, seed=9)
    m2, p2 = net.sensitivity(x, labels, epsilon=2e-5, n_samples=20, seed=9)
    assert len(p1) == 20 and m1 > 0
    np.testing.assert_allclose(np.array(p2) / np.array(p1), 2.0, rtol=1e-6)


def test_default_experiments():
    configs = sp.default_experiments()
    assert [c["index"] for c in configs] == list(range(1, 8))
    assert configs[5]["lr"] == pytest.approx(0.1)


def test_cli_usage_error_exit_code():
    assert sp.main(["run", "--parallelism", "0"]) == 2


def test_module_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "simplicity_probe", "--help"],
                         capture_output=True, text=True, env=os.environ.copy())
    assert out.returncode == 0
    assert "run" in out.stdout


def _mnist_dir():
    d = os.environ.get("SIMPLICITY_PROBE_DATA")
    if d and Path(d, "t10k-labels-idx1-ubyte").exists():
        return d
    return None


@pytest.mark.skipif(_mnist_dir() is None, reason="MNIST data not available")
def test_real_labels_load():
    labels = sp.parse_idx_labels(Path(_mnist_dir(), "t10k-labels-idx1-ubyte").read_bytes())
    assert labels.shape == (10000,)
    assert int((labels == 1).sum()) == 1135

