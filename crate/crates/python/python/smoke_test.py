"""Quick end-to-end check of the extension module.

Build and install first:  maturin develop --release  (from crates/python)
"""

import math
import os
import tempfile

import pcfilter


def main():
    clean, normals = pcfilter.make_shape("cube", 50)
    assert len(clean) == 15000 and len(normals) == 15000

    noisy = pcfilter.add_noise(clean, 0.005, seed=3)
    assert noisy == pcfilter.add_noise(clean, 0.005, seed=3)

    est = pcfilter.estimate_normals(noisy)
    assert all(abs(math.sqrt(x * x + y * y + z * z) - 1.0) < 1e-6 for x, y, z in est)

    filtered, out_normals, diagnostics = pcfilter.filter(noisy, k=30, mu=0.3, iterations=5)
    assert len(filtered) == len(noisy) == len(out_normals)
    assert len(diagnostics) == 5 and "nn_distance_stddev" in diagnostics[0]

    before = pcfilter.chamfer_distance(clean, noisy)
    after = pcfilter.chamfer_distance(clean, filtered)
    mse = pcfilter.mean_square_error(clean, filtered)
    print(f"chamfer {before:.3e} -> {after:.3e}, mse {mse:.3e}")
    assert after < before

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "out.ply")
        pcfilter.write_cloud(path, filtered, out_normals)
        back, back_normals = pcfilter.read_cloud(path)
        assert len(back) == len(filtered) and back_normals is not None
        assert max(abs(a - b) for p, q in zip(back, filtered) for a, b in zip(p, q)) < 1e-6

    try:
        pcfilter.make_shape("torus", 4)
    except ValueError as e:
        assert "torus" in str(e)
    else:
        raise AssertionError("unknown shape accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
