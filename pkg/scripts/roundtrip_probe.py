"""Round-trip fidelity probe for the distort -> rectify pipeline.

Measures PSNR(source, rectify(distort(source, k), k)) on the central
50%-area crop across scene kinds and edge distortion levels. This is the
oracle used to validate the acceptance threshold before freezing it: it
separates interpolation loss (smooth scenes) from resampling of hard edges
(checker/lines) and from geometric field loss near the crop corners, which
under the division model starts once delta(1) exceeds sqrt(2).

Run: python scripts/roundtrip_probe.py [--size 256]
"""

import argparse

import numpy as np

from ordcal.camera import DistortionCoefficients, Model
from ordcal.imageops import central_crop
from ordcal.metrics import psnr
from ordcal.rectify import rectify_image
from ordcal.synth import distort_image, make_scene


def probe(size: int) -> None:
    rng = np.random.default_rng(12345)
    deltas = (1.05, 1.2, 1.35, 1.414, 1.45, 1.5)
    print(f"{'scene':10s} " + " ".join(f"d1={d:<6g}" for d in deltas))
    for kind in ("smooth", "lines", "checker"):
        scene = make_scene(rng, size, size, kind)
        row = []
        for delta_edge in deltas:
            # single-coefficient division model with delta(1) = delta_edge
            k = DistortionCoefficients(
                Model.DIVISION, (delta_edge - 1.0,), 0.5 * np.hypot(size, size)
            )
            distorted = distort_image(scene, k)
            restored = rectify_image(distorted, k)
            value = psnr(central_crop(scene, 0.5), central_crop(restored, 0.5))
            row.append(value)
        print(f"{kind:10s} " + " ".join(f"{v:9.2f}" for v in row))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    args = parser.parse_args()
    probe(args.size)


if __name__ == "__main__":
    main()
