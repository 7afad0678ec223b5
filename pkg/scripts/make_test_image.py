"""Write the 128x128 grayscale test image used by the robustness checks.

Source is scikit-image's public-domain ``camera`` picture, area-downsampled.
Only needed to regenerate tests/data/camera128.pgm.

    python scripts/make_test_image.py [OUT]
"""

import sys

import numpy as np
from skimage import data, transform

from mtjsc.kernels import PixelGrid
from mtjsc.pgm import write_pgm

out = sys.argv[1] if len(sys.argv) > 1 else "tests/data/camera128.pgm"
img = transform.resize(data.camera(), (128, 128), anti_aliasing=True)
write_pgm(out, PixelGrid(np.clip(img, 0, 1)))
print(out)
