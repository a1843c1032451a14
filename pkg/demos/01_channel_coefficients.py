"""From water optics to per-channel attenuation coefficients.

Walks the measurement chain end to end: a downwelling irradiance profile
gives the diffuse attenuation coefficient (slope of log-irradiance with
depth); a wavelength-resolved attenuation curve weighted by the camera's
per-channel quantum efficiency collapses into one coefficient per RGB
channel. Those three numbers drive everything in the imaging model.

Run: python demos/01_channel_coefficients.py
"""

import numpy as np

from uwrestore import (
    IrradianceProfile,
    channel_coefficients,
    kd_depth_average,
    kd_from_profile,
    load_camera_response_csv,
    load_curve_csv,
)
from uwrestore.dataset import DATA_DIR


def main():
    print("=== Diffuse attenuation from an irradiance depth profile ===")
    # Synthetic profile: light decaying at 0.32 per metre, measured at six
    # depths. The slope estimator recovers the rate from any sample pair.
    k_true = 0.32
    depths = np.array([0.5, 1.5, 3.0, 4.5, 6.0, 7.2])
    profile = IrradianceProfile(depths, 14.0 * np.exp(-k_true * depths))
    kd = kd_from_profile(profile, 0, len(depths) - 1)
    print(f"true decay rate           : {k_true:.4f} 1/m")
    print(f"recovered Kd (top~bottom) : {kd:.4f} 1/m")

    # Depth-averaged Kd over the water column, here for a column where the
    # coefficient drifts linearly with depth.
    samples = [(z, 0.25 + 0.02 * z) for z in np.linspace(0.0, 8.0, 17)]
    avg = kd_depth_average(samples, 7.2)
    print(f"depth-averaged Kd to 7.2 m: {avg:.4f} 1/m (analytic {0.25 + 0.02 * 3.6:.4f})")

    print()
    print("=== Response-weighted channel coefficients ===")
    beta = load_curve_csv(DATA_DIR / "attenuation_demo.csv")
    resp_r, resp_g, resp_b = load_camera_response_csv(DATA_DIR / "camera_response_demo.csv")
    p = channel_coefficients(beta, resp_r, resp_g, resp_b)
    print("demo attenuation curve spans "
          f"{beta.support[0]:.0f}-{beta.support[1]:.0f} nm, "
          f"beta in [{beta.values.min():.3f}, {beta.values.max():.3f}] 1/m")
    print(f"p_r = {p.p_r:.4f} 1/m   (red response sits on the most attenuated band)")
    print(f"p_g = {p.p_g:.4f} 1/m")
    print(f"p_b = {p.p_b:.4f} 1/m   (blue light survives best -> underwater green-blue cast)")
    assert p.p_r > p.p_g > p.p_b


if __name__ == "__main__":
    main()
