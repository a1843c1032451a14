"""The translation objective as pure arithmetic: contrastive, adversarial
and identity terms.

Shows how the InfoNCE loss reacts to query/positive alignment and
temperature, how the patchwise multi-layer sum behaves on matched versus
shuffled feature stacks, and how the discriminator/generator losses move as
score maps saturate. Ends with the weighted full objective.

Run: python demos/04_contrastive_loss.py
"""

import math

import numpy as np

from uwrestore import (
    FeatureStack,
    ObjectiveWeights,
    full_objective,
    gan_loss_d,
    gan_loss_g,
    identity_l1,
    info_nce,
    patch_nce,
)
from uwrestore.losses import ENCODER_TAP_NAMES


def main():
    rng = np.random.default_rng(3)

    print("=== InfoNCE: one query, one positive, 255 negatives ===")
    dim = 257
    basis = np.eye(dim)
    negatives = basis[2:]
    uniform = info_nce(basis[0], basis[1], negatives, tau=0.07)
    aligned = info_nce(basis[0], basis[0], negatives, tau=0.07)
    print(f"query orthogonal to everything : {uniform:.4f}  (= ln 256 = {math.log(256):.4f})")
    print(f"query == positive              : {aligned:.3e} (near zero)")
    for tau in (1.0, 0.3, 0.07):
        # Mild alignment, sim+ = 0.6: smaller tau sharpens the contrast.
        pos = 0.6 * basis[0] + math.sqrt(1 - 0.36) * basis[1]
        print(f"sim+ = 0.6 at tau = {tau:<4}: loss = {info_nce(basis[0], pos, negatives, tau):.4f}")

    print()
    print("=== Patchwise multi-layer loss over encoder tap points ===")
    layout = [(256, 16)] * len(ENCODER_TAP_NAMES)
    stacks = tuple(rng.normal(size=shape) for shape in layout)
    matched = FeatureStack(stacks, ENCODER_TAP_NAMES)
    # A faithful translation keeps each patch's feature close to its source;
    # shuffling the locations destroys the correspondence.
    noisy = FeatureStack(
        tuple(mat + 0.1 * rng.normal(size=mat.shape) for mat in stacks), ENCODER_TAP_NAMES
    )
    shuffled = FeatureStack(
        tuple(mat[rng.permutation(mat.shape[0])] for mat in stacks), ENCODER_TAP_NAMES
    )
    print(f"output ~= input (faithful)     : {patch_nce(matched, noisy):10.4f}")
    print(f"output = shuffled input        : {patch_nce(matched, shuffled):10.4f}")
    per_term = math.log(256)  # chance level for 255 negatives
    total_terms = sum(s for s, _ in layout)
    print(f"chance level would be ~ln(256) * {total_terms} = {per_term * total_terms:10.4f}")

    print()
    print("=== Adversarial losses over a 62x62 patch score map ===")
    for d_fake in (0.1, 0.5, 0.9):
        fake = np.full((62, 62), d_fake)
        real = np.full((62, 62), 0.8)
        print(f"D(fake) = {d_fake}: discriminator loss {gan_loss_d(real, fake):7.4f}, "
              f"generator loss {gan_loss_g(fake):7.4f}")

    print()
    print("=== Full objective ===")
    weights = ObjectiveWeights()  # (1, 1, 10)
    gan = gan_loss_g(np.full((62, 62), 0.4))
    nce = patch_nce(matched, noisy)
    idt = identity_l1(np.full((8, 8, 3), 0.52), np.full((8, 8, 3), 0.5))
    total = full_objective(gan, nce, idt, weights)
    print(f"gan {gan:.4f} + nce {nce:.4f} + 10 * idt {idt:.4f} = {total:.4f}")


if __name__ == "__main__":
    main()
