"""nimbus: desk-scale volumetric cloud reconstruction.

A numpy-based toolkit combining a latent diffusion prior over a monoplanar
neural representation with a physically based differentiable volume
renderer, for single-view reconstruction, super-resolution, inpainting,
transmittance recovery and latent interpolation of cloud-like density
fields.
"""

__version__ = "0.1.0"
