"""pinchlab: algebraic curvature tensors, isotropic-curvature cones and sphere-theorem pinching checks."""

__version__ = "0.1.0"
