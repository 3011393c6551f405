"""Service layer: numerics, state families, optimization and experiments."""
