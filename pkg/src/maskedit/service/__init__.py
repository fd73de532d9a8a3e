"""HTTP service wrapping the core editing package."""
