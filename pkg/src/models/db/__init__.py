"""Animation library storage."""
