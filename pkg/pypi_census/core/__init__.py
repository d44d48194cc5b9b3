"""Registry access, archive reading, extraction, classification and statistics."""
