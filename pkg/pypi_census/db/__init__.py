"""Census store: models, schema versioning and repositories."""
