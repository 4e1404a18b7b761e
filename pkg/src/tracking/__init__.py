"""Detection decoding, suppression, assignment and track lifecycle."""
