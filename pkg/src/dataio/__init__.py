"""MOTChallenge files, frame decoding and synthetic sequences."""
