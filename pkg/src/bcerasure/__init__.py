"""Error and erasure exponents for the broadcast channel with degraded message sets."""
