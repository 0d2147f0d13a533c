"""Online detection of opponent policy switches in multi-agent grid worlds."""
