"""Builds and tests untrusted submissions inside an isolation provider."""
