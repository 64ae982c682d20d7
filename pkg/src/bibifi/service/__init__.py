"""Durable contest state, phase machine, and the HTTP API."""
